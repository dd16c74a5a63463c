# conftest.py
"""
Shared pytest fixtures
- the figure structures under data/
- small hand-built structures
- seeded random corpora for the property suites
"""

from pathlib import Path

import pytest
from hypothesis import strategies as st

from formula import (
    TRUE,
    And,
    Atom,
    ExistsNext,
    ExistsUntil,
    FalseConst,
    ForallNext,
    ForallUntil,
    Implies,
    Not,
    Or,
    SeqSync,
    UntilExists,
    UntilForall,
)
from kripke import from_edges
from kripke_io import load_kripke
from oracle import trial_structure

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def data_dir():
    return DATA_DIR


@pytest.fixture
def fig4():
    return load_kripke(DATA_DIR / "fig4.kripke")


@pytest.fixture
def fig5a():
    return load_kripke(DATA_DIR / "fig5a.kripke")


@pytest.fixture
def fig5b():
    return load_kripke(DATA_DIR / "fig5b.kripke")


@pytest.fixture
def fig6():
    return load_kripke(DATA_DIR / "fig6.kripke")


@pytest.fixture
def two_cycle():
    """a (q) <-> b"""
    return from_edges(["a", "b"], {"a": ["q"]}, [("a", "b"), ("b", "a")], props=["q"])


@pytest.fixture
def q_loop():
    return from_edges(["a"], {"a": ["q"]}, [("a", "a")], props=["q"])


@pytest.fixture
def branching():
    """
    s0 splits into two branches that both reach q at depth 3; p sits at
    depth 1 on the left branch and at depth 2 on the right one.
    """
    return from_edges(
        ["s0", "a1", "a2", "a3", "b1", "b2", "b3"],
        {"s0": ["p"], "a1": ["p"], "a3": ["q"], "b2": ["p"], "b3": ["q"]},
        [
            ("s0", "a1"), ("s0", "b1"),
            ("a1", "a2"), ("a2", "a3"), ("a3", "a3"),
            ("b1", "b2"), ("b2", "b3"), ("b3", "b3"),
        ],
        init="s0",
        props=["p", "q"],
    )


def random_corpus(count: int, max_states: int, seed: int = 7):
    return [trial_structure(seed, i, max_states) for i in range(count)]


@pytest.fixture(scope="session")
def corpus():
    """500 random structures, at most 5 states over p and q."""
    return random_corpus(500, 5)


# ---------------------------------------------------------------- hypothesis

atoms = st.sampled_from(["p", "q", "r"]).map(lambda name: Atom(name=name))
leaves = st.one_of(atoms, st.just(TRUE), st.just(FalseConst()))
sync_sequences = st.lists(st.sampled_from(["F", "G"]), min_size=1, max_size=4).map(tuple)


def _extend(children):
    unary = st.one_of(
        st.builds(lambda a: Not(arg=a), children),
        st.builds(lambda a: ExistsNext(arg=a), children),
        st.builds(lambda a: ForallNext(arg=a), children),
        st.builds(
            lambda a, seq, quant: SeqSync(arg=a, seq=seq, quant=quant),
            children,
            sync_sequences,
            st.sampled_from(["E", "A"]),
        ),
    )
    binary = st.builds(
        lambda kind, left, right: kind(left=left, right=right),
        st.sampled_from(
            [Or, And, Implies, ExistsUntil, ForallUntil, UntilExists, UntilForall]
        ),
        children,
        children,
    )
    return st.one_of(unary, binary)


formulas = st.recursive(leaves, _extend, max_leaves=6)
