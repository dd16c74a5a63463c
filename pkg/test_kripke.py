# test_kripke.py
"""
Tests for Kripke structures and the graph machinery
"""

import itertools

import numpy as np
import pytest
from pydantic import ValidationError

from conftest import random_corpus
from errors import CapExceeded, TotalityError, UnknownStateError
from kripke import (
    BoolMatrix,
    KripkeStructure,
    StateSet,
    covering_successors,
    disjoint_union,
    exact_step_reach,
    from_edges,
    n_stuttering,
    random_kripke,
    scc_decomposition,
    subset_sequence,
    successors,
)
from reductions import CnfFormula, cnf_to_favorall


def test_successors_of_single_state(two_cycle):
    assert successors(two_cycle, two_cycle.singleton("a")) == two_cycle.singleton("b")


def test_successors_of_empty_set(two_cycle):
    assert successors(two_cycle, two_cycle.empty_set()) == two_cycle.empty_set()


def test_successors_fig6_branch(fig6):
    assert fig6.names(successors(fig6, fig6.singleton("uI"))) == ["u1", "v1"]


def test_successors_is_union_of_lists():
    for kripke in random_corpus(40, 6, seed=3):
        for bits in range(1 << kripke.size):
            s = StateSet(bits, kripke.size)
            expected = {j for i in s for j in kripke.successors[i]}
            assert set(successors(kripke, s)) == expected


def test_exact_step_reach_zero_steps(fig5a):
    start = fig5a.states_of(["t1", "u2"])
    assert exact_step_reach(fig5a, start, 0) == start


def test_exact_step_reach_huge_even_count(two_cycle):
    start = two_cycle.singleton("a")
    assert exact_step_reach(two_cycle, start, 2**20) == start
    assert exact_step_reach(two_cycle, start, 2**20 + 1) == two_cycle.singleton("b")


def test_exact_step_reach_on_clause_cycle():
    kripke, _ = cnf_to_favorall(CnfFormula.of([[1, 2, -3]]))
    origin = kripke.singleton("c1_0")
    for multiple in range(1, 5):
        assert exact_step_reach(kripke, origin, 30 * multiple) == origin
    for n in range(1, 30):
        assert exact_step_reach(kripke, origin, n) == kripke.singleton(f"c1_{n}")


def test_exact_step_reach_matches_iteration():
    for kripke in random_corpus(100, 6, seed=11):
        start = kripke.singleton(0)
        current = start
        for n in range(65):
            assert exact_step_reach(kripke, start, n) == current
            current = successors(kripke, current)


def test_exact_step_reach_rejects_negative(two_cycle):
    with pytest.raises(ValueError):
        exact_step_reach(two_cycle, two_cycle.singleton("a"), -1)


def test_matrix_products_follow_successor_images(fig6):
    m = fig6.matrix
    product = BoolMatrix.identity(fig6.size)
    for n in range(8):
        for t in range(fig6.size):
            row = StateSet.from_vector(product.data[t])
            assert row == exact_step_reach(fig6, fig6.singleton(t), n)
        product = product @ m


def test_subset_sequence_two_cycle(two_cycle):
    trace = subset_sequence(two_cycle, two_cycle.singleton("a"))
    assert [two_cycle.names(s) for s in trace.sequence] == [["a"], ["b"]]
    assert (trace.mu, trace.period) == (0, 2)


def test_subset_sequence_fixpoint(q_loop):
    trace = subset_sequence(q_loop, q_loop.singleton("a"))
    assert len(trace.sequence) == 1
    assert (trace.mu, trace.period) == (0, 1)


def test_subset_sequence_fig6(fig6):
    trace = subset_sequence(fig6, fig6.singleton("uI"))
    assert (trace.mu, trace.period) == (1, 6)
    assert fig6.names(trace.at(1)) == ["u1", "v1"]
    assert trace.at(7) == trace.at(1)
    assert trace.at(100) == trace.at(1 + (100 - 1) % 6)


def test_subset_sequence_closes_on_mu():
    for kripke in random_corpus(60, 6, seed=5):
        trace = subset_sequence(kripke, kripke.singleton(0))
        assert successors(kripke, trace.sequence[-1]) == trace.sequence[trace.mu]
        assert len(set(trace.sequence)) == len(trace.sequence)


def test_subset_sequence_cap(fig6):
    with pytest.raises(CapExceeded):
        subset_sequence(fig6, fig6.singleton("uI"), cap=3)


def test_covering_successors_forced_choice(fig5a):
    assert list(covering_successors(fig5a, fig5a.singleton("t1"))) == [fig5a.singleton("t2")]


def test_covering_successors_all_subsets_of_branch(fig5a):
    found = {tuple(fig5a.names(s)) for s in covering_successors(fig5a, fig5a.singleton("u1"))}
    assert found == {("t2",), ("u2",), ("t2", "u2")}


def test_covering_successors_shared_target():
    kripke = from_edges(
        ["a", "b", "c", "d"],
        {},
        [("a", "c"), ("b", "c"), ("b", "d"), ("c", "c"), ("d", "d")],
    )
    found = [kripke.names(s) for s in covering_successors(kripke, kripke.states_of(["a", "b"]))]
    assert found == [["c"], ["c", "d"]]


def test_covering_successors_exhaustive():
    for kripke in random_corpus(30, 5, seed=13):
        for bits in range(1, 1 << kripke.size):
            s = StateSet(bits, kripke.size)
            image = list(successors(kripke, s))
            if len(image) > 6:
                continue
            yielded = set(covering_successors(kripke, s))
            for r in range(1, len(image) + 1):
                for subset in itertools.combinations(image, r):
                    candidate = StateSet.of(subset, kripke.size)
                    covers = all(
                        any(j in candidate for j in kripke.successors[i]) for i in s
                    )
                    assert (candidate in yielded) == covers


def test_scc_self_loop(q_loop):
    sccs = scc_decomposition(q_loop)
    assert sccs.count == 1
    assert sccs.trivial == (False,)


def test_scc_chain_into_loop():
    kripke = from_edges(["a", "b"], {}, [("a", "b"), ("b", "b")])
    sccs = scc_decomposition(kripke)
    assert sccs.count == 2
    assert sccs.trivial == (True, False)


def test_scc_fig5a(fig5a):
    sccs = scc_decomposition(fig5a)
    t_components = {sccs.component[fig5a.state_index(n)] for n in ["t1", "t2", "t3", "t4"]}
    assert len(t_components) == 4
    assert fig5a.names(StateSet.of(sccs.nontrivial_states(), fig5a.size)) == ["t4", "u3"]


def test_stuttering_factor_one_is_identity(fig5a):
    stuttered = n_stuttering(fig5a, 1)
    assert stuttered.labels == fig5a.labels
    assert stuttered.successors == fig5a.successors
    assert stuttered.init == "t1_s1"


def test_stuttering_self_loop_becomes_cycle(q_loop):
    stuttered = n_stuttering(q_loop, 3)
    assert stuttered.states == ("a_s1", "a_s2", "a_s3")
    assert stuttered.successors == ((1,), (2,), (0,))
    assert all(label == frozenset({"q"}) for label in stuttered.labels)


def test_stuttering_doubles_fig4(fig4):
    stuttered = n_stuttering(fig4, 2)
    assert stuttered.size == 2 * fig4.size
    assert stuttered.props == fig4.props
    word = []
    current = stuttered.state_index("t1_s1")
    for _ in range(6):
        word.append("p" in stuttered.labels[current])
        (current,) = stuttered.successors[current]
    assert word == [True, True, False, False, True, True]


def test_random_kripke_is_deterministic():
    first = random_kripke(6, 0.3, ["p", "q"], 0.5, seed=42)
    second = random_kripke(6, 0.3, ["p", "q"], 0.5, seed=42)
    assert first.successors == second.successors
    assert first.labels == second.labels


def test_random_kripke_complete_graph():
    kripke = random_kripke(4, 1.0, ["p"], 0.5, seed=1)
    assert all(succ == (0, 1, 2, 3) for succ in kripke.successors)


def test_random_kripke_repairs_totality():
    kripke = random_kripke(5, 0.0, ["p"], 0.5, seed=1)
    assert all(len(succ) == 1 for succ in kripke.successors)


def test_from_edges_rejects_dead_end():
    with pytest.raises(TotalityError, match="totality violation"):
        from_edges(["a", "b"], {}, [("a", "b")])


def test_from_edges_rejects_unknown_state():
    with pytest.raises(UnknownStateError):
        from_edges(["a"], {}, [("a", "z")])


def test_structure_validation():
    with pytest.raises(ValidationError):
        KripkeStructure(
            states=("a",), props=(), labels=(frozenset({"p"}),), successors=((0,),)
        )
    with pytest.raises(ValidationError):
        KripkeStructure(states=("a",), props=(), labels=(frozenset(),), successors=((),))


def test_disjoint_union_offsets(two_cycle, q_loop):
    union = disjoint_union(two_cycle, q_loop)
    assert union.states == ("L_a", "L_b", "R_a")
    assert union.successors == ((1,), (0,), (2,))


def test_state_set_vector_roundtrip(fig6):
    s = fig6.states_of(["u1", "v3"])
    vector = s.to_vector()
    assert vector.dtype == np.bool_
    assert StateSet.from_vector(vector) == s
    assert s.complement() == fig6.all_states() - s
