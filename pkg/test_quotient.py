# test_quotient.py
"""
Tests for bisimulation, quotients and the bounded distinguisher
"""

import itertools

import pytest

from checker import check
from conftest import random_corpus
from errors import CapExceeded
from formula import Atom, SeqSync, parse
from kripke import disjoint_union, from_edges
from oracle import DEFAULT_TEMPLATES
from quotient import (
    Partition,
    bisim_partition,
    distinguish,
    is_stable,
    quotient_structure,
)


def test_complete_graph_one_block():
    names = ["a", "b", "c"]
    kripke = from_edges(names, {}, [(s, t) for s in names for t in names])
    assert bisim_partition(kripke).count == 1


def test_fig5b_t1_u1_not_bisimilar(fig5b):
    partition = bisim_partition(fig5b)
    assert not partition.same_block(fig5b.state_index("t1"), fig5b.state_index("u1"))
    assert is_stable(fig5b, partition)


def test_isomorphic_self_loops_merge(q_loop):
    union = disjoint_union(q_loop, q_loop)
    partition = bisim_partition(union)
    assert partition.blocks == ((0, 1),)


def test_identity_partition_quotient(fig5a):
    quotient, mapping = quotient_structure(fig5a, Partition.identity(fig5a.size))
    assert quotient.states == fig5a.states
    assert quotient.labels == fig5a.labels
    assert quotient.successors == fig5a.successors
    assert mapping == {name: name for name in fig5a.states}


def test_isomorphic_components_halve(two_cycle):
    union = disjoint_union(two_cycle, two_cycle)
    quotient, mapping = quotient_structure(union, bisim_partition(union))
    assert quotient.size == 2
    assert mapping["R_a"] == "L_a"
    assert mapping["R_b"] == "L_b"
    assert quotient.init is None


def test_quotient_init_follows_its_block():
    loops = from_edges(["a", "b"], {}, [("a", "a"), ("b", "b")], init="b")
    quotient, mapping = quotient_structure(loops, bisim_partition(loops))
    assert quotient.states == ("a",)
    assert mapping["b"] == "a"
    assert quotient.init == "a"


def test_partition_validation():
    with pytest.raises(ValueError):
        Partition(block_of=(0, 0), blocks=((0,),))
    with pytest.raises(ValueError):
        Partition(block_of=(0, 1), blocks=((0, 1),))


def test_quotient_soundness():
    templates = [parse(t) for t in DEFAULT_TEMPLATES]
    for kripke in random_corpus(200, 5, seed=41):
        quotient, mapping = quotient_structure(kripke, bisim_partition(kripke))
        assert quotient.size <= kripke.size
        for phi in templates:
            original = check(kripke, phi)
            reduced = check(quotient, phi)
            for name in kripke.states:
                assert original.holds(name) == reduced.holds(mapping[name])


def test_partition_is_coarsest():
    for kripke in random_corpus(60, 6, seed=43):
        partition = bisim_partition(kripke)
        assert is_stable(kripke, partition)
        for b1, b2 in itertools.combinations(range(partition.count), 2):
            merged = [
                members
                for b, members in enumerate(partition.blocks)
                if b not in (b1, b2)
            ]
            merged.append(partition.blocks[b1] + partition.blocks[b2])
            coarser = Partition.from_blocks(merged, kripke.size)
            assert not is_stable(kripke, coarser)


def test_same_block_pairs_never_distinguished():
    for kripke in random_corpus(40, 5, seed=47):
        partition = bisim_partition(kripke)
        for members in partition.blocks:
            for t, u in itertools.combinations(members, 2):
                assert distinguish(kripke, t, u, 1) is None


def test_distinguish_fig5b_with_next(fig5b):
    found = distinguish(fig5b, "t1", "u1", 3)
    assert found is not None
    assert check(fig5b, found).sat == check(fig5b, parse("AX AX p")).sat


def test_distinguish_fig5b_without_next(fig5b):
    assert distinguish(fig5b, "t1", "u1", 3, allow_next=False) is None


def test_distinguish_fig5b_extended(fig5b):
    found = distinguish(fig5b, "t1", "u1", 3, allow_next=False, extended=True)
    assert found == SeqSync(seq=("G", "F"), quant="A", arg=Atom(name="p"))


def test_distinguish_fig5a_without_next(fig5a):
    found = distinguish(fig5a, "t1", "u1", 3, allow_next=False)
    assert found is not None
    assert found.depth <= 2
    assert check(fig5a, found).sat == check(fig5a, parse("[p UA !p]")).sat


def test_distinguish_by_label(fig5a):
    assert distinguish(fig5a, "t1", "t4", 0) == Atom(name="p")


def test_distinguish_guards(fig5a):
    with pytest.raises(ValueError):
        distinguish(fig5a, "t1", "t1", 2)
    with pytest.raises(CapExceeded):
        distinguish(fig5a, "t1", "u1", 3, cap=3)
