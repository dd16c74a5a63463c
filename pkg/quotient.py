# quotient.py
"""
Bisimulation for Kripke structures
- bisim_partition(): splitter-based partition refinement from the label partition
- quotient_structure(): one state per block, labels and edges lifted
- distinguish(): bounded search for a formula separating two states,
  enumerated by nesting depth and deduplicated by satisfaction vector
"""

import logging
from collections import deque
from typing import Callable, Dict, List, Optional, Set, Tuple, Union

from pydantic import BaseModel, ConfigDict, model_validator

from checker import eval_au, eval_eu, eval_gfa, eval_gfe, eval_ua, eval_ue
from errors import CapExceeded, SameStateError
from formula import (
    TRUE,
    Atom,
    ExistsNext,
    ExistsUntil,
    ForallNext,
    ForallUntil,
    Formula,
    Or,
    SeqSync,
    UntilExists,
    UntilForall,
    neg,
)
from kripke import KripkeStructure, StateSet, pre_exists, pre_forall
from settings import get_settings

logger = logging.getLogger(__name__)


class Partition(BaseModel):
    """Blocks ordered by their smallest member; members ascending."""

    model_config = ConfigDict(frozen=True)

    block_of: Tuple[int, ...]
    blocks: Tuple[Tuple[int, ...], ...]

    @model_validator(mode="after")
    def _check_cover(self) -> "Partition":
        seen: Set[int] = set()
        for b, members in enumerate(self.blocks):
            if not members:
                raise ValueError(f"block {b} is empty")
            for i in members:
                if i in seen:
                    raise ValueError(f"state {i} is in two blocks")
                if not 0 <= i < len(self.block_of) or self.block_of[i] != b:
                    raise ValueError(f"state {i} disagrees with block_of")
                seen.add(i)
        if len(seen) != len(self.block_of):
            raise ValueError("blocks do not cover all states")
        return self

    @classmethod
    def from_blocks(cls, blocks, size: int) -> "Partition":
        ordered = sorted((tuple(sorted(b)) for b in blocks), key=lambda b: b[0])
        block_of = [0] * size
        for b, members in enumerate(ordered):
            for i in members:
                block_of[i] = b
        return cls(block_of=tuple(block_of), blocks=tuple(ordered))

    @classmethod
    def identity(cls, size: int) -> "Partition":
        return cls.from_blocks([[i] for i in range(size)], size)

    @property
    def count(self) -> int:
        return len(self.blocks)

    def same_block(self, i: int, j: int) -> bool:
        return self.block_of[i] == self.block_of[j]


class _Refinement:
    """Blocks as sets keyed by integer id; refine() splits every block a splitter cuts."""

    def __init__(self, groups):
        self.sets: Dict[int, Set[int]] = {}
        self.partition: Dict[int, int] = {}
        self._next = 0
        for group in groups:
            self._add(set(group))

    def _add(self, members: Set[int]) -> int:
        bid = self._next
        self._next += 1
        self.sets[bid] = members
        for x in members:
            self.partition[x] = bid
        return bid

    def refine(self, splitter: Set[int]) -> List[Tuple[int, int]]:
        """Split each block A into A & S and A - S; return (new id, old id) pairs."""
        hit: Dict[int, Set[int]] = {}
        for x in splitter:
            hit.setdefault(self.partition[x], set()).add(x)
        output = []
        for bid, inside in hit.items():
            block = self.sets[bid]
            if inside != block:
                block -= inside
                output.append((self._add(inside), bid))
        return output


def bisim_partition(kripke: KripkeStructure) -> Partition:
    """Coarsest partition where same-block states share labels and successor blocks."""
    by_label: Dict[frozenset, List[int]] = {}
    for i, label in enumerate(kripke.labels):
        by_label.setdefault(label, []).append(i)
    refinement = _Refinement(by_label.values())

    queue = deque(refinement.sets)
    queued = set(queue)
    rounds = 0
    while queue:
        splitter = queue.popleft()
        queued.discard(splitter)
        rounds += 1
        members = StateSet.of(refinement.sets[splitter], kripke.size)
        for new, old in refinement.refine(set(pre_exists(kripke, members))):
            for bid in (new, old):
                if bid not in queued:
                    queue.append(bid)
                    queued.add(bid)
    partition = Partition.from_blocks(refinement.sets.values(), kripke.size)
    logger.debug("bisimulation: %d blocks after %d splitter rounds", partition.count, rounds)
    return partition


def is_stable(kripke: KripkeStructure, partition: Partition) -> bool:
    """Same-block states have equal labels and equal sets of successor blocks."""
    for members in partition.blocks:
        signatures = {
            (kripke.labels[i], frozenset(partition.block_of[j] for j in kripke.successors[i]))
            for i in members
        }
        if len(signatures) > 1:
            return False
    return True


def quotient_structure(
    kripke: KripkeStructure, partition: Partition
) -> Tuple[KripkeStructure, Dict[str, str]]:
    """Each block becomes a state named after its first member."""
    names = [kripke.states[members[0]] for members in partition.blocks]
    successors = []
    for members in partition.blocks:
        targets = {partition.block_of[j] for i in members for j in kripke.successors[i]}
        successors.append(tuple(sorted(targets)))
    mapping = {kripke.states[i]: names[partition.block_of[i]] for i in range(kripke.size)}
    init = mapping[kripke.init] if kripke.init is not None else None
    quotient = KripkeStructure(
        states=tuple(names),
        props=kripke.props,
        labels=tuple(kripke.labels[members[0]] for members in partition.blocks),
        successors=tuple(successors),
        init=init,
    )
    return quotient, mapping


# ---------------------------------------------------------------- distinguisher


class _Classes:
    """Semantic classes found so far: one formula per distinct satisfaction vector."""

    def __init__(self, t: int, u: int, cap: int):
        self.t, self.u, self.cap = t, u, cap
        self.entries: List[Tuple[Formula, StateSet, int]] = []
        self._seen: Set[int] = set()

    def add(self, phi: Formula, states: StateSet, level: int) -> Optional[Formula]:
        """Record a new class; return phi if it separates t and u."""
        if states.bits in self._seen:
            return None
        if len(self.entries) >= self.cap:
            raise CapExceeded("semantic classes", self.cap)
        self._seen.add(states.bits)
        self.entries.append((phi, states, level))
        if (self.t in states) != (self.u in states):
            return phi
        return None


Binary = Callable[[KripkeStructure, StateSet, StateSet], StateSet]


def _binary_ops() -> List[Tuple[type, Binary]]:
    return [
        (UntilForall, lambda k, a, b: eval_ua(k, a, b)[0]),
        (UntilExists, lambda k, a, b: eval_ue(k, a, b)[0]),
        (ForallUntil, eval_au),
        (ExistsUntil, eval_eu),
        (Or, lambda k, a, b: a | b),
    ]


def distinguish(
    kripke: KripkeStructure,
    t: Union[int, str],
    u: Union[int, str],
    max_depth: int,
    allow_next: bool = True,
    extended: bool = False,
    cap: Optional[int] = None,
) -> Optional[Formula]:
    """
    Shallowest formula (in enumeration order) true at exactly one of t, u.
    None means nothing up to max_depth separates them, not that they are
    indistinguishable. extended adds GFE/GFA to the operators.
    """
    if isinstance(t, str):
        t = kripke.state_index(t)
    if isinstance(u, str):
        u = kripke.state_index(u)
    if t == u:
        raise SameStateError(kripke.states[t])
    if cap is None:
        cap = get_settings().distinguish_class_cap

    classes = _Classes(t, u, cap)
    for prop in kripke.props:
        found = classes.add(Atom(name=prop), kripke.label_set(prop), 0)
        if found is not None:
            return found
    found = classes.add(TRUE, kripke.all_states(), 0)
    if found is not None:
        return found

    for depth in range(1, max_depth + 1):
        older = list(classes.entries)
        frontier = [(phi, s) for phi, s, level in older if level == depth - 1]

        for phi, s in frontier:
            candidates = [(neg(phi), s.complement())]
            if allow_next:
                candidates.append((ExistsNext(arg=phi), pre_exists(kripke, s)))
                candidates.append((ForallNext(arg=phi), pre_forall(kripke, s)))
            if extended:
                candidates.append((SeqSync(seq=("G", "F"), quant="E", arg=phi), eval_gfe(kripke, s)))
                candidates.append(
                    (SeqSync(seq=("G", "F"), quant="A", arg=phi), eval_gfa(kripke, s)[0])
                )
            for candidate, states in candidates:
                found = classes.add(candidate, states, depth)
                if found is not None:
                    return found

        for node_type, op in _binary_ops():
            for left, s1, l1 in older:
                for right, s2, l2 in older:
                    if max(l1, l2) != depth - 1:
                        continue
                    found = classes.add(node_type(left=left, right=right), op(kripke, s1, s2), depth)
                    if found is not None:
                        return found
        logger.debug("distinguish: depth %d, %d semantic classes", depth, len(classes.entries))
    return None
