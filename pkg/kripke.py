# kripke.py
"""
Kripke structures and the graph machinery the checker runs on
- KripkeStructure: validated, immutable <T, Pi, pi, R> with a total R
- StateSet: fixed-width bit-vector over the states of one structure
- BoolMatrix: transition matrix, boolean products
- Subset sequences S_{i+1} = R(S_i), powerset (covering) successors, SCCs
- n-stuttering and seeded random structures for fuzzing
"""

import logging
import re
from functools import cached_property
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from errors import CapExceeded, TotalityError, UnknownStateError
from settings import get_settings

logger = logging.getLogger(__name__)

NAME_RE = re.compile(r"[A-Za-z0-9_]+")


class StateSet:
    """A set of state indices of one structure, stored as an int bitmask."""

    __slots__ = ("bits", "width")

    def __init__(self, bits: int, width: int):
        self.bits = bits
        self.width = width

    @classmethod
    def empty(cls, width: int) -> "StateSet":
        return cls(0, width)

    @classmethod
    def full(cls, width: int) -> "StateSet":
        return cls((1 << width) - 1, width)

    @classmethod
    def of(cls, indices: Iterable[int], width: int) -> "StateSet":
        bits = 0
        for i in indices:
            if not 0 <= i < width:
                raise IndexError(f"state index {i} out of range for width {width}")
            bits |= 1 << i
        return cls(bits, width)

    def __iter__(self) -> Iterator[int]:
        bits = self.bits
        while bits:
            low = bits & -bits
            yield low.bit_length() - 1
            bits ^= low

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __bool__(self) -> bool:
        return self.bits != 0

    def __contains__(self, index: int) -> bool:
        return 0 <= index < self.width and (self.bits >> index) & 1 == 1

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StateSet):
            return NotImplemented
        return self.bits == other.bits and self.width == other.width

    def __hash__(self) -> int:
        return hash((self.bits, self.width))

    def __or__(self, other: "StateSet") -> "StateSet":
        return StateSet(self.bits | other.bits, self.width)

    def __and__(self, other: "StateSet") -> "StateSet":
        return StateSet(self.bits & other.bits, self.width)

    def __sub__(self, other: "StateSet") -> "StateSet":
        return StateSet(self.bits & ~other.bits, self.width)

    def complement(self) -> "StateSet":
        return StateSet(~self.bits & ((1 << self.width) - 1), self.width)

    def issubset(self, other: "StateSet") -> bool:
        return self.bits & ~other.bits == 0

    def intersects(self, other: "StateSet") -> bool:
        return self.bits & other.bits != 0

    def to_vector(self) -> np.ndarray:
        return np.array([(self.bits >> i) & 1 == 1 for i in range(self.width)], dtype=bool)

    @classmethod
    def from_vector(cls, vector: np.ndarray) -> "StateSet":
        bits = 0
        for i in np.flatnonzero(vector):
            bits |= 1 << int(i)
        return cls(bits, len(vector))

    def __repr__(self) -> str:
        return f"StateSet({sorted(self)})"


class KripkeStructure(BaseModel):
    """
    Finite Kripke structure. State order is file order; successor tuples are
    kept sorted so every iteration is in ascending index order.
    """

    model_config = ConfigDict(frozen=True)

    states: Tuple[str, ...]
    props: Tuple[str, ...]
    labels: Tuple[frozenset[str], ...]
    successors: Tuple[Tuple[int, ...], ...]
    init: Optional[str] = None

    @model_validator(mode="after")
    def _check_invariants(self) -> "KripkeStructure":
        n = len(self.states)
        if n == 0:
            raise ValueError("a Kripke structure needs at least one state")
        if len(set(self.states)) != n:
            raise ValueError("duplicate state names")
        for name in self.states:
            if not NAME_RE.fullmatch(name):
                raise ValueError(f"invalid state name '{name}'")
        if len(self.labels) != n or len(self.successors) != n:
            raise ValueError("labels and successors must have one entry per state")
        known = set(self.props)
        for name, label in zip(self.states, self.labels):
            unknown = label - known
            if unknown:
                raise ValueError(f"state {name} has undeclared propositions {sorted(unknown)}")
        dead = []
        for name, succ in zip(self.states, self.successors):
            if not succ:
                dead.append(name)
                continue
            if len(set(succ)) != len(succ):
                raise ValueError(f"state {name} lists a successor twice")
            if any(not 0 <= j < n for j in succ):
                raise ValueError(f"state {name} has a successor index out of range")
        if dead:
            raise ValueError(str(TotalityError(dead)))
        if self.init is not None and self.init not in set(self.states):
            raise ValueError(f"init state '{self.init}' is not a state")
        return self

    @property
    def size(self) -> int:
        return len(self.states)

    @cached_property
    def index(self) -> Dict[str, int]:
        return {name: i for i, name in enumerate(self.states)}

    @cached_property
    def succ_masks(self) -> Tuple[int, ...]:
        return tuple(sum(1 << j for j in succ) for succ in self.successors)

    @cached_property
    def pred_masks(self) -> Tuple[int, ...]:
        preds = [0] * self.size
        for i, succ in enumerate(self.successors):
            for j in succ:
                preds[j] |= 1 << i
        return tuple(preds)

    @cached_property
    def matrix(self) -> "BoolMatrix":
        return BoolMatrix.from_kripke(self)

    def state_index(self, name: str) -> int:
        try:
            return self.index[name]
        except KeyError:
            raise UnknownStateError(name) from None

    def empty_set(self) -> StateSet:
        return StateSet.empty(self.size)

    def all_states(self) -> StateSet:
        return StateSet.full(self.size)

    def singleton(self, state: int | str) -> StateSet:
        if isinstance(state, str):
            state = self.state_index(state)
        return StateSet.of([state], self.size)

    def states_of(self, names: Iterable[str]) -> StateSet:
        return StateSet.of((self.state_index(n) for n in names), self.size)

    def label_set(self, prop: str) -> StateSet:
        return StateSet.of((i for i, lab in enumerate(self.labels) if prop in lab), self.size)

    def names(self, s: StateSet) -> List[str]:
        return [self.states[i] for i in s]


def from_edges(
    states: Sequence[str],
    labels: Dict[str, Iterable[str]],
    edges: Iterable[Tuple[str, str]],
    init: Optional[str] = None,
    props: Optional[Sequence[str]] = None,
) -> KripkeStructure:
    """
    Build a structure from names. Duplicate edges collapse; a state with no
    outgoing edge raises TotalityError.
    """
    index = {name: i for i, name in enumerate(states)}
    succ: List[set] = [set() for _ in states]
    for src, dst in edges:
        if src not in index:
            raise UnknownStateError(src)
        if dst not in index:
            raise UnknownStateError(dst)
        succ[index[src]].add(index[dst])
    dead = [states[i] for i, s in enumerate(succ) if not s]
    if dead:
        raise TotalityError(dead)
    if props is None:
        seen: List[str] = []
        for name in states:
            for p in labels.get(name, ()):
                if p not in seen:
                    seen.append(p)
        props = seen
    return KripkeStructure(
        states=tuple(states),
        props=tuple(props),
        labels=tuple(frozenset(labels.get(name, ())) for name in states),
        successors=tuple(tuple(sorted(s)) for s in succ),
        init=init,
    )


class BoolMatrix:
    """Square boolean matrix; products are OR of ANDs."""

    def __init__(self, data: np.ndarray):
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise ValueError("BoolMatrix must be square")
        self.data = data.astype(bool)

    @classmethod
    def from_kripke(cls, kripke: KripkeStructure) -> "BoolMatrix":
        data = np.zeros((kripke.size, kripke.size), dtype=bool)
        for i, succ in enumerate(kripke.successors):
            data[i, list(succ)] = True
        return cls(data)

    @classmethod
    def identity(cls, size: int) -> "BoolMatrix":
        return cls(np.eye(size, dtype=bool))

    @property
    def size(self) -> int:
        return self.data.shape[0]

    def __matmul__(self, other: "BoolMatrix") -> "BoolMatrix":
        if other.size != self.size:
            raise ValueError("dimension mismatch")
        product = self.data.astype(np.int64) @ other.data.astype(np.int64)
        return BoolMatrix(product > 0)

    def apply(self, vector: np.ndarray) -> np.ndarray:
        """Row vector times matrix: the image of a state set."""
        return (vector.astype(np.int64) @ self.data.astype(np.int64)) > 0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BoolMatrix):
            return NotImplemented
        return bool(np.array_equal(self.data, other.data))


class SubsetTrace(BaseModel):
    """S_0 .. S_{mu+period-1}, with S_{mu+period} = S_mu."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    sequence: Tuple[StateSet, ...]
    mu: int
    period: int

    def at(self, i: int) -> StateSet:
        """S_i for any i >= 0, folding positions past the prefix into the cycle."""
        if i < len(self.sequence):
            return self.sequence[i]
        return self.sequence[self.mu + (i - self.mu) % self.period]

    @property
    def cycle(self) -> Tuple[StateSet, ...]:
        return self.sequence[self.mu:]


class SccDecomposition(BaseModel):
    model_config = ConfigDict(frozen=True)

    component: Tuple[int, ...]
    trivial: Tuple[bool, ...]

    @property
    def count(self) -> int:
        return len(self.trivial)

    def members(self, comp: int) -> List[int]:
        return [i for i, c in enumerate(self.component) if c == comp]

    def nontrivial_states(self) -> List[int]:
        return [i for i, c in enumerate(self.component) if not self.trivial[c]]


def successors(kripke: KripkeStructure, s: StateSet) -> StateSet:
    """R(s), the union of the successor sets of the members of s."""
    masks = kripke.succ_masks
    bits = 0
    for i in s:
        bits |= masks[i]
    return StateSet(bits, kripke.size)


def pre_exists(kripke: KripkeStructure, target: StateSet) -> StateSet:
    """States with at least one successor in target."""
    bits = 0
    for i, mask in enumerate(kripke.succ_masks):
        if mask & target.bits:
            bits |= 1 << i
    return StateSet(bits, kripke.size)


def pre_forall(kripke: KripkeStructure, target: StateSet) -> StateSet:
    """States whose successors all lie in target."""
    bits = 0
    for i, mask in enumerate(kripke.succ_masks):
        if mask & ~target.bits == 0:
            bits |= 1 << i
    return StateSet(bits, kripke.size)


def forward_closure(kripke: KripkeStructure, s: StateSet) -> StateSet:
    """States reachable from s in zero or more steps."""
    reached = s.bits
    frontier = s.bits
    masks = kripke.succ_masks
    while frontier:
        image = 0
        for i in StateSet(frontier, kripke.size):
            image |= masks[i]
        frontier = image & ~reached
        reached |= frontier
    return StateSet(reached, kripke.size)


def backward_closure(kripke: KripkeStructure, s: StateSet) -> StateSet:
    """States that can reach s in zero or more steps."""
    reached = s.bits
    frontier = s.bits
    masks = kripke.pred_masks
    while frontier:
        image = 0
        for i in StateSet(frontier, kripke.size):
            image |= masks[i]
        frontier = image & ~reached
        reached |= frontier
    return StateSet(reached, kripke.size)


def exact_step_reach(kripke: KripkeStructure, start: StateSet, n: int) -> StateSet:
    """
    States reachable from start by paths of exactly n transitions, using
    O(log n) boolean matrix squarings over the bits of n.
    """
    if n < 0:
        raise ValueError("step count must be non-negative")
    vector = start.to_vector()
    square = kripke.matrix
    while n and vector.any():
        if n & 1:
            vector = square.apply(vector)
        n >>= 1
        if n:
            square = square @ square
    return StateSet.from_vector(vector) if vector.any() else kripke.empty_set()


def subset_sequence(
    kripke: KripkeStructure, start: StateSet, cap: Optional[int] = None
) -> SubsetTrace:
    """Iterate S_{i+1} = R(S_i) until the first repeated set."""
    if not start:
        raise ValueError("subset sequence needs a nonempty start set")
    if cap is None:
        cap = get_settings().subset_cap
    first_seen: Dict[StateSet, int] = {}
    sequence: List[StateSet] = []
    current = start
    while current not in first_seen:
        if len(sequence) >= cap:
            raise CapExceeded("subset sequence", cap)
        first_seen[current] = len(sequence)
        sequence.append(current)
        current = successors(kripke, current)
    mu = first_seen[current]
    period = len(sequence) - mu
    logger.debug("subset sequence from %s: mu=%d period=%d", start, mu, period)
    return SubsetTrace(sequence=tuple(sequence), mu=mu, period=period)


def covering_successors(kripke: KripkeStructure, s: StateSet) -> Iterator[StateSet]:
    """
    Powerset successors of s: every s2 inside R(s) that keeps at least one
    successor of each member of s. Yielded in ascending order of the subset
    mask over R(s).
    """
    image = list(successors(kripke, s))
    masks = [kripke.succ_masks[i] for i in s]
    for choice in range(1, 1 << len(image)):
        bits = 0
        for pos, state in enumerate(image):
            if (choice >> pos) & 1:
                bits |= 1 << state
        if all(mask & bits for mask in masks):
            yield StateSet(bits, kripke.size)


def to_digraph(kripke: KripkeStructure) -> nx.DiGraph:
    graph = nx.DiGraph()
    graph.add_nodes_from(range(kripke.size))
    for i, succ in enumerate(kripke.successors):
        graph.add_edges_from((i, j) for j in succ)
    return graph


def scc_decomposition(kripke: KripkeStructure) -> SccDecomposition:
    """
    Strongly connected components, numbered by their smallest member. A
    component is trivial when it is one state without a self-loop.
    """
    comps = sorted(
        (sorted(c) for c in nx.strongly_connected_components(to_digraph(kripke))),
        key=lambda members: members[0],
    )
    component = [0] * kripke.size
    trivial = []
    for cid, members in enumerate(comps):
        for i in members:
            component[i] = cid
        only = members[0]
        trivial.append(len(members) == 1 and only not in kripke.successors[only])
    return SccDecomposition(component=tuple(component), trivial=tuple(trivial))


def n_stuttering(kripke: KripkeStructure, n: int) -> KripkeStructure:
    """
    Replace every state t by a chain (t,1) .. (t,n) with t's labels;
    (t,n) moves to (t',1) for every t' in R(t).
    """
    if n < 1:
        raise ValueError("stuttering factor must be at least 1")
    names = [f"{name}_s{i}" for name in kripke.states for i in range(1, n + 1)]

    def idx(state: int, copy: int) -> int:
        return state * n + (copy - 1)

    succ: List[Tuple[int, ...]] = []
    labels = []
    for t in range(kripke.size):
        for i in range(1, n + 1):
            labels.append(kripke.labels[t])
            if i < n:
                succ.append((idx(t, i + 1),))
            else:
                succ.append(tuple(sorted(idx(u, 1) for u in kripke.successors[t])))
    init = f"{kripke.init}_s1" if kripke.init is not None else None
    return KripkeStructure(
        states=tuple(names),
        props=kripke.props,
        labels=tuple(labels),
        successors=tuple(succ),
        init=init,
    )


def disjoint_union(
    left: KripkeStructure,
    right: KripkeStructure,
    left_prefix: str = "L_",
    right_prefix: str = "R_",
) -> KripkeStructure:
    """Side-by-side copy of two structures; init follows the left one."""
    props = list(left.props) + [p for p in right.props if p not in left.props]
    offset = left.size
    return KripkeStructure(
        states=tuple(left_prefix + s for s in left.states)
        + tuple(right_prefix + s for s in right.states),
        props=tuple(props),
        labels=left.labels + right.labels,
        successors=left.successors
        + tuple(tuple(j + offset for j in succ) for succ in right.successors),
        init=left_prefix + left.init if left.init is not None else None,
    )


def random_kripke(
    n_states: int,
    edge_prob: float,
    props: Sequence[str],
    label_prob: float,
    seed: int,
) -> KripkeStructure:
    """
    Seeded random structure. Each ordered pair gets an edge with probability
    edge_prob; a state left without successors gets one uniform repair edge.
    """
    if n_states < 1:
        raise ValueError("n_states must be at least 1")
    if not (0.0 <= edge_prob <= 1.0 and 0.0 <= label_prob <= 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    adjacency = rng.random((n_states, n_states)) < edge_prob
    for i in range(n_states):
        if not adjacency[i].any():
            adjacency[i, int(rng.integers(n_states))] = True
    labelled = rng.random((n_states, len(props))) < label_prob
    return KripkeStructure(
        states=tuple(f"s{i}" for i in range(n_states)),
        props=tuple(props),
        labels=tuple(
            frozenset(p for j, p in enumerate(props) if labelled[i, j]) for i in range(n_states)
        ),
        successors=tuple(tuple(int(j) for j in np.flatnonzero(adjacency[i])) for i in range(n_states)),
    )
