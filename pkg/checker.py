# checker.py
"""
Labelling algorithm for CTL+Sync
- check(): normalize, then compute [[phi]] for every subformula bottom-up
- CTL operators by pre-image fixpoints
- UA / GFA on the subset sequence, UE on the covering powerset graph, GFE via SCCs
- Witnesses: SyncPoint(k) for UA and UE, Lasso(n, period) for GFA
"""

import logging
import time
from collections import deque
from typing import Dict, Iterator, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field

from errors import CapExceeded
from formula import (
    Atom,
    ExistsNext,
    ExistsUntil,
    ForallNext,
    ForallUntil,
    Formula,
    Not,
    Or,
    SeqSync,
    TrueConst,
    UntilExists,
    UntilForall,
    atoms_of,
    normalize,
    subformulas,
)
from kripke import (
    KripkeStructure,
    StateSet,
    backward_closure,
    covering_successors,
    exact_step_reach,
    forward_closure,
    pre_exists,
    pre_forall,
    scc_decomposition,
    subset_sequence,
    successors,
)
from settings import get_settings

logger = logging.getLogger(__name__)


class SyncPoint(BaseModel):
    """All required paths synchronize at depth k."""

    model_config = ConfigDict(frozen=True)

    state: str
    k: int = Field(ge=0)

    def render(self) -> str:
        return str(self.k)


class Lasso(BaseModel):
    """S_n is inside [[phi]] and S_{n+period} = S_n."""

    model_config = ConfigDict(frozen=True)

    state: str
    n: int = Field(ge=0)
    period: int = Field(ge=1)

    def render(self) -> str:
        return f"{self.n},{self.period}"


Witness = Union[SyncPoint, Lasso]


def parse_witness(state: str, text: str) -> Witness:
    """Inverse of Witness.render()."""
    if "," in text:
        n, period = text.split(",", 1)
        return Lasso(state=state, n=int(n), period=int(period))
    return SyncPoint(state=state, k=int(text))


class SemMap:
    """[[phi]] for every subformula of one normalized formula, plus witnesses."""

    def __init__(self, kripke: KripkeStructure, root: Formula):
        self.kripke = kripke
        self.root = root
        self._sets: Dict[Formula, StateSet] = {}
        self._witnesses: Dict[Formula, Dict[int, Witness]] = {}

    def record(
        self,
        phi: Formula,
        states: StateSet,
        witnesses: Optional[Dict[int, Witness]] = None,
    ) -> None:
        self._sets[phi] = states
        if witnesses:
            self._witnesses[phi] = witnesses

    def __getitem__(self, phi: Formula) -> StateSet:
        return self._sets[phi]

    def __contains__(self, phi: object) -> bool:
        return phi in self._sets

    def __iter__(self) -> Iterator[Formula]:
        return iter(self._sets)

    def __len__(self) -> int:
        return len(self._sets)

    @property
    def sat(self) -> StateSet:
        """[[root]]"""
        return self._sets[self.root]

    def holds(self, state: Union[int, str]) -> bool:
        if isinstance(state, str):
            state = self.kripke.state_index(state)
        return state in self.sat

    def witness(self, state: Union[int, str], phi: Optional[Formula] = None) -> Optional[Witness]:
        if isinstance(state, str):
            state = self.kripke.state_index(state)
        return self._witnesses.get(self.root if phi is None else phi, {}).get(state)

    def witnesses(self, phi: Optional[Formula] = None) -> Dict[int, Witness]:
        return dict(self._witnesses.get(self.root if phi is None else phi, {}))

    def satisfying_names(self, phi: Optional[Formula] = None) -> list[str]:
        return self.kripke.names(self.sat if phi is None else self._sets[phi])


def check(
    kripke: KripkeStructure,
    phi: Formula,
    subset_cap: Optional[int] = None,
    node_cap: Optional[int] = None,
) -> SemMap:
    """Evaluate phi at every state of the structure."""
    started = time.perf_counter()
    root = normalize(phi)
    missing = atoms_of(root) - set(kripke.props)
    if missing:
        logger.debug("propositions not declared by the structure: %s", ", ".join(sorted(missing)))
    sem = SemMap(kripke, root)
    for node in subformulas(root):
        label_node(kripke, node, sem, subset_cap=subset_cap, node_cap=node_cap)
    logger.debug(
        "checked %s on %d states in %.2f ms",
        root,
        kripke.size,
        (time.perf_counter() - started) * 1000,
    )
    return sem


def holds(kripke: KripkeStructure, phi: Formula, state: Union[int, str]) -> bool:
    return check(kripke, phi).holds(state)


def label_node(
    kripke: KripkeStructure,
    node: Formula,
    sem: SemMap,
    subset_cap: Optional[int] = None,
    node_cap: Optional[int] = None,
) -> None:
    """Compute [[node]] from the already recorded sets of its children."""
    if isinstance(node, TrueConst):
        sem.record(node, kripke.all_states())
    elif isinstance(node, Atom):
        sem.record(node, kripke.label_set(node.name))
    elif isinstance(node, Not):
        sem.record(node, sem[node.arg].complement())
    elif isinstance(node, Or):
        sem.record(node, sem[node.left] | sem[node.right])
    elif isinstance(node, ExistsNext):
        sem.record(node, pre_exists(kripke, sem[node.arg]))
    elif isinstance(node, ForallNext):
        sem.record(node, pre_forall(kripke, sem[node.arg]))
    elif isinstance(node, ExistsUntil):
        sem.record(node, eval_eu(kripke, sem[node.left], sem[node.right]))
    elif isinstance(node, ForallUntil):
        sem.record(node, eval_au(kripke, sem[node.left], sem[node.right]))
    elif isinstance(node, UntilForall):
        sem.record(node, *eval_ua(kripke, sem[node.left], sem[node.right], cap=subset_cap))
    elif isinstance(node, UntilExists):
        sem.record(node, *eval_ue(kripke, sem[node.left], sem[node.right], cap=node_cap))
    elif isinstance(node, SeqSync) and node.seq == ("G", "F"):
        if node.quant == "A":
            sem.record(node, *eval_gfa(kripke, sem[node.arg], cap=subset_cap))
        else:
            sem.record(node, eval_gfe(kripke, sem[node.arg]))
    else:
        raise ValueError(f"not in normal form: {node}")


# ---------------------------------------------------------------- CTL


def eval_eu(kripke: KripkeStructure, sem1: StateSet, sem2: StateSet) -> StateSet:
    """Least fixpoint Z = sem2 | (sem1 & EX Z)."""
    result = sem2
    while True:
        grown = result | (sem1 & pre_exists(kripke, result))
        if grown == result:
            return result
        result = grown


def eval_au(kripke: KripkeStructure, sem1: StateSet, sem2: StateSet) -> StateSet:
    """Least fixpoint Z = sem2 | (sem1 & AX Z); R is total."""
    result = sem2
    while True:
        grown = result | (sem1 & pre_forall(kripke, result))
        if grown == result:
            return result
        result = grown


# ---------------------------------------------------------------- synchronization


def eval_ua(
    kripke: KripkeStructure,
    sem1: StateSet,
    sem2: StateSet,
    cap: Optional[int] = None,
) -> Tuple[StateSet, Dict[int, SyncPoint]]:
    """
    [sem1 UA sem2]: walk S_0 = {t}, S_{i+1} = R(S_i). S_i inside sem2 means
    satisfied with k = i; S_i not inside sem1, or a repeated set, means not.
    """
    if cap is None:
        cap = get_settings().subset_cap
    bits = 0
    witnesses: Dict[int, SyncPoint] = {}
    for t in range(kripke.size):
        current = kripke.singleton(t)
        seen: set = set()
        depth = 0
        while True:
            if current.issubset(sem2):
                bits |= 1 << t
                witnesses[t] = SyncPoint(state=kripke.states[t], k=depth)
                break
            if not current.issubset(sem1) or current in seen:
                break
            if len(seen) >= cap:
                raise CapExceeded("subset sequence", cap)
            seen.add(current)
            current = successors(kripke, current)
            depth += 1
    return StateSet(bits, kripke.size), witnesses


def verify_ua_witness(
    kripke: KripkeStructure,
    t: Union[int, str],
    sem1: StateSet,
    sem2: StateSet,
    n: int,
) -> bool:
    """Check a claimed synchronization depth n for [sem1 UA sem2] at t."""
    start = kripke.singleton(t)
    if not exact_step_reach(kripke, start, n).issubset(sem2):
        return False
    if n == 0:
        return True
    if n > kripke.size:
        # every reachable state shows up within |T| steps
        return forward_closure(kripke, start).issubset(sem1)
    current = start
    for _ in range(n):
        if not current.issubset(sem1):
            return False
        current = successors(kripke, current)
    return True


def eval_ue(
    kripke: KripkeStructure,
    sem1: StateSet,
    sem2: StateSet,
    cap: Optional[int] = None,
) -> Tuple[StateSet, Dict[int, SyncPoint]]:
    """
    [sem1 UE sem2] as E[U] on the powerset graph from {t}: a node inside sem2
    reached through nodes that each meet sem1. Breadth-first, so k is minimal.
    """
    if cap is None:
        cap = get_settings().powerset_node_cap
    bits = 0
    witnesses: Dict[int, SyncPoint] = {}
    known: Dict[StateSet, Optional[int]] = {}
    for t in range(kripke.size):
        k = _powerset_until(kripke, kripke.singleton(t), sem1, sem2, cap, known)
        if k is not None:
            bits |= 1 << t
            witnesses[t] = SyncPoint(state=kripke.states[t], k=k)
    return StateSet(bits, kripke.size), witnesses


def _powerset_until(
    kripke: KripkeStructure,
    start: StateSet,
    sem1: StateSet,
    sem2: StateSet,
    cap: int,
    known: Dict[StateSet, Optional[int]],
) -> Optional[int]:
    """
    Shortest distance from start to a node inside sem2. known holds exact
    distances (None: unreachable) from earlier searches with the same sem1/sem2.
    """
    if start in known:
        return known[start]
    if start.issubset(sem2):
        return 0
    if not start.intersects(sem1):
        return None
    parent: Dict[StateSet, Optional[StateSet]] = {start: None}
    depth_of = {start: 0}
    queue = deque([start])
    best: Optional[int] = None
    last: Optional[StateSet] = None
    while queue:
        node = queue.popleft()
        depth = depth_of[node]
        if best is not None and depth + 1 >= best:
            break
        for nxt in covering_successors(kripke, node):
            if nxt in parent:
                continue
            if nxt.issubset(sem2):
                remaining: Optional[int] = 0
            elif nxt in known:
                remaining = known[nxt]
                if remaining is None:
                    continue
            elif nxt.intersects(sem1):
                if len(parent) >= cap:
                    raise CapExceeded("powerset nodes", cap)
                parent[nxt] = node
                depth_of[nxt] = depth + 1
                queue.append(nxt)
                continue
            else:
                continue
            if best is None or depth + 1 + remaining < best:
                best, last = depth + 1 + remaining, node

    if best is None:
        logger.debug("powerset search from %s exhausted %d nodes", start, len(parent))
        for node in parent:
            known[node] = None
        return None
    logger.debug("powerset search from %s: k=%d after %d nodes", start, best, len(parent))
    # every node on the shortest path lies on a shortest path of its own
    node = last
    while node is not None:
        known[node] = best - depth_of[node]
        node = parent[node]
    return best


def eval_gfa(
    kripke: KripkeStructure,
    sem1: StateSet,
    cap: Optional[int] = None,
) -> Tuple[StateSet, Dict[int, Lasso]]:
    """GFA: some set on the cycle of the subset sequence lies inside sem1."""
    bits = 0
    witnesses: Dict[int, Lasso] = {}
    for t in range(kripke.size):
        trace = subset_sequence(kripke, kripke.singleton(t), cap=cap)
        for i in range(trace.mu, trace.mu + trace.period):
            if trace.sequence[i].issubset(sem1):
                bits |= 1 << t
                witnesses[t] = Lasso(state=kripke.states[t], n=i, period=trace.period)
                break
    return StateSet(bits, kripke.size), witnesses


def verify_lasso(
    kripke: KripkeStructure,
    t: Union[int, str],
    sem1: StateSet,
    n: int,
    period: int,
) -> bool:
    if period < 1:
        return False
    start = kripke.singleton(t)
    at_n = exact_step_reach(kripke, start, n)
    return at_n.issubset(sem1) and exact_step_reach(kripke, start, n + period) == at_n


def eval_gfe(kripke: KripkeStructure, sem1: StateSet) -> StateSet:
    """
    GFE: some sem1 state is reachable from a reachable non-trivial SCC,
    i.e. by arbitrarily long paths.
    """
    sccs = scc_decomposition(kripke)
    looping = StateSet.of(sccs.nontrivial_states(), kripke.size)
    feeders = looping & backward_closure(kripke, sem1)
    return backward_closure(kripke, feeders)
