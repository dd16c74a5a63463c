# oracle.py
"""
Brute-force semantics and differential fuzzing
- oracle_eval(): evaluates formulas straight from their definitions, on
  frozensets with its own image function; shares no traversal code with checker
- UE by enumerating the synchronization position n up to 2^|T|
- every F/G sequence evaluated on the ultimately periodic depth word, no collapsing
- diff_fuzz(): random structures, checker vs oracle, state by state
"""

import hashlib
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

import numpy as np

from checker import SemMap, check
from errors import SizeExceeded
from formula import (
    And,
    Atom,
    ExistsNext,
    ExistsUntil,
    FalseConst,
    ForallNext,
    ForallUntil,
    Formula,
    Implies,
    Not,
    Or,
    SeqSync,
    TrueConst,
    UntilExists,
    UntilForall,
    parse,
    pretty_print,
)
from kripke import KripkeStructure, StateSet, random_kripke
from kripke_io import dump_kripke_text
from schemas import FuzzMismatch, FuzzReport
from settings import get_settings

logger = logging.getLogger(__name__)

States = FrozenSet[int]

DEFAULT_TEMPLATES = [
    "[p UA q]",
    "[p UE q]",
    "A[p U q]",
    "E[p U q]",
    "FA p",
    "GE p",
    "GFA p",
    "GFE p",
    "FGA p",
    "FGE p",
]


class _Graph:
    """Successor lists of a structure, with memoized set images."""

    def __init__(self, kripke: KripkeStructure):
        self.size = kripke.size
        self.succ = [frozenset(s) for s in kripke.successors]
        self.everything: States = frozenset(range(self.size))
        self._images: Dict[States, States] = {}

    def image(self, s: States) -> States:
        cached = self._images.get(s)
        if cached is None:
            cached = frozenset().union(*(self.succ[t] for t in s)) if s else frozenset()
            self._images[s] = cached
        return cached

    def lasso(self, t: int) -> Tuple[List[States], int]:
        """S_0 .. S_{mu+period-1} from {t}, and mu."""
        sequence: List[States] = []
        position: Dict[States, int] = {}
        current: States = frozenset([t])
        while current not in position:
            position[current] = len(sequence)
            sequence.append(current)
            current = self.image(current)
        return sequence, position[current]


def oracle_eval(
    kripke: KripkeStructure, phi: Formula, max_states: Optional[int] = None
) -> SemMap:
    """[[phi]] for phi and all its subformulas, by brute force."""
    limit = max_states if max_states is not None else get_settings().oracle_max_states
    if kripke.size > limit:
        raise SizeExceeded("structure", kripke.size, limit)
    graph = _Graph(kripke)
    memo: Dict[Formula, States] = {}
    _eval(kripke, graph, phi, memo)
    sem = SemMap(kripke, phi)
    for node, states in memo.items():
        sem.record(node, StateSet.of(states, kripke.size))
    return sem


def _eval(kripke: KripkeStructure, g: _Graph, phi: Formula, memo: Dict[Formula, States]) -> States:
    if phi in memo:
        return memo[phi]
    everything = g.everything

    if isinstance(phi, TrueConst):
        result = everything
    elif isinstance(phi, FalseConst):
        result = frozenset()
    elif isinstance(phi, Atom):
        result = frozenset(t for t in everything if phi.name in kripke.labels[t])
    elif isinstance(phi, Not):
        result = everything - _eval(kripke, g, phi.arg, memo)
    elif isinstance(phi, SeqSync):
        inner = _eval(kripke, g, phi.arg, memo)
        result = frozenset(t for t in everything if _sequence_holds(g, t, phi.seq, phi.quant, inner))
    elif isinstance(phi, (ExistsNext, ForallNext)):
        inner = _eval(kripke, g, phi.arg, memo)
        if isinstance(phi, ExistsNext):
            result = frozenset(t for t in everything if g.succ[t] & inner)
        else:
            result = frozenset(t for t in everything if g.succ[t] <= inner)
    else:
        a = _eval(kripke, g, phi.left, memo)
        b = _eval(kripke, g, phi.right, memo)
        if isinstance(phi, Or):
            result = a | b
        elif isinstance(phi, And):
            result = a & b
        elif isinstance(phi, Implies):
            result = (everything - a) | b
        elif isinstance(phi, ExistsUntil):
            result = _path_until(g, a, b, any)
        elif isinstance(phi, ForallUntil):
            result = _path_until(g, a, b, all)
        elif isinstance(phi, UntilForall):
            result = frozenset(t for t in everything if _ua_holds(g, t, a, b))
        elif isinstance(phi, UntilExists):
            result = frozenset(t for t in everything if _ue_position(g, t, a, b) is not None)
        else:
            raise TypeError(f"not a formula node: {phi!r}")
    memo[phi] = result
    return result


def _path_until(g: _Graph, a: States, b: States, quantifier) -> States:
    """Unroll the path tree to depth |T|; a shortest witness never repeats a state."""
    cache: Dict[Tuple[int, int], bool] = {}

    def holds(t: int, depth: int) -> bool:
        key = (t, depth)
        if key not in cache:
            if t in b:
                cache[key] = True
            elif depth == 0 or t not in a:
                cache[key] = False
            else:
                cache[key] = quantifier(holds(u, depth - 1) for u in sorted(g.succ[t]))
        return cache[key]

    return frozenset(t for t in g.everything if holds(t, g.size))


def _ua_holds(g: _Graph, t: int, a: States, b: States) -> bool:
    sequence, _mu = g.lasso(t)
    for s in sequence:
        if s <= b:
            return True
        if not s <= a:
            return False
    return False


def _ue_condition(g: _Graph, t: int, a: States, b: States, n: int) -> bool:
    """For every k < n some path has a at position k and b at position n."""
    if n == 0:
        return t in b
    layer: States = frozenset([t])
    for k in range(n):
        reach = layer & a
        for _ in range(n - k):
            reach = g.image(reach)
        if not reach & b:
            return False
        layer = g.image(layer)
    return True


def _ue_position(g: _Graph, t: int, a: States, b: States) -> Optional[int]:
    for n in range(2 ** g.size + 1):
        if _ue_condition(g, t, a, b, n):
            return n
    return None


def _sequence_holds(g: _Graph, t: int, seq: Sequence[str], quant: str, inner: States) -> bool:
    sequence, mu = g.lasso(t)
    if quant == "A":
        word = [s <= inner for s in sequence]
    else:
        word = [bool(s & inner) for s in sequence]
    for op in reversed(seq):
        fold = any if op == "F" else all
        cycle_value = fold(word[mu:])
        word = [fold(word[j:]) if j < mu else cycle_value for j in range(len(word))]
    return word[0]


def verify_ue_witness(
    kripke: KripkeStructure,
    t: Union[int, str],
    sem1: StateSet,
    sem2: StateSet,
    n: int,
) -> bool:
    """Check one synchronization position n for [sem1 UE sem2] at t."""
    if isinstance(t, str):
        t = kripke.state_index(t)
    return _ue_condition(_Graph(kripke), t, frozenset(sem1), frozenset(sem2), n)


# ---------------------------------------------------------------- fuzzing


def structure_digest(kripke: KripkeStructure) -> str:
    return hashlib.sha256(dump_kripke_text(kripke).encode("utf-8")).hexdigest()[:16]


def trial_structure(seed: int, index: int, max_states: int, props: Sequence[str] = ("p", "q")) -> KripkeStructure:
    """The random structure of one fuzz trial; depends only on (seed, index)."""
    rng = np.random.default_rng([seed, index])
    n_states = int(rng.integers(1, max_states + 1))
    edge_prob = float(rng.uniform(0.1, 0.7))
    return random_kripke(n_states, edge_prob, list(props), 0.5, int(rng.integers(2**62)))


def _run_trial(args: Tuple[int, int, int, List[Formula]]) -> List[FuzzMismatch]:
    seed, index, max_states, templates = args
    kripke = trial_structure(seed, index, max_states)
    mismatches: List[FuzzMismatch] = []
    digest = None
    for phi in templates:
        fast = check(kripke, phi).sat
        slow = oracle_eval(kripke, phi).sat
        if fast == slow:
            continue
        digest = digest or structure_digest(kripke)
        for t in range(kripke.size):
            if (t in fast) != (t in slow):
                mismatches.append(
                    FuzzMismatch(
                        trial=index,
                        seed=seed,
                        digest=digest,
                        formula=pretty_print(phi),
                        state=kripke.states[t],
                        checker=t in fast,
                        oracle=t in slow,
                    )
                )
    return mismatches


def diff_fuzz(
    trials: int,
    max_states: int,
    templates: Optional[Sequence[Union[Formula, str]]] = None,
    seed: int = 0,
    workers: Optional[int] = None,
) -> FuzzReport:
    """Compare checker and oracle on `trials` random structures."""
    limit = get_settings().oracle_max_states
    if max_states > limit:
        raise SizeExceeded("max_states", max_states, limit)
    if templates is None:
        templates = DEFAULT_TEMPLATES
    formulas = [parse(t) if isinstance(t, str) else t for t in templates]
    if workers is None:
        workers = get_settings().fuzz_workers
    jobs = [(seed, i, max_states, formulas) for i in range(trials)]

    report = FuzzReport(trials=trials)
    if workers > 1 and trials > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_trial, jobs))
    else:
        results = []
        for job in jobs:
            results.append(_run_trial(job))
            logger.debug("fuzz trial %d/%d done", job[1] + 1, trials)
    for found in results:
        report.mismatches.extend(found)
    logger.info("fuzz: %d trials, %d mismatches", trials, len(report.mismatches))
    return report
