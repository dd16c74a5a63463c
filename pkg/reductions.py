# reductions.py
"""
Hardness gadgets as instance generators
- Chinese-remainder encoding of assignments (one integer, residues mod primes)
- CNF -> FA q cycle gadget, CNF -> p UE q path-plus-cycle gadget
- DNF validity -> p UE q gadget
- the fixed structure and the padded pair of the indistinguishability reduction
- DIMACS reading/writing and brute-force SAT / validity as test oracles
"""

import itertools
import logging
from math import prod
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import sympy
from pydantic import BaseModel, ConfigDict, Field, model_validator
from sympy.ntheory.modular import crt

from errors import DimacsError, EmptyClause, ReductionError, SizeExceeded
from kripke import KripkeStructure, from_edges
from settings import get_settings

logger = logging.getLogger(__name__)

INITIAL = "tI"


class Lit(BaseModel):
    model_config = ConfigDict(frozen=True)

    var: int = Field(ge=1)
    positive: bool = True

    @classmethod
    def from_int(cls, value: int) -> "Lit":
        if value == 0:
            raise ValueError("0 is not a literal")
        return cls(var=abs(value), positive=value > 0)

    def to_int(self) -> int:
        return self.var if self.positive else -self.var

    def value_under(self, bit: int) -> bool:
        return bit == 1 if self.positive else bit == 0


class _ClauseSet(BaseModel):
    model_config = ConfigDict(frozen=True)

    num_vars: int = Field(ge=0)
    clauses: Tuple[Tuple[Lit, ...], ...] = ()

    @model_validator(mode="after")
    def _check_variables(self):
        for i, clause in enumerate(self.clauses, 1):
            variables = [lit.var for lit in clause]
            if any(v > self.num_vars for v in variables):
                raise ValueError(f"clause {i} uses a variable above {self.num_vars}")
            if len(set(variables)) != len(variables):
                raise ValueError(f"clause {i} repeats a variable")
        return self

    @classmethod
    def of(cls, clauses: Sequence[Sequence[int]], num_vars: Optional[int] = None):
        """Build from DIMACS-style signed integers, e.g. [[1, 2, -3], [-1]]."""
        parsed = tuple(tuple(Lit.from_int(v) for v in clause) for clause in clauses)
        if num_vars is None:
            num_vars = max((lit.var for clause in parsed for lit in clause), default=0)
        return cls(num_vars=num_vars, clauses=parsed)

    def as_ints(self) -> List[List[int]]:
        return [[lit.to_int() for lit in clause] for clause in self.clauses]


class CnfFormula(_ClauseSet):
    """Conjunction of disjunctive clauses."""


class DnfFormula(_ClauseSet):
    """Disjunction of conjunctive clauses."""


# ---------------------------------------------------------------- encoding


def first_primes(n: int) -> List[int]:
    if n < 0:
        raise ValueError("n must be non-negative")
    return [int(sympy.prime(i)) for i in range(1, n + 1)]


def assignment_of(z: int, primes: Sequence[int]) -> Optional[Tuple[int, ...]]:
    """(z mod p_1, ..., z mod p_n) when every residue is 0 or 1, else None."""
    residues = tuple(z % p for p in primes)
    if all(r in (0, 1) for r in residues):
        return residues
    return None


def encode_assignment(bits: Sequence[int], primes: Sequence[int]) -> int:
    """Smallest z >= 0 whose residues mod primes are exactly bits."""
    if not primes:
        return 0
    z, modulus = crt(list(primes), list(bits))
    return int(z) % int(modulus)


def _clause_primes(clause: Sequence[Lit], primes: Sequence[int]) -> List[int]:
    return [primes[lit.var - 1] for lit in clause]


def _disjunction_holds(clause: Sequence[Lit], residues: Sequence[int]) -> bool:
    return any(lit.value_under(bit) for lit, bit in zip(clause, residues))


def _conjunction_holds(clause: Sequence[Lit], residues: Sequence[int]) -> bool:
    return all(lit.value_under(bit) for lit, bit in zip(clause, residues))


def _require_clauses(psi: _ClauseSet) -> None:
    if not psi.clauses:
        raise ReductionError("formula has no clauses")
    for i, clause in enumerate(psi.clauses, 1):
        if not clause:
            raise EmptyClause(i)


class _Builder:
    """Collects named states, labels and edges for one gadget."""

    def __init__(self):
        self.states: List[str] = []
        self.labels: Dict[str, List[str]] = {}
        self.edges: List[Tuple[str, str]] = []

    def state(self, name: str, *props: str) -> str:
        self.states.append(name)
        self.labels[name] = list(props)
        return name

    def edge(self, src: str, dst: str) -> None:
        self.edges.append((src, dst))

    def cycle(self, prefix: str, length: int, labels_at) -> str:
        names = [self.state(f"{prefix}_{i}", *labels_at(i)) for i in range(length)]
        for i, name in enumerate(names):
            self.edge(name, names[(i + 1) % length])
        return names[0]

    def build(self, props: Sequence[str]) -> KripkeStructure:
        return from_edges(self.states, self.labels, self.edges, init=INITIAL, props=props)


def cnf_to_favorall(psi: CnfFormula) -> Tuple[KripkeStructure, str]:
    """psi is satisfiable iff FA q holds at tI."""
    _require_clauses(psi)
    primes = first_primes(psi.num_vars)
    b = _Builder()
    b.state(INITIAL)
    for j, clause in enumerate(psi.clauses, 1):
        cprimes = _clause_primes(clause, primes)

        def labels_at(i, clause=clause, cprimes=cprimes):
            residues = assignment_of(i, cprimes)
            return ["q"] if residues is not None and _disjunction_holds(clause, residues) else []

        b.edge(INITIAL, b.cycle(f"c{j}", prod(cprimes), labels_at))
    kripke = b.build(["q"])
    logger.debug("cnf_to_favorall: %d clauses, %d states", len(psi.clauses), kripke.size)
    return kripke, INITIAL


def cnf_to_ue(psi: CnfFormula) -> Tuple[KripkeStructure, str]:
    """
    psi is satisfiable iff [p UE q] holds at tI. Path i has m+1 states after
    tI, p on its i-th and last state, so cycle origins sit at depth m+2.
    """
    _require_clauses(psi)
    primes = first_primes(psi.num_vars)
    m = len(psi.clauses)
    b = _Builder()
    b.state(INITIAL, "p")
    for j, clause in enumerate(psi.clauses, 1):
        cprimes = _clause_primes(clause, primes)

        def labels_at(i, clause=clause, cprimes=cprimes):
            residues = assignment_of(i, cprimes)
            if residues is not None and _disjunction_holds(clause, residues):
                return ["p", "q"]
            return ["p"]

        previous = INITIAL
        for step in range(1, m + 2):
            props = ["p"] if step in (j, m + 1) else []
            current = b.state(f"f{j}_{step}", *props)
            b.edge(previous, current)
            previous = current
        b.edge(previous, b.cycle(f"c{j}", prod(cprimes), labels_at))
    return b.build(["p", "q"]), INITIAL


def dnf_odd_primes(n: int) -> List[int]:
    """Primes used by dnf_to_ue: 3, 5, 7, ... so a cycle's last position is never an assignment."""
    return first_primes(n + 1)[1:]


def dnf_to_ue(psi: DnfFormula) -> Tuple[KripkeStructure, str]:
    """psi is valid iff [p UE q] holds at tI."""
    _require_clauses(psi)
    primes = dnf_odd_primes(psi.num_vars)
    b = _Builder()
    b.state(INITIAL, "p")
    for j, clause in enumerate(psi.clauses, 1):
        cprimes = _clause_primes(clause, primes)
        length = prod(cprimes)

        def labels_at(i, clause=clause, cprimes=cprimes, length=length):
            props = []
            residues = assignment_of(i, cprimes)
            if residues is None or _conjunction_holds(clause, residues):
                props.append("p")
            if i == length - 1:
                props.append("q")
            return props

        b.edge(INITIAL, b.cycle(f"c{j}", length, labels_at))
    return b.build(["p", "q"]), INITIAL


def figure6_structure() -> KripkeStructure:
    """
    uI (not q) branches into a 2-cycle u1 <-> u2 (q on u2 only) and a
    3-cycle v1 -> v2 -> v3 -> v1 (q on v1 and v2). FA q holds at uI.
    """
    return from_edges(
        ["uI", "u1", "u2", "v1", "v2", "v3"],
        {"u2": ["q"], "v1": ["q"], "v2": ["q"]},
        [
            ("uI", "u1"), ("uI", "v1"),
            ("u1", "u2"), ("u2", "u1"),
            ("v1", "v2"), ("v2", "v3"), ("v3", "v1"),
        ],
        init="uI",
        props=["q"],
    )


def pad_for_indist(psi: CnfFormula) -> CnfFormula:
    """
    Add (x_a | !x_b) and (x_b) over two fresh variables: their cycle origins
    give tI one q and one non-q successor, and x_a = x_b = 1 satisfies both.
    """
    a, b = psi.num_vars + 1, psi.num_vars + 2
    padding = (
        (Lit(var=a, positive=True), Lit(var=b, positive=False)),
        (Lit(var=b, positive=True),),
    )
    return CnfFormula(num_vars=psi.num_vars + 2, clauses=psi.clauses + padding)


def indist_pair(psi: CnfFormula) -> Tuple[KripkeStructure, KripkeStructure]:
    """(K, K_psi): indistinguishable from their initial states iff psi is satisfiable."""
    kripke_psi, _ = cnf_to_favorall(pad_for_indist(psi))
    return figure6_structure(), kripke_psi


# ---------------------------------------------------------------- brute force


def _check_size(psi: _ClauseSet, max_vars: Optional[int]) -> None:
    limit = max_vars if max_vars is not None else get_settings().brute_sat_max_vars
    if psi.num_vars > limit:
        raise SizeExceeded("variable count", psi.num_vars, limit)


def _assignments(num_vars: int):
    return itertools.product((0, 1), repeat=num_vars)


def brute_sat(psi: CnfFormula, max_vars: Optional[int] = None) -> bool:
    _check_size(psi, max_vars)
    for bits in _assignments(psi.num_vars):
        if all(any(lit.value_under(bits[lit.var - 1]) for lit in c) for c in psi.clauses):
            return True
    return False


def brute_valid(psi: DnfFormula, max_vars: Optional[int] = None) -> bool:
    _check_size(psi, max_vars)
    for bits in _assignments(psi.num_vars):
        if not any(all(lit.value_under(bits[lit.var - 1]) for lit in c) for c in psi.clauses):
            return False
    return True


def satisfying_assignments(psi: CnfFormula, max_vars: Optional[int] = None) -> List[Tuple[int, ...]]:
    _check_size(psi, max_vars)
    return [
        bits
        for bits in _assignments(psi.num_vars)
        if all(any(lit.value_under(bits[lit.var - 1]) for lit in c) for c in psi.clauses)
    ]


# ---------------------------------------------------------------- DIMACS


def parse_dimacs(text: str, dnf: bool = False):
    """
    Read `p cnf <vars> <clauses>` followed by zero-terminated clauses.
    With dnf=True the header must read `p dnf` and the clauses are conjunctions.
    """
    header: Optional[Tuple[int, int]] = None
    clauses: List[List[int]] = []
    current: List[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            words = line.split()
            if header is not None:
                raise DimacsError("second problem line", lineno)
            expected = "dnf" if dnf else "cnf"
            if len(words) != 4 or words[1] not in ("cnf", "dnf"):
                raise DimacsError(f"expected 'p {expected} <vars> <clauses>'", lineno)
            if words[1] != expected:
                raise DimacsError(f"'p {words[1]}' header where 'p {expected}' was expected", lineno)
            try:
                header = (int(words[2]), int(words[3]))
            except ValueError:
                raise DimacsError("non-integer counts in problem line", lineno) from None
            continue
        if header is None:
            raise DimacsError("clause before problem line", lineno)
        for word in line.split():
            try:
                value = int(word)
            except ValueError:
                raise DimacsError(f"not an integer: '{word}'", lineno) from None
            if abs(value) > header[0]:
                raise DimacsError(f"literal {value} exceeds {header[0]} variables", lineno)
            if value == 0:
                clauses.append(current)
                current = []
            else:
                current.append(value)
    if header is None:
        raise DimacsError("missing problem line")
    if current:
        clauses.append(current)
    if len(clauses) != header[1]:
        raise DimacsError(f"header announces {header[1]} clauses, found {len(clauses)}")
    kind = DnfFormula if dnf else CnfFormula
    try:
        return kind.of(clauses, num_vars=header[0])
    except ValueError as exc:
        raise DimacsError(str(exc)) from exc


def dump_dimacs(psi: _ClauseSet) -> str:
    kind = "dnf" if isinstance(psi, DnfFormula) else "cnf"
    lines = [f"p {kind} {psi.num_vars} {len(psi.clauses)}"]
    lines += [" ".join(str(v) for v in clause + [0]) for clause in psi.as_ints()]
    return "\n".join(lines) + "\n"


def load_dimacs(path: Union[str, Path], dnf: bool = False):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise DimacsError(f"{path} is not valid UTF-8 (byte {exc.start})") from exc
    return parse_dimacs(text, dnf=dnf)
