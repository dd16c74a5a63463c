# formula.py
"""
CTL+Sync formulas
- Immutable AST nodes (pydantic, frozen, hashable so they can key a SemMap)
- lark LALR parser for the concrete syntax
- pretty printer whose output parses back to the same tree
- normalize(): rewrite derived operators into the core the checker evaluates
"""

import zlib
from typing import Any, Callable, Dict, List, Literal, Tuple, TypeVar

from lark import Lark, Transformer
from lark.exceptions import UnexpectedInput
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr

from errors import ParseError

R = TypeVar("R")


class Formula(BaseModel):
    model_config = ConfigDict(frozen=True)

    # stable across processes; children carry their own cached value
    _hash: int = PrivateAttr(default=0)

    def model_post_init(self, __context: Any) -> None:
        fields = tuple(_stable_hash(getattr(self, name)) for name in type(self).model_fields)
        self._hash = hash((_stable_hash(type(self).__name__),) + fields)

    def __hash__(self) -> int:
        return self._hash

    @property
    def depth(self) -> int:
        """Number of nested operators; atoms and constants have depth 0."""
        return fold(self, lambda node, below: 1 + max(below) if below else 0)

    def children(self) -> Tuple["Formula", ...]:
        return ()

    def __str__(self) -> str:
        return pretty_print(self)


def _stable_hash(value: Any) -> Any:
    if isinstance(value, Formula):
        return value._hash
    if isinstance(value, str):
        return zlib.crc32(value.encode("utf-8"))
    if isinstance(value, tuple):
        return tuple(_stable_hash(v) for v in value)
    return value


class TrueConst(Formula):
    pass


class FalseConst(Formula):
    pass


class Atom(Formula):
    name: str


class _Unary(Formula):
    arg: Formula

    def children(self) -> Tuple[Formula, ...]:
        return (self.arg,)


class _Binary(Formula):
    left: Formula
    right: Formula

    def children(self) -> Tuple[Formula, ...]:
        return (self.left, self.right)


class Not(_Unary):
    pass


class Or(_Binary):
    pass


class And(_Binary):
    pass


class Implies(_Binary):
    pass


class ExistsNext(_Unary):
    pass


class ForallNext(_Unary):
    pass


class ExistsUntil(_Binary):
    """E[left U right]"""


class ForallUntil(_Binary):
    """A[left U right]"""


class UntilExists(_Binary):
    """[left UE right]: quantifier after the until."""


class UntilForall(_Binary):
    """[left UA right]: one common position k for all paths."""


class SeqSync(_Unary):
    """A run of F/G over the synchronized depth word, e.g. GFA p."""

    seq: Tuple[Literal["F", "G"], ...] = Field(min_length=1)
    quant: Literal["E", "A"]


TRUE = TrueConst()


# ---------------------------------------------------------------- parser

GRAMMAR = r"""
?start: implication

?implication: disjunction
    | disjunction "->" implication          -> implies

?disjunction: conjunction
    | disjunction "|" conjunction           -> or_

?conjunction: unary
    | conjunction "&" unary                 -> and_

?unary: "!" unary                           -> not_
    | PREFIX unary                          -> prefixed
    | primary

?primary: QUANT "[" implication "U" implication "]"   -> path_until
    | "[" implication SYNC_UNTIL implication "]"      -> sync_until
    | "true"                                -> const_true
    | "false"                               -> const_false
    | IDENT                                 -> atom
    | "(" implication ")"

PREFIX: /EX|AX|EF|AF|EG|AG|[FG]+[AE]/
QUANT: /[EA]/
SYNC_UNTIL: /U[AE]/
IDENT: /[a-z][a-z0-9_]*/

%import common.WS
%ignore WS
"""


class _ToFormula(Transformer):
    def implies(self, items):
        return Implies(left=items[0], right=items[1])

    def or_(self, items):
        return Or(left=items[0], right=items[1])

    def and_(self, items):
        return And(left=items[0], right=items[1])

    def not_(self, items):
        return Not(arg=items[0])

    def prefixed(self, items):
        token, arg = items
        return _apply_prefix(str(token), arg)

    def path_until(self, items):
        quant, left, right = items
        if str(quant) == "E":
            return ExistsUntil(left=left, right=right)
        return ForallUntil(left=left, right=right)

    def sync_until(self, items):
        left, op, right = items
        if str(op) == "UE":
            return UntilExists(left=left, right=right)
        return UntilForall(left=left, right=right)

    def const_true(self, _items):
        return TrueConst()

    def const_false(self, _items):
        return FalseConst()

    def atom(self, items):
        return Atom(name=str(items[0]))


def _apply_prefix(token: str, arg: Formula) -> Formula:
    # EF/AF/EG/AG are sugar for the CTL until forms
    if token == "EX":
        return ExistsNext(arg=arg)
    if token == "AX":
        return ForallNext(arg=arg)
    if token == "EF":
        return ExistsUntil(left=TRUE, right=arg)
    if token == "AF":
        return ForallUntil(left=TRUE, right=arg)
    if token == "EG":
        return Not(arg=ForallUntil(left=TRUE, right=Not(arg=arg)))
    if token == "AG":
        return Not(arg=ExistsUntil(left=TRUE, right=Not(arg=arg)))
    return SeqSync(seq=tuple(token[:-1]), quant=token[-1], arg=arg)


_PARSER = Lark(GRAMMAR, parser="lalr", transformer=_ToFormula())


def parse(text: str) -> Formula:
    """Parse concrete syntax; syntax errors become ParseError with a position."""
    try:
        return _PARSER.parse(text)
    except UnexpectedInput as exc:
        line, column = exc.line, exc.column
        if not isinstance(line, int) or not isinstance(column, int) or line < 1:
            lines = text.split("\n")
            line, column = len(lines), len(lines[-1]) + 1
        expected = getattr(exc, "expected", None) or getattr(exc, "allowed", None) or ()
        found = getattr(exc, "token", None)
        if found is not None and getattr(found, "type", "") != "$END":
            message = f"unexpected '{found}'"
        elif isinstance(getattr(exc, "char", None), str):
            message = f"unexpected character '{exc.char}'"
        else:
            message = "unexpected end of input"
        raise ParseError(message, line, column, expected) from None
    except RecursionError:
        raise ParseError("formula nested too deeply", 1, 1) from None


# ---------------------------------------------------------------- traversal


def fold(phi: Formula, combine: Callable[[Formula, List[R]], R]) -> R:
    """
    Bottom-up evaluation with an explicit stack: combine(node, child_results)
    runs once per distinct node object, children first.
    """
    results: Dict[int, R] = {}
    stack: List[Tuple[Formula, bool]] = [(phi, False)]
    while stack:
        node, expanded = stack.pop()
        if id(node) in results:
            continue
        if expanded:
            results[id(node)] = combine(node, [results[id(c)] for c in node.children()])
        else:
            stack.append((node, True))
            stack.extend((child, False) for child in reversed(node.children()))
    return results[id(phi)]


# ---------------------------------------------------------------- printing


def pretty_print(phi: Formula) -> str:
    """Concrete syntax with every binary connective parenthesized."""
    return fold(phi, _render)


def _render(phi: Formula, parts: List[str]) -> str:
    if isinstance(phi, TrueConst):
        return "true"
    if isinstance(phi, FalseConst):
        return "false"
    if isinstance(phi, Atom):
        return phi.name
    if isinstance(phi, Not):
        return "!" + parts[0]
    if isinstance(phi, ExistsNext):
        return "EX " + parts[0]
    if isinstance(phi, ForallNext):
        return "AX " + parts[0]
    if isinstance(phi, SeqSync):
        return "".join(phi.seq) + phi.quant + " " + parts[0]
    if isinstance(phi, _Binary):
        left, right = parts
        if isinstance(phi, Or):
            return f"({left} | {right})"
        if isinstance(phi, And):
            return f"({left} & {right})"
        if isinstance(phi, Implies):
            return f"({left} -> {right})"
        if isinstance(phi, ExistsUntil):
            return f"E[{left} U {right}]"
        if isinstance(phi, ForallUntil):
            return f"A[{left} U {right}]"
        if isinstance(phi, UntilExists):
            return f"[{left} UE {right}]"
        if isinstance(phi, UntilForall):
            return f"[{left} UA {right}]"
    raise TypeError(f"not a formula node: {phi!r}")


# ---------------------------------------------------------------- normalization


def neg(phi: Formula) -> Formula:
    """Negation that cancels an outer negation instead of stacking one."""
    if isinstance(phi, Not):
        return phi.arg
    return Not(arg=phi)


def collapse_sequence(seq: Tuple[str, ...]) -> Tuple[str, ...]:
    """
    Shorten an F/G run using FF = F, GG = G, FGF = GF and GFG = FG.
    The result is one of F, G, GF, FG.
    """
    runs = [seq[0]]
    for op in seq[1:]:
        if op != runs[-1]:
            runs.append(op)
    return tuple(runs[-2:])


def normalize(phi: Formula) -> Formula:
    """
    Rewrite into atoms, true, !, |, EX, AX, E[U], A[U], UA, UE, GFE, GFA.
    Idempotent: normalize(normalize(phi)) == normalize(phi).
    Equal subtrees of the result are one shared object.
    """
    interned: Dict[Tuple, Formula] = {}

    def share(node: Formula) -> Formula:
        key = (type(node),) + tuple(
            id(value) if isinstance(value, Formula) else value
            for value in (getattr(node, name) for name in type(node).model_fields)
        )
        return interned.setdefault(key, node)

    return fold(phi, lambda node, args: share(_normalize_node(node, args)))


def _normalize_node(phi: Formula, args: List[Formula]) -> Formula:
    if isinstance(phi, (TrueConst, Atom)):
        return phi
    if isinstance(phi, FalseConst):
        return Not(arg=TRUE)
    if isinstance(phi, Not):
        return neg(args[0])
    if isinstance(phi, ExistsNext):
        return ExistsNext(arg=args[0])
    if isinstance(phi, ForallNext):
        return ForallNext(arg=args[0])
    if isinstance(phi, SeqSync):
        return _normalize_sync(collapse_sequence(phi.seq), phi.quant, args[0])
    if isinstance(phi, _Binary):
        left, right = args
        if isinstance(phi, And):
            return neg(Or(left=neg(left), right=neg(right)))
        if isinstance(phi, Implies):
            return Or(left=neg(left), right=right)
        return type(phi)(left=left, right=right)
    raise TypeError(f"not a formula node: {phi!r}")


def _normalize_sync(seq: Tuple[str, ...], quant: str, arg: Formula) -> Formula:
    if seq == ("F",):
        if quant == "E":
            return ExistsUntil(left=TRUE, right=arg)
        return UntilForall(left=TRUE, right=arg)
    if seq == ("G",):
        if quant == "A":
            return neg(ExistsUntil(left=TRUE, right=neg(arg)))
        return neg(UntilForall(left=TRUE, right=neg(arg)))
    if seq == ("G", "F"):
        return SeqSync(seq=seq, quant=quant, arg=arg)
    # FG by duality with GF of the negation
    dual = "E" if quant == "A" else "A"
    return neg(SeqSync(seq=("G", "F"), quant=dual, arg=neg(arg)))


def subformulas(phi: Formula) -> list[Formula]:
    """Distinct subformulas in post-order (children before parents)."""
    seen: set = set()
    order: list[Formula] = []

    def visit(node: Formula, _below: List[None]) -> None:
        if node not in seen:
            seen.add(node)
            order.append(node)

    fold(phi, visit)
    return order


def atoms_of(phi: Formula) -> set[str]:
    return {node.name for node in subformulas(phi) if isinstance(node, Atom)}
