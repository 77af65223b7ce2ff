"""Modal formulas: syntax trees, parser, printer and subformula closures.

Grammar (ASCII)::

    phi ::= ident | bot | top | ~phi | phi & phi | phi | phi | phi -> phi
          | phi <-> phi | dia phi | box phi | dia^n phi | box^n phi
          | box<=n phi | dia<=n phi | ( phi )

Unary operators bind tightest, then ``&``, ``|``, ``->``, ``<->``. ``&`` and
``|`` associate to the left, ``->`` and ``<->`` to the right. The derived
forms ``dia^n``, ``box^n``, ``dia<=n`` and ``box<=n`` are expanded into
primitives while parsing, so they never appear in a tree.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

from .errors import FormulaSyntaxError

__all__ = [
    "Formula", "Var", "Bot", "Top", "Not", "And", "Or", "Imp", "Iff", "Dia", "Box",
    "FormulaSet", "parse", "render", "conj", "disj", "dia_n", "box_n", "box_le",
    "dia_le", "subformula_closure", "theta_prime", "variables", "depth", "box_free", "BOT", "TOP",
]


class Formula:
    """Base class of all syntax-tree nodes.

    Nodes are immutable; the hash and the rendered text are computed once
    and cached on the node, since closures and formula sets hash and sort
    the same subtrees over and over.
    """

    __slots__ = ("_hash", "_text", "_subs")
    children: tuple["Formula", ...] = ()

    def _fields(self) -> tuple:
        return self.children

    def __hash__(self) -> int:
        try:
            return self._hash
        except AttributeError:
            h = hash((type(self), self._fields()))
            object.__setattr__(self, "_hash", h)
            return h

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if type(self) is not type(other):
            return NotImplemented if not isinstance(other, Formula) else False
        return hash(self) == hash(other) and self._fields() == other._fields()

    def __str__(self) -> str:
        return render(self)

    # operator sugar, handy in tests and at the REPL
    def __invert__(self) -> "Formula":
        return Not(self)

    def __and__(self, other: "Formula") -> "Formula":
        return And(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return Or(self, other)

    def __rshift__(self, other: "Formula") -> "Formula":
        return Imp(self, other)


@dataclass(frozen=True, slots=True, eq=False)
class Var(Formula):
    name: str

    def _fields(self) -> tuple:
        return (self.name,)

    @property
    def children(self):
        return ()


@dataclass(frozen=True, slots=True, eq=False)
class Bot(Formula):
    @property
    def children(self):
        return ()


@dataclass(frozen=True, slots=True, eq=False)
class Top(Formula):
    @property
    def children(self):
        return ()


@dataclass(frozen=True, slots=True, eq=False)
class Not(Formula):
    arg: Formula

    @property
    def children(self):
        return (self.arg,)


@dataclass(frozen=True, slots=True, eq=False)
class Dia(Formula):
    arg: Formula

    @property
    def children(self):
        return (self.arg,)


@dataclass(frozen=True, slots=True, eq=False)
class Box(Formula):
    arg: Formula

    @property
    def children(self):
        return (self.arg,)


@dataclass(frozen=True, slots=True, eq=False)
class And(Formula):
    left: Formula
    right: Formula

    @property
    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True, slots=True, eq=False)
class Or(Formula):
    left: Formula
    right: Formula

    @property
    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True, slots=True, eq=False)
class Imp(Formula):
    left: Formula
    right: Formula

    @property
    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True, slots=True, eq=False)
class Iff(Formula):
    left: Formula
    right: Formula

    @property
    def children(self):
        return (self.left, self.right)


BOT = Bot()
TOP = Top()


# --- derived operators ------------------------------------------------------

def conj(items: Iterable[Formula]) -> Formula:
    """Right-nested conjunction; the empty conjunction is ``top``."""
    items = list(items)
    if not items:
        return TOP
    out = items[-1]
    for f in reversed(items[:-1]):
        out = And(f, out)
    return out


def disj(items: Iterable[Formula]) -> Formula:
    """Right-nested disjunction; the empty disjunction is ``bot``."""
    items = list(items)
    if not items:
        return BOT
    out = items[-1]
    for f in reversed(items[:-1]):
        out = Or(f, out)
    return out


def dia_n(phi: Formula, k: int) -> Formula:
    for _ in range(k):
        phi = Dia(phi)
    return phi


def box_n(phi: Formula, k: int) -> Formula:
    for _ in range(k):
        phi = Box(phi)
    return phi


def box_le(phi: Formula, m: int) -> Formula:
    """``phi & box phi & ... & box^m phi``; ``box_le(phi, 0) == phi``."""
    return conj(box_n(phi, k) for k in range(m + 1))


def dia_le(phi: Formula, m: int) -> Formula:
    return disj(dia_n(phi, k) for k in range(m + 1))


# --- printing ---------------------------------------------------------------

_BINARY = {And: ("&", 4, "left"), Or: ("|", 3, "left"), Imp: ("->", 2, "right"), Iff: ("<->", 1, "right")}
_UNARY_PREC = 5
_ATOM_PREC = 6


def _prec(phi: Formula) -> int:
    entry = _BINARY.get(type(phi))
    if entry is not None:
        return entry[1]
    if isinstance(phi, (Not, Dia, Box)):
        return _UNARY_PREC
    return _ATOM_PREC


def render(phi: Formula) -> str:
    """Canonical text with the minimum number of parentheses."""
    try:
        return phi._text
    except AttributeError:
        pass
    out: list[str] = []
    _render(phi, out)
    text = "".join(out)
    object.__setattr__(phi, "_text", text)
    return text


def _render(phi: Formula, out: list[str]) -> None:
    # explicit stack would be faster, but rendered formulas stay shallow enough
    if isinstance(phi, Var):
        out.append(phi.name)
    elif isinstance(phi, Bot):
        out.append("bot")
    elif isinstance(phi, Top):
        out.append("top")
    elif isinstance(phi, (Not, Dia, Box)):
        out.append("~" if isinstance(phi, Not) else ("dia " if isinstance(phi, Dia) else "box "))
        _render_child(phi.arg, _UNARY_PREC, out)
    else:
        op, prec, assoc = _BINARY[type(phi)]
        _render_child(phi.left, prec if assoc == "left" else prec + 1, out)
        out.append(f" {op} ")
        _render_child(phi.right, prec + 1 if assoc == "left" else prec, out)


def _render_child(phi: Formula, min_prec: int, out: list[str]) -> None:
    if _prec(phi) < min_prec:
        out.append("(")
        out.append(render(phi))
        out.append(")")
    else:
        out.append(render(phi))


# --- parsing ----------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<iff><->)|(?P<imp>->)|(?P<le><=)|(?P<op>[&|~()^])"
    r"|(?P<nat>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*))"
)
_KEYWORDS = {"bot", "top", "dia", "box"}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while True:
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                rest = text[pos:]
                if rest.strip() == "":
                    break
                col = pos + len(rest) - len(rest.lstrip()) + 1
                raise FormulaSyntaxError(f"unexpected character {text[col - 1]!r}", col, text)
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind) + 1))
            pos = m.end()
        self.i = 0

    def peek(self) -> tuple[str, str, int] | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def end_column(self) -> int:
        return len(self.text) + 1

    def error(self, message: str) -> FormulaSyntaxError:
        tok = self.peek()
        col = tok[2] if tok else self.end_column()
        found = repr(tok[1]) if tok else "end of input"
        return FormulaSyntaxError(f"{message}, found {found}", col, self.text)

    def accept(self, kind: str, value: str | None = None) -> str | None:
        tok = self.peek()
        if tok and tok[0] == kind and (value is None or tok[1] == value):
            self.i += 1
            return tok[1]
        return None

    def expect(self, kind: str, value: str | None = None, what: str = "") -> str:
        got = self.accept(kind, value)
        if got is None:
            raise self.error(f"expected {what or value or kind}")
        return got

    def parse(self) -> Formula:
        phi = self.iff()
        if self.peek() is not None:
            raise self.error("unexpected token")
        return phi

    def iff(self) -> Formula:
        left = self.imp()
        if self.accept("iff"):
            return Iff(left, self.iff())
        return left

    def imp(self) -> Formula:
        left = self.disj()
        if self.accept("imp"):
            return Imp(left, self.imp())
        return left

    def disj(self) -> Formula:
        left = self.conj()
        while self.accept("op", "|"):
            left = Or(left, self.conj())
        return left

    def conj(self) -> Formula:
        left = self.unary()
        while self.accept("op", "&"):
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        if self.accept("op", "~"):
            return Not(self.unary())
        tok = self.peek()
        if tok and tok[0] == "ident" and tok[1] in ("dia", "box"):
            self.i += 1
            is_dia = tok[1] == "dia"
            if self.accept("op", "^"):
                k = int(self.expect("nat", what="a number after '^'"))
                arg = self.unary()
                return dia_n(arg, k) if is_dia else box_n(arg, k)
            if self.accept("le"):
                k = int(self.expect("nat", what="a number after '<='"))
                arg = self.unary()
                return dia_le(arg, k) if is_dia else box_le(arg, k)
            arg = self.unary()
            return Dia(arg) if is_dia else Box(arg)
        return self.atom()

    def atom(self) -> Formula:
        if self.accept("op", "("):
            phi = self.iff()
            self.expect("op", ")", "')'")
            return phi
        tok = self.peek()
        if tok and tok[0] == "ident":
            self.i += 1
            if tok[1] == "bot":
                return BOT
            if tok[1] == "top":
                return TOP
            return Var(tok[1])
        raise self.error("expected a formula")


def parse(text: str) -> Formula:
    """Parse ``text``; raises :class:`FormulaSyntaxError` with a 1-based column."""
    return _Parser(text).parse()


def is_identifier(name: str) -> bool:
    return re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name) is not None and name not in _KEYWORDS


# --- formula sets -----------------------------------------------------------

class FormulaSet(Sequence[Formula]):
    """Immutable, duplicate-free collection ordered by canonical rendering."""

    __slots__ = ("_items", "_members", "_closed")

    def __init__(self, items: Iterable[Formula] = ()):
        self._closed = False
        uniq = {}
        for f in items:
            if not isinstance(f, Formula):
                raise TypeError(f"not a formula: {f!r}")
            uniq.setdefault(f, None)
        keyed = sorted(((render(f), f) for f in uniq), key=lambda t: t[0])
        self._items = tuple(f for _, f in keyed)
        self._members = frozenset(self._items)

    def __getitem__(self, i):
        return self._items[i]

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self) -> Iterator[Formula]:
        return iter(self._items)

    def __contains__(self, f) -> bool:
        return f in self._members

    def __eq__(self, other) -> bool:
        if isinstance(other, FormulaSet):
            return self._members == other._members
        if isinstance(other, (set, frozenset)):
            return self._members == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._members)

    def __or__(self, other: Iterable[Formula]) -> "FormulaSet":
        return FormulaSet((*self._items, *other))

    def __le__(self, other: "FormulaSet") -> bool:
        return self._members <= set(other)

    def __ge__(self, other: "FormulaSet") -> bool:
        return self._members >= set(other)

    def __repr__(self) -> str:
        return "{" + ", ".join(render(f) for f in self._items) + "}"


def _subformulas(phi: Formula) -> frozenset[Formula]:
    try:
        return phi._subs
    except AttributeError:
        pass
    # iterative post-order so that deep formulas do not hit the recursion limit
    stack = [phi]
    while stack:
        f = stack[-1]
        todo = [c for c in f.children if not hasattr(c, "_subs")]
        if todo:
            stack.extend(todo)
            continue
        stack.pop()
        if not hasattr(f, "_subs"):
            object.__setattr__(f, "_subs", frozenset((f,)).union(*(c._subs for c in f.children)))
    return phi._subs


def subformula_closure(formulas: Iterable[Formula]) -> FormulaSet:
    """Smallest superset closed under immediate subterms."""
    if isinstance(formulas, FormulaSet) and formulas._closed:
        return formulas
    seen: set[Formula] = set()
    for phi in formulas:
        seen |= _subformulas(phi)
    out = FormulaSet(seen)
    out._closed = True
    return out


@lru_cache(maxsize=4096)
def _theta_prime(theta: FormulaSet, m: int) -> FormulaSet:
    return subformula_closure([*theta, *(dia_n(phi, m) for phi in theta)])


def theta_prime(theta: Iterable[Formula], m: int) -> FormulaSet:
    """``Sub(theta + {dia^m phi : phi in theta})``, the extended set for Gabbay's filtration."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    return _theta_prime(theta if isinstance(theta, FormulaSet) else FormulaSet(theta), m)


def variables(formulas: Formula | Iterable[Formula]) -> list[str]:
    """Sorted variable names occurring in ``formulas``."""
    if isinstance(formulas, Formula):
        formulas = [formulas]
    names = {f.name for phi in formulas for f in _subformulas(phi) if isinstance(f, Var)}
    return sorted(names)


def box_free(phi: Formula) -> Formula:
    """Rewrite every ``box x`` as ``~dia ~x``."""
    if isinstance(phi, Box):
        return Not(Dia(Not(box_free(phi.arg))))
    if isinstance(phi, (Not, Dia)):
        arg = box_free(phi.arg)
        return phi if arg is phi.arg else type(phi)(arg)
    if isinstance(phi, (And, Or, Imp, Iff)):
        left, right = box_free(phi.left), box_free(phi.right)
        return phi if left is phi.left and right is phi.right else type(phi)(left, right)
    return phi


def depth(phi: Formula) -> int:
    if not phi.children:
        return 0
    return 1 + max(depth(c) for c in phi.children)
