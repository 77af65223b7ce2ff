"""Stable canonical rules and (m-)stable canonical formulas.

Variables are named ``p_<n>`` where ``n`` is the decimal bitmask of the
element they stand for (algebra form) or ``p_<label>`` for a point (frame
form).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable

from . import formula as fm
from .algebra import DEFAULT_VALUATION_BUDGET, FiniteModalAlgebra
from .errors import PreconditionError
from .frame import FiniteFrame
from .morphism import DEFAULT_SEARCH_BUDGET, embeds_into_si_image, find_stable_embedding


@dataclass(frozen=True)
class Rule:
    premises: fm.FormulaSet
    conclusions: fm.FormulaSet

    def __init__(self, premises: Iterable[fm.Formula] = (), conclusions: Iterable[fm.Formula] = ()):
        object.__setattr__(self, "premises", fm.FormulaSet(premises))
        object.__setattr__(self, "conclusions", fm.FormulaSet(conclusions))

    @classmethod
    def of_formula(cls, phi: fm.Formula) -> "Rule":
        return cls((), (phi,))

    @classmethod
    def parse(cls, text: str) -> "Rule":
        """``g1, g2 / d1, d2`` (either side may be empty); a bare formula is ``/phi``."""
        if "/" not in text:
            return cls.of_formula(fm.parse(text))
        left, right = text.split("/", 1)
        side = lambda s: [fm.parse(t) for t in _split_top(s) if t.strip()]
        return cls(side(left), side(right))

    def formulas(self) -> list[fm.Formula]:
        return [*self.premises, *self.conclusions]

    def __str__(self) -> str:
        return ", ".join(map(str, self.premises)) + " / " + ", ".join(map(str, self.conclusions))

    def to_json(self) -> dict:
        return {"premises": [str(f) for f in self.premises], "conclusions": [str(f) for f in self.conclusions]}


def _split_top(text: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


def element_var(a: int) -> fm.Var:
    return fm.Var(f"p_{a}")


class Kind(enum.Enum):
    RULE = "rule"
    GAMMA = "gamma"
    GAMMA_PLUS = "gamma+"


@dataclass(frozen=True)
class CanonicalSpec:
    algebra: FiniteModalAlgebra
    domain: frozenset[int] = field(default_factory=frozenset)
    kind: Kind = Kind.RULE
    m: int = 1

    def __post_init__(self):
        object.__setattr__(self, "domain", frozenset(self.algebra.check(d) for d in self.domain))
        if self.kind is not Kind.RULE:
            if self.m < 1:
                raise PreconditionError("m must be >= 1")
            if not self.algebra.is_si():
                raise PreconditionError("canonical formulas need a subdirectly irreducible algebra")
            if not self.algebra.is_pretransitive(self.m):
                raise PreconditionError(f"canonical formulas need an algebra validating dia^{self.m + 1} p -> dia p")

    @property
    def level(self) -> int:
        return self.m if self.kind is Kind.GAMMA_PLUS else 1


def _gamma_clauses(A: FiniteModalAlgebra, domain: Iterable[int], plus_m: int | None = None) -> list[fm.Formula]:
    p = element_var
    els = list(A.elements())
    out: list[fm.Formula] = []
    for a in els:
        for b in els:
            out.append(fm.Iff(p(a | b), fm.Or(p(a), p(b))))
    for a in els:
        out.append(fm.Iff(p(A.neg(a)), fm.Not(p(a))))
    for a in els:
        out.append(fm.Imp(fm.Dia(p(a)), p(A.diamond(a))))
    for a in sorted(domain):
        for k in range(1, (plus_m or 1) + 1):
            out.append(fm.Imp(p(A.diamond_n(a, k)), fm.dia_n(p(a), k)))
    return out


def scr_from_algebra(A: FiniteModalAlgebra, domain: Iterable[int] = ()) -> Rule:
    """The stable canonical rule of ``A`` and ``domain``.

    Premises: join clauses, complement clauses ``p_(~a) <-> ~p_a``,
    stability clauses and one closed-domain clause per element of
    ``domain``. Conclusions: ``p_a`` for every ``a != 1``.
    """
    domain = [A.check(d) for d in domain]
    gamma = _gamma_clauses(A, domain)
    delta = [element_var(a) for a in A.elements() if a != A.top]
    return Rule(gamma, delta)


def _point_vars(F: FiniteFrame) -> list[fm.Var]:
    if all(fm.is_identifier("p_" + p) for p in F.points):
        return [fm.Var("p_" + p) for p in F.points]
    return [fm.Var(f"p_{i}") for i in range(F.size)]


def scr_from_frame(F: FiniteFrame, domains: Iterable[int] = (), m: int = 1) -> Rule:
    """The stable canonical rule of a finite frame and a family of point sets.

    With ``m > 1`` the closed-domain family is the ``m``-step version
    used by m-stable canonical formulas.
    """
    p = _point_vars(F)
    n = F.size
    gamma: list[fm.Formula] = [fm.disj(p)]
    for x in range(n):
        for y in range(n):
            if x != y:
                gamma.append(fm.Imp(p[x], fm.Not(p[y])))
    for x in range(n):
        for y in range(n):
            if not F.rows[x] >> y & 1:
                gamma.append(fm.Imp(p[x], fm.Not(fm.Dia(p[y]))))
    rows = F.rows
    for k in range(1, m + 1):
        for D in domains:
            ys = [y for y in range(n) if D >> y & 1]
            for x in range(n):
                if rows[x] & D:
                    gamma.append(fm.Imp(p[x], fm.disj(fm.dia_n(p[y], k) for y in ys)))
        rows = tuple(F.image(r) for r in rows)
    delta = [fm.Not(v) for v in p]
    return Rule(gamma, delta)


def render_formula(spec: CanonicalSpec) -> fm.Formula:
    """``conj{box<=m g : g in Gamma} -> disj{box<=m d : d in Delta}``."""
    if spec.kind is Kind.RULE:
        raise PreconditionError("render_formula needs a formula kind; use scr_from_algebra for rules")
    A, m = spec.algebra, spec.m
    gamma = fm.FormulaSet(_gamma_clauses(A, spec.domain, m if spec.kind is Kind.GAMMA_PLUS else None))
    delta = fm.FormulaSet(element_var(a) for a in A.elements() if a != A.top)
    return fm.Imp(fm.conj(fm.box_le(g, m) for g in gamma), fm.disj(fm.box_le(d, m) for d in delta))


def render(spec: CanonicalSpec):
    """Rule or formula, depending on ``spec.kind``."""
    if spec.kind is Kind.RULE:
        return scr_from_algebra(spec.algebra, spec.domain)
    return render_formula(spec)


def stable_formula(A: FiniteModalAlgebra, m: int) -> fm.Formula:
    return render_formula(CanonicalSpec(A, frozenset(), Kind.GAMMA, m))


def jankov_formula(A: FiniteModalAlgebra, m: int) -> fm.Formula:
    return render_formula(CanonicalSpec(A, frozenset(A.elements()), Kind.GAMMA, m))


def refutes_rule(B: FiniteModalAlgebra, spec: CanonicalSpec, budget: int = DEFAULT_SEARCH_BUDGET) -> bool:
    """``B`` refutes the stable canonical rule iff ``A`` embeds stably into ``B`` with CDC for ``D``."""
    return find_stable_embedding(spec.algebra, B, spec.domain, 1, budget) is not None


def refutes_formula(B: FiniteModalAlgebra, spec: CanonicalSpec, budget: int = DEFAULT_SEARCH_BUDGET) -> bool:
    """``B`` refutes the (m-)stable canonical formula iff ``A`` embeds (with CDC or m-CDC)
    into some s.i. homomorphic image of ``B``."""
    if spec.kind is Kind.RULE:
        return refutes_rule(B, spec, budget)
    if not B.is_pretransitive(spec.m):
        raise PreconditionError(f"B does not validate dia^{spec.m + 1} p -> dia p")
    return embeds_into_si_image(spec.algebra, spec.domain, B, spec.level, budget)


def refutes(B: FiniteModalAlgebra, spec: CanonicalSpec, budget: int = DEFAULT_SEARCH_BUDGET) -> bool:
    return refutes_rule(B, spec, budget) if spec.kind is Kind.RULE else refutes_formula(B, spec, budget)


def refutes_brute_force(B: FiniteModalAlgebra, spec: CanonicalSpec, budget: int = DEFAULT_VALUATION_BUDGET) -> bool:
    """Exhaustive valuation search on the rendered rule or formula (test oracle)."""
    if spec.kind is Kind.RULE:
        return not B.validates_rule(scr_from_algebra(spec.algebra, spec.domain), budget)
    return not B.validates_formula(render_formula(spec), budget)


def plus_domain_equivalent(A: FiniteModalAlgebra, domain: Iterable[int], m: int) -> frozenset[int]:
    """``{dia^(k-1) d : d in D, 1 <= k <= m}``."""
    return frozenset(A.diamond_n(d, k - 1) for d in domain for k in range(1, m + 1))
