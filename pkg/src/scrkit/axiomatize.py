"""Bounded refutation patterns: finite stable canonical axiomatizations of a rule or formula.

For a target rule (or formula, read as the assumption-free rule ``/phi``)
and a base logic (K, or ``K + dia^(m+1) p -> dia p``) we collect every
refuting pair ``(A', D)`` obtained by filtrating a refuting base algebra
with at most ``atom_bound`` atoms. Completeness of the collection is only
claimed relative to the bound; :func:`verify_equivalence` checks it over a
bounded class of test algebras.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Iterable

from . import formula as fm
from .algebra import FiniteModalAlgebra, _evaluate, canonical_key
from .enumeration import _frames, frames_up_to
from .errors import BudgetExceeded
from .filtration import FiltrationResult, gabbay_filtration, least_filtration
from .frame import dual_algebra, dual_frame
from .morphism import DEFAULT_SEARCH_BUDGET
from .rules import CanonicalSpec, Kind, Rule, refutes, render

DEFAULT_ENUMERATION_BUDGET = 2 * 10**6


@dataclass(frozen=True)
class BaseLogic:
    """``m is None`` is K; otherwise the logic of ``dia^(m+1) p -> dia p``."""

    m: int | None = None

    def __post_init__(self):
        if self.m is not None and self.m < 1:
            raise ValueError("pretransitive base needs m >= 1")

    @classmethod
    def parse(cls, text: str) -> "BaseLogic":
        t = text.strip().lower()
        if t == "k":
            return cls(None)
        if t == "k4":
            return cls(1)
        hit = re.fullmatch(r"k4m1:(\d+)", t)
        if hit:
            return cls(int(hit.group(1)))
        raise ValueError(f"unknown base logic {text!r} (expected 'k', 'k4' or 'k4m1:<m>')")

    @property
    def is_pretransitive(self) -> bool:
        return self.m is not None

    def axiom(self) -> fm.Formula | None:
        if self.m is None:
            return None
        p = fm.Var("p")
        return fm.Imp(fm.dia_n(p, self.m + 1), fm.Dia(p))

    def admits(self, alg: FiniteModalAlgebra) -> bool:
        return self.m is None or alg.is_pretransitive(self.m)

    def __str__(self) -> str:
        return "k" if self.m is None else f"k4m1:{self.m}"


@dataclass(frozen=True)
class PatternMember:
    algebra: FiniteModalAlgebra
    domain: frozenset[int]
    valuation: dict[str, int]

    def spec(self, kind: Kind, m: int = 1) -> CanonicalSpec:
        return CanonicalSpec(self.algebra, self.domain, kind, m)

    def to_json(self, kind: Kind, m: int = 1) -> dict:
        rendered = render(self.spec(kind, m))
        return {
            "frame": dual_frame(self.algebra).to_json(),
            "domain": sorted((self.algebra.element_labels(d) for d in self.domain), key=lambda s: (len(s), s)),
            "valuation": {p: self.algebra.element_labels(v) for p, v in sorted(self.valuation.items())},
            kind.value: rendered.to_json() if isinstance(rendered, Rule) else str(rendered),
        }


@dataclass(frozen=True)
class RefutationPattern:
    target: Rule
    base: BaseLogic
    kind: Kind
    atom_bound: int
    members: tuple[PatternMember, ...] = ()

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    @property
    def m(self) -> int:
        return self.base.m or 1

    def specs(self) -> list[CanonicalSpec]:
        return [mem.spec(self.kind, self.m) for mem in self.members]

    def without(self, index: int) -> "RefutationPattern":
        members = self.members[:index] + self.members[index + 1:]
        return RefutationPattern(self.target, self.base, self.kind, self.atom_bound, members)

    def keys(self) -> set:
        return {canonical_key(mem.algebra, mem.domain) for mem in self.members}

    def to_json(self) -> dict:
        return {
            "target": self.target.to_json(),
            "base": str(self.base),
            "kind": self.kind.value,
            "atom_bound": self.atom_bound,
            "members": [mem.to_json(self.kind, self.m) for mem in self.members],
        }


def _as_rule(target) -> Rule:
    if isinstance(target, Rule):
        return target
    if isinstance(target, fm.Formula):
        return Rule.of_formula(target)
    if isinstance(target, str):
        return Rule.parse(target)
    raise TypeError(f"target must be a Rule or Formula, got {type(target).__name__}")


def _default_kind(target, base: BaseLogic) -> Kind:
    is_formula = isinstance(target, fm.Formula) or (isinstance(target, str) and "/" not in target)
    return Kind.GAMMA if base.is_pretransitive and is_formula else Kind.RULE


def _check_enumeration_budget(bound: int, base: BaseLogic, budget: int) -> None:
    work = 0
    for n in range(1, bound + 1):
        prev = len(_frames(n - 1, base.m)) if n - 1 < bound else 0
        work += prev * (1 << (2 * n - 1))
        if work > budget:
            raise BudgetExceeded(
                f"enumerating frames with up to {bound} points needs about {work} candidates; budget is {budget}",
                needed=work, budget=budget,
            )


def base_algebras(base: BaseLogic, atom_bound: int, si_only: bool,
                  budget: int = DEFAULT_ENUMERATION_BUDGET) -> list[FiniteModalAlgebra]:
    """Base algebras with at most ``atom_bound`` atoms, one per isomorphism class."""
    _check_enumeration_budget(atom_bound, base, budget)
    out = []
    for f in frames_up_to(atom_bound, base.m):
        alg = dual_algebra(f)
        if si_only and not alg.is_si():
            continue
        out.append(alg)
    return out


def _refuting_valuations(A: FiniteModalAlgebra, rule: Rule) -> Iterable[dict[str, int]]:
    names = fm.variables(rule.formulas())
    for values in itertools.product(A.elements(), repeat=len(names)):
        V = dict(zip(names, values))
        memo: dict = {}
        if all(_evaluate(g, V, A.top, A.diamond, memo) == A.top for g in rule.premises) and \
                all(_evaluate(d, V, A.top, A.diamond, memo) != A.top for d in rule.conclusions):
            yield V


def _filtrate(A: FiniteModalAlgebra, V: dict, theta: fm.FormulaSet, base: BaseLogic) -> FiltrationResult:
    if base.is_pretransitive:
        return gabbay_filtration(A, V, theta, base.m)
    return least_filtration(A, V, theta, theta)


def refutation_patterns(target, base: BaseLogic, atom_bound: int, kind: Kind | None = None,
                        budget: int = DEFAULT_ENUMERATION_BUDGET) -> RefutationPattern:
    """Pairs ``(A', D)`` whose canonical rules (or formulas) jointly match ``target`` over ``base``.

    Every base algebra with at most ``atom_bound`` atoms (s.i. ones only
    for the formula kinds) and every valuation refuting the target is
    filtrated; the filtrations are collected up to isomorphism carrying
    ``D`` to ``D``.
    """
    kind = _default_kind(target, base) if kind is None else kind
    if kind is not Kind.RULE and not base.is_pretransitive:
        raise ValueError("canonical formulas need a pretransitive base")
    rule = _as_rule(target)
    theta = fm.subformula_closure(rule.formulas())
    members: list[PatternMember] = []
    seen = set()
    for A in base_algebras(base, atom_bound, si_only=kind is not Kind.RULE, budget=budget):
        for V in _refuting_valuations(A, rule):
            res = _filtrate(A, V, theta, base)
            key = canonical_key(res.algebra, res.domain)
            if key in seen:
                continue
            seen.add(key)
            if kind is not Kind.RULE and not res.algebra.is_si():
                raise AssertionError("filtration of an s.i. algebra is not s.i.")
            members.append(PatternMember(res.algebra, res.domain, dict(res.new_valuation)))
    members.sort(key=lambda mem: (mem.algebra.atom_count, canonical_key(mem.algebra, mem.domain)))
    return RefutationPattern(rule, base, kind, atom_bound, tuple(members))


@dataclass
class EquivalenceReport:
    ok: bool
    checked: int
    witness: FiniteModalAlgebra | None = None
    detail: str = ""
    refuted_member: int | None = None

    def __bool__(self):
        return self.ok

    def to_json(self) -> dict:
        out = {"ok": self.ok, "checked": self.checked, "detail": self.detail}
        if self.witness is not None:
            out["witness"] = dual_frame(self.witness).to_json()
        return out


def verify_equivalence(target, pattern: RefutationPattern, base: BaseLogic | None = None,
                       test_atom_bound: int = 3, search_budget: int = DEFAULT_SEARCH_BUDGET,
                       budget: int = DEFAULT_ENUMERATION_BUDGET) -> EquivalenceReport:
    """Over every base algebra ``B`` with at most ``test_atom_bound`` atoms (s.i. only for
    formula kinds): ``B`` validates the target iff it validates every member."""
    base = pattern.base if base is None else base
    rule = _as_rule(target)
    specs = pattern.specs()
    algebras = base_algebras(base, test_atom_bound, si_only=pattern.kind is not Kind.RULE, budget=budget)
    for n, B in enumerate(algebras, 1):
        target_ok = B.validates_rule(rule)
        refuted = next((i for i, s in enumerate(specs) if refutes(B, s, search_budget)), None)
        if target_ok != (refuted is None):
            if target_ok:
                detail = f"B validates the target but refutes pattern member {refuted}"
            else:
                detail = "B refutes the target but validates every pattern member"
            return EquivalenceReport(False, n, B, detail, refuted)
    return EquivalenceReport(True, len(algebras), None, "exhaustive search completed")


def essential_members(pattern: RefutationPattern, search_budget: int = DEFAULT_SEARCH_BUDGET) -> Iterable[int]:
    """Indices of members whose own algebra refutes no other member.

    Deleting such a member cannot be compensated by the rest of the
    pattern, so its algebra is a candidate witness. Most members of a
    raw pattern are redundant: they embed some smaller member.
    """
    specs = pattern.specs()
    for i, mem in enumerate(pattern.members):
        if not any(refutes(mem.algebra, s, search_budget) for j, s in enumerate(specs) if j != i):
            yield i
