"""Definable filtrations of finite modal algebras.

Every construction works on the Boolean subalgebra ``A'`` of ``A`` generated
by the values of a formula set ``theta_prime``. ``A'`` is represented by its
atoms ("cells"), each a union of atoms of ``A``; an element of ``A'`` is a
bitmask over cells and :meth:`FiltrationResult.embed` maps it back into ``A``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable

from . import formula as fm
from .algebra import FiniteModalAlgebra, Valuation, _evaluate, bits
from .errors import PreconditionError


@dataclass(frozen=True)
class FiltrationResult:
    source: FiniteModalAlgebra
    valuation: dict[str, int]
    theta: fm.FormulaSet
    theta_prime: fm.FormulaSet
    cells: tuple[int, ...]
    algebra: FiniteModalAlgebra
    new_valuation: dict[str, int]
    domain: frozenset[int]
    method: str = ""

    @property
    def new_diamond(self) -> tuple[int, ...]:
        return self.algebra.diamond_of_atom

    def embed(self, x: int) -> int:
        """Inclusion ``A' -> A``."""
        out = 0
        for i in bits(x):
            out |= self.cells[i]
        return out

    def restrict(self, a: int) -> int:
        """Inverse of :meth:`embed` on elements of ``A'``; raises if ``a`` is not a union of cells."""
        out = 0
        for i, c in enumerate(self.cells):
            if a & c:
                if a & c != c:
                    raise ValueError("element is not in the filtrated subalgebra")
                out |= 1 << i
        return out

    def domain_in_source(self) -> list[int]:
        return sorted(self.embed(d) for d in self.domain)

    def with_diamond(self, table: Iterable[int]) -> "FiltrationResult":
        """Copy with a replaced cell diamond table (for fault injection)."""
        alg = FiniteModalAlgebra(self.algebra.atom_count, tuple(table), self.algebra.labels)
        return FiltrationResult(self.source, self.valuation, self.theta, self.theta_prime, self.cells,
                                alg, self.new_valuation, self.domain, self.method + "*")


@dataclass
class _Setup:
    source: FiniteModalAlgebra
    valuation: dict[str, int]
    theta: fm.FormulaSet
    theta_prime: fm.FormulaSet
    cells: tuple[int, ...]
    values: dict[fm.Formula, int]

    def restrict(self, a: int) -> int:
        out = 0
        for i, c in enumerate(self.cells):
            if a & c:
                out |= 1 << i
        return out

    def embed(self, x: int) -> int:
        out = 0
        for i in bits(x):
            out |= self.cells[i]
        return out

    def cell_cover(self, a: int) -> int:
        """Least element of ``A'`` above ``a``, as a cell mask."""
        return self.restrict(a)

    @property
    def domain(self) -> list[int]:
        """``{V(phi) : dia phi in theta}`` as elements of ``A'``; ``box phi`` counts as ``~dia ~phi``."""
        ds = {self.restrict(v) for v in _domain_values(self.theta, self.values, self.source.top)}
        return sorted(ds)

    def finish(self, table: Iterable[int], method: str) -> FiltrationResult:
        labels = tuple("+".join(self.source.labels[a] for a in bits(c)) for c in self.cells)
        alg = FiniteModalAlgebra(len(self.cells), tuple(table), labels)
        names = fm.variables(self.theta_prime)
        new_val = {p: self.restrict(self.valuation.get(p, 0)) for p in names}
        return FiltrationResult(self.source, dict(self.valuation), self.theta, self.theta_prime, self.cells,
                                alg, new_val, frozenset(self.domain), method)


def _domain_values(theta: fm.FormulaSet, values, top: int) -> set[int]:
    out = set()
    for f in theta:
        if isinstance(f, fm.Dia):
            out.add(values[f.arg])
        elif isinstance(f, fm.Box):
            out.add(top ^ values[f.arg])
    return out


def _prepare(A: FiniteModalAlgebra, V: Valuation, theta, theta_prime) -> _Setup:
    theta, theta_prime = _as_set(theta), _as_set(theta_prime)
    if fm.subformula_closure(theta) != theta:
        raise PreconditionError("theta is not subformula-closed")
    if fm.subformula_closure(theta_prime) != theta_prime:
        raise PreconditionError("theta_prime is not subformula-closed")
    if not theta <= theta_prime:
        raise PreconditionError("theta is not contained in theta_prime")
    # variables outside theta_prime are sent to 0
    in_prime = set(fm.variables(theta_prime))
    val = {p: A.check(v) for p, v in V.items() if p in in_prime}
    memo: dict = {}
    values = {}
    for phi in theta_prime:
        values[phi] = _evaluate(phi, val, A.top, A.diamond, memo)
    cells = tuple(A.boolean_subalgebra(values[phi] for phi in theta_prime))
    return _Setup(A, val, theta, theta_prime, cells, values)


def _as_set(formulas) -> fm.FormulaSet:
    return formulas if isinstance(formulas, fm.FormulaSet) else fm.FormulaSet(formulas)


@lru_cache(maxsize=4096)
def _gabbay_theta_prime(theta: fm.FormulaSet, m: int) -> fm.FormulaSet:
    # box phi is read as ~dia ~phi, so theta' must also carry dia^k ~phi
    return fm.theta_prime(theta, m) | fm.theta_prime(_box_free(theta), m)


@lru_cache(maxsize=4096)
def _box_free(theta: fm.FormulaSet) -> fm.FormulaSet:
    return fm.subformula_closure(fm.box_free(f) for f in theta)


def _d_join_closure(setup: _Setup) -> list[int]:
    """``D^v``: the (join, 0)-subsemilattice of ``A'`` generated by the domain."""
    out = {0}
    for d in setup.domain:
        out |= {x | d for x in out}
    return sorted(out)


def least_filtration(A: FiniteModalAlgebra, V: Valuation, theta, theta_prime) -> FiltrationResult:
    s = _prepare(A, V, theta, theta_prime)
    table = [s.cell_cover(A.diamond(c)) for c in s.cells]
    return s.finish(table, "least")


def _meet_or_top(values: Iterable[int], top: int) -> int:
    out = top
    for v in values:
        out &= v
    return out


def greatest_filtration(A: FiniteModalAlgebra, V: Valuation, theta, theta_prime) -> FiltrationResult:
    """``dia^g a = meet{dia b : a <= b, b in D^v}``; the empty meet is 1."""
    s = _prepare(A, V, theta, theta_prime)
    top = (1 << len(s.cells)) - 1
    djoin = _d_join_closure(s)
    dia_b = {b: s.restrict(A.diamond(s.embed(b))) for b in djoin}
    table = []
    for i in range(len(s.cells)):
        a = 1 << i
        table.append(_meet_or_top((dia_b[b] for b in djoin if a & ~b == 0), top))
    return s.finish(table, "greatest")


def lemmon_filtration(A: FiniteModalAlgebra, V: Valuation, theta, theta_prime) -> FiltrationResult:
    """``dia^L a = meet{dia b : dia a <= dia b, a | dia a <= b | dia b, b in D^v}``; empty meet is 1."""
    s = _prepare(A, V, theta, theta_prime)
    top = (1 << len(s.cells)) - 1
    djoin = _d_join_closure(s)
    info = {}
    for b in djoin:
        eb = s.embed(b)
        db = A.diamond(eb)
        info[b] = (db, eb | db)
    table = []
    for c in s.cells:
        da = A.diamond(c)
        da1 = c | da
        picks = (s.restrict(db) for b, (db, db1) in info.items() if da & ~db == 0 and da1 & ~db1 == 0)
        table.append(_meet_or_top(picks, top))
    return s.finish(table, "lemmon")


def gabbay_join_bound(cell_count: int) -> int:
    """Truncation bound for the join defining the Gabbay diamond: ``|A'|``."""
    return 1 << cell_count


def gabbay_filtration(A: FiniteModalAlgebra, V: Valuation, theta, m: int,
                      join_bound: int | None = None) -> FiltrationResult:
    """Gabbay's filtration for algebras validating ``dia^(m+1) p -> dia p``.

    ``dia0`` is the least filtration through ``theta_prime(theta, m)`` and
    ``dia1 a = join{dia0^(k*m+1) a : 0 <= k <= K}`` with ``K = |A'|``.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if not A.is_pretransitive(m):
        raise PreconditionError(f"algebra does not validate dia^{m + 1} p -> dia p")
    theta = _as_set(theta)
    s = _prepare(A, V, theta, _gabbay_theta_prime(theta, m))
    k_max = gabbay_join_bound(len(s.cells)) if join_bound is None else join_bound
    least = FiniteModalAlgebra(len(s.cells), tuple(s.cell_cover(A.diamond(c)) for c in s.cells))
    table = []
    for i in range(len(s.cells)):
        x = least.diamond(1 << i)
        acc = x
        for _ in range(k_max):
            x = least.diamond_n(x, m)
            acc |= x
        table.append(acc)
    return s.finish(table, f"gabbay(m={m})")


# -- verification ----------------------------------------------------------------

@dataclass
class FiltrationReport:
    """Outcome of :func:`verify_definable_filtration`; truthy iff every condition holds."""

    failures: list[tuple[str, str]] = field(default_factory=list)
    checked: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.ok

    def fail(self, condition: str, detail: str) -> None:
        self.failures.append((condition, detail))

    def conditions_failed(self) -> set[str]:
        return {c for c, _ in self.failures}

    def __str__(self) -> str:
        if self.ok:
            return "ok (" + ", ".join(self.checked) + ")"
        return "; ".join(f"{c}: {d}" for c, d in self.failures)


def verify_definable_filtration(A: FiniteModalAlgebra, V: Valuation, theta, theta_prime,
                                result: FiltrationResult, level: int = 1,
                                pretransitive: int | None = None) -> FiltrationReport:
    """Check the definable-filtration contract for ``result``.

    ``level`` is the CDC depth required for the domain (1 = plain CDC);
    ``pretransitive`` additionally requires the filtrated algebra to
    validate ``dia^(m+1) p -> dia p``.
    """
    rep = FiltrationReport()
    theta, theta_prime = _as_set(theta), _as_set(theta_prime)
    in_prime = set(fm.variables(theta_prime))
    val = {p: A.check(v) for p, v in V.items() if p in in_prime}
    Ap = result.algebra
    cells = result.cells
    memo: dict = {}
    values = {phi: _evaluate(phi, val, A.top, A.diamond, memo) for phi in theta_prime}

    rep.checked.append("subalgebra")
    expected = sorted(A.boolean_subalgebra(values[phi] for phi in theta_prime))
    if sorted(cells) != expected or Ap.atom_count != len(cells):
        rep.fail("subalgebra", "cells differ from the Boolean subalgebra generated by V[theta']")
        return rep

    rep.checked.append("valuation")
    for p in sorted(set(result.new_valuation) | in_prime):
        want = val.get(p, 0)
        got = result.embed(result.new_valuation.get(p, 0))
        if got != want:
            rep.fail("valuation", f"V'({p}) != V({p})" if p in in_prime else f"V'({p}) != 0")

    rep.checked.append("domain")
    dom = sorted(_domain_values(theta, values, A.top))
    if sorted(result.embed(d) for d in result.domain) != dom:
        rep.fail("domain", "D differs from {V(phi) : dia phi in theta}")

    rep.checked.append("stability")
    if Ap.diamond(0) != 0:
        rep.fail("normality", "dia' 0 != 0")
    for i, c in enumerate(cells):
        if A.diamond(c) & ~result.embed(Ap.diamond_of_atom[i]):
            rep.fail("stability", f"dia {A.format_element(c)} not below the image of dia' of that cell")

    rep.checked.append(f"cdc(level={level})")
    for d in sorted(result.domain):
        ed = result.embed(d)
        lhs, rhs = d, ed
        for k in range(1, level + 1):
            lhs = Ap.diamond(lhs)
            rhs = A.diamond(rhs)
            if result.embed(lhs) & ~rhs:
                rep.fail("cdc", f"i(dia'^{k} d) not below dia^{k} i(d) for d = {A.format_element(ed)}")
                break

    rep.checked.append("filtration-lemma")
    new_val, new_memo = {p: Ap.check(v) for p, v in result.new_valuation.items()}, {}
    for phi in theta:
        new = _evaluate(phi, new_val, Ap.top, Ap.diamond, new_memo)
        if _evaluate(phi, val, A.top, A.diamond, memo) != result.embed(new):
            rep.fail("filtration-lemma", f"V({phi}) != V'({phi})")

    if pretransitive is not None:
        rep.checked.append(f"pretransitive(m={pretransitive})")
        if not Ap.is_pretransitive(pretransitive):
            rep.fail("pretransitive", f"output refutes dia^{pretransitive + 1} p -> dia p")
    return rep


def filtrate(method: str, A: FiniteModalAlgebra, V: Valuation, theta, theta_prime=None, m: int = 1) -> FiltrationResult:
    """Dispatch by name: ``least``, ``greatest``, ``lemmon`` or ``gabbay``."""
    theta = fm.subformula_closure(theta)
    if method == "gabbay":
        return gabbay_filtration(A, V, theta, m)
    builders: dict[str, Callable] = {
        "least": least_filtration, "greatest": greatest_filtration, "lemmon": lemmon_filtration,
    }
    if method not in builders:
        raise ValueError(f"unknown filtration {method!r}")
    tp = theta if theta_prime is None else fm.subformula_closure(theta_prime) | theta
    return builders[method](A, V, theta, tp)
