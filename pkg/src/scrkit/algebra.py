"""Finite modal algebras as powersets of atoms.

An element is an ``int`` bitmask over ``atom_count`` atoms. The diamond is
stored atom-wise; ``diamond(a)`` is the join of ``diamond_of_atom[i]`` over
the atoms ``i`` below ``a``, so normality and additivity hold by
construction. Box is always derived as ``~dia~``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from . import formula as fm
from .errors import AlgebraMismatch, BudgetExceeded, PreconditionError

DEFAULT_VALUATION_BUDGET = 1 << 24

Valuation = Mapping[str, int]


def bits(x: int) -> Iterator[int]:
    """Indices of the set bits of ``x`` in increasing order."""
    i = 0
    while x:
        if x & 1:
            yield i
        x >>= 1
        i += 1


def popcount(x: int) -> int:
    return bin(x).count("1")


@dataclass(frozen=True, eq=False)
class FiniteModalAlgebra:
    """Powerset Boolean algebra over ``atom_count`` atoms with an additive diamond."""

    atom_count: int
    diamond_of_atom: tuple[int, ...]
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        n = self.atom_count
        if n < 0:
            raise ValueError("atom_count must be non-negative")
        object.__setattr__(self, "diamond_of_atom", tuple(int(x) for x in self.diamond_of_atom))
        if len(self.diamond_of_atom) != n:
            raise ValueError(f"diamond table has {len(self.diamond_of_atom)} entries, expected {n}")
        full = (1 << n) - 1
        for i, d in enumerate(self.diamond_of_atom):
            if d & ~full or d < 0:
                raise AlgebraMismatch(f"diamond of atom {i} is not an element of this algebra")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"x{i}" for i in range(n)))
        elif len(self.labels) != n or len(set(self.labels)) != n:
            raise ValueError("labels must be distinct and one per atom")
        else:
            object.__setattr__(self, "labels", tuple(self.labels))

    # -- construction helpers --------------------------------------------------

    @classmethod
    def from_diamond(cls, diamond: Mapping[str, Iterable[str]], atoms: Sequence[str] | None = None):
        """Build from ``{"a": ["b"], ...}`` style label maps."""
        atoms = list(atoms) if atoms is not None else list(diamond)
        index = {a: i for i, a in enumerate(atoms)}
        table = []
        for a in atoms:
            mask = 0
            for b in diamond.get(a, ()):
                if b not in index:
                    raise ValueError(f"unknown atom {b!r}")
                mask |= 1 << index[b]
            table.append(mask)
        return cls(len(atoms), tuple(table), tuple(atoms))

    # -- equality is structural (labels ignored) ---------------------------------

    def __eq__(self, other):
        if not isinstance(other, FiniteModalAlgebra):
            return NotImplemented
        return self.atom_count == other.atom_count and self.diamond_of_atom == other.diamond_of_atom

    def __hash__(self):
        return hash((self.atom_count, self.diamond_of_atom))

    def __repr__(self):
        return f"FiniteModalAlgebra(atoms={list(self.labels)}, diamond={self.to_json()['diamond']})"

    # -- Boolean structure -------------------------------------------------------

    @property
    def top(self) -> int:
        return (1 << self.atom_count) - 1

    @property
    def bottom(self) -> int:
        return 0

    @property
    def size(self) -> int:
        return 1 << self.atom_count

    def elements(self) -> range:
        return range(self.size)

    def atom(self, i: int) -> int:
        return 1 << i

    def check(self, a: int) -> int:
        if not isinstance(a, (int, np.integer)) or a < 0 or a > self.top:
            raise AlgebraMismatch(f"{a!r} is not an element of a {self.atom_count}-atom algebra")
        return int(a)

    def neg(self, a: int) -> int:
        return self.top ^ a

    def leq(self, a: int, b: int) -> bool:
        return a & ~b == 0

    # -- modal structure ---------------------------------------------------------

    @cached_property
    def diamond_table(self) -> tuple[int, ...]:
        """``diamond(a)`` for every element, indexed by bitmask."""
        table = [0] * self.size
        for a in range(1, self.size):
            low = a & -a
            table[a] = table[a ^ low] | self.diamond_of_atom[low.bit_length() - 1]
        return tuple(table)

    @cached_property
    def _np_table(self) -> np.ndarray:
        return np.asarray(self.diamond_table, dtype=np.int64)

    def diamond(self, a: int) -> int:
        if self.atom_count <= 16:
            return self.diamond_table[a]
        out = 0
        for i in bits(a):
            out |= self.diamond_of_atom[i]
        return out

    def box(self, a: int) -> int:
        return self.top ^ self.diamond(self.top ^ a)

    def diamond_n(self, a: int, k: int) -> int:
        for _ in range(k):
            a = self.diamond(a)
        return a

    def box_n(self, a: int, k: int) -> int:
        for _ in range(k):
            a = self.box(a)
        return a

    def box_le(self, a: int, n: int) -> int:
        """``a & box a & ... & box^n a``."""
        out, cur = a, a
        for _ in range(n):
            cur = self.box(cur)
            out &= cur
        return out

    def diamond_le(self, a: int, n: int) -> int:
        out, cur = a, a
        for _ in range(n):
            cur = self.diamond(cur)
            out |= cur
        return out

    def box_star(self, a: int) -> int:
        """Fixpoint of the descending chain ``box_le(a, n)``: points whose whole cone lies in ``a``."""
        cur = a
        while True:
            nxt = cur & self.box(cur)
            if nxt == cur:
                return cur
            cur = nxt

    # -- evaluation ----------------------------------------------------------------

    def eval(self, phi: fm.Formula, valuation: Valuation | None = None) -> int:
        """Value of ``phi``; unmapped variables are 0."""
        valuation = valuation or {}
        for name, v in valuation.items():
            self.check(v)
        return _evaluate(phi, valuation, self.top, self.diamond, {})

    def eval_many(self, phi: fm.Formula, columns: Mapping[str, np.ndarray], memo=None) -> np.ndarray:
        """Vectorised :meth:`eval` over parallel arrays of variable values."""
        n = len(next(iter(columns.values()))) if columns else 1
        zero = np.zeros(n, dtype=np.int64)
        cols = {k: np.asarray(v, dtype=np.int64) for k, v in columns.items()}
        table = self._np_table
        out = _evaluate(phi, _DefaultColumns(cols, zero), self.top, lambda a: table[a], memo if memo is not None else {})
        if isinstance(out, (int, np.integer)):
            out = np.full(n, out, dtype=np.int64)
        return out

    def _valuation_columns(self, names: Sequence[str], budget: int) -> Iterator[dict[str, np.ndarray]]:
        k = len(names)
        total = self.size ** k
        if total > budget:
            raise BudgetExceeded(
                f"{k} variable(s) over {self.size} elements needs {total} valuations; budget is {budget}",
                needed=total, budget=budget,
            )
        chunk = 1 << 16
        n = self.atom_count
        for start in range(0, total, chunk):
            idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
            cols = {}
            for j, name in enumerate(names):
                cols[name] = (idx >> (n * j)) & self.top if n else np.zeros_like(idx)
            yield cols

    def countervaluation(self, phi: fm.Formula, budget: int = DEFAULT_VALUATION_BUDGET) -> dict[str, int] | None:
        """Some valuation with ``eval(phi) != 1``, or ``None`` when ``phi`` is valid."""
        names = fm.variables(phi)
        for cols in self._valuation_columns(names, budget):
            val = self.eval_many(phi, cols)
            bad = np.nonzero(val != self.top)[0]
            if len(bad):
                i = bad[0]
                return {name: int(cols[name][i]) for name in names}
        return None

    def validates_formula(self, phi: fm.Formula, budget: int = DEFAULT_VALUATION_BUDGET) -> bool:
        return self.countervaluation(phi, budget) is None

    def rule_countervaluation(self, premises: Iterable[fm.Formula], conclusions: Iterable[fm.Formula],
                              budget: int = DEFAULT_VALUATION_BUDGET) -> dict[str, int] | None:
        """A valuation making every premise 1 and every conclusion different from 1."""
        premises, conclusions = list(premises), list(conclusions)
        names = fm.variables([*premises, *conclusions])
        for cols in self._valuation_columns(names, budget):
            memo: dict = {}
            ok = None
            for g in premises:
                hit = self.eval_many(g, cols, memo) == self.top
                ok = hit if ok is None else ok & hit
            for d in conclusions:
                miss = self.eval_many(d, cols, memo) != self.top
                ok = miss if ok is None else ok & miss
            if ok is None:
                # empty rule: refuted by every valuation
                return {name: 0 for name in names}
            found = np.nonzero(ok)[0]
            if len(found):
                i = found[0]
                return {name: int(cols[name][i]) for name in names}
        return None

    def validates_rule(self, rule, budget: int = DEFAULT_VALUATION_BUDGET) -> bool:
        return self.rule_countervaluation(rule.premises, rule.conclusions, budget) is None

    # -- frame conditions and subdirect irreducibility -----------------------------

    def is_pretransitive(self, m: int) -> bool:
        """``dia^(m+1) x <= dia x`` on atoms, hence everywhere."""
        if m < 1:
            raise ValueError("m must be >= 1")
        for i, d in enumerate(self.diamond_of_atom):
            if self.diamond_n(d, m) & ~d:
                return False
        return True

    def opremum(self) -> int | None:
        """The least opremum, or ``None`` when the algebra is not s.i.

        Every ``a != 1`` lies below a coatom, so it is enough to join the
        ``box_star`` of the coatoms.
        """
        if self.atom_count == 0:
            return None
        c = 0
        for i in range(self.atom_count):
            c |= self.box_star(self.top ^ (1 << i))
        return None if c == self.top else c

    def is_si(self) -> bool:
        return self.opremum() is not None

    # -- box-filters and quotients -------------------------------------------------

    def is_box_filter_generator(self, e: int) -> bool:
        return self.leq(e, self.box(e))

    def box_filters(self) -> list[int]:
        """Generators ``e`` with ``e <= box e``; each generates the box-filter ``up(e)``."""
        return [e for e in self.elements() if self.is_box_filter_generator(e)]

    def least_nontrivial_box_filter(self) -> int | None:
        """Generator of the least box-filter strictly above ``up(1)``, if one exists."""
        u = 0
        for e in self.box_filters():
            if e != self.top:
                u |= e
        if self.atom_count == 0 or u == self.top:
            return None
        return u

    def quotient(self, e: int) -> "Quotient":
        if not self.is_box_filter_generator(e):
            raise PreconditionError(f"{self.format_element(e)} does not generate a box-filter")
        keep = list(bits(e))
        pos = {a: j for j, a in enumerate(keep)}
        table = tuple(_compress(self.diamond_of_atom[a] & e, pos) for a in keep)
        alg = FiniteModalAlgebra(len(keep), table, tuple(self.labels[a] for a in keep))
        return Quotient(self, alg, e, tuple(keep))

    def si_quotients(self) -> list["Quotient"]:
        """s.i. quotients by box-filters, one per isomorphism class."""
        out, seen = [], set()
        for e in sorted(self.box_filters(), key=lambda e: (-popcount(e), e)):
            q = self.quotient(e)
            if not q.algebra.is_si():
                continue
            key = canonical_key(q.algebra)
            if key not in seen:
                seen.add(key)
                out.append(q)
        return out

    def si_witness_quotient(self, a: int, b: int, m: int) -> "Quotient":
        """Quotient by a box-filter maximal among those containing ``box_le(a, m)`` and not ``b``."""
        if not self.is_pretransitive(m):
            raise PreconditionError(f"algebra does not validate dia^{m + 1} p -> dia p")
        g = self.box_le(a, m)
        if self.leq(g, b):
            raise PreconditionError("box_le(a, m) <= b: no box-filter separates them")
        cands = [e for e in self.box_filters() if self.leq(e, g) and not self.leq(e, b)]
        # larger filter == smaller generator; pick a minimal generator deterministically
        cands.sort(key=lambda e: (popcount(e), e))
        for e in cands:
            if not any(f != e and self.leq(f, e) for f in cands):
                return self.quotient(e)
        raise AssertionError("unreachable: g itself is a candidate")

    # -- Boolean subalgebras ---------------------------------------------------------

    def boolean_subalgebra(self, gens: Iterable[int]) -> list[int]:
        """Atoms of the subalgebra generated by ``gens``, as a partition of this algebra's atoms."""
        cells = [self.top] if self.atom_count else []
        for g in gens:
            self.check(g)
            nxt = []
            for c in cells:
                for part in (c & g, c & ~g & self.top):
                    if part:
                        nxt.append(part)
            cells = nxt
        return sorted(cells, key=lambda c: (c & -c))

    # -- formatting ------------------------------------------------------------------

    def element_labels(self, a: int) -> list[str]:
        return sorted(self.labels[i] for i in bits(a))

    def format_element(self, a: int) -> str:
        return "{" + ",".join(self.element_labels(a)) + "}"

    def element_from_labels(self, names: Iterable[str]) -> int:
        index = {lab: i for i, lab in enumerate(self.labels)}
        out = 0
        for nm in names:
            if nm not in index:
                raise AlgebraMismatch(f"unknown atom label {nm!r}")
            out |= 1 << index[nm]
        return out

    def to_json(self) -> dict:
        return {
            "atoms": list(self.labels),
            "diamond": {lab: self.element_labels(self.diamond_of_atom[i]) for i, lab in enumerate(self.labels)},
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "FiniteModalAlgebra":
        atoms = list(data["atoms"])
        return cls.from_diamond(data.get("diamond", {}), atoms)


@dataclass(frozen=True)
class Quotient:
    """``source / up(generator)``; the projection is ``a -> a & generator`` re-indexed."""

    source: FiniteModalAlgebra
    algebra: FiniteModalAlgebra
    generator: int
    kept_atoms: tuple[int, ...]

    def __call__(self, a: int) -> int:
        return _compress(a & self.generator, {x: j for j, x in enumerate(self.kept_atoms)})

    def __iter__(self):
        # unpacks as (algebra, projection)
        return iter((self.algebra, self))


def _compress(a: int, pos: Mapping[int, int]) -> int:
    out = 0
    for i in bits(a):
        out |= 1 << pos[i]
    return out


class _DefaultColumns(dict):
    def __init__(self, cols, zero):
        super().__init__(cols)
        self.zero = zero

    def get(self, key, default=None):
        return super().get(key, self.zero)


def _evaluate(phi: fm.Formula, valuation, top, dia: Callable, memo: dict):
    """Homomorphic extension of ``valuation``; works on ints or numpy arrays."""
    key = id(phi)
    hit = memo.get(key)
    if hit is not None and hit[0] is phi:
        return hit[1]
    t = type(phi)
    if t is fm.Var:
        out = valuation.get(phi.name, 0)
    elif t is fm.Bot:
        out = 0
    elif t is fm.Top:
        out = top
    elif t is fm.Not:
        out = top ^ _evaluate(phi.arg, valuation, top, dia, memo)
    elif t is fm.Dia:
        out = dia(_evaluate(phi.arg, valuation, top, dia, memo))
    elif t is fm.Box:
        out = top ^ dia(top ^ _evaluate(phi.arg, valuation, top, dia, memo))
    else:
        a = _evaluate(phi.left, valuation, top, dia, memo)
        b = _evaluate(phi.right, valuation, top, dia, memo)
        if t is fm.And:
            out = a & b
        elif t is fm.Or:
            out = a | b
        elif t is fm.Imp:
            out = (top ^ a) | b
        elif t is fm.Iff:
            out = top ^ (a ^ b)
        else:
            raise TypeError(f"unknown formula node {phi!r}")
    memo[key] = (phi, out)
    return out


# -- isomorphism -----------------------------------------------------------------

def _permuted_table(alg: FiniteModalAlgebra, perm: Sequence[int]) -> tuple[int, ...]:
    # perm[old] = new
    n = alg.atom_count
    table = [0] * n
    for old in range(n):
        d = 0
        for j in bits(alg.diamond_of_atom[old]):
            d |= 1 << perm[j]
        table[perm[old]] = d
    return tuple(table)


def canonical_key(alg: FiniteModalAlgebra, marked: Iterable[int] = ()) -> tuple:
    """Isomorphism invariant: minimum over atom permutations of the diamond table
    (and of the images of ``marked`` elements, for isomorphism-with-domain)."""
    marked = sorted(set(marked))
    n = alg.atom_count
    best = None
    for perm in itertools.permutations(range(n)):
        table = _permuted_table(alg, perm)
        dom = tuple(sorted(_compress(x, dict(enumerate(perm))) for x in marked))
        key = (table, dom)
        if best is None or key < best:
            best = key
    if best is None:
        best = ((), tuple(marked))
    return (n, *best)


def find_isomorphism(a: FiniteModalAlgebra, b: FiniteModalAlgebra) -> tuple[int, ...] | None:
    """Atom permutation ``perm`` (atom i of ``a`` -> atom perm[i] of ``b``) preserving the diamond."""
    if a.atom_count != b.atom_count:
        return None
    for perm in itertools.permutations(range(a.atom_count)):
        if _permuted_table(a, perm) == b.diamond_of_atom:
            return perm
    return None


def is_isomorphic(a: FiniteModalAlgebra, b: FiniteModalAlgebra) -> bool:
    return find_isomorphism(a, b) is not None


def two_element(reflexive: bool = True) -> FiniteModalAlgebra:
    return FiniteModalAlgebra(1, (1 if reflexive else 0,), ("x",))


def degenerate() -> FiniteModalAlgebra:
    return FiniteModalAlgebra(0, ())
