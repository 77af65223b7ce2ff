"""Finite Kripke frames, relation powers and the finite duality with algebras.

Relations are stored as rows of bitmasks: bit ``y`` of ``rows[x]`` is set iff
``x R y``. Under duality point ``i`` is atom ``i`` and
``diamond(atom y) = R^-1[y]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .algebra import FiniteModalAlgebra, bits

PointMap = Sequence[int]


@dataclass(frozen=True, eq=False)
class FiniteFrame:
    rows: tuple[int, ...]
    points: tuple[str, ...] = field(default=())

    def __post_init__(self):
        n = len(self.rows)
        object.__setattr__(self, "rows", tuple(int(r) for r in self.rows))
        full = (1 << n) - 1
        if any(r & ~full or r < 0 for r in self.rows):
            raise ValueError("relation row wider than the point set")
        if not self.points:
            object.__setattr__(self, "points", tuple(f"x{i}" for i in range(n)))
        elif len(self.points) != n or len(set(self.points)) != n:
            raise ValueError("points must be distinct and match the relation size")
        else:
            object.__setattr__(self, "points", tuple(self.points))

    @classmethod
    def from_edges(cls, points: Sequence[str], edges: Iterable[Sequence[str]]) -> "FiniteFrame":
        index = {p: i for i, p in enumerate(points)}
        rows = [0] * len(points)
        for x, y in edges:
            if x not in index or y not in index:
                raise ValueError(f"edge ({x!r}, {y!r}) mentions an unknown point")
            rows[index[x]] |= 1 << index[y]
        return cls(tuple(rows), tuple(points))

    @classmethod
    def from_json(cls, data: Mapping) -> "FiniteFrame":
        return cls.from_edges(list(data["points"]), data.get("edges", []))

    def to_json(self) -> dict:
        return {"points": list(self.points), "edges": [list(e) for e in self.edges()]}

    def __eq__(self, other):
        if not isinstance(other, FiniteFrame):
            return NotImplemented
        return self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return f"FiniteFrame({self.to_json()})"

    def __len__(self):
        return len(self.rows)

    @property
    def size(self) -> int:
        return len(self.rows)

    @property
    def all_points(self) -> int:
        return (1 << len(self.rows)) - 1

    def edges(self) -> list[tuple[str, str]]:
        return [(self.points[x], self.points[y]) for x, r in enumerate(self.rows) for y in bits(r)]

    def successors(self, x: int) -> int:
        return self.rows[x]

    def image(self, s: int, rows: Sequence[int] | None = None) -> int:
        """``R[s]`` for a point set ``s``."""
        rows = self.rows if rows is None else rows
        out = 0
        for x in bits(s):
            out |= rows[x]
        return out

    def preimage(self, s: int) -> int:
        """``R^-1[s]``."""
        return sum(1 << x for x, r in enumerate(self.rows) if r & s)

    def relation_power(self, k: int) -> tuple[int, ...]:
        """Rows of ``R^k``; ``R^0`` is the identity."""
        if k < 0:
            raise ValueError("k must be >= 0")
        cur = tuple(1 << x for x in range(self.size))
        for _ in range(k):
            cur = tuple(self.image(r) for r in cur)
        return cur

    def is_pretransitive(self, m: int) -> bool:
        """``R^(m+1)`` contained in ``R``."""
        if m < 1:
            raise ValueError("m must be >= 1")
        power = self.relation_power(m + 1)
        return all(p & ~r == 0 for p, r in zip(power, self.rows))

    def truth_set(self, phi, valuation: Mapping[str, int] | None = None) -> int:
        """Points satisfying ``phi`` under a valuation of point sets (Kripke semantics)."""
        from . import formula as fm

        valuation = valuation or {}
        full = self.all_points

        def go(f):
            if isinstance(f, fm.Var):
                return valuation.get(f.name, 0)
            if isinstance(f, fm.Bot):
                return 0
            if isinstance(f, fm.Top):
                return full
            if isinstance(f, fm.Not):
                return full ^ go(f.arg)
            if isinstance(f, fm.Dia):
                s = go(f.arg)
                return sum(1 << x for x, r in enumerate(self.rows) if r & s)
            if isinstance(f, fm.Box):
                s = go(f.arg)
                return sum(1 << x for x, r in enumerate(self.rows) if r & ~s == 0)
            a, b = go(f.left), go(f.right)
            if isinstance(f, fm.And):
                return a & b
            if isinstance(f, fm.Or):
                return a | b
            if isinstance(f, fm.Imp):
                return (full ^ a) | b
            return full ^ (a ^ b)

        return go(phi)

    def format_set(self, s: int) -> str:
        return "{" + ",".join(sorted(self.points[i] for i in bits(s))) + "}"

    def set_from_labels(self, names: Iterable[str]) -> int:
        index = {p: i for i, p in enumerate(self.points)}
        out = 0
        for nm in names:
            if nm not in index:
                raise ValueError(f"unknown point {nm!r}")
            out |= 1 << index[nm]
        return out


def dual_algebra(frame: FiniteFrame) -> FiniteModalAlgebra:
    n = frame.size
    table = tuple(frame.preimage(1 << y) for y in range(n))
    return FiniteModalAlgebra(n, table, frame.points)


def dual_frame(alg: FiniteModalAlgebra) -> FiniteFrame:
    n = alg.atom_count
    rows = [0] * n
    for y, d in enumerate(alg.diamond_of_atom):
        for x in bits(d):
            rows[x] |= 1 << y
    return FiniteFrame(tuple(rows), alg.labels)


# -- stable maps -------------------------------------------------------------

def is_stable_map(f: PointMap, source: FiniteFrame, target: FiniteFrame) -> bool:
    """``x R y`` implies ``f(x) Q f(y)``."""
    if len(f) != source.size or any(not 0 <= v < target.size for v in f):
        raise ValueError("point map is not total from source to target")
    for x, r in enumerate(source.rows):
        qx = target.rows[f[x]]
        for y in bits(r):
            if not qx >> f[y] & 1:
                return False
    return True


def _image_under(f: PointMap, s: int) -> int:
    out = 0
    for x in bits(s):
        out |= 1 << f[x]
    return out


def satisfies_m_cdc(f: PointMap, source: FiniteFrame, target: FiniteFrame, domain: Iterable[int], m: int) -> bool:
    """For every ``D`` in ``domain`` and ``1 <= k <= m``:
    ``Q^k[f(x)]`` meets ``D`` implies ``f(R^k[x])`` meets ``D``."""
    domain = list(domain)
    if not domain or m < 1:
        return True
    r_pow = source.rows
    q_pow = target.rows
    for k in range(1, m + 1):
        for x in range(source.size):
            fr = _image_under(f, r_pow[x])
            q = q_pow[f[x]]
            for d in domain:
                if q & d and not fr & d:
                    return False
        if k < m:
            r_pow = tuple(source.image(r) for r in r_pow)
            q_pow = tuple(target.image(r) for r in q_pow)
    return True


def satisfies_cdc(f: PointMap, source: FiniteFrame, target: FiniteFrame, domain: Iterable[int]) -> bool:
    return satisfies_m_cdc(f, source, target, domain, 1)


def is_surjective(f: PointMap, target: FiniteFrame) -> bool:
    return set(f) == set(range(target.size))


def stable_maps(source: FiniteFrame, target: FiniteFrame, surjective: bool = True) -> list[tuple[int, ...]]:
    """All stable (surjective) maps, by brute force. Only for tiny frames."""
    out = []
    for f in itertools.product(range(target.size), repeat=source.size):
        if surjective and not is_surjective(f, target):
            continue
        if is_stable_map(f, source, target):
            out.append(f)
    return out


# -- named frames used throughout the docs and tests --------------------------

def chain(n: int, labels: Sequence[str] | None = None, reflexive: bool = False) -> FiniteFrame:
    labels = list(labels) if labels else [chr(ord("a") + i) for i in range(n)]
    edges = [(labels[i], labels[i + 1]) for i in range(n - 1)]
    if reflexive:
        edges += [(p, p) for p in labels]
    return FiniteFrame.from_edges(labels, edges)


def disjoint_union(a: FiniteFrame, b: FiniteFrame, suffixes: tuple[str, str] = ("", "'")) -> FiniteFrame:
    na = a.size
    rows = list(a.rows) + [r << na for r in b.rows]
    pa = [p + suffixes[0] for p in a.points]
    pb = [p + suffixes[1] for p in b.points]
    if len(set(pa) | set(pb)) != len(pa) + len(pb):
        pa = [f"l{p}" for p in a.points]
        pb = [f"r{p}" for p in b.points]
    return FiniteFrame(tuple(rows), tuple(pa + pb))
