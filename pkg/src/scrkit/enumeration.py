"""Exhaustive enumeration of small frames (and their dual algebras) up to isomorphism.

Frames with ``n`` points are grown from canonical frames with ``n - 1``
points by adding one point with every choice of in-edges, out-edges and
loop. This is complete for any property inherited by induced subframes,
which covers ``R^(m+1) <= R``.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Callable, Iterator

from .algebra import FiniteModalAlgebra, bits
from .frame import FiniteFrame, dual_algebra


def _relabel(rows: tuple[int, ...], order: tuple[int, ...]) -> tuple[int, ...]:
    # order[new] = old
    pos = {old: new for new, old in enumerate(order)}
    out = []
    for old in order:
        r = 0
        for y in bits(rows[old]):
            r |= 1 << pos[y]
        out.append(r)
    return tuple(out)


def _orderings(rows: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
    n = len(rows)
    indeg = [0] * n
    for r in rows:
        for y in bits(r):
            indeg[y] += 1
    inv = [(rows[x] >> x & 1, bin(rows[x]).count("1"), indeg[x]) for x in range(n)]
    classes: dict[tuple, list[int]] = {}
    for x in range(n):
        classes.setdefault(inv[x], []).append(x)
    groups = [classes[k] for k in sorted(classes)]
    for parts in itertools.product(*(itertools.permutations(g) for g in groups)):
        yield tuple(x for p in parts for x in p)


def canonical_rows(rows: tuple[int, ...]) -> tuple[int, ...]:
    """Canonical representative of the isomorphism class of a relation."""
    return min(_relabel(rows, order) for order in _orderings(rows))


def canonical_frame(frame: FiniteFrame) -> FiniteFrame:
    return FiniteFrame(canonical_rows(frame.rows))


def _pretransitive_rows(rows: tuple[int, ...], m: int) -> bool:
    cur = rows
    for _ in range(m):
        cur = tuple(_img(rows, r) for r in cur)
    return all(c & ~r == 0 for c, r in zip(cur, rows))


def _img(rows, s):
    out = 0
    while s:
        low = s & -s
        out |= rows[low.bit_length() - 1]
        s ^= low
    return out


@lru_cache(maxsize=None)
def _frames(n: int, m: int | None) -> tuple[tuple[int, ...], ...]:
    if n == 0:
        return ((),)
    prev = _frames(n - 1, m)
    seen = set()
    k = n - 1
    for rows in prev:
        for outs, ins, loop in itertools.product(range(1 << k), range(1 << k), (0, 1)):
            new = [r | ((ins >> x & 1) << k) for x, r in enumerate(rows)]
            new.append(outs | (loop << k))
            new = tuple(new)
            if m is not None and not _pretransitive_rows(new, m):
                continue
            seen.add(canonical_rows(new))
    return tuple(sorted(seen))


def frames(n: int, m: int | None = None) -> list[FiniteFrame]:
    """All frames on ``n`` points up to isomorphism; with ``m``, only those with ``R^(m+1) <= R``."""
    return [FiniteFrame(rows) for rows in _frames(n, m)]


def frames_up_to(max_points: int, m: int | None = None, min_points: int = 1,
                 where: Callable[[FiniteFrame], bool] | None = None) -> list[FiniteFrame]:
    out = []
    for n in range(min_points, max_points + 1):
        out.extend(f for f in frames(n, m) if where is None or where(f))
    return out


def algebras_up_to(max_atoms: int, m: int | None = None, min_atoms: int = 1, si_only: bool = False) -> list[FiniteModalAlgebra]:
    """Dual algebras of :func:`frames_up_to`, optionally keeping only s.i. ones."""
    out = []
    for f in frames_up_to(max_atoms, m, min_atoms):
        alg = dual_algebra(f)
        if si_only and not alg.is_si():
            continue
        out.append(alg)
    return out


def labeled_relations(n: int) -> Iterator[tuple[int, ...]]:
    """Every relation on ``n`` labelled points (``2**(n*n)`` of them)."""
    for code in range(1 << (n * n)):
        yield tuple((code >> (n * x)) & ((1 << n) - 1) for x in range(n))
