"""Search for stable embeddings with (m-)CDC between finite modal algebras.

A Boolean embedding ``h: A -> B`` of finite powerset algebras is the same
thing as a surjection ``s`` from the atoms of ``B`` onto the atoms of ``A``:
``h(a)`` is the union of the fibres of ``s`` over the atoms below ``a``.
The search enumerates such surjections in lexicographic order and prunes
on stability edge by edge, so the first witness found is the
lexicographically least one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .algebra import FiniteModalAlgebra
from .errors import BudgetExceeded
from .frame import FiniteFrame, dual_frame, is_stable_map, satisfies_m_cdc

DEFAULT_SEARCH_BUDGET = 10**7


@dataclass(frozen=True)
class StableEmbeddingWitness:
    source: FiniteModalAlgebra      # A
    target: FiniteModalAlgebra      # B
    surjection: tuple[int, ...]     # atom of B -> atom of A
    level: int
    domain: frozenset[int]

    def __call__(self, a: int) -> int:
        """The induced Boolean embedding ``h(a)``."""
        out = 0
        for y, x in enumerate(self.surjection):
            if a >> x & 1:
                out |= 1 << y
        return out

    def element_map(self) -> list[int]:
        return [self(a) for a in self.source.elements()]

    def to_json(self) -> dict:
        return {
            "surjection": {self.target.labels[y]: self.source.labels[x] for y, x in enumerate(self.surjection)},
            "level": self.level,
            "domain": sorted((self.source.element_labels(d) for d in self.domain), key=lambda s: (len(s), s)),
        }


def check_stable_embedding(A: FiniteModalAlgebra, B: FiniteModalAlgebra, h: Sequence[int],
                           domain: Iterable[int] = (), level: int = 0) -> bool:
    """Algebra-side check of an element map ``h`` (indexed by elements of ``A``).

    Boolean embedding, ``dia h(a) <= h(dia a)`` for all ``a``, and
    ``h(dia^k d) <= dia^k h(d)`` for ``d`` in ``domain`` and ``1 <= k <= level``.
    """
    if len(h) != A.size:
        return False
    if h[0] != 0 or h[A.top] != B.top:
        return False
    for a in A.elements():
        if h[A.top ^ a] != B.top ^ h[a]:
            return False
        for b in A.elements():
            if h[a | b] != h[a] | h[b]:
                return False
    if len(set(h)) != len(h):
        return False
    for a in A.elements():
        if B.diamond(h[a]) & ~h[A.diamond(a)]:
            return False
    for d in domain:
        x, y = d, h[d]
        for _ in range(level):
            x, y = A.diamond(x), B.diamond(y)
            if h[x] & ~y:
                return False
    return True


def _search(A: FiniteModalAlgebra, B: FiniteModalAlgebra, domain: Sequence[int], level: int,
            budget: int, first_only: bool = True):
    na, nb = A.atom_count, B.atom_count
    if na > nb or (na == 0) != (nb == 0):
        return []
    fa, fb = dual_frame(A), dual_frame(B)
    ra, rb = fa.rows, fb.rows
    # edges of B restricted to already-assigned points, for incremental pruning
    back = [[y for y in range(x + 1) if rb[x] >> y & 1 or rb[y] >> x & 1] for x in range(nb)]
    sigma = [0] * nb
    counts = [0] * na
    missing = [na]
    found = []
    work = [0]

    def consistent(x: int) -> bool:
        sx = sigma[x]
        for y in back[x]:
            sy = sigma[y]
            if rb[x] >> y & 1 and not ra[sx] >> sy & 1:
                return False
            if rb[y] >> x & 1 and not ra[sy] >> sx & 1:
                return False
        return True

    def rec(x: int) -> bool:
        if x == nb:
            if missing[0] == 0 and satisfies_m_cdc(sigma, fb, fa, domain, level):
                found.append(tuple(sigma))
                return first_only
            return False
        for v in range(na):
            work[0] += 1
            if work[0] > budget:
                raise BudgetExceeded(f"embedding search exceeded {budget} steps", budget=budget)
            sigma[x] = v
            if not consistent(x):
                continue
            counts[v] += 1
            if counts[v] == 1:
                missing[0] -= 1
            if missing[0] <= nb - x - 1 and rec(x + 1):
                return True
            counts[v] -= 1
            if counts[v] == 0:
                missing[0] += 1
        return False

    if nb == 0:
        return [()]
    rec(0)
    return found


def find_stable_embedding(A: FiniteModalAlgebra, B: FiniteModalAlgebra, domain: Iterable[int] = (),
                          level: int = 1, budget: int = DEFAULT_SEARCH_BUDGET) -> StableEmbeddingWitness | None:
    """Least stable embedding ``A -> B`` with ``level``-CDC for ``domain``, or ``None``.

    ``level = 0`` asks for a bare stable embedding. Raises
    :class:`BudgetExceeded` if more than ``budget`` partial assignments
    are examined.
    """
    domain = frozenset(A.check(d) for d in domain)
    hits = _search(A, B, sorted(domain), level, budget)
    if not hits:
        return None
    return StableEmbeddingWitness(A, B, hits[0], level, domain)


def all_stable_embeddings(A: FiniteModalAlgebra, B: FiniteModalAlgebra, domain: Iterable[int] = (),
                          level: int = 1, budget: int = DEFAULT_SEARCH_BUDGET) -> list[StableEmbeddingWitness]:
    domain = frozenset(domain)
    return [StableEmbeddingWitness(A, B, s, level, domain)
            for s in _search(A, B, sorted(domain), level, budget, first_only=False)]


def find_stable_surjection(source: FiniteFrame, target: FiniteFrame, domain: Iterable[int] = (),
                           level: int = 1) -> tuple[int, ...] | None:
    """Frame-side brute force: least stable surjection ``source -> target`` with ``level``-CDC.

    Plain product enumeration with no pruning; meant as an independent
    cross-check of :func:`find_stable_embedding` on small frames.
    """
    import itertools

    domain = list(domain)
    for f in itertools.product(range(target.size), repeat=source.size):
        if len(set(f)) != target.size:
            continue
        if is_stable_map(f, source, target) and satisfies_m_cdc(f, source, target, domain, level):
            return f
    return None


@dataclass(frozen=True)
class SiImageWitness:
    quotient: object                 # algebra.Quotient of B
    embedding: StableEmbeddingWitness


def find_si_image_embedding(A: FiniteModalAlgebra, domain: Iterable[int], B: FiniteModalAlgebra,
                            level: int = 1, budget: int = DEFAULT_SEARCH_BUDGET) -> SiImageWitness | None:
    domain = list(domain)
    for q in B.si_quotients():
        w = find_stable_embedding(A, q.algebra, domain, level, budget)
        if w is not None:
            return SiImageWitness(q, w)
    return None


def embeds_into_si_image(A: FiniteModalAlgebra, domain: Iterable[int], B: FiniteModalAlgebra,
                         level: int = 1, budget: int = DEFAULT_SEARCH_BUDGET) -> bool:
    """Is there an s.i. homomorphic image ``C`` of ``B`` with a stable embedding ``A -> C``
    satisfying ``level``-CDC for ``domain``?"""
    return find_si_image_embedding(A, domain, B, level, budget) is not None
