"""Acceptance suite: seven exhaustive small-scale checks.

Each criterion is a plain function returning ``(passed, detail)``; the
pytest wrappers assert on it and record a PASS/FAIL line that the
conftest prints in the terminal summary. Run the module directly
(``python tests/test_acceptance.py``) to get the lines without pytest.
"""

from __future__ import annotations

import itertools
import sys
import time

import pytest

from scrkit import formula as fm
from scrkit.algebra import FiniteModalAlgebra
from scrkit.axiomatize import BaseLogic, essential_members, refutation_patterns, verify_equivalence
from scrkit.enumeration import algebras_up_to, frames_up_to
from scrkit.filtration import (gabbay_filtration, greatest_filtration, lemmon_filtration, least_filtration,
                               verify_definable_filtration)
from scrkit.frame import FiniteFrame, dual_algebra, satisfies_cdc, stable_maps
from scrkit.morphism import find_stable_embedding
from scrkit.rules import CanonicalSpec, Kind, refutes_formula, render_formula, scr_from_algebra

RESULTS: dict[int, tuple[bool, str]] = {}
TITLES = {
    1: "rule characterization oracle",
    2: "Gabbay filtration contract",
    3: "formula characterization oracle",
    4: "closing-remark counterexample",
    5: "bounded axiomatization round-trip",
    6: "s.i. double oracle",
    7: "filtration sandwich and m=1 equivalence",
}
LIMITS = {1: 120, 2: 180, 3: 300, 4: 10, 5: 600, 6: 60, 7: 60}


def report_line(n: int) -> str:
    ok, detail = RESULTS[n]
    return f"{'PASS' if ok else 'FAIL'} criterion {n} ({TITLES[n]}): {detail}"


def _record(n: int, fn) -> tuple[bool, str]:
    t0 = time.perf_counter()
    ok, detail = fn()
    elapsed = time.perf_counter() - t0
    if elapsed > LIMITS[n]:
        ok, detail = False, f"{detail}; took {elapsed:.1f}s, limit {LIMITS[n]}s"
    else:
        detail = f"{detail}; {elapsed:.1f}s"
    RESULTS[n] = (ok, detail)
    print(report_line(n))
    return ok, detail


def _subsets(A: FiniteModalAlgebra):
    elems = list(A.elements())
    for mask in range(1 << len(elems)):
        yield frozenset(a for a in elems if mask >> a & 1)


def one_variable_formulas(depth: int) -> list[fm.Formula]:
    """Formulas in ``p`` over ``~``, ``&`` and ``dia`` with tree depth at most ``depth``.

    ``&`` is taken over unordered pairs of distinct arguments; the other
    connectives are definable from these three.
    """
    p = fm.Var("p")
    layer = [p]
    for _ in range(depth):
        new = [p, *(fm.Not(f) for f in layer), *(fm.Dia(f) for f in layer),
               *(fm.And(a, b) for a, b in itertools.combinations(layer, 2))]
        layer = list(dict.fromkeys(new))
    return layer


# --- 1 ----------------------------------------------------------------------

def criterion_1():
    As = algebras_up_to(2, min_atoms=0)
    Bs = algebras_up_to(3, min_atoms=0)
    checked = mismatches = 0
    for A in As:
        for D in _subsets(A):
            rule = scr_from_algebra(A, D)
            for B in Bs:
                checked += 1
                if B.validates_rule(rule) != (find_stable_embedding(A, B, D, 1) is None):
                    mismatches += 1
    return mismatches == 0, f"{checked} (A, D, B) triples, {mismatches} mismatches"


# --- 2 ----------------------------------------------------------------------

def criterion_2():
    phis = one_variable_formulas(3)
    thetas = [fm.subformula_closure([phi]) for phi in phis]
    checked = failures = 0
    first = ""
    for m in (1, 2, 3):
        for F in frames_up_to(5, m):
            A = dual_algebra(F)
            for i, theta in enumerate(thetas):
                # V(p) cycles through every element of A as the formula index grows
                V = {"p": i % A.size}
                res = gabbay_filtration(A, V, theta, m)
                rep = verify_definable_filtration(A, V, theta, res.theta_prime, res, level=m, pretransitive=m)
                checked += 1
                if not rep.ok:
                    failures += 1
                    first = first or f"m={m} frame={F.to_json()} theta={theta}: {rep}"
    detail = f"{checked} filtrations over {len(phis)} formulas, {failures} failures"
    return failures == 0, detail + (f"; first: {first}" if first else "")


# --- 3 ----------------------------------------------------------------------

def criterion_3():
    checked = mismatches = 0
    for m in (1, 2):
        As = algebras_up_to(2, m, si_only=True)
        Bs = algebras_up_to(3, m)
        for A in As:
            for D in _subsets(A):
                for kind in (Kind.GAMMA, Kind.GAMMA_PLUS):
                    spec = CanonicalSpec(A, D, kind, m)
                    phi = render_formula(spec)
                    for B in Bs:
                        checked += 1
                        if B.validates_formula(phi) == refutes_formula(B, spec):
                            mismatches += 1
    return mismatches == 0, f"{checked} (A, D, B, m, kind) checks, {mismatches} mismatches"


# --- 4 ----------------------------------------------------------------------

X = FiniteFrame.from_edges("abcd", [("a", "b"), ("b", "c"), ("c", "d")])
Y = FiniteFrame.from_edges(["y0", "y1", "y2", "y3", "y4"],
                           [("y0", "y1"), ("y1", "y2"), ("y2", "y3"), ("y0", "y4")])
Y_PRIME = FiniteFrame.from_edges(["y0", "y1", "y2", "y3", "y4", "y5"],
                                 [("y0", "y1"), ("y1", "y2"), ("y2", "y3"), ("y0", "y4"), ("y4", "y5")])


def criterion_4():
    m = 3
    d = X.set_from_labels(["d"])
    problems = []
    # (a) unique stable surjections; CDC for Y only
    maps_y, maps_yp = stable_maps(Y, X), stable_maps(Y_PRIME, X)
    if len(maps_y) != 1 or len(maps_yp) != 1:
        problems.append(f"stable surjections: {len(maps_y)} from Y, {len(maps_yp)} from Y'")
    else:
        if not satisfies_cdc(maps_y[0], Y, X, [d]):
            problems.append("CDC fails for Y")
        if satisfies_cdc(maps_yp[0], Y_PRIME, X, [d]):
            problems.append("CDC holds for Y'")
    # (b) gamma^3(X, {d})
    AX, AY, AYp = dual_algebra(X), dual_algebra(Y), dual_algebra(Y_PRIME)
    for F in (X, Y, Y_PRIME):
        if not F.is_pretransitive(m):
            problems.append(f"{F.points} is not pretransitive for m={m}")
    gamma = CanonicalSpec(AX, {d}, Kind.GAMMA, m)
    if not refutes_formula(AY, gamma):
        problems.append("dual(Y) validates gamma^3(X, {d})")
    if refutes_formula(AYp, gamma):
        problems.append("dual(Y') refutes gamma^3(X, {d})")
    # (c) every gamma_+^3(X, D') with at most three domain sets
    families = [fs for r in range(4) for fs in itertools.combinations(AX.elements(), r)]
    for fam in families:
        spec = CanonicalSpec(AX, fam, Kind.GAMMA_PLUS, m)
        if any(D & d for D in fam):
            if refutes_formula(AY, spec):
                problems.append(f"dual(Y) refutes gamma_+^3 for family {[AX.format_element(D) for D in fam]}")
        elif not refutes_formula(AYp, spec):
            problems.append(f"dual(Y') validates gamma_+^3 for family {[AX.format_element(D) for D in fam]}")
    detail = f"maps Y->X {maps_y}, Y'->X {maps_yp}; {len(families)} gamma_+ families checked"
    return not problems, detail + ("; " + "; ".join(problems[:3]) if problems else "")


# --- 5 ----------------------------------------------------------------------

TARGETS = ["dia p -> p", "p -> dia p", "dia p -> box p"]
BASES = [BaseLogic(None), BaseLogic(1), BaseLogic(2), BaseLogic(3)]


def criterion_5():
    problems, parts = [], []
    for text in TARGETS:
        target = fm.parse(text)
        for base in BASES:
            pattern = refutation_patterns(target, base, 3)
            rep = verify_equivalence(target, pattern, base, 3)
            if not rep.ok:
                problems.append(f"{text} over {base}: {rep.detail}")
            essential = list(essential_members(pattern))
            if not essential:
                problems.append(f"{text} over {base}: no essential member to remove")
            for i in essential:
                broken = verify_equivalence(target, pattern.without(i), base, 3)
                if broken.ok or broken.witness is None:
                    problems.append(f"{text} over {base}: removing member {i} went unnoticed")
            parts.append(f"{len(pattern)}/{len(essential)}")
    detail = f"12 target/base pairs equivalent; members/removals detected: {' '.join(parts)}"
    return not problems, detail if not problems else "; ".join(problems[:3])


# --- 6 ----------------------------------------------------------------------

def criterion_6():
    checked = mismatches = 0
    for F in frames_up_to(4, min_points=0):
        A = dual_algebra(F)
        checked += 1
        if A.is_si() != (A.least_nontrivial_box_filter() is not None):
            mismatches += 1
    return mismatches == 0, f"{checked} algebras, {mismatches} mismatches"


# --- 7 ----------------------------------------------------------------------

def criterion_7():
    thetas = [fm.subformula_closure([phi]) for phi in one_variable_formulas(2)]
    sandwich = violations = 0
    for F in frames_up_to(4, 1):
        A = dual_algebra(F)
        for theta in thetas:
            for v in A.elements():
                V = {"p": v}
                lo = least_filtration(A, V, theta, theta)
                mid = lemmon_filtration(A, V, theta, theta)
                hi = greatest_filtration(A, V, theta, theta)
                sandwich += 1
                for l_, L_, g_ in zip(lo.new_diamond, mid.new_diamond, hi.new_diamond):
                    if l_ & ~L_ or L_ & ~g_:
                        violations += 1
                        break
    same = differ = 0
    for A in algebras_up_to(2, 1, si_only=True):
        for D in _subsets(A):
            g = fm.render(render_formula(CanonicalSpec(A, D, Kind.GAMMA, 1)))
            gp = fm.render(render_formula(CanonicalSpec(A, D, Kind.GAMMA_PLUS, 1)))
            if g == gp:
                same += 1
            else:
                differ += 1
    ok = violations == 0 and differ == 0
    return ok, (f"{sandwich} sandwich inputs, {violations} violations; "
                f"{same + differ} (A, D) pairs, {differ} rendering differences")


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
            5: criterion_5, 6: criterion_6, 7: criterion_7}


@pytest.mark.slow
@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n):
    ok, detail = _record(n, CRITERIA[n])
    assert ok, report_line(n)


if __name__ == "__main__":
    for n in sorted(CRITERIA):
        _record(n, CRITERIA[n])
    sys.exit(0 if all(ok for ok, _ in RESULTS.values()) else 1)
