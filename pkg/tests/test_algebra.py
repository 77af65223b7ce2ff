import random

import pytest

from scrkit import formula as fm
from scrkit.algebra import FiniteModalAlgebra, canonical_key, degenerate, is_isomorphic, two_element
from scrkit.enumeration import algebras_up_to, frames_up_to
from scrkit.errors import AlgebraMismatch, BudgetExceeded, PreconditionError
from scrkit.frame import FiniteFrame, chain, dual_algebra, dual_frame
from scrkit.rules import Rule

parse = fm.parse


@pytest.fixture
def chain4():
    return dual_algebra(chain(4, "abcd"))


def two_reflexive_points():
    return dual_algebra(FiniteFrame.from_edges("xy", [("x", "x"), ("y", "y")]))


def irreflexive_two_cycle():
    return dual_algebra(FiniteFrame.from_edges("xy", [("x", "y"), ("y", "x")]))


# --- eval -----------------------------------------------------------------------

def test_eval_reflexive_point():
    A = two_element(reflexive=True)
    assert A.eval(parse("dia p"), {"p": 1}) == 1


@pytest.mark.parametrize("A", [two_element(), degenerate(), two_reflexive_points()])
def test_constants(A):
    assert A.eval(fm.TOP) == A.top
    assert A.eval(fm.BOT) == 0


def test_eval_on_chain(chain4):
    d = chain4.element_from_labels(["d"])
    assert chain4.eval(parse("dia p"), {"p": d}) == chain4.element_from_labels(["c"])
    assert chain4.eval(parse("dia dia p"), {"p": d}) == chain4.element_from_labels(["b"])


def test_unmapped_variables_are_zero(chain4):
    assert chain4.eval(parse("q"), {"p": chain4.top}) == 0


def test_eval_rejects_foreign_elements(chain4):
    with pytest.raises(AlgebraMismatch):
        chain4.eval(parse("p"), {"p": 1 << 7})


def test_box_is_dual_of_diamond(chain4):
    for a in chain4.elements():
        assert chain4.box(a) == chain4.neg(chain4.diamond(chain4.neg(a)))


# --- validity -------------------------------------------------------------------

def test_validity_examples(chain4):
    assert chain4.validates_formula(parse("dia^4 p -> dia p"))
    cycle = irreflexive_two_cycle()
    assert not cycle.validates_formula(parse("dia dia p -> dia p"))
    cv = cycle.countervaluation(parse("dia dia p -> dia p"))
    assert cv is not None and cycle.eval(parse("dia dia p -> dia p"), cv) != cycle.top


def test_identity_rule_is_valid():
    rule = Rule.parse("p / p")
    for A in algebras_up_to(2, min_atoms=0):
        assert A.validates_rule(rule)


def test_validity_budget(chain4):
    phi = parse("p1 & p2 & p3 & p4 & p5 & p6 & p7")
    with pytest.raises(BudgetExceeded) as exc:
        chain4.validates_formula(phi, budget=1000)
    assert exc.value.needed == 16 ** 7


def test_rule_semantics_matches_definition():
    # p / box p is admissible-ish but not valid on the irreflexive edge
    A = dual_algebra(FiniteFrame.from_edges("xy", [("x", "y")]))
    assert A.validates_rule(Rule.parse("p / box p"))        # V(p)=1 forces box p = 1
    assert not A.validates_formula(parse("p -> box p"))


# --- pretransitivity ---------------------------------------------------------------

def test_pretransitive_examples(chain4):
    assert chain4.is_pretransitive(3)
    assert not chain4.is_pretransitive(1)
    assert not irreflexive_two_cycle().is_pretransitive(1)
    A = FiniteModalAlgebra(1, (0,))
    assert all(A.is_pretransitive(m) for m in (1, 2, 5))


def test_pretransitive_matches_validity():
    for A in algebras_up_to(4):
        for m in (1, 2):
            axiom = fm.Imp(fm.dia_n(fm.Var("p"), m + 1), fm.Dia(fm.Var("p")))
            assert A.is_pretransitive(m) == A.validates_formula(axiom)


# --- s.i. -----------------------------------------------------------------------

def test_opremum_examples(chain4):
    assert chain4.opremum() == chain4.element_from_labels(["b", "c", "d"])
    assert chain4.is_si()
    assert two_reflexive_points().opremum() is None
    assert not two_reflexive_points().is_si()
    assert two_element().opremum() == 0
    assert not degenerate().is_si()


def test_opremum_is_an_opremum():
    for A in algebras_up_to(3):
        c = A.opremum()
        if c is None:
            continue
        assert c != A.top
        for a in A.elements():
            if a != A.top:
                assert A.box_star(a) & ~c == 0


def test_least_box_filter_oracle_on_examples(chain4):
    assert chain4.least_nontrivial_box_filter() is not None
    assert two_reflexive_points().least_nontrivial_box_filter() is None


# --- box filters and quotients ------------------------------------------------------

def test_box_filter_generators_are_up_sets(chain4):
    F = dual_frame(chain4)
    for e in chain4.box_filters():
        assert F.image(e) & ~e == 0


def test_trivial_quotients(chain4):
    q = chain4.quotient(chain4.top)
    assert is_isomorphic(q.algebra, chain4)
    assert all(q(a) == a for a in chain4.elements())
    assert chain4.quotient(0).algebra.atom_count == 0


def test_chain_quotient_is_two_chain(chain4):
    e = chain4.element_from_labels(["c", "d"])
    assert chain4.is_box_filter_generator(e)
    alg, proj = chain4.quotient(e)
    assert dual_frame(alg).edges() == [("c", "d")]
    assert proj(chain4.top) == alg.top


def test_quotient_rejects_non_filters(chain4):
    with pytest.raises(PreconditionError):
        chain4.quotient(chain4.element_from_labels(["a"]))


def test_quotients_are_homomorphisms():
    for A in algebras_up_to(3):
        for e in A.box_filters():
            alg, h = A.quotient(e)
            for a in A.elements():
                assert h(A.diamond(a)) == alg.diamond(h(a))
                assert h(A.neg(a)) == alg.neg(h(a))
                for b in A.elements():
                    assert h(a | b) == h(a) | h(b)


def test_si_quotients_examples(chain4):
    qs = chain4.si_quotients()
    assert any(is_isomorphic(q.algebra, chain4) for q in qs)
    pair = two_reflexive_points().si_quotients()
    assert len(pair) == 1 and is_isomorphic(pair[0].algebra, two_element(reflexive=True))
    assert degenerate().si_quotients() == []


def test_si_quotients_complete_up_to_iso():
    for A in algebras_up_to(3):
        keys = {canonical_key(q.algebra) for q in A.si_quotients()}
        assert all(q.algebra.is_si() for q in A.si_quotients())
        for e in A.box_filters():
            alg = A.quotient(e).algebra
            assert (canonical_key(alg) in keys) == alg.is_si()


def test_si_witness_quotient(chain4):
    b = chain4.element_from_labels(["b", "c", "d"])
    q = chain4.si_witness_quotient(chain4.top, b, 3)
    assert is_isomorphic(q.algebra, chain4)
    assert q(b) != q.algebra.top
    with pytest.raises(PreconditionError):
        chain4.si_witness_quotient(0, 0, 3)


def test_si_witness_quotient_property():
    for A in algebras_up_to(3, 1):
        for a in A.elements():
            for b in A.elements():
                if A.box_le(a, 1) & ~b == 0:
                    continue
                q = A.si_witness_quotient(a, b, 1)
                assert q.algebra.is_si()
                assert q(A.box_le(a, 1)) == q.algebra.top
                assert q(b) != q.algebra.top


# --- boolean subalgebras ---------------------------------------------------------------

def test_boolean_subalgebra_examples():
    A = dual_algebra(FiniteFrame.from_edges("xyz", []))
    assert A.boolean_subalgebra([]) == [A.top]
    assert sorted(A.boolean_subalgebra([1, 2, 4])) == [1, 2, 4]
    x, y, z = 1, 2, 4
    assert sorted(A.boolean_subalgebra([x | y])) == [x | y, z]
    assert degenerate().boolean_subalgebra([]) == []


def test_boolean_subalgebra_cells_partition():
    rng = random.Random(7)
    for _ in range(200):
        n = rng.randint(1, 6)
        A = FiniteModalAlgebra(n, tuple(rng.randrange(1 << n) for _ in range(n)))
        gens = [rng.randrange(1 << n) for _ in range(rng.randint(0, 3))]
        cells = A.boolean_subalgebra(gens)
        assert sum(cells) == A.top and all(c for c in cells)
        for i, c in enumerate(cells):
            for d in cells[i + 1:]:
                assert c & d == 0
            for g in gens:
                assert c & g in (0, c)


# --- io and structure -------------------------------------------------------------------

def test_json_round_trip(chain4):
    data = chain4.to_json()
    assert data == {"atoms": ["a", "b", "c", "d"], "diamond": {"a": [], "b": ["a"], "c": ["b"], "d": ["c"]}}
    assert FiniteModalAlgebra.from_json(data) == chain4


def test_isomorphism_ignores_labels():
    F = FiniteFrame.from_edges("ab", [("a", "b")])
    G = FiniteFrame.from_edges("xy", [("y", "x")])
    assert is_isomorphic(dual_algebra(F), dual_algebra(G))
    assert canonical_key(dual_algebra(F)) == canonical_key(dual_algebra(G))


def test_boolean_laws_random():
    rng = random.Random(11)
    phis = [parse(t) for t in ["p & (q | r) <-> (p & q) | (p & r)", "~(p & q) <-> ~p | ~q",
                               "dia (p | q) <-> dia p | dia q", "box (p & q) <-> box p & box q"]]
    for F in frames_up_to(3):
        A = dual_algebra(F)
        for _ in range(5):
            V = {v: rng.randrange(A.size) for v in "pqr"}
            assert all(A.eval(phi, V) == A.top for phi in phis)
