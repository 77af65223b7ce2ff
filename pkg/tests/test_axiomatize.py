import pytest

from scrkit import formula as fm
from scrkit.axiomatize import (BaseLogic, base_algebras, essential_members, refutation_patterns,
                               verify_equivalence)
from scrkit.errors import BudgetExceeded
from scrkit.rules import Kind, Rule, refutes


def test_base_logic_parse():
    assert BaseLogic.parse("K") == BaseLogic(None)
    assert BaseLogic.parse("k4") == BaseLogic(1)
    assert BaseLogic.parse("k4m1:3") == BaseLogic(3)
    assert str(BaseLogic(2)) == "k4m1:2"
    with pytest.raises(ValueError):
        BaseLogic.parse("s5")
    with pytest.raises(ValueError):
        BaseLogic(0)


def test_base_theorem_has_empty_pattern():
    for base in (BaseLogic(None), BaseLogic(1)):
        pat = refutation_patterns(fm.parse("dia dia p -> dia dia p"), base, 3)
        assert len(pat) == 0
    assert len(refutation_patterns(fm.parse("dia dia p -> dia p"), BaseLogic(1), 3)) == 0


@pytest.mark.parametrize("target, base", [("dia p -> p", BaseLogic(None)),
                                          ("p / dia p", BaseLogic(None)),
                                          ("dia p -> p", BaseLogic(1)),
                                          ("box p -> box box p", BaseLogic(None))])
def test_round_trip_and_fault_injection(target, base):
    pat = refutation_patterns(target, base, 2)
    assert len(pat) > 0
    assert verify_equivalence(target, pat, test_atom_bound=2)
    essential = list(essential_members(pat))
    assert essential
    for i in essential:
        rep = verify_equivalence(target, pat.without(i), test_atom_bound=2)
        assert not rep and rep.witness is not None
        assert not rep.witness.validates_rule(pat.target)


def test_default_kinds():
    assert refutation_patterns("dia p -> p", BaseLogic(1), 1).kind is Kind.GAMMA
    assert refutation_patterns("dia p -> p", BaseLogic(None), 1).kind is Kind.RULE
    assert refutation_patterns("p / dia p", BaseLogic(1), 1).kind is Kind.RULE
    with pytest.raises(ValueError):
        refutation_patterns("dia p -> p", BaseLogic(None), 1, kind=Kind.GAMMA)


def test_bound_monotonicity():
    small = refutation_patterns("dia p -> p", BaseLogic(None), 2)
    large = refutation_patterns("dia p -> p", BaseLogic(None), 3)
    assert small.keys() <= large.keys()


def test_soundness_of_members():
    target = Rule.parse("dia p -> p")
    pat = refutation_patterns(target, BaseLogic(None), 2)
    for B in base_algebras(BaseLogic(None), 3, si_only=False):
        if any(refutes(B, s) for s in pat.specs()):
            assert not B.validates_rule(target)


def test_pattern_json_shape():
    pat = refutation_patterns("dia p -> p", BaseLogic(1), 2)
    data = pat.to_json()
    assert data["base"] == "k4m1:1" and data["kind"] == "gamma"
    assert all({"frame", "domain", "valuation", "gamma"} <= set(m) for m in data["members"])


def test_enumeration_budget():
    with pytest.raises(BudgetExceeded):
        refutation_patterns("dia p -> p", BaseLogic(None), 6, budget=1000)
