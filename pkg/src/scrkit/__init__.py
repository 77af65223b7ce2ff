"""Stable canonical rules and formulas over finite modal algebras.

Finite modal algebras are powerset algebras of finite Kripke frames;
elements are bitmasks over atoms. The package builds definable
filtrations, generates stable canonical rules and (m-)stable canonical
formulas, decides their refutation by stable-embedding search, and
computes bounded refutation patterns for a target rule or formula.
"""

from .algebra import FiniteModalAlgebra, Quotient, canonical_key, is_isomorphic
from .axiomatize import BaseLogic, RefutationPattern, refutation_patterns, verify_equivalence
from .errors import (AlgebraMismatch, BudgetExceeded, FormulaSyntaxError, InputError,
                     PreconditionError, ScrError)
from .filtration import (FiltrationResult, gabbay_filtration, greatest_filtration, lemmon_filtration,
                         least_filtration, verify_definable_filtration)
from .formula import Formula, FormulaSet, parse, render, subformula_closure, theta_prime
from .frame import FiniteFrame, dual_algebra, dual_frame
from .morphism import find_stable_embedding
from .rules import CanonicalSpec, Kind, Rule, refutes, refutes_formula, refutes_rule, render_formula, scr_from_algebra

__version__ = "0.1.0"
