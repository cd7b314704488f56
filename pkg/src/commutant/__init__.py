"""Exact construction and verification of commuting differential operators
for Schroedinger operators with inverse-square potentials on hyperplane
arrangements."""

from ._backend import BACKEND, QQ, qq
from .constraints import ConstraintSystem, Verdict, classify_arrangement, residue_constraints
from .diffop import (
    DiffOp,
    SymbolPoly,
    adjoint,
    change_coords_linear,
    change_coords_orthogonal,
    commutator,
    compose,
    parity_check,
    principal_symbol,
)
from .laurent import LaurentSlice, LinearForm, laurent_along, substitute_linear
from .models import (
    CommutantReport,
    PotentialSpec,
    WpSeries,
    build_L,
    build_P_typeA,
    build_P_typeBD,
    build_pair,
    d4_twist_check,
    functional_eq_A7_check,
    functional_equation_check,
    verify_commutant,
    wp_series,
)
from .poly import Poly, gcd
from .rankone import (
    BCTable,
    ReductionResult,
    bc_recursion,
    build_Am,
    invariance_gate,
    is_generic,
    obstruction,
    rank_one_reduce,
)
from .ratfunc import RatFunc
from .reflection import (
    Arrangement,
    GroupClosure,
    RootVector,
    generate_group,
    is_invariant,
    is_irreducible,
    positive_system,
    reflection_matrix,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
