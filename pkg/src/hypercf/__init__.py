"""Hyperbolic controller forms for MIMO PDE-ODE systems with transport delays."""

from .errors import (
    DegenerateMatrix,
    DegreeOfZero,
    DivisionByZero,
    DomainError,
    EntiretyCheckFailed,
    ExponentMergeWarning,
    HcfError,
    NotControllable,
    NotReducible,
    NumericFallbackWarning,
    PolePointError,
    PreconditionViolated,
    ReductionDiverged,
    SchemaError,
    StructureViolation,
)
from .scalars import ConstField, DelayBasis, Exponent, Symbol, parse_const, parse_exponent, set_precision, settings
from .gpoly import GPoly, PolyD, RatD
from .division import find_roots, gpld, hermite_interpolate, make_entire, reduce_entry
from .gpmatrix import GPolyMatrix, composed_lccm, const_rank, invert_unitriangular, reduce_shifts, separate, sort_by_degree
from .system import HyperbolicSystem, build_H, build_benchmark, flat_parametrize, random_system, strings_demo_matrix
from .hcf import assemble_dde, classify, emit_report, parse_report
from .oracle import check_entire, check_identity, eval_symbol
from .pipeline import inject_fault, run_checks, run_pipeline

__all__ = [name for name in dir() if not name.startswith("_")]
