"""Exact engine for the accelerated Collatz map on binary polynomials (x = 2)."""

from .bitpoly import (
    BitPoly,
    DomainError,
    DuplicateExponentError,
    PolySyntaxError,
    add,
    degree,
    format_poly,
    from_decimal_string,
    from_exponents,
    mul,
    parse_poly,
    power,
    shl,
    shr_exact,
    term_count,
    to_decimal_string,
    two_adic_valuation,
)
from .core import (
    FamilySpec,
    StepRecord,
    Termination,
    TrajectoryRecord,
    check_corollary1,
    collatz_compose,
    collatz_step,
    degree_estimate,
    family_F,
    family_G,
    family_H,
    family_mersenne,
    family_U,
    fixed_point_check,
    g_relations_check,
    h_chain_check,
    mersenne_prefix_check,
    predict_case,
    trajectory,
    u_of,
)

__version__ = "0.1.0"
