"""Optimal constants in generalized Wirtinger and Poincare inequalities.

The constants are computed from the minimum of a one-variable area function
J(mu), the extremal profiles are built by monotone inversion of a singular
integral, and each analytic step is checked numerically.
"""

from .errors import (
    BoundaryWarning,
    ConstraintError,
    ConvergenceError,
    DegenerateError,
    DomainError,
    ExtrapolationWarning,
    FitError,
    IdentityError,
    NonFiniteError,
    StepError,
    WirtingerError,
)
from .jfun import JSample, MinimizationResult, j_prime, j_sample, j_second_at_zero, j_value, key_integral_gap, minimize_j
from .params import ASYMMETRIC, SYMMETRIC, Parameters, SymmetryClass, classify, derive
from .profiles import ProfileModel, build_model, cut_and_paste, eval_u_p, eval_u_w, verify_moment_identities
from .quad import DEFAULT_SPEC, QuadratureSpec, QuadResult, integrate
from .roots import RootPair, solve_roots

__all__ = [
    "ASYMMETRIC",
    "DEFAULT_SPEC",
    "SYMMETRIC",
    "BoundaryWarning",
    "ConstraintError",
    "ConvergenceError",
    "DegenerateError",
    "DomainError",
    "ExtrapolationWarning",
    "FitError",
    "IdentityError",
    "JSample",
    "MinimizationResult",
    "NonFiniteError",
    "Parameters",
    "ProfileModel",
    "QuadResult",
    "QuadratureSpec",
    "RootPair",
    "StepError",
    "SymmetryClass",
    "WirtingerError",
    "build_model",
    "classify",
    "cut_and_paste",
    "derive",
    "eval_u_p",
    "eval_u_w",
    "integrate",
    "j_prime",
    "j_sample",
    "j_second_at_zero",
    "j_value",
    "key_integral_gap",
    "minimize_j",
    "solve_roots",
    "verify_moment_identities",
]
