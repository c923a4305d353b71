"""Derivative extraction and Hölder bootstrap for homomorphisms of local chart groups."""

from .core import (REAL, DomainError, PAdicField, RealField, Seminorm, SeminormFamily,
                   mackey_cauchy_certify, padic_gauge, seminorm_eval)
from .extraction import (ExtractionConfig, additivity_defect, defect_h, defect_h_padic,
                         dyadic_partial, lambda_limit, linearize, one_parameter_extract,
                         padic_partial, total_diff_residual)
from .groups import heisenberg, matrix_log, multiplicative, padic_congruence
from .holder import bootstrap_iterate, bootstrap_verify, estimate_holder, globalize_check

__version__ = "0.1.0"

__all__ = [
    "REAL", "DomainError", "PAdicField", "RealField", "Seminorm", "SeminormFamily",
    "mackey_cauchy_certify", "padic_gauge", "seminorm_eval",
    "ExtractionConfig", "additivity_defect", "defect_h", "defect_h_padic", "dyadic_partial",
    "lambda_limit", "linearize", "one_parameter_extract", "padic_partial", "total_diff_residual",
    "heisenberg", "matrix_log", "multiplicative", "padic_congruence",
    "bootstrap_iterate", "bootstrap_verify", "estimate_holder", "globalize_check",
]
