"""Numerical laboratory for interpolated column/row Schatten norms.

The package computes, for a tuple x of d-by-d complex matrices and
parameters p in [1, inf] and theta in [0, 1], a norm alpha(x, p, theta)
that interpolates between the column and row Schatten-p norms, by three
independent routes: variational formulas with explicit witnesses
(variational), a minimax search over analytic boundary candidates
(interp_oracle), and a superoperator norm identity at p = inf
(pisier_op).  Matrix spectral factorization (szego) turns oracle
candidates into concrete factorization certificates.  cli_io exposes
everything on the command line.
"""

from .cli_io import load_tuple, random_tuple, save_tuple
from .core import (
    INF,
    MatrixTuple,
    check_exponent,
    conjugate_exponent,
    herm,
    inv_exponent,
    polar,
    psd_power,
    schatten_norm,
    trace_pairing,
)
from .errors import (
    ConvergenceError,
    InconsistencyError,
    InputError,
    NCInterpError,
    ShapeError,
    SingularMatrixError,
    UsageError,
)
from .interp_oracle import (
    AnalyticCandidate,
    SandwichReport,
    StripMap,
    optimize_candidate,
    oracle_lower,
    oracle_upper,
    sandwich,
    strip_disk_map,
)
from .pisier_op import (
    CorollaryReport,
    Superoperator,
    build_superoperator,
    choi_matrix,
    corollary_check,
    is_completely_positive,
    superop_norm,
    unvec,
    vec,
)
from .szego import (
    BoundaryFunction,
    OuterFactor,
    build_certificate,
    candidate_boundary_max,
    det_polynomial_roots,
    det_winding,
    wilson_factorize,
)
from .tuple_norms import column_gram, column_norm, row_gram, row_norm
from .variational import (
    Exponents,
    Factorization,
    NormEstimate,
    SolverConfig,
    UnitBallPair,
    alpha,
    alpha_inf,
    alpha_sup,
    derive_exponents,
    dual_norm_estimate,
)

__version__ = "0.1.0"

__all__ = [
    "INF",
    "MatrixTuple",
    "check_exponent",
    "conjugate_exponent",
    "herm",
    "inv_exponent",
    "polar",
    "psd_power",
    "schatten_norm",
    "trace_pairing",
    "NCInterpError",
    "InputError",
    "ShapeError",
    "SingularMatrixError",
    "ConvergenceError",
    "InconsistencyError",
    "UsageError",
    "column_gram",
    "column_norm",
    "row_gram",
    "row_norm",
    "Exponents",
    "derive_exponents",
    "SolverConfig",
    "NormEstimate",
    "Factorization",
    "UnitBallPair",
    "alpha",
    "alpha_inf",
    "alpha_sup",
    "dual_norm_estimate",
    "StripMap",
    "strip_disk_map",
    "AnalyticCandidate",
    "optimize_candidate",
    "oracle_upper",
    "oracle_lower",
    "sandwich",
    "SandwichReport",
    "vec",
    "unvec",
    "Superoperator",
    "build_superoperator",
    "choi_matrix",
    "is_completely_positive",
    "superop_norm",
    "CorollaryReport",
    "corollary_check",
    "BoundaryFunction",
    "OuterFactor",
    "wilson_factorize",
    "det_winding",
    "det_polynomial_roots",
    "build_certificate",
    "candidate_boundary_max",
    "random_tuple",
    "load_tuple",
    "save_tuple",
    "__version__",
]
