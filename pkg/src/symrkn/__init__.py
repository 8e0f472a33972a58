"""Symmetric integrators for reversible second-order systems, built from
continuous-stage Runge-Kutta-Nystrom coefficient functions."""

from .cscoeff import (
    AlphaMatrix,
    ConditionReport,
    build_expansion,
    build_order2,
    build_order4,
    build_order6,
    build_symmetric_general,
    check_CN,
    check_DN,
    check_symmetry_cs,
    eval_Abar,
    largest_eta,
    largest_zeta,
    order_estimate,
    xi,
)
from .errors import (
    DegenerateFitError,
    DegreeOverflowError,
    ExpansionConstraintError,
    InvalidGridError,
    StageDivergenceError,
    SymmetryViolationError,
    SymrknError,
    TableauFormatError,
    TableauValidationError,
    UnsupportedStageCountError,
)
from .integrator import (
    ErrorStudy,
    StageStructure,
    StepConfig,
    Trajectory,
    fit_loglog_slope,
    global_error_study,
    integrate,
    linear_drift_slope,
    reference_state,
    reference_tableau,
    reversibility_test,
    solve_stages,
    step,
)
from .legendre import (
    eval_legendre,
    eval_legendre_all,
    legendre_inner_product,
    monomial_in_legendre,
)
from .problems import (
    OdeProblem,
    harmonic_oscillator,
    kepler_2d,
    perturbed_pendulum,
)
from .quadrature import QuadratureRule, gauss_rule, lobatto_rule
from .tableau import (
    OrderBound,
    RknTableau,
    SimplifyingDegrees,
    adjoint,
    check_simplifying_discrete,
    classical_order_bound,
    discretize,
    dumps_tableau,
    is_symmetric,
    is_symplectic,
    load_tableau,
    loads_tableau,
    named_tableau,
    save_tableau,
)

__version__ = "0.1.0"

__all__ = [
    "AlphaMatrix",
    "ConditionReport",
    "DegenerateFitError",
    "DegreeOverflowError",
    "ErrorStudy",
    "ExpansionConstraintError",
    "InvalidGridError",
    "OdeProblem",
    "OrderBound",
    "QuadratureRule",
    "RknTableau",
    "SimplifyingDegrees",
    "StageDivergenceError",
    "StageStructure",
    "StepConfig",
    "SymmetryViolationError",
    "SymrknError",
    "TableauFormatError",
    "TableauValidationError",
    "Trajectory",
    "UnsupportedStageCountError",
    "adjoint",
    "build_expansion",
    "build_order2",
    "build_order4",
    "build_order6",
    "build_symmetric_general",
    "check_CN",
    "check_DN",
    "check_simplifying_discrete",
    "check_symmetry_cs",
    "classical_order_bound",
    "discretize",
    "dumps_tableau",
    "eval_Abar",
    "eval_legendre",
    "eval_legendre_all",
    "fit_loglog_slope",
    "gauss_rule",
    "global_error_study",
    "harmonic_oscillator",
    "integrate",
    "is_symmetric",
    "is_symplectic",
    "kepler_2d",
    "largest_eta",
    "largest_zeta",
    "legendre_inner_product",
    "linear_drift_slope",
    "load_tableau",
    "loads_tableau",
    "lobatto_rule",
    "monomial_in_legendre",
    "named_tableau",
    "order_estimate",
    "perturbed_pendulum",
    "reference_state",
    "reference_tableau",
    "reversibility_test",
    "save_tableau",
    "solve_stages",
    "step",
    "xi",
]
