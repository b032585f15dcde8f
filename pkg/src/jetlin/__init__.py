"""jetlin: linearizability classification for third-order ODEs
u''' = f(x, u, u', u'') via relative differential invariants, with
construction and certification of the linearizing point transformation."""

from .classify import Classification, Outcome, classify, s_from_kl
from .expr import (
    JET_VARS,
    P,
    Q,
    RationalForm,
    U,
    Verdict,
    X,
    ZeroTestConfig,
    cbrt,
    diff,
    is_zero,
    ln,
    normalize,
    substitute,
    to_source,
)
from .invariants import (
    InvariantReport,
    compute_invariants,
    contact_set,
    evaluate_K,
    i3_chain,
    k_constancy,
    real_cube_root,
    seven_point_set,
    vanishing_I4_I5_I6,
)
from .jets import JetContext, total_derivative, total_derivative_n
from .linearize import (
    GaugeFunction,
    LinearizationResult,
    PointTransformation,
    gauge_search,
    integrate_restricted,
    linearize,
    recover_a1,
    recover_phi,
    recover_psi,
    verify_linearization,
)
from .numeric import JetPoint, Trajectory, evaluate, numeric_transform_check, rk4_solve
from .parse import OdeInput, parse_expression, parse_ode

__version__ = "0.1.0"

__all__ = [
    "Classification",
    "GaugeFunction",
    "InvariantReport",
    "JET_VARS",
    "JetContext",
    "JetPoint",
    "LinearizationResult",
    "OdeInput",
    "Outcome",
    "P",
    "PointTransformation",
    "Q",
    "RationalForm",
    "Trajectory",
    "U",
    "Verdict",
    "X",
    "ZeroTestConfig",
    "cbrt",
    "classify",
    "compute_invariants",
    "contact_set",
    "diff",
    "evaluate",
    "evaluate_K",
    "gauge_search",
    "i3_chain",
    "integrate_restricted",
    "is_zero",
    "k_constancy",
    "linearize",
    "ln",
    "normalize",
    "numeric_transform_check",
    "parse_expression",
    "parse_ode",
    "real_cube_root",
    "recover_a1",
    "recover_phi",
    "recover_psi",
    "rk4_solve",
    "s_from_kl",
    "seven_point_set",
    "substitute",
    "to_source",
    "total_derivative",
    "total_derivative_n",
    "vanishing_I4_I5_I6",
    "verify_linearization",
]
