"""Free Gibbs Transport - Transport Package"""

from .flow import (
    AlphaDiagnostics,
    FlowResult,
    JacobianProbe,
    MomentDistance,
    PushforwardReport,
    alpha_grid,
    diagnose,
    flow_back,
    flow_jacobian_probe,
    flow_map,
    flow_transport,
    heun_step,
    pushforward_check,
    quadratic_scale,
    relative_map_error,
)
from .gradient import (
    GRADIENT_TOL,
    AdjointSolver,
    GradientEstimate,
    dg_eval,
    gradient_consistency,
    semigroup_gradient,
    tail_bound,
)

__all__ = [
    "GRADIENT_TOL",
    "AdjointSolver",
    "AlphaDiagnostics",
    "FlowResult",
    "GradientEstimate",
    "JacobianProbe",
    "MomentDistance",
    "PushforwardReport",
    "alpha_grid",
    "diagnose",
    "dg_eval",
    "flow_back",
    "flow_jacobian_probe",
    "flow_map",
    "flow_transport",
    "gradient_consistency",
    "heun_step",
    "pushforward_check",
    "quadratic_scale",
    "relative_map_error",
    "semigroup_gradient",
    "tail_bound",
]
