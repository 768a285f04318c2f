"""Safe stochastic constrained optimization via log-barrier SGD.

The solver minimizes a smooth objective under smooth inequality constraints
while keeping every query point feasible with high probability, using
stochastic gradient descent on a log-barrier surrogate with a
confidence-adjusted adaptive step size. First-order and two-point
zeroth-order oracles are provided, along with benchmark problems and an
experiment harness.
"""

from .barrier import (
    BarrierState,
    barrier_gradient,
    barrier_value,
    confidence_bounds,
    convex_gap_bound,
    deviation_bound,
    m2_estimate,
    step_floor_constants,
    step_size,
)
from .oracles import (
    BatchEstimate,
    FirstOrderOracle,
    NoiseModel,
    ZeroOrderOracle,
    first_order_batch,
    safe_sampling_radius,
    zo_batch,
)
from .problem import (
    InfeasiblePointError,
    KktCertificate,
    Mode,
    OracleKind,
    ProblemSpec,
    SolverConfig,
    kkt_certificate,
    validate_problem,
)
from .solver import (
    IterateRecord,
    RunReport,
    lbsgd_run,
    per_step_confidence,
    restart_run,
)

__version__ = "0.1.0"

__all__ = [
    "BarrierState",
    "BatchEstimate",
    "FirstOrderOracle",
    "InfeasiblePointError",
    "IterateRecord",
    "KktCertificate",
    "Mode",
    "NoiseModel",
    "OracleKind",
    "ProblemSpec",
    "RunReport",
    "SolverConfig",
    "ZeroOrderOracle",
    "barrier_gradient",
    "barrier_value",
    "confidence_bounds",
    "convex_gap_bound",
    "deviation_bound",
    "first_order_batch",
    "kkt_certificate",
    "lbsgd_run",
    "m2_estimate",
    "per_step_confidence",
    "restart_run",
    "safe_sampling_radius",
    "step_floor_constants",
    "step_size",
    "validate_problem",
    "zo_batch",
]
