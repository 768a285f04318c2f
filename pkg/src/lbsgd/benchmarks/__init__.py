"""Benchmark problem constructors."""

from .cmdp import (
    CmdpOracle,
    SoftmaxPolicyProblem,
    TabularCmdp,
    cmdp_oracle,
    dp_policy_gradients,
    dp_policy_values,
    make_chain_cmdp,
    softmax_policy,
)
from .synthetic import (
    GAUSSIAN_M0,
    make_gaussian_ellipsoid,
    make_quadratic_linear,
    make_rosenbrock,
    quadratic_linear_optimum,
    rosenbrock_m0_bound,
)

__all__ = [
    "CmdpOracle",
    "GAUSSIAN_M0",
    "SoftmaxPolicyProblem",
    "TabularCmdp",
    "cmdp_oracle",
    "dp_policy_gradients",
    "dp_policy_values",
    "make_chain_cmdp",
    "make_gaussian_ellipsoid",
    "make_quadratic_linear",
    "make_rosenbrock",
    "quadratic_linear_optimum",
    "rosenbrock_m0_bound",
    "softmax_policy",
]
