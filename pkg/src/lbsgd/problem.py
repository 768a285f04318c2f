"""Constrained problem definition, regularity constants, and solver configuration.

A problem carries the objective ``f^0`` and ``m`` inequality constraints
``f^i(x) <= 0`` as exact callables (used for benchmarking and safety
auditing), together with the smoothness/Lipschitz constants and the safe
starting point that the solver relies on.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

Func = Callable[[np.ndarray], float]
Grad = Callable[[np.ndarray], np.ndarray]

# Central finite differences: step scale and acceptance tolerance for the
# gradient/function consistency check.
FD_STEP_SCALE = 1e-6
FD_REL_TOL = 1e-5


class InfeasiblePointError(ValueError):
    """Raised when an operation requires a strictly feasible point."""


class Mode(str, enum.Enum):
    NONCONVEX = "nonconvex"
    CONVEX = "convex"
    STRONGLY_CONVEX = "strongly_convex"


class OracleKind(str, enum.Enum):
    FIRST_ORDER = "first_order"
    ZEROTH_ORDER = "zeroth_order"


@dataclass(frozen=True)
class ProblemSpec:
    """Constrained problem ``min f^0(x) s.t. f^i(x) <= 0, i = 1..m``.

    Instances are immutable and safe to share between concurrent runs; the
    callables must be pure functions of their input vector.

    Attributes
    ----------
    d : int
        Decision dimension.
    m : int
        Number of inequality constraints.
    funcs : sequence of callables
        ``m + 1`` functions; index 0 is the objective, 1..m the constraints.
        Evaluable exactly (used for auditing).
    grads : sequence of callables, optional
        Matching gradients, when available.
    M : ndarray, shape (m + 1,)
        Smoothness constants of each function.
    L : ndarray, shape (m + 1,)
        Lipschitz constants of each function on the feasible set.
    R : float
        Diameter bound of the feasible set.
    x0 : ndarray, shape (d,)
        Safe starting point with ``max_i f^i(x0) <= -beta``.
    beta : float
        Start margin.
    beta_hat : float
        Uniform bound ``|f^i(x)| <= beta_hat`` on the feasible set.
    mfcq : (l, rho), optional
        Extended constraint-qualification constants; analysis metadata only.
    """

    d: int
    m: int
    funcs: tuple
    grads: Optional[tuple]
    M: np.ndarray
    L: np.ndarray
    R: float
    x0: np.ndarray
    beta: float
    beta_hat: float
    mfcq: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "funcs", tuple(self.funcs))
        if self.grads is not None:
            object.__setattr__(self, "grads", tuple(self.grads))
        for name in ("M", "L"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        x0 = np.asarray(self.x0, dtype=float)
        x0.setflags(write=False)
        object.__setattr__(self, "x0", x0)

    def values(self, x: np.ndarray) -> np.ndarray:
        """Exact values of all m + 1 functions at ``x``."""
        return np.array([f(x) for f in self.funcs], dtype=float)

    def constraint_values(self, x: np.ndarray) -> np.ndarray:
        return np.array([f(x) for f in self.funcs[1:]], dtype=float)

    def max_constraint(self, x: np.ndarray) -> float:
        """``max_i f^i(x)`` over constraints; ``-inf`` when m = 0."""
        if self.m == 0:
            return -math.inf
        return float(max(f(x) for f in self.funcs[1:]))

    def is_strictly_feasible(self, x: np.ndarray) -> bool:
        return self.m == 0 or self.max_constraint(x) < 0.0


def central_difference(func: Func, x: np.ndarray, step: Optional[float] = None) -> np.ndarray:
    """Central finite-difference gradient of ``func`` at ``x``."""
    x = np.asarray(x, dtype=float)
    if step is None:
        step = FD_STEP_SCALE * (1.0 + float(np.linalg.norm(x)))
    g = np.empty_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = step
        g[j] = (func(x + e) - func(x - e)) / (2.0 * step)
    return g


def validate_problem(spec: ProblemSpec) -> list[str]:
    """Check the construction invariants of ``spec``.

    Returns an empty list when everything holds, otherwise one diagnostic
    string per violated invariant. Never raises and never mutates the spec.
    """
    diags = []
    if spec.d < 1:
        diags.append(f"dimension must be positive, got d={spec.d}")
    if spec.m < 0:
        diags.append(f"constraint count must be non-negative, got m={spec.m}")
    if len(spec.funcs) != spec.m + 1:
        diags.append(f"expected {spec.m + 1} functions, got {len(spec.funcs)}")
    if spec.grads is not None and len(spec.grads) != spec.m + 1:
        diags.append(f"expected {spec.m + 1} gradients, got {len(spec.grads)}")
    if spec.M.shape != (spec.m + 1,) or np.any(spec.M < 0):
        diags.append("smoothness constants must be m+1 non-negative reals")
    if spec.L.shape != (spec.m + 1,) or np.any(spec.L < 0):
        diags.append("Lipschitz constants must be m+1 non-negative reals")
    if not spec.R > 0:
        diags.append(f"diameter bound must be positive, got R={spec.R}")
    if not spec.beta > 0:
        diags.append(f"start margin must be positive, got beta={spec.beta}")
    if not spec.beta_hat > 0:
        diags.append(f"value bound must be positive, got beta_hat={spec.beta_hat}")
    if spec.x0.shape != (spec.d,):
        diags.append(f"starting point must have shape ({spec.d},)")
        return diags

    if spec.m > 0 and spec.beta > 0 and len(spec.funcs) == spec.m + 1:
        worst = spec.max_constraint(spec.x0)
        if not worst <= -spec.beta:
            diags.append(
                f"start margin violated: max_i f^i(x0) = {worst:.6g} > -beta = {-spec.beta:.6g}"
            )

    if spec.grads is not None and len(spec.grads) == spec.m + 1 == len(spec.funcs):
        for i, (func, grad) in enumerate(zip(spec.funcs, spec.grads)):
            g = np.asarray(grad(spec.x0), dtype=float)
            g_fd = central_difference(func, spec.x0)
            rel = np.linalg.norm(g - g_fd) / max(1.0, np.linalg.norm(g_fd))
            if rel > FD_REL_TOL:
                diags.append(
                    f"gradient check failed for f^{i}: relative error {rel:.3g} > {FD_REL_TOL}"
                )
    return diags


@dataclass(frozen=True)
class KktCertificate:
    """Approximate KKT data at a strictly feasible point.

    ``lam[i] = eta / (-f^i(x))``; ``stationarity`` is the Lagrangian gradient
    norm, which for this choice of multipliers equals the barrier gradient
    norm; ``complementarity[i] = lam[i] * (-f^i(x))`` equals ``eta`` by
    construction when computed from exact constraint values.
    """

    x: np.ndarray
    lam: np.ndarray
    stationarity: float
    complementarity: np.ndarray


def kkt_certificate(
    spec: ProblemSpec,
    x: np.ndarray,
    eta: float,
    grad_estimates: Optional[Sequence[np.ndarray]] = None,
) -> KktCertificate:
    """Build the dual certificate at ``x`` for barrier parameter ``eta``.

    Uses exact gradients when the spec has them, otherwise the supplied
    estimates (e.g. from a zeroth-order batch).

    Raises
    ------
    InfeasiblePointError
        If any constraint value at ``x`` is >= 0.
    """
    x = np.asarray(x, dtype=float)
    slack = -spec.constraint_values(x)
    if np.any(slack <= 0):
        worst = float(np.min(slack))
        raise InfeasiblePointError(
            f"certificate requires a strictly feasible point; min slack = {worst:.6g}"
        )
    lam = eta / slack if spec.m > 0 else np.zeros(0)

    if spec.grads is not None:
        grads = [np.asarray(g(x), dtype=float) for g in spec.grads]
    elif grad_estimates is not None:
        grads = [np.asarray(g, dtype=float) for g in grad_estimates]
    else:
        raise ValueError("need exact gradients or gradient estimates")

    lag_grad = grads[0].copy()
    for i in range(spec.m):
        lag_grad += lam[i] * grads[i + 1]
    return KktCertificate(
        x=x,
        lam=lam,
        stationarity=float(np.linalg.norm(lag_grad)),
        complementarity=lam * slack,
    )


@dataclass(frozen=True)
class SolverConfig:
    """Run configuration for the barrier solver.

    ``eta0`` is the initial barrier parameter; when ``eta_final < eta0`` the
    restart scheme shrinks it by ``omega`` every ``steps_per_round``
    iterations until it reaches ``eta_final``.
    """

    eta0: float
    eta_final: float
    omega: float = 0.7
    steps_per_round: int = 7
    batch_size: int = 1
    delta_hat: float = 0.05
    trunc_a: float = 1e-8
    mode: Mode = Mode.NONCONVEX
    oracle_kind: OracleKind = OracleKind.FIRST_ORDER
    nu_override: Optional[float] = None
    max_total_queries: int = 10**6
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "oracle_kind", OracleKind(self.oracle_kind))
        if not 0 < self.eta_final <= self.eta0:
            raise ValueError(f"need 0 < eta_final <= eta0, got {self.eta_final}, {self.eta0}")
        if not 0 < self.omega < 1:
            raise ValueError(f"omega must lie in (0, 1), got {self.omega}")
        if not 0 < self.delta_hat < 1:
            raise ValueError(f"delta_hat must lie in (0, 1), got {self.delta_hat}")
        if not self.trunc_a > 0:
            raise ValueError(f"truncation floor must be positive, got {self.trunc_a}")
        if self.steps_per_round < 1 or self.batch_size < 1 or self.max_total_queries < 1:
            raise ValueError("steps_per_round, batch_size and max_total_queries must be positive")
        if self.nu_override is not None and not self.nu_override > 0:
            raise ValueError(f"nu_override must be positive, got {self.nu_override}")
