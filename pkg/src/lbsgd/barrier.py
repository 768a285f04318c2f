"""Per-iteration barrier quantities.

Everything the solver derives from one batch of measurements: truncated
slacks, confidence bounds, the barrier gradient, the local smoothness
estimate, the adaptive step size, and the analysis-side diagnostics.
All functions are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .oracles import BatchEstimate
from .problem import ProblemSpec


class BarrierDomainError(ValueError):
    """Raised when the barrier is evaluated at an infeasible point."""


@dataclass(frozen=True)
class BarrierState:
    """Derived quantities of one solver iteration.

    ``alpha_bar`` are the truncated measured slacks, ``alpha_lower`` their
    confidence lower bounds, ``theta_hat`` upper bounds on the constraint
    slopes along the step direction. ``near_boundary`` flags that some
    slack lower bound had to be clamped at the truncation floor.
    """

    eta: float
    alpha_bar: np.ndarray
    alpha_lower: np.ndarray
    theta_hat: np.ndarray
    g: np.ndarray
    g_norm: float
    m2_hat: float
    gamma: float
    delta_step: float
    deviation_bound: float
    near_boundary: bool


def barrier_value(values: np.ndarray, eta: float) -> float:
    """Log-barrier surrogate ``f^0 + eta * sum_i -log(-f^i)`` from exact values."""
    values = np.asarray(values, dtype=float)
    if values.size > 1 and np.any(values[1:] >= 0):
        raise BarrierDomainError(f"barrier undefined: max constraint = {values[1:].max():.6g}")
    return float(values[0] - eta * np.sum(np.log(-values[1:])))


def barrier_gradient(batch: BatchEstimate, eta: float, trunc_a: float):
    """Barrier gradient estimate from a measurement batch.

    Measured slacks are truncated at ``trunc_a`` so a noisy non-positive
    measurement cannot blow up the ratio. Returns ``(g, alpha_bar)``.
    """
    alpha_bar = np.maximum(-batch.value[1:], trunc_a)
    g = batch.grad[0].copy()
    for i in range(alpha_bar.size):
        g += eta * batch.grad[i + 1] / alpha_bar[i]
    return g, alpha_bar


def confidence_bounds(
    batch: BatchEstimate,
    alpha_bar: np.ndarray,
    g: np.ndarray,
    delta_step: float,
    trunc_a: float,
):
    """Slack lower bounds and directional-slope upper bounds.

    ``alpha_lower[i] = alpha_bar[i] - sigma_i(n) sqrt(ln 1/delta)``, clamped
    at the truncation floor (flagged via the returned ``near_boundary``);
    ``theta_hat[i] = |<grad_i, g/||g||>| + b_hat_i + sigma_hat_i(n)
    sqrt(ln 1/delta)``. Returns ``(alpha_lower, theta_hat, near_boundary)``.
    """
    root_log = math.sqrt(math.log(1.0 / delta_step))
    alpha_lower = alpha_bar - batch.sigma_n[1:] * root_log
    near_boundary = bool(np.any(alpha_lower <= trunc_a)) if alpha_lower.size else False
    alpha_lower = np.maximum(alpha_lower, trunc_a)

    g_norm = float(np.linalg.norm(g))
    g_hat = g / g_norm if g_norm > 0 else np.zeros_like(g)
    theta_hat = (
        np.abs(batch.grad[1:] @ g_hat)
        + batch.b_hat[1:]
        + batch.sigma_hat_n[1:] * root_log
    )
    return alpha_lower, theta_hat, near_boundary


def m2_estimate(
    spec: ProblemSpec, eta: float, alpha_lower: np.ndarray, theta_hat: np.ndarray
) -> float:
    """Local smoothness bound of the barrier along the step direction."""
    m2 = spec.M[0]
    if spec.m > 0:
        m2 += 10.0 * eta * np.sum(spec.M[1:] / alpha_lower)
        m2 += 8.0 * eta * np.sum(theta_hat**2 / alpha_lower**2)
    return float(m2)


def step_size(
    alpha_lower: np.ndarray,
    theta_hat: np.ndarray,
    spec: ProblemSpec,
    m2_hat: float,
    g_norm: float,
) -> float:
    """Largest step keeping every constraint's growth within half its slack.

    Returns 0 for a zero step direction (the stopping rule fires upstream).
    A linear constraint with zero measured slope imposes no cap.
    """
    if g_norm == 0.0:
        return 0.0
    cap = math.inf
    for i in range(spec.m):
        denom = 2.0 * theta_hat[i] + math.sqrt(alpha_lower[i] * spec.M[i + 1])
        if denom > 0:
            cap = min(cap, alpha_lower[i] / denom)
    return min(cap / g_norm, 1.0 / m2_hat)


def deviation_bound(
    batch: BatchEstimate,
    alpha_bar: np.ndarray,
    alpha_lower: np.ndarray,
    spec: ProblemSpec,
    eta: float,
    delta_step: float,
) -> float:
    """High-probability bound on the barrier-gradient estimation error.

    The unknown true slack in the value-noise term is replaced by its lower
    bound, making the reported bound conservative.
    """
    root_log = math.sqrt(math.log(1.0 / delta_step))
    bound = batch.b_hat[0] + batch.sigma_hat_n[0] * root_log
    for i in range(spec.m):
        bound += eta / alpha_bar[i] * (batch.b_hat[i + 1] + batch.sigma_hat_n[i + 1] * root_log)
        bound += spec.L[i + 1] * eta * batch.sigma_n[i + 1] / (alpha_lower[i] * alpha_bar[i]) * root_log
    return float(bound)


def step_floor_constants(spec: ProblemSpec, eta: float) -> dict:
    """Diagnostic floor constants for the slack and the step size.

    Needs the constraint-qualification constants; returns ``None`` entries
    when the spec does not carry them. Never gates the solver.
    """
    if spec.mfcq is None:
        return {"c": None, "C": None}
    l, _rho = spec.mfcq
    L = float(np.max(spec.L))
    M = float(np.max(spec.M))
    m = spec.m
    c = 0.5 * (l / (4.0 * L * (2 * m + 1))) ** m
    denom = max(4.0 + 5.0 * M * c * eta / L**2, 1.0 + math.sqrt(M * c * eta / (4.0 * L**2)))
    C = c / (2.0 * L**2 * (1.0 + m / c)) / denom
    return {"c": c, "C": C}


def convex_gap_bound(spec: ProblemSpec, eta: float) -> float:
    """Accuracy reachable on the original convex problem at barrier level ``eta``.

    Diagnostic only; requires ``eta <= beta / 2``.
    """
    if eta > spec.beta / 2.0:
        raise ValueError(f"need eta <= beta/2 = {spec.beta / 2.0:.6g}, got {eta}")
    if spec.m == 0:
        return float(eta)
    L = float(np.max(spec.L))
    log_term = math.log(2.0 * spec.m * L * spec.R * spec.beta_hat / (eta * spec.beta))
    return float(eta * (spec.m + 1) + eta * spec.m * log_term)


def compute_state(
    spec: ProblemSpec,
    batch: BatchEstimate,
    eta: float,
    delta_step: float,
    trunc_a: float,
) -> BarrierState:
    """All barrier quantities for one iteration, in the algorithm's order."""
    g, alpha_bar = barrier_gradient(batch, eta, trunc_a)
    g_norm = float(np.linalg.norm(g))
    alpha_lower, theta_hat, near_boundary = confidence_bounds(
        batch, alpha_bar, g, delta_step, trunc_a
    )
    m2_hat = m2_estimate(spec, eta, alpha_lower, theta_hat)
    gamma = step_size(alpha_lower, theta_hat, spec, m2_hat, g_norm)
    dev = deviation_bound(batch, alpha_bar, alpha_lower, spec, eta, delta_step)
    return BarrierState(
        eta=eta,
        alpha_bar=alpha_bar,
        alpha_lower=alpha_lower,
        theta_hat=theta_hat,
        g=g,
        g_norm=g_norm,
        m2_hat=m2_hat,
        gamma=gamma,
        delta_step=delta_step,
        deviation_bound=dev,
        near_boundary=near_boundary,
    )
