"""Barrier SGD driver: single fixed-parameter runs and decreasing-parameter restarts.

Each iteration takes one measurement batch, derives the barrier state, and
steps ``x <- x - gamma * g``. Safety accounting (per-step confidence,
exact query counts, true-constraint audit of every raw query point) lives
here; the per-iteration math lives in :mod:`lbsgd.barrier`.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import barrier
from .oracles import safe_sampling_radius
from .problem import KktCertificate, Mode, ProblemSpec, SolverConfig, kkt_certificate

# Round termination: step sizes below GAMMA_STALL for STALL_STEPS consecutive
# iterations mean the iterate is pinned to the boundary by noise.
GAMMA_STALL = 1e-14
STALL_STEPS = 10

ARGMIN_GNORM = "argmin_gnorm"
WEIGHTED_AVERAGE = "weighted_average"
LAST_ROUND = "last_round"


@dataclass
class IterateRecord:
    """Audit record of one iteration (measured at ``x``)."""

    t: int
    queries_cum: int
    x: np.ndarray
    f0_true: float
    max_constraint_true: float
    barrier_est: float
    g_norm: float
    gamma: float
    eta: float
    violated: bool
    sample_points: np.ndarray


@dataclass
class RunReport:
    """Full record of one solver run."""

    trajectory: list
    output_x: np.ndarray
    output_rule: str
    violations_total: int
    queries_total: int
    iterations_total: int
    wall_time_seconds: float
    kkt: Optional[KktCertificate]
    eta_schedule: list
    delta_step: float
    budget_exhausted: bool = False
    stalled: bool = False


def per_step_confidence(delta_hat: float, m: int, t_total: int) -> float:
    """Per-event confidence splitting the target over all constraint checks."""
    if not 0 < delta_hat < 1:
        raise ValueError(f"delta_hat must lie in (0, 1), got {delta_hat}")
    if t_total < 1:
        raise ValueError(f"total iteration count must be positive, got {t_total}")
    return delta_hat / (max(m, 1) * t_total)


def restart_rounds(eta0: float, eta_final: float, omega: float) -> int:
    """Number of reduction rounds needed to bring eta0 down to eta_final."""
    if eta_final >= eta0:
        return 0
    ratio = math.log(eta0 / eta_final) / math.log(1.0 / omega)
    return max(math.ceil(ratio - 1e-9), 1)


def count_violations(spec: ProblemSpec, points: np.ndarray) -> int:
    """Number of query points at which any true constraint is positive."""
    if spec.m == 0:
        return 0
    return sum(1 for p in points if spec.max_constraint(p) > 0)


@dataclass
class _RunState:
    """Mutable cross-round solver state."""

    x: np.ndarray
    queries: int = 0
    t: int = 0
    violations: int = 0
    trajectory: list = field(default_factory=list)
    budget_exhausted: bool = False
    stalled: bool = False
    # slack lower bounds / gradient norms valid at the current x, used to
    # size the zeroth-order sampling radius before the batch is taken
    nu_alpha_lower: np.ndarray = None
    nu_grad_norms: np.ndarray = None


def _initial_nu_state(spec: ProblemSpec) -> tuple:
    # At the starting point the margin assumption bounds every slack by
    # beta, and the Lipschitz constants bound every gradient norm.
    return np.full(spec.m, spec.beta), spec.L[1:].copy()


def _run_round(
    spec: ProblemSpec,
    oracle,
    rng: np.random.Generator,
    run: _RunState,
    *,
    eta: float,
    steps: int,
    n: int,
    delta_step: float,
    trunc_a: float,
    mode: Mode,
    nu_override: Optional[float],
    max_queries: int,
) -> tuple:
    """One fixed-eta round. Returns (round_output_x, executed_steps)."""
    executed = 0
    stall_run = 0
    gamma_sum = 0.0
    gamma_weighted = np.zeros(spec.d)
    round_alpha_min = None

    for _ in range(steps):
        if run.queries + oracle.queries_per_batch(n) > max_queries:
            run.budget_exhausted = True
            break
        nu = None
        if oracle.needs_radius:
            nu = nu_override if nu_override is not None else safe_sampling_radius(
                run.nu_alpha_lower, run.nu_grad_norms, spec, eta
            )
        batch = oracle.sample(run.x, n, rng, nu)
        run.queries += batch.queries_used
        state = barrier.compute_state(spec, batch, eta, delta_step, trunc_a)

        bad_points = count_violations(spec, batch.sample_points)
        run.violations += bad_points
        barrier_est = float(batch.value[0] - eta * np.sum(np.log(state.alpha_bar)))
        run.t += 1
        run.trajectory.append(
            IterateRecord(
                t=run.t,
                queries_cum=run.queries,
                x=run.x.copy(),
                f0_true=float(spec.funcs[0](run.x)),
                max_constraint_true=spec.max_constraint(run.x),
                barrier_est=barrier_est,
                g_norm=state.g_norm,
                gamma=state.gamma,
                eta=eta,
                violated=bad_points > 0,
                sample_points=batch.sample_points,
            )
        )
        executed += 1
        gamma_sum += state.gamma
        gamma_weighted += state.gamma * run.x

        if round_alpha_min is None:
            round_alpha_min = state.alpha_lower.copy()
        else:
            round_alpha_min = np.minimum(round_alpha_min, state.alpha_lower)
        # Bounds valid at the next iterate: the step halves each slack at
        # worst, and the measured gradients estimate the local norms.
        run.nu_alpha_lower = state.alpha_lower / 2.0
        run.nu_grad_norms = np.linalg.norm(batch.grad[1:], axis=1) if spec.m else run.nu_grad_norms

        if mode is Mode.NONCONVEX and state.g_norm <= 0.75 * eta:
            break
        if state.gamma < GAMMA_STALL:
            stall_run += 1
            if stall_run >= STALL_STEPS:
                run.stalled = True
                break
        else:
            stall_run = 0
        run.x = run.x - state.gamma * state.g

    if mode is not Mode.NONCONVEX and gamma_sum > 0:
        out = gamma_weighted / gamma_sum
        # The average is a Jensen combination of measured iterates, so the
        # smallest per-constraint bound seen this round is valid there.
        run.nu_alpha_lower = round_alpha_min
    else:
        out = run.x.copy()
    return out, executed


def _finalize(
    spec: ProblemSpec,
    run: _RunState,
    output_x: np.ndarray,
    output_rule: str,
    eta_schedule: list,
    delta_step: float,
    wall: float,
) -> RunReport:
    kkt = None
    if spec.grads is not None and spec.is_strictly_feasible(output_x):
        eta_last = eta_schedule[-1][0] if eta_schedule else 0.0
        if eta_last > 0:
            kkt = kkt_certificate(spec, output_x, eta_last)
    return RunReport(
        trajectory=run.trajectory,
        output_x=output_x,
        output_rule=output_rule,
        violations_total=run.violations,
        queries_total=run.queries,
        iterations_total=len(run.trajectory),
        wall_time_seconds=wall,
        kkt=kkt,
        eta_schedule=eta_schedule,
        delta_step=delta_step,
        budget_exhausted=run.budget_exhausted,
        stalled=run.stalled,
    )


def _check_start(spec: ProblemSpec):
    from .problem import validate_problem

    diags = validate_problem(spec)
    if diags:
        raise ValueError("invalid problem: " + "; ".join(diags))


def lbsgd_run(
    spec: ProblemSpec,
    config: SolverConfig,
    oracle,
    rng: np.random.Generator,
) -> RunReport:
    """Single run with fixed barrier parameter ``config.eta0``.

    Non-convex mode halts once the gradient-estimate norm falls to
    ``3*eta/4`` and outputs the iterate with the smallest recorded norm;
    convex modes run all ``steps_per_round`` iterations and output the
    step-size-weighted average. Budget exhaustion and near-boundary stalls
    are reported on the result, not raised.
    """
    _check_start(spec)
    eta = config.eta0
    t_total = config.steps_per_round
    delta_step = per_step_confidence(config.delta_hat, spec.m, t_total)
    run = _RunState(x=spec.x0.copy())
    run.nu_alpha_lower, run.nu_grad_norms = _initial_nu_state(spec)

    start = time.perf_counter()
    round_out, executed = _run_round(
        spec,
        oracle,
        rng,
        run,
        eta=eta,
        steps=t_total,
        n=config.batch_size,
        delta_step=delta_step,
        trunc_a=config.trunc_a,
        mode=config.mode,
        nu_override=config.nu_override,
        max_queries=config.max_total_queries,
    )
    wall = time.perf_counter() - start

    if config.mode is Mode.NONCONVEX:
        rule = ARGMIN_GNORM
        if run.trajectory:
            best = min(run.trajectory, key=lambda r: r.g_norm)
            output_x = best.x.copy()
        else:
            output_x = spec.x0.copy()
    else:
        rule = WEIGHTED_AVERAGE
        output_x = round_out
    schedule = [(eta, executed, config.batch_size)]
    return _finalize(spec, run, output_x, rule, schedule, delta_step, wall)


def restart_run(
    spec: ProblemSpec,
    config: SolverConfig,
    oracle,
    rng: np.random.Generator,
) -> RunReport:
    """Restart scheme: repeated rounds with geometrically decreasing eta.

    Round k runs ``steps_per_round`` iterations at ``eta_k = omega^k *
    eta0``, warm-started at the previous round's output (weighted average
    in convex modes, last iterate otherwise). The final output is the last
    round's output. A stalled round advances to the next eta; an exhausted
    query budget ends the run.
    """
    _check_start(spec)
    k_rounds = restart_rounds(config.eta0, config.eta_final, config.omega)
    run = _RunState(x=spec.x0.copy())
    run.nu_alpha_lower, run.nu_grad_norms = _initial_nu_state(spec)
    schedule = []
    output_x = spec.x0.copy()
    t_total = max(k_rounds, 1) * config.steps_per_round
    delta_step = per_step_confidence(config.delta_hat, spec.m, t_total)

    start = time.perf_counter()
    ever_stalled = False
    for k in range(1, k_rounds + 1):
        eta_k = config.eta0 * config.omega**k
        run.stalled = False
        round_out, executed = _run_round(
            spec,
            oracle,
            rng,
            run,
            eta=eta_k,
            steps=config.steps_per_round,
            n=config.batch_size,
            delta_step=delta_step,
            trunc_a=config.trunc_a,
            mode=config.mode,
            nu_override=config.nu_override,
            max_queries=config.max_total_queries,
        )
        schedule.append((eta_k, executed, config.batch_size))
        ever_stalled = ever_stalled or run.stalled
        if executed > 0:
            output_x = round_out
            run.x = round_out.copy()
        if run.budget_exhausted:
            break
    wall = time.perf_counter() - start
    run.stalled = ever_stalled
    return _finalize(spec, run, output_x, LAST_ROUND, schedule, delta_step, wall)
