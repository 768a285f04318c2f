"""Toy tabular constrained MDP and its policy-search problem.

A 6-state chain where the safe action crawls toward an absorbing goal and
the risky action jumps two states ahead, paying a unit cost in designated
middle states. Softmax policy parameters turn the CMDP into a smooth
constrained program: maximize expected discounted return subject to the
expected discounted cost staying under a threshold.

Exact finite-horizon dynamic programming provides the audit channel (values
and policy gradients without sampling); Monte-Carlo rollouts with
likelihood-ratio gradients provide the stochastic first-order oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..oracles import BatchEstimate
from ..problem import ProblemSpec

_PROB_TOL = 1e-12


@dataclass(frozen=True)
class TabularCmdp:
    """Finite CMDP with one cost signal and a fixed episode length."""

    n_states: int
    n_actions: int
    transition: np.ndarray  # [S, A, S]
    reward: np.ndarray  # [S, A]
    cost: np.ndarray  # [S, A]
    discount: float
    horizon: int
    threshold: float
    init_dist: np.ndarray  # [S]

    def __post_init__(self):
        for name in ("transition", "reward", "cost", "init_dist"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.transition.shape != (self.n_states, self.n_actions, self.n_states):
            raise ValueError("transition tensor must have shape [S, A, S]")
        row_sums = self.transition.sum(axis=2)
        if np.any(np.abs(row_sums - 1.0) > _PROB_TOL):
            raise ValueError("transition rows must sum to 1")
        if abs(self.init_dist.sum() - 1.0) > _PROB_TOL:
            raise ValueError("initial distribution must sum to 1")
        if np.any(self.cost < 0):
            raise ValueError("costs must be non-negative")
        if not 0 < self.discount <= 1:
            raise ValueError("discount must lie in (0, 1]")


def softmax_policy(x: np.ndarray, n_states: int, n_actions: int) -> np.ndarray:
    """Per-state softmax over the action logits in ``x``."""
    logits = np.asarray(x, dtype=float).reshape(n_states, n_actions)
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def dp_policy_values(cmdp: TabularCmdp, pi: np.ndarray) -> tuple:
    """Exact expected discounted (return, cost) of policy ``pi``."""
    d = cmdp.init_dist.copy()
    ret = cost = 0.0
    disc = 1.0
    for _ in range(cmdp.horizon):
        ret += disc * float(np.einsum("s,sa,sa->", d, pi, cmdp.reward))
        cost += disc * float(np.einsum("s,sa,sa->", d, pi, cmdp.cost))
        d = np.einsum("s,sa,sat->t", d, pi, cmdp.transition)
        disc *= cmdp.discount
    return ret, cost


def dp_policy_gradients(cmdp: TabularCmdp, x: np.ndarray) -> tuple:
    """Exact gradients of (return, cost) with respect to the policy logits.

    Backward value recursion for the step-indexed action values, forward
    recursion for the state distribution, then the softmax Jacobian:
    ``d return / d x[s,a] = sum_tau gamma^tau d_tau(s) pi(a|s)
    (Q_tau(s,a) - V_tau(s))``.
    """
    S, A, H = cmdp.n_states, cmdp.n_actions, cmdp.horizon
    pi = softmax_policy(x, S, A)

    q_ret = np.zeros((H, S, A))
    q_cost = np.zeros((H, S, A))
    v_ret = np.zeros(S)
    v_cost = np.zeros(S)
    for tau in range(H - 1, -1, -1):
        q_ret[tau] = cmdp.reward + cmdp.discount * cmdp.transition @ v_ret
        q_cost[tau] = cmdp.cost + cmdp.discount * cmdp.transition @ v_cost
        v_ret = np.einsum("sa,sa->s", pi, q_ret[tau])
        v_cost = np.einsum("sa,sa->s", pi, q_cost[tau])

    grad_ret = np.zeros((S, A))
    grad_cost = np.zeros((S, A))
    d = cmdp.init_dist.copy()
    disc = 1.0
    for tau in range(H):
        adv_ret = q_ret[tau] - np.einsum("sa,sa->s", pi, q_ret[tau])[:, None]
        adv_cost = q_cost[tau] - np.einsum("sa,sa->s", pi, q_cost[tau])[:, None]
        grad_ret += disc * d[:, None] * pi * adv_ret
        grad_cost += disc * d[:, None] * pi * adv_cost
        d = np.einsum("s,sa,sat->t", d, pi, cmdp.transition)
        disc *= cmdp.discount
    return grad_ret.ravel(), grad_cost.ravel()


@dataclass(frozen=True)
class SoftmaxPolicyProblem:
    """Policy search over softmax logits, with the derived problem spec."""

    cmdp: TabularCmdp
    dim: int
    episodes_per_estimate: int
    spec: ProblemSpec = field(compare=False, default=None)


def _estimate_regularity(cmdp: TabularCmdp, radius: float = 4.0, samples: int = 24) -> tuple:
    """Sampled bounds on the gradient norm and Hessian norm of both values.

    Central differences of the exact DP gradient over random logit vectors,
    maximized and inflated by 1.5x.
    """
    rng = np.random.default_rng(1234)
    dim = cmdp.n_states * cmdp.n_actions
    points = [np.zeros(dim)] + [rng.uniform(-radius, radius, dim) for _ in range(samples)]
    step = 1e-5
    l_max = np.zeros(2)
    m_max = np.zeros(2)
    for x in points:
        g = np.array(dp_policy_gradients(cmdp, x))
        l_max = np.maximum(l_max, np.linalg.norm(g, axis=1))
        jac = np.zeros((2, dim, dim))
        for j in range(dim):
            e = np.zeros(dim)
            e[j] = step
            gp = np.array(dp_policy_gradients(cmdp, x + e))
            gm = np.array(dp_policy_gradients(cmdp, x - e))
            jac[:, :, j] = (gp - gm) / (2 * step)
        for i in range(2):
            m_max[i] = max(m_max[i], np.linalg.norm(0.5 * (jac[i] + jac[i].T), ord=2))
    return 1.5 * l_max, 1.5 * m_max


def make_chain_cmdp(
    n_states: int = 6,
    n_actions: int = 2,
    horizon: int = 30,
    discount: float = 0.8,
    margin: float = 0.15,
    episodes_per_estimate: int = 2000,
) -> SoftmaxPolicyProblem:
    """Default chain: slow safe advance vs. fast risky jumps that cost in the middle.

    The cost threshold is set to the uniform policy's exact expected cost
    plus ``margin``, so the uniform starting policy is safely inside the
    constraint; construction fails if dynamic programming disagrees.
    """
    if n_states < 4 or n_actions != 2:
        raise ValueError("chain needs at least 4 states and exactly 2 actions")
    S, A = n_states, n_actions
    goal = S - 1

    P = np.zeros((S, A, S))
    for s in range(goal):
        P[s, 0, s + 1] = 0.5
        P[s, 0, s] = 0.5
        P[s, 1, min(s + 2, goal)] += 0.85
        P[s, 1, min(s + 1, goal)] += 0.10
        P[s, 1, s] += 0.05
    P[goal, :, goal] = 1.0

    reward = np.zeros((S, A))
    reward[:goal, 1] = 0.05
    reward[goal, :] = 1.0

    cost = np.zeros((S, A))
    cost[1 : min(4, goal), 1] = 1.0

    init = np.zeros(S)
    init[0] = 1.0

    uniform = np.full((S, A), 1.0 / A)
    probe = TabularCmdp(S, A, P, reward, cost, discount, horizon, 0.0, init)
    _, uniform_cost = dp_policy_values(probe, uniform)
    threshold = uniform_cost + margin

    cmdp = TabularCmdp(S, A, P, reward, cost, discount, horizon, threshold, init)
    _, check_cost = dp_policy_values(cmdp, uniform)
    if not check_cost <= threshold - margin + 1e-12:
        raise ValueError("uniform starting policy is not safe for the chosen threshold")

    dim = S * A
    x0 = np.zeros(dim)

    def objective(x, cmdp=cmdp):
        pi = softmax_policy(x, cmdp.n_states, cmdp.n_actions)
        ret, _ = dp_policy_values(cmdp, pi)
        return -ret

    def constraint(x, cmdp=cmdp):
        pi = softmax_policy(x, cmdp.n_states, cmdp.n_actions)
        _, c = dp_policy_values(cmdp, pi)
        return c - cmdp.threshold

    def objective_grad(x, cmdp=cmdp):
        g_ret, _ = dp_policy_gradients(cmdp, x)
        return -g_ret

    def constraint_grad(x, cmdp=cmdp):
        _, g_cost = dp_policy_gradients(cmdp, x)
        return g_cost

    l_bounds, m_bounds = _estimate_regularity(cmdp)
    horizon_mass = (1 - discount**horizon) / (1 - discount) if discount < 1 else float(horizon)
    value_bound = horizon_mass * max(float(reward.max()), float(cost.max()))
    spec = ProblemSpec(
        d=dim,
        m=1,
        funcs=(objective, constraint),
        grads=(objective_grad, constraint_grad),
        M=np.array([m_bounds[0], m_bounds[1]]),
        L=np.array([l_bounds[0], l_bounds[1]]),
        R=20.0,
        x0=x0,
        beta=margin,
        beta_hat=max(threshold, value_bound - threshold),
        mfcq=None,
    )
    return SoftmaxPolicyProblem(cmdp=cmdp, dim=dim, episodes_per_estimate=episodes_per_estimate, spec=spec)


def rollout_episodes(
    cmdp: TabularCmdp, pi: np.ndarray, n: int, rng: np.random.Generator
) -> tuple:
    """Simulate ``n`` episodes under ``pi``; returns per-episode sums and traces.

    Returns ``(returns, costs, states, actions, step_rewards, step_costs)``
    with trace arrays of shape (horizon, n); rewards/costs are already
    discounted by their step.
    """
    S, A, H = cmdp.n_states, cmdp.n_actions, cmdp.horizon
    pi_cum = np.cumsum(pi, axis=1)
    trans_cum = np.cumsum(cmdp.transition, axis=2)

    states = np.empty((H, n), dtype=np.int64)
    actions = np.empty((H, n), dtype=np.int64)
    step_rewards = np.empty((H, n))
    step_costs = np.empty((H, n))

    s = rng.choice(S, size=n, p=cmdp.init_dist)
    disc = 1.0
    for tau in range(H):
        u = rng.random(n)
        a = (u[:, None] > pi_cum[s]).sum(axis=1)
        states[tau] = s
        actions[tau] = a
        step_rewards[tau] = disc * cmdp.reward[s, a]
        step_costs[tau] = disc * cmdp.cost[s, a]
        u2 = rng.random(n)
        s = (u2[:, None] > trans_cum[s, a]).sum(axis=1)
        disc *= cmdp.discount
    return step_rewards.sum(axis=0), step_costs.sum(axis=0), states, actions, step_rewards, step_costs


def cmdp_oracle(
    problem: SoftmaxPolicyProblem, x: np.ndarray, n: int, rng: np.random.Generator
) -> BatchEstimate:
    """Monte-Carlo estimate of values and likelihood-ratio gradients.

    Rolls ``n`` episodes under the softmax policy; gradients use the
    reward-to-go form of the score-function estimator. Value noise scales
    are the empirical standard errors; one episode counts as one query.
    """
    cmdp = problem.cmdp
    S, A = cmdp.n_states, cmdp.n_actions
    x = np.asarray(x, dtype=float)
    pi = softmax_policy(x, S, A)
    returns, costs, states, actions, step_rewards, step_costs = rollout_episodes(cmdp, pi, n, rng)

    # discounted reward-to-go: w[tau] = sum_{tau' >= tau} gamma^tau' r_tau'
    togo_r = np.cumsum(step_rewards[::-1], axis=0)[::-1]
    togo_c = np.cumsum(step_costs[::-1], axis=0)[::-1]

    grad_r = np.zeros((n, S, A))
    grad_c = np.zeros((n, S, A))
    eps = np.arange(n)
    for tau in range(cmdp.horizon):
        s, a = states[tau], actions[tau]
        # (episode, state) pairs are unique within a step, so plain fancy
        # indexing accumulates correctly
        grad_r[eps, s] -= togo_r[tau][:, None] * pi[s]
        grad_c[eps, s] -= togo_c[tau][:, None] * pi[s]
        grad_r[eps, s, a] += togo_r[tau]
        grad_c[eps, s, a] += togo_c[tau]

    grad_r = grad_r.reshape(n, -1)
    grad_c = grad_c.reshape(n, -1)
    value = np.array([-returns.mean(), costs.mean() - cmdp.threshold])
    grad = np.vstack([-grad_r.mean(axis=0), grad_c.mean(axis=0)])
    sigma_n = np.array([returns.std(ddof=1), costs.std(ddof=1)]) / math.sqrt(n)
    sigma_hat_n = np.array(
        [
            math.sqrt(grad_r.var(axis=0, ddof=1).sum() / n),
            math.sqrt(grad_c.var(axis=0, ddof=1).sum() / n),
        ]
    )
    return BatchEstimate(
        value=value,
        grad=grad,
        sigma_n=sigma_n,
        sigma_hat_n=sigma_hat_n,
        b_hat=np.zeros(2),
        queries_used=n,
        sample_points=x[None, :].copy(),
    )


class CmdpOracle:
    """Adapter exposing the Monte-Carlo policy oracle to the solver."""

    needs_radius = False

    def __init__(self, problem: SoftmaxPolicyProblem):
        self.problem = problem

    def queries_per_batch(self, n: int) -> int:
        return n

    def sample(self, x, n, rng, nu: Optional[float] = None) -> BatchEstimate:
        return cmdp_oracle(self.problem, x, n, rng)
