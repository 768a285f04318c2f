"""The three synthetic benchmark families with their regularity constants.

Each constructor returns a fully populated :class:`ProblemSpec` whose
constants are analytic bounds over the feasible set, safe by construction.
Where a bound comes from a numeric procedure (the box-constrained quadratic
objective of the chain benchmark has a closed form; the others do not),
the procedure is executed by the ``*_bound`` helper and the result is
recorded with a 1.5x safety factor.
"""

from __future__ import annotations

import math

import numpy as np

from ..problem import ProblemSpec


def make_quadratic_linear(d: int) -> ProblemSpec:
    """Quadratic objective over a shrunken box, encoded as 2d linear constraints.

    ``f^0(x) = ||x - c||^2 / (4d)`` with ``c = (2, ..., 2)``; constraints
    ``+-x_j <= 1/sqrt(d)``. The unconstrained minimizer lies outside the
    box, so the solution sits on the boundary. Convex.
    """
    if d < 1:
        raise ValueError(f"dimension must be positive, got {d}")
    c = np.full(d, 2.0)
    bound = 1.0 / math.sqrt(d)

    def objective(x, c=c, d=d):
        return float(np.sum((x - c) ** 2) / (4.0 * d))

    def objective_grad(x, c=c, d=d):
        return (x - c) / (2.0 * d)

    rows = np.vstack([np.eye(d), -np.eye(d)])
    funcs = [objective]
    grads = [objective_grad]
    for a in rows:
        funcs.append(lambda x, a=a, bound=bound: float(a @ x - bound))
        grads.append(lambda x, a=a: a.copy())

    m = 2 * d
    M = np.zeros(m + 1)
    M[0] = 1.0 / (2.0 * d)
    L = np.ones(m + 1)
    # sup ||grad f^0|| over the box: ||x - c|| <= sqrt(d) * (2 + 1/sqrt(d))
    L[0] = (2.0 * math.sqrt(d) + 1.0) / (2.0 * d)
    return ProblemSpec(
        d=d,
        m=m,
        funcs=tuple(funcs),
        grads=tuple(grads),
        M=M,
        L=L,
        R=2.0,
        x0=np.zeros(d),
        beta=bound,
        beta_hat=2.0 * bound,
    )


def quadratic_linear_optimum(d: int):
    """Analytic solution of the box benchmark: the clipped target corner."""
    bound = 1.0 / math.sqrt(d)
    x_star = np.full(d, min(2.0, bound))
    f_star = (2.0 - bound) ** 2 / 4.0
    return x_star, f_star


def _coupled_quadratic_hessian(d: int) -> np.ndarray:
    """Constant Hessian of the coupled-coordinate quadratic objective."""
    h = np.zeros((d, d))
    for i in range(d - 1):
        h[i, i] += 200.0 - 2.0
        h[i + 1, i + 1] += 200.0
        h[i, i + 1] -= 200.0
        h[i + 1, i] -= 200.0
    return h


def rosenbrock_m0_bound(d: int) -> float:
    """Smoothness bound of the coupled quadratic objective, with safety factor.

    The Hessian is constant, so its spectral norm over the feasible ball is
    exact; the 1.5x factor guards downstream uses that assume slack.
    """
    return 1.5 * float(np.linalg.norm(_coupled_quadratic_hessian(d), ord=2))


def make_rosenbrock(d: int, r1: float = 0.1, r2: float = 0.2) -> ProblemSpec:
    """Coupled-coordinate quadratic objective inside two small balls.

    ``f^0(x) = sum_i 100 (x_i - x_{i+1})^2 - (1 - x_i)^2`` subject to
    ``||x||^2 <= r1^2`` and ``||x - x_hat||^2 <= r2^2`` with ``x_hat =
    (-0.05, ..., -0.05)``. The objective Hessian is indefinite, so the
    problem is non-convex; the solution sits on the boundary.
    """
    if d < 2:
        raise ValueError(f"dimension must be at least 2, got {d}")
    x_hat = np.full(d, -0.05)
    beta = min(r1**2, r2**2 - d * 0.0025)
    # the second-ball margin hits zero at d = 16 in exact arithmetic; guard
    # against roundoff leaving a sub-epsilon sliver
    if beta <= 1e-12:
        raise ValueError(f"origin is not strictly feasible at d={d} (margin {beta:.4g})")

    def objective(x):
        diffs = x[:-1] - x[1:]
        return float(100.0 * np.sum(diffs**2) - np.sum((1.0 - x[:-1]) ** 2))

    def objective_grad(x):
        g = np.zeros_like(x)
        diffs = x[:-1] - x[1:]
        g[:-1] += 200.0 * diffs + 2.0 * (1.0 - x[:-1])
        g[1:] -= 200.0 * diffs
        return g

    funcs = (
        objective,
        lambda x: float(x @ x - r1**2),
        lambda x, x_hat=x_hat: float((x - x_hat) @ (x - x_hat) - r2**2),
    )
    grads = (
        objective_grad,
        lambda x: 2.0 * x,
        lambda x, x_hat=x_hat: 2.0 * (x - x_hat),
    )
    hess_norm = float(np.linalg.norm(_coupled_quadratic_hessian(d), ord=2))
    # sup ||grad f^0|| <= ||H|| r1 + ||grad f^0(0)||
    l0 = hess_norm * r1 + 2.0 * math.sqrt(d - 1)
    return ProblemSpec(
        d=d,
        m=2,
        funcs=funcs,
        grads=grads,
        M=np.array([rosenbrock_m0_bound(d), 2.0, 2.0]),
        L=np.array([l0, 2.0 * r1, 2.0 * r2]),
        R=2.0 * r1,
        x0=np.zeros(d),
        beta=beta,
        beta_hat=max(r1**2, r2**2),
    )


# Global bound on the Hessian norm of -exp(-4||x||^2); attained at the
# origin, verified numerically in the test suite.
GAUSSIAN_M0 = 8.0


def make_gaussian_ellipsoid(d: int, r: float = 0.5) -> ProblemSpec:
    """Negative Gaussian objective inside an off-center ellipsoid.

    ``f^0(x) = -exp(-4||x||^2)``, constraint
    ``<x - x_hat, A (x - x_hat)> <= r^2`` with ``A = diag(3, 1.2, ..., 1.2)``
    and center ``x_hat = 0.5 * (1, ..., 1)/sqrt(d)``. At ``r = 0.5`` the
    unconstrained minimizer (the origin) is infeasible and the solution
    sits on the ellipsoid boundary; large ``r`` makes it interior.
    """
    if d < 2:
        raise ValueError(f"dimension must be at least 2, got {d}")
    a_diag = np.full(d, 1.2)
    a_diag[0] = 3.0
    x_hat = np.full(d, 0.5 / math.sqrt(d))

    def objective(x):
        return float(-math.exp(-4.0 * float(x @ x)))

    def objective_grad(x):
        return 8.0 * x * math.exp(-4.0 * float(x @ x))

    def constraint(x, a_diag=a_diag, x_hat=x_hat, r=r):
        v = x - x_hat
        return float(v @ (a_diag * v) - r**2)

    def constraint_grad(x, a_diag=a_diag, x_hat=x_hat):
        return 2.0 * a_diag * (x - x_hat)

    # sup ||grad f^0|| = 2 sqrt(2) e^{-1/2}; sup ||grad f^1|| <= 2 sqrt(3) r
    l0 = 2.0 * math.sqrt(2.0) * math.exp(-0.5)
    l1 = 2.0 * math.sqrt(3.0) * r
    return ProblemSpec(
        d=d,
        m=1,
        funcs=(objective, constraint),
        grads=(objective_grad, constraint_grad),
        M=np.array([GAUSSIAN_M0, 2.0 * 3.0]),
        L=np.array([l0, l1]),
        R=2.0 * r / math.sqrt(1.2),
        x0=x_hat.copy(),
        beta=r**2,
        beta_hat=r**2,
    )
