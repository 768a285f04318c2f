"""Stochastic value/gradient oracles and batch averaging.

Two oracle families are provided: a first-order oracle returning noisy
values and gradients, and a two-point zeroth-order oracle that estimates
gradients from finite differences along uniform unit-sphere directions.
Both average ``n`` raw samples per call and report the effective noise
levels of the averaged estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .problem import ProblemSpec

# Floor on the sampling radius; prevents the finite difference from
# dividing by ~0 when the slack lower bound collapses.
NU_FLOOR = 1e-12


@dataclass(frozen=True)
class NoiseModel:
    """Additive Gaussian noise scales per function.

    ``sigma[i]`` is the value-noise std, ``sigma_hat[i]`` the gradient-noise
    std (first-order oracle only; the total vector std, spread evenly across
    coordinates), ``b_hat[i]`` a gradient bias bound carried as metadata.
    """

    sigma: np.ndarray
    sigma_hat: np.ndarray
    b_hat: np.ndarray

    def __post_init__(self):
        for name in ("sigma", "sigma_hat", "b_hat"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if np.any(arr < 0):
                raise ValueError(f"{name} entries must be non-negative")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not self.sigma.shape == self.sigma_hat.shape == self.b_hat.shape:
            raise ValueError("noise arrays must share one shape of length m+1")

    @classmethod
    def isotropic(cls, m: int, sigma: float = 0.0, sigma_hat: float = 0.0) -> "NoiseModel":
        """Same noise scale for the objective and every constraint."""
        return cls(
            sigma=np.full(m + 1, sigma),
            sigma_hat=np.full(m + 1, sigma_hat),
            b_hat=np.zeros(m + 1),
        )

    @classmethod
    def noiseless(cls, m: int) -> "NoiseModel":
        return cls.isotropic(m)


@dataclass(frozen=True)
class BatchEstimate:
    """Averaged oracle output at one point.

    ``value[i]`` and ``grad[i]`` are batch means for function i;
    ``sigma_n``/``sigma_hat_n`` the noise scales of those means; ``b_hat``
    the current gradient bias bounds. ``sample_points`` lists every point a
    raw value query touched (for safety auditing) and always contains the
    batch center.
    """

    value: np.ndarray
    grad: np.ndarray
    sigma_n: np.ndarray
    sigma_hat_n: np.ndarray
    b_hat: np.ndarray
    queries_used: int
    sample_points: np.ndarray


def first_order_batch(
    spec: ProblemSpec,
    noise: NoiseModel,
    x: np.ndarray,
    n: int,
    rng: np.random.Generator,
) -> BatchEstimate:
    """Average ``n`` noisy value/gradient samples of every function at ``x``.

    Gradient noise is Gaussian per coordinate with std ``sigma_hat_i/sqrt(d)``
    so the full vector perturbation has std ``sigma_hat_i``. Deterministic
    given the generator state.
    """
    if spec.grads is None:
        raise ValueError("first-order oracle needs gradient callables on the spec")
    x = np.asarray(x, dtype=float)
    k = spec.m + 1
    value = np.empty(k)
    grad = np.empty((k, spec.d))
    coord_scale = 1.0 / math.sqrt(spec.d)
    for i in range(k):
        fi = spec.funcs[i](x)
        value[i] = fi + rng.normal(0.0, noise.sigma[i], size=n).mean()
        gi = np.asarray(spec.grads[i](x), dtype=float)
        pert = rng.normal(0.0, noise.sigma_hat[i] * coord_scale, size=(n, spec.d))
        grad[i] = gi + pert.mean(axis=0)
    root_n = math.sqrt(n)
    return BatchEstimate(
        value=value,
        grad=grad,
        sigma_n=noise.sigma / root_n,
        sigma_hat_n=noise.sigma_hat / root_n,
        b_hat=noise.b_hat.copy(),
        queries_used=n * k,
        sample_points=x[None, :].copy(),
    )


def sphere_directions(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` directions uniform on the unit sphere in R^d (normalized Gaussians)."""
    z = rng.standard_normal((n, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def zo_variance_bound(d: int, grad_norm: float, m_i: float, sigma_i: float, nu: float, n: int) -> float:
    """Variance bound of the averaged two-point sphere estimator."""
    smooth_part = 3.0 / n * (d * grad_norm**2 + d**2 * m_i**2 * nu**2 / 4.0)
    noise_part = 4.0 * d**2 * sigma_i**2 / (n * nu**2)
    return smooth_part + noise_part


def zo_batch(
    spec: ProblemSpec,
    noise: NoiseModel,
    x: np.ndarray,
    nu: float,
    n: int,
    rng: np.random.Generator,
) -> BatchEstimate:
    """Two-point zeroth-order estimate of all values and gradients at ``x``.

    Samples ``n`` sphere directions shared across functions; for each
    function the gradient estimate is ``(d/n) sum_j [F(x+nu*s_j) - F(x)]/nu
    * s_j`` and the value estimate is the mean of the center queries. The
    reported gradient-noise scale is the analytic variance bound with the
    Lipschitz constant standing in for the unknown gradient norm, and the
    bias bound is ``nu * M_i``.
    """
    if not nu > 0:
        raise ValueError(f"sampling radius must be positive, got {nu}")
    x = np.asarray(x, dtype=float)
    k = spec.m + 1
    dirs = sphere_directions(spec.d, n, rng)
    forward = x[None, :] + nu * dirs

    value = np.empty(k)
    grad = np.empty((k, spec.d))
    sigma_hat_n = np.empty(k)
    for i in range(k):
        f_center = spec.funcs[i](x)
        center = f_center + rng.normal(0.0, noise.sigma[i], size=n)
        ahead = np.array([spec.funcs[i](p) for p in forward])
        ahead += rng.normal(0.0, noise.sigma[i], size=n)
        value[i] = center.mean()
        grad[i] = spec.d / n * ((ahead - center) / nu) @ dirs
        sigma_hat_n[i] = math.sqrt(
            zo_variance_bound(spec.d, spec.L[i], spec.M[i], noise.sigma[i], nu, n)
        )
    return BatchEstimate(
        value=value,
        grad=grad,
        sigma_n=noise.sigma / math.sqrt(n),
        sigma_hat_n=sigma_hat_n,
        b_hat=nu * spec.M,
        queries_used=2 * n * k,
        sample_points=np.vstack([x[None, :], forward]),
    )


def safe_sampling_radius(
    alpha_lower: np.ndarray,
    grad_norm_est: np.ndarray,
    spec: ProblemSpec,
    eta: float,
) -> float:
    """Sampling radius keeping all sphere queries feasible with high probability.

    ``alpha_lower`` and ``grad_norm_est`` are per-constraint slack lower
    bounds and gradient-norm estimates valid at the batch center. Terms
    whose denominator vanishes because the relevant smoothness constant is
    zero are dropped; the result is floored at ``NU_FLOOR``.
    """
    m_eff = max(spec.m, 1)
    terms = []
    for i in range(spec.m):
        al = float(alpha_lower[i])
        g = float(grad_norm_est[i])
        m_i = spec.M[i + 1]
        denom = 2.0 * g + math.sqrt(max(al, 0.0) * m_i)
        if denom > 0:
            terms.append(al / denom)
        if m_i > 0:
            terms.append(al / (2.0 * m_eff * m_i * spec.R))
    if spec.M[0] > 0:
        terms.append(eta / (2.0 * m_eff * spec.M[0]))
    nu = min(terms) if terms else eta
    return max(nu, NU_FLOOR)


class FirstOrderOracle:
    """Adapter binding a spec and noise model to the first-order batch oracle."""

    needs_radius = False

    def __init__(self, spec: ProblemSpec, noise: NoiseModel):
        self.spec = spec
        self.noise = noise

    def queries_per_batch(self, n: int) -> int:
        return n * (self.spec.m + 1)

    def sample(self, x, n, rng, nu: Optional[float] = None) -> BatchEstimate:
        return first_order_batch(self.spec, self.noise, x, n, rng)


class ZeroOrderOracle:
    """Adapter binding a spec and noise model to the two-point sphere oracle."""

    needs_radius = True

    def __init__(self, spec: ProblemSpec, noise: NoiseModel):
        self.spec = spec
        self.noise = noise

    def queries_per_batch(self, n: int) -> int:
        return 2 * n * (self.spec.m + 1)

    def sample(self, x, n, rng, nu: Optional[float] = None) -> BatchEstimate:
        if nu is None:
            raise ValueError("zeroth-order oracle needs a sampling radius")
        return zo_batch(self.spec, self.noise, x, nu, n, rng)
