import math

import numpy as np
import pytest

from lbsgd.oracles import (
    NoiseModel,
    first_order_batch,
    safe_sampling_radius,
    sphere_directions,
    zo_batch,
    zo_variance_bound,
)
from lbsgd.problem import ProblemSpec


def _quadratic_spec(d=3):
    return ProblemSpec(
        d=d,
        m=0,
        funcs=(lambda x: float(x @ x),),
        grads=(lambda x: 2.0 * x,),
        M=np.array([2.0]),
        L=np.array([10.0]),
        R=5.0,
        x0=np.zeros(d),
        beta=1.0,
        beta_hat=1.0,
    )


def _linear_spec(a):
    a = np.asarray(a, dtype=float)
    return ProblemSpec(
        d=a.size,
        m=0,
        funcs=(lambda x: float(a @ x),),
        grads=(lambda x: a.copy(),),
        M=np.array([0.0]),
        L=np.array([float(np.linalg.norm(a))]),
        R=5.0,
        x0=np.zeros(a.size),
        beta=1.0,
        beta_hat=1.0,
    )


def test_noiseless_first_order_is_exact(quad2, rng):
    noise = NoiseModel.noiseless(quad2.m)
    x = np.array([0.1, -0.2])
    batch = first_order_batch(quad2, noise, x, n=5, rng=rng)
    assert np.allclose(batch.value, quad2.values(x))
    for i in range(quad2.m + 1):
        assert np.allclose(batch.grad[i], quad2.grads[i](x))
    assert batch.queries_used == 5 * (quad2.m + 1)
    assert batch.sample_points.shape == (1, 2)


def test_batch_noise_scales_shrink_with_sqrt_n(quad2, rng):
    noise = NoiseModel.isotropic(quad2.m, sigma=0.001)
    batch = first_order_batch(quad2, noise, quad2.x0, n=4, rng=rng)
    assert np.allclose(batch.sigma_n, 0.0005)


def test_first_order_batch_is_deterministic(quad2):
    noise = NoiseModel.isotropic(quad2.m, sigma=0.01, sigma_hat=0.02)
    a = first_order_batch(quad2, noise, quad2.x0, n=3, rng=np.random.default_rng(42))
    b = first_order_batch(quad2, noise, quad2.x0, n=3, rng=np.random.default_rng(42))
    assert np.array_equal(a.value, b.value)
    assert np.array_equal(a.grad, b.grad)


def test_gradient_noise_has_unit_total_scale(quad2):
    # total vector std of the gradient perturbation should match sigma_hat
    noise = NoiseModel.isotropic(quad2.m, sigma_hat=0.5)
    rng = np.random.default_rng(3)
    sq = []
    g_true = quad2.grads[0](quad2.x0)
    for _ in range(2000):
        batch = first_order_batch(quad2, noise, quad2.x0, n=1, rng=rng)
        sq.append(np.sum((batch.grad[0] - g_true) ** 2))
    assert np.mean(sq) == pytest.approx(0.25, rel=0.1)


def test_sphere_directions_are_unit_and_centered():
    rng = np.random.default_rng(11)
    n = 10**5
    dirs = sphere_directions(4, n, rng)
    assert np.allclose(np.linalg.norm(dirs, axis=1), 1.0, atol=1e-12)
    assert np.all(np.abs(dirs.mean(axis=0)) < 3.0 / math.sqrt(n))


def test_zo_gradient_unbiased_for_quadratic():
    # the smoothed gradient of a quadratic equals the true gradient, so the
    # Monte-Carlo mean over many single samples must land on it
    spec = _quadratic_spec(d=3)
    x = np.array([0.3, -0.1, 0.2])
    noise = NoiseModel.noiseless(0)
    batch = zo_batch(spec, noise, x, nu=0.05, n=10**5, rng=np.random.default_rng(5))
    target = 2.0 * x
    # per-coordinate standard error of the single-sample estimator
    rng = np.random.default_rng(6)
    dirs = sphere_directions(3, 10**4, rng)
    singles = 3.0 * ((np.array([spec.funcs[0](x + 0.05 * s) for s in dirs]) - spec.funcs[0](x)) / 0.05)[:, None] * dirs
    se = singles.std(axis=0) / math.sqrt(10**5)
    assert np.all(np.abs(batch.grad[0] - target) <= 3.0 * se)


def test_zo_single_sample_linear_moment():
    # E[d <a, s> s] = a for sphere directions: one-sample estimates average to a
    a = np.array([1.0, -2.0, 0.5])
    spec = _linear_spec(a)
    batch = zo_batch(spec, NoiseModel.noiseless(0), np.zeros(3), nu=0.1, n=10**5,
                     rng=np.random.default_rng(7))
    assert np.all(np.abs(batch.grad[0] - a) < 0.05)


def test_zo_bias_within_smoothness_bound():
    # non-quadratic smooth function: mean estimate deviates by at most nu*M
    # plus Monte-Carlo error
    d = 3
    spec = ProblemSpec(
        d=d,
        m=0,
        funcs=(lambda x: float(np.exp(x[0]) + np.sin(x[1]) + x[2] ** 2),),
        grads=(lambda x: np.array([math.exp(x[0]), math.cos(x[1]), 2 * x[2]]),),
        M=np.array([3.0]),
        L=np.array([5.0]),
        R=2.0,
        x0=np.zeros(d),
        beta=1.0,
        beta_hat=1.0,
    )
    x = np.array([0.2, 0.4, -0.3])
    nu = 0.05
    batch = zo_batch(spec, NoiseModel.noiseless(0), x, nu=nu, n=10**5,
                     rng=np.random.default_rng(8))
    err = np.linalg.norm(batch.grad[0] - spec.grads[0](x))
    se = math.sqrt(zo_variance_bound(d, float(np.linalg.norm(spec.grads[0](x))), 3.0, 0.0, nu, 10**5))
    assert err <= nu * 3.0 + 3.0 * se


def test_zo_query_accounting(rng):
    one = ProblemSpec(
        d=2, m=1,
        funcs=(lambda x: float(x @ x), lambda x: float(x[0] - 1.0)),
        grads=None,
        M=np.array([2.0, 0.0]), L=np.array([4.0, 1.0]), R=2.0,
        x0=np.zeros(2), beta=1.0, beta_hat=1.0,
    )
    batch = zo_batch(one, NoiseModel.noiseless(1), np.zeros(2), nu=0.01, n=8, rng=rng)
    assert batch.queries_used == 32
    assert batch.sample_points.shape == (9, 2)
    assert np.array_equal(batch.sample_points[0], np.zeros(2))


def test_zo_reports_bias_and_variance_bounds(rng):
    spec = _quadratic_spec(d=4)
    nu = 0.02
    batch = zo_batch(spec, NoiseModel.isotropic(0, sigma=0.001), np.zeros(4), nu=nu, n=9, rng=rng)
    assert batch.b_hat[0] == pytest.approx(nu * 2.0)
    expect = math.sqrt(zo_variance_bound(4, 10.0, 2.0, 0.001, nu, 9))
    assert batch.sigma_hat_n[0] == pytest.approx(expect)


def test_sampling_radius_plugin_example():
    spec = ProblemSpec(
        d=1, m=1,
        funcs=(lambda x: 0.0, lambda x: -1.0),
        grads=None,
        M=np.array([1.0, 0.0]), L=np.array([1.0, 1.0]), R=1.0,
        x0=np.zeros(1), beta=1.0, beta_hat=1.0,
    )
    nu = safe_sampling_radius(np.array([0.1]), np.array([1.0]), spec, eta=0.01)
    assert nu == pytest.approx(0.005)
    # with the eta term active, doubling eta doubles the radius
    assert safe_sampling_radius(np.array([0.1]), np.array([1.0]), spec, eta=0.02) == pytest.approx(2 * nu)


def test_sampling_radius_matches_direct_formula_on_benchmark(quad2):
    # independent re-evaluation of the three-term minimum at the start point
    alpha_lower = np.full(quad2.m, quad2.beta)
    grad_norms = quad2.L[1:]
    eta = 0.1
    got = safe_sampling_radius(alpha_lower, grad_norms, quad2, eta)
    terms = []
    for i in range(quad2.m):
        al, g, m_i = alpha_lower[i], grad_norms[i], quad2.M[i + 1]
        terms.append(al / (2 * g + math.sqrt(al * m_i)))
        if m_i > 0:
            terms.append(al / (2 * quad2.m * m_i * quad2.R))
    if quad2.M[0] > 0:
        terms.append(eta / (2 * quad2.m * quad2.M[0]))
    assert got == pytest.approx(min(terms), rel=1e-12)


def test_sampling_radius_floor():
    spec = ProblemSpec(
        d=1, m=1,
        funcs=(lambda x: 0.0, lambda x: -1.0),
        grads=None,
        M=np.array([1.0, 1.0]), L=np.array([1.0, 1.0]), R=1.0,
        x0=np.zeros(1), beta=1.0, beta_hat=1.0,
    )
    nu = safe_sampling_radius(np.array([1e-30]), np.array([1.0]), spec, eta=1e-30)
    assert nu == pytest.approx(1e-12)


def test_noise_model_rejects_negative_scales():
    with pytest.raises(ValueError):
        NoiseModel(sigma=np.array([-0.1]), sigma_hat=np.array([0.0]), b_hat=np.array([0.0]))
