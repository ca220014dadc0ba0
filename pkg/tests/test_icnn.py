import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pnamsr.icnn import (
    IcnnParams,
    icnn_forward,
    icnn_init,
    icnn_input_grad,
    icnn_param_tangent,
    softplus,
    softplus2,
)


def random_params(rng, h=8, scale=1.0):
    # raw weights may be negative so the projection is exercised
    return IcnnParams(rng.normal(0, scale, h), rng.normal(0, scale, h), rng.normal(0, scale, h),
                      float(rng.normal(0, scale)), float(rng.normal(0, scale)))


def test_init_deterministic_and_nonnegative():
    a, b = icnn_init(7, 50), icnn_init(7, 50)
    np.testing.assert_array_equal(a.to_vector(), b.to_vector())
    for s in range(20):
        p = icnn_init(s, 50)
        assert np.all(p.v0 >= 0) and np.all(p.w1 >= 0) and p.v1 >= 0
        assert np.all(p.b0 == 0) and p.b1 == 0


def test_init_width_one_shapes():
    p = icnn_init(7, 1)
    assert p.v0_raw.shape == p.b0.shape == p.w1_raw.shape == (1,)
    assert isinstance(p.v1_raw, float) and isinstance(p.b1, float)
    with pytest.raises(ValueError):
        icnn_init(0, 0)


def test_vector_round_trip():
    p = random_params(np.random.default_rng(0))
    q = IcnnParams.from_vector(p.to_vector())
    np.testing.assert_array_equal(q.to_vector(), p.to_vector())


def test_softplus_guards_overflow():
    assert softplus(800.0) == pytest.approx(800.0)
    assert softplus(-800.0) >= 0
    assert np.isfinite(softplus2(1e3))


def test_forward_closed_forms():
    z = IcnnParams.zeros(5)
    assert icnn_forward(z, 3.7) == pytest.approx(math.log(2) ** 2, rel=1e-15)
    one = IcnnParams(np.array([1.0]), np.array([0.0]), np.array([1.0]), 0.0, 0.0)
    assert icnn_forward(one, 0.0) == pytest.approx(math.log(3) ** 2, rel=1e-14)
    assert icnn_forward(one, 1.0) >= icnn_forward(one, 0.0)


def test_input_grad_zero_params():
    assert icnn_input_grad(IcnnParams.zeros(4), 2.0) == 0.0


def test_input_grad_matches_finite_difference():
    rng = np.random.default_rng(1)
    for _ in range(50):
        p = random_params(rng)
        h = 1e-5
        fd = (icnn_forward(p, 4 + h) - icnn_forward(p, 4 - h)) / (2 * h)
        g = icnn_input_grad(p, 4.0)
        assert abs(g - fd) <= 1e-6 * max(abs(fd), 1e-8)


@given(st.integers(0, 2**31 - 1), st.floats(-20, 20))
def test_input_grad_nonnegative(seed, x):
    p = random_params(np.random.default_rng(seed))
    assert icnn_input_grad(p, x) >= 0.0
    assert icnn_forward(p, x) >= 0.0


def test_param_tangent_db1():
    rng = np.random.default_rng(2)
    p = random_params(rng)
    x = np.array([0.3, 1.2])
    dv, _ = icnn_param_tangent(p, x)
    z2 = softplus(np.outer(x, p.v0) + p.b0) @ p.w1 + x * p.v1 + p.b1
    sp, sg = softplus(z2), 1 / (1 + np.exp(-z2))
    np.testing.assert_allclose(dv[:, -1], 2 * sp * sg, rtol=1e-13)


def _fd_param(fun, p, i, h):
    vec = p.to_vector()
    up, dn = vec.copy(), vec.copy()
    up[i] += h
    dn[i] -= h
    return (fun(IcnnParams.from_vector(up)) - fun(IcnnParams.from_vector(dn))) / (2 * h)


def test_param_tangent_matches_finite_differences():
    rng = np.random.default_rng(3)
    for _ in range(10):
        p = random_params(rng)
        vec = p.to_vector()
        # keep raw values away from the projection kink
        vec[np.abs(vec) < 1e-3] = 0.1
        p = IcnnParams.from_vector(vec)
        x = 0.7
        dv, ds = icnn_param_tangent(p, np.array([x]))
        for i in range(vec.size):
            fv = _fd_param(lambda q: icnn_forward(q, x), p, i, 1e-6)
            fs = _fd_param(lambda q: icnn_input_grad(q, x), p, i, 1e-5)
            assert abs(dv[0, i] - fv) <= 1e-5 * max(abs(fv), 1e-6)
            assert abs(ds[0, i] - fs) <= 1e-4 * max(abs(fs), 1e-6)


def test_projection_subgradient_zero_for_negative_raw():
    p = IcnnParams(np.array([-1.0, 1.0]), np.zeros(2), np.array([1.0, -1.0]), -0.5, 0.0)
    dv, ds = icnn_param_tangent(p, np.array([1.0]))
    assert dv[0, 0] == 0.0 and ds[0, 0] == 0.0
    assert dv[0, 5] == 0.0 and ds[0, 5] == 0.0
    assert dv[0, 6] == 0.0 and ds[0, 6] == 0.0


def test_midpoint_convexity_and_monotonicity_sampled():
    rng = np.random.default_rng(4)
    for _ in range(2000):
        p = random_params(rng, h=int(rng.integers(1, 51)), scale=2.0)
        a, b = rng.uniform(-10, 10, 2)
        fa, fb, fm = icnn_forward(p, np.array([a, b, (a + b) / 2]))
        assert fm <= (fa + fb) / 2 + 1e-12 * max(1.0, abs(fa) + abs(fb))
        lo, hi = (fa, fb) if a <= b else (fb, fa)
        assert lo <= hi + 1e-12 * max(1.0, abs(hi))


def test_sampled_second_derivative_nonnegative():
    rng = np.random.default_rng(5)
    x = np.linspace(0, 20, 401)
    h = 1e-4
    for _ in range(50):
        p = random_params(rng)
        d2 = (icnn_input_grad(p, x + h) - icnn_input_grad(p, x - h)) / (2 * h)
        scale = max(1.0, float(np.max(np.abs(icnn_input_grad(p, x)))))
        assert np.min(d2) >= -1e-8 * scale
