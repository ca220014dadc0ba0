import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_model
from pnamsr.icnn import IcnnParams
from pnamsr.kinematics import Invariants, LoadingMode, alpha0_of, mode_invariants, reduced_stress, second_pk_general
from pnamsr.pnam import (
    AffineScaler,
    BaselineMlp,
    PnamModel,
    baseline_forward_and_grads,
    elu,
    fit_scalers,
    pnam_energy,
    pnam_grads,
)


def test_fit_scalers_min_max():
    invs = [Invariants(np.array([3.0, 5.0]), np.array([3.0, 4.0]), np.ones(2)),
            Invariants(np.array([9.0]), np.array([7.0]), np.ones(1))]
    s1, s2 = fit_scalers(invs)
    assert (s1.m, s1.M) == (3.0, 9.0) and (s2.m, s2.M) == (3.0, 7.0)
    assert s1.scale(3.0) == 0.0 and s1.scale(9.0) == 1.0


def test_degenerate_scaler_rejected():
    with pytest.raises(ValueError):
        AffineScaler(3.0, 3.0)
    with pytest.raises(ValueError):
        fit_scalers([Invariants(np.array([3.0, 3.0]), np.array([3.0, 4.0]), np.ones(2))])


@given(st.floats(-50, 50), st.floats(0.1, 100))
def test_scale_unscale_identity(m, span):
    s = AffineScaler(m, m + span)
    x = np.linspace(m - 3, m + span + 3, 7)
    np.testing.assert_allclose(s.unscale(s.scale(x)), x, rtol=1e-12, atol=1e-10)


def test_affine_scaling_preserves_midpoint_convexity(rng):
    s = AffineScaler(3.0, 17.0)
    f = lambda u: np.exp(1.3 * u) + u ** 2
    a, b = rng.uniform(-10, 40, (2, 5000))
    lhs = f(s.scale((a + b) / 2))
    rhs = (f(s.scale(a)) + f(s.scale(b))) / 2
    assert np.all(lhs <= rhs + 1e-12 * np.abs(rhs))


def test_zero_nets_have_zero_gradients():
    sc = AffineScaler(3.0, 10.0)
    m = PnamModel(IcnnParams.zeros(4), IcnnParams.zeros(4), sc, sc)
    g = pnam_grads(m, Invariants(np.array([5.0]), np.array([4.0]), np.ones(1)))
    assert g.dpsi_d1 == 0.0 and g.dpsi_d2 == 0.0


def test_grads_match_energy_finite_difference(rng):
    for _ in range(20):
        m = random_model(rng)
        i1, i2 = rng.uniform(3, 30, 2)
        g = m.grads(i1, i2)
        h = 1e-5
        fd1 = (m.energy(i1 + h, i2) - m.energy(i1 - h, i2)) / (2 * h)
        fd2 = (m.energy(i1, i2 + h) - m.energy(i1, i2 - h)) / (2 * h)
        assert float(g.dpsi_d1) == pytest.approx(float(fd1), rel=1e-6, abs=1e-10)
        assert float(g.dpsi_d2) == pytest.approx(float(fd2), rel=1e-6, abs=1e-10)
        assert g.dpsi_d1 >= 0 and g.dpsi_d2 >= 0


def test_energy_zero_at_reference_and_nonnegative_above(rng):
    for _ in range(20):
        m = random_model(rng)
        assert pnam_energy(m, Invariants(3.0, 3.0, 1.0)) == pytest.approx(0.0, abs=1e-12)
        assert pnam_energy(m, Invariants(5.0, 4.25, 1.0)) >= 0.0


def test_energy_difference_is_path_integral_of_grads(rng):
    m = random_model(rng)
    lam = np.linspace(1.0, 2.5, 4001)
    inv = mode_invariants(LoadingMode.UE, lam)
    g = m.grads(inv.i1, inv.i2)
    integrand = g.dpsi_d1 * np.gradient(inv.i1, lam) + g.dpsi_d2 * np.gradient(inv.i2, lam)
    integral = np.trapezoid(integrand, lam)
    diff = m.energy(inv.i1[-1], inv.i2[-1]) - m.energy(inv.i1[0], inv.i2[0])
    assert float(integral) == pytest.approx(float(diff), rel=1e-4)


def test_shape_functions_convex_monotone_in_raw_space(rng):
    for _ in range(20):
        m = random_model(rng)
        for k in (1, 2):
            a, b = rng.uniform(3, 60, (2, 500))
            fa, fb, fm = m.shape_value(k, a), m.shape_value(k, b), m.shape_value(k, (a + b) / 2)
            assert np.all(fm <= (fa + fb) / 2 + 1e-12 * (1 + np.abs(fa) + np.abs(fb)))
            lo, hi = np.minimum(a, b), np.maximum(a, b)
            assert np.all(m.shape_value(k, lo) <= m.shape_value(k, hi) + 1e-12 * (1 + np.abs(fa) + np.abs(fb)))


def test_zero_stress_in_reference_state(rng):
    for _ in range(30):
        m = random_model(rng)
        for mode in LoadingMode:
            p1, p3 = reduced_stress(lambda i1, i2: tuple(m.grads(i1, i2)), mode, 1.0)
            assert abs(float(p1)) < 1e-10 and (p3 is None or abs(float(p3)) < 1e-10)
        g = m.grads(3.0, 3.0)
        a0 = alpha0_of(float(g.dpsi_d1), float(g.dpsi_d2))
        s = second_pk_general((float(g.dpsi_d1), float(g.dpsi_d2)), np.eye(3), 0.0, a0)
        assert np.abs(s).max() < 1e-10


def test_elu_definition():
    assert elu(-1e3) == pytest.approx(-1.0)
    assert elu(2.5) == 2.5
    assert elu(0.0) == 0.0


def test_baseline_zero_weights():
    sc = AffineScaler(3.0, 10.0)
    m = BaselineMlp(np.zeros((5, 2)), np.zeros(5), np.zeros(5), 0.0, sc, sc)
    value, g = baseline_forward_and_grads(m, Invariants(4.0, 6.0, 1.0))
    assert float(value) == 0.0 and float(g.dpsi_d1) == 0.0 and float(g.dpsi_d2) == 0.0


def test_baseline_grads_finite_difference(rng):
    for _ in range(20):
        m = random_model(rng, kind="mlp")
        i1, i2 = rng.uniform(3, 30, 2)
        g = m.grads(i1, i2)
        h = 1e-5
        fd1 = (m.energy(i1 + h, i2) - m.energy(i1 - h, i2)) / (2 * h)
        fd2 = (m.energy(i1, i2 + h) - m.energy(i1, i2 - h)) / (2 * h)
        assert float(g.dpsi_d1) == pytest.approx(float(fd1), rel=1e-6, abs=1e-9)
        assert float(g.dpsi_d2) == pytest.approx(float(fd2), rel=1e-6, abs=1e-9)
