import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pnamsr.fixtures import TRELOAR_C, treloar_pair
from pnamsr.kinematics import (
    LoadingMode,
    ShapeGradients,
    alpha0_of,
    deformation_gradient,
    invariants_of,
    mode_invariants,
    reduced_stress,
    second_pk_general,
)
from pnamsr.symreg.expr import diff_expr, eval_expr

UE, EBE, PS = LoadingMode.UE, LoadingMode.EBE, LoadingMode.PS


def mooney_half(i1, i2):
    # psi = 0.5 (I1 - 3)
    return 0.5 * np.ones_like(i1), np.zeros_like(i2)


def test_deformation_gradient_examples():
    np.testing.assert_array_equal(deformation_gradient(UE, 1.0), np.eye(3))
    np.testing.assert_allclose(deformation_gradient(EBE, 2.0), np.diag([2, 2, 0.25]))
    np.testing.assert_allclose(deformation_gradient(PS, 2.0), np.diag([2, 0.5, 1]))


@pytest.mark.parametrize("lam", [0.0, -1.0])
def test_deformation_gradient_rejects_bad_stretch(lam):
    with pytest.raises(ValueError):
        deformation_gradient(UE, lam)


def test_invariants_examples():
    assert tuple(invariants_of(np.eye(3))) == pytest.approx((3, 3, 1))
    s = 2 ** -0.5
    assert tuple(invariants_of(np.diag([2, s, s]))) == pytest.approx((5, 4.25, 1))
    assert tuple(invariants_of(np.diag([2, 2, 0.25]))) == pytest.approx((8.0625, 16.5, 1))


def test_invariants_singular():
    with pytest.raises(ValueError):
        invariants_of(np.diag([1.0, 1.0, 0.0]))


@pytest.mark.parametrize("mode", list(LoadingMode))
def test_unit_determinant_and_closed_forms(mode):
    lam = np.linspace(0.05, 10, 200)
    for l in lam:
        assert np.linalg.det(deformation_gradient(mode, l)) == pytest.approx(1.0, abs=1e-12)
    inv = mode_invariants(mode, lam)
    assert np.all(inv.i1 >= 3 - 1e-12) and np.all(inv.i2 >= 3 - 1e-12)
    if mode is UE:
        np.testing.assert_allclose(inv.i2, 2 * lam + lam ** -2)
    if mode is PS:
        np.testing.assert_allclose(inv.i1, lam ** 2 + lam ** -2 + 1)
        np.testing.assert_allclose(inv.i2, inv.i1)


def test_mode_invariants_match_general_path():
    for mode in LoadingMode:
        for l in (0.5, 1.3, 4.0):
            a = mode_invariants(mode, l)
            b = invariants_of(deformation_gradient(mode, l))
            np.testing.assert_allclose([float(a.i1), float(a.i2), float(a.i3)], list(b), rtol=1e-13)


def test_reduced_stress_mooney_examples():
    assert reduced_stress(mooney_half, UE, 2.0)[0] == pytest.approx(1.75)
    assert reduced_stress(mooney_half, UE, 2.0)[1] is None
    assert reduced_stress(mooney_half, EBE, 2.0)[0] == pytest.approx(1.96875)
    p1, p3 = reduced_stress(mooney_half, PS, 2.0)
    assert (p1, p3) == pytest.approx((1.875, 0.75))


@given(st.floats(0.0, 5.0), st.floats(0.0, 5.0))
def test_reduced_stress_zero_at_unit_stretch(a, b):
    def grads(i1, i2):
        return a + 0 * i1, b + 0 * i2
    for mode in LoadingMode:
        p1, p3 = reduced_stress(grads, mode, 1.0)
        assert p1 == 0.0
        assert p3 is None or p3 == 0.0


def test_second_pk_examples():
    np.testing.assert_array_equal(second_pk_general(ShapeGradients(0.7, 0.0), np.eye(3), 0.0, 0.7), np.zeros((3, 3)))
    np.testing.assert_allclose(second_pk_general(ShapeGradients(0.5, 0.0), np.eye(3), 0.0, 0.0), np.eye(3))
    with pytest.raises(ValueError):
        second_pk_general(ShapeGradients(0.5, 0.0), np.zeros((3, 3)), 0.0, 0.0)


@pytest.mark.parametrize("mode,lam", [(UE, 2.0), (EBE, 1.7), (PS, 2.3)])
def test_pressure_elimination_matches_reduced_form(mode, lam):
    psi1, psi2 = treloar_pair()
    d1e, d2e = diff_expr(psi1), diff_expr(psi2)

    def grads_at(i1, i2):
        return (np.vectorize(lambda v: eval_expr(d1e, v))(i1), np.vectorize(lambda v: eval_expr(d2e, v))(i2))

    f = deformation_gradient(mode, lam)
    c = f.T @ f
    inv = invariants_of(f)
    g = ShapeGradients(eval_expr(d1e, inv.i1), eval_expr(d2e, inv.i2))
    alpha0 = 0.3
    # lateral direction 3 is traction free for UE/EBE; for PS direction 3 is
    # constrained and direction 2 is free
    free = 1 if mode is PS else 2
    base = second_pk_general(g, c, 0.0, alpha0)
    p = base[free, free] * c[free, free] / inv.i3
    s = second_pk_general(g, c, p, alpha0)
    assert s[free, free] == pytest.approx(0.0, abs=1e-12)
    p1, p3 = reduced_stress(grads_at, mode, lam)
    assert f[0, 0] * s[0, 0] == pytest.approx(float(p1), rel=1e-12)
    if mode is PS:
        assert f[2, 2] * s[2, 2] == pytest.approx(float(p3), rel=1e-12)


def test_alpha0_examples():
    assert alpha0_of(0.5, 0.0) == 0.5
    assert alpha0_of(0.2, 0.05) == pytest.approx(0.3)
    c = TRELOAR_C
    psi1, psi2 = treloar_pair()
    expect = c["c11"] + c["c12"] * c["c13"] * np.exp(3 * c["c13"]) + 2 * c["c21"]
    got = alpha0_of(eval_expr(diff_expr(psi1), 3.0), eval_expr(diff_expr(psi2), 3.0))
    assert got == pytest.approx(expect, rel=1e-14)


matrices = st.lists(st.floats(-3, 3, allow_nan=False), min_size=9, max_size=9).map(lambda v: np.array(v).reshape(3, 3))


@settings(max_examples=200)
@given(matrices, matrices)
def test_tr_ftf_midpoint_convex(a, b):
    w = lambda f: np.trace(f.T @ f)
    assert w((a + b) / 2) <= (w(a) + w(b)) / 2 + 1e-9


def _adj(f):
    # cofactor-transpose, valid for singular matrices too
    cof = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            minor = np.delete(np.delete(f, i, 0), j, 1)
            cof[i, j] = (-1) ** (i + j) * np.linalg.det(minor)
    return cof.T


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
@settings(max_examples=200)
@given(matrices)
def test_i2_and_i3_identities(f):
    c = f.T @ f
    i1 = np.trace(c)
    i2 = 0.5 * (i1 ** 2 - np.trace(c @ c))
    a = _adj(f)
    assert np.trace(a.T @ a) == pytest.approx(i2, rel=1e-9, abs=1e-9)
    assert np.linalg.det(c) == pytest.approx(np.linalg.det(f) ** 2, rel=1e-9, abs=1e-9)
