import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pnamsr.analysis import (
    AnalysisError,
    analyze_pair,
    asymptotic_class,
    asymptotic_monotonicity,
    check_interval,
    coercivity_check,
    stress_free_check,
)
from pnamsr.fixtures import FIXTURE_INTERVALS, composite_pair, treloar_pair
from pnamsr.symreg.expr import Add, Const, Exp, Ln, Mul, X, evaluate
from pnamsr.symreg.gp import GpConfig, random_tree


def lin(c):
    return Mul(Const(c), X)


def test_check_interval_examples():
    r = check_interval(Exp(Mul(Const(0.1), X)), 2, 100)
    assert r.convex and r.nondecreasing and r.n_grid == 2000
    r = check_interval(Mul(Const(-1.0), Mul(X, X)), 2, 10)
    assert not r.convex and not r.nondecreasing
    assert r.min_second == pytest.approx(-2.0)
    r = check_interval(composite_pair()[0], 2, 100)
    assert r.convex


def test_check_interval_preconditions_and_domain():
    with pytest.raises(AnalysisError):
        check_interval(X, 1.0, 5.0)
    with pytest.raises(AnalysisError):
        check_interval(X, 5.0, 5.0)
    r = check_interval(Ln(Add(X, Const(-5.0))), 2.0, 10.0, n_grid=9)
    assert r.domain_violation == 2.0
    assert not r.convex and not r.nondecreasing


def test_asymptotic_examples():
    psi1, _ = treloar_pair()
    c = asymptotic_class(psi1)
    assert c.kind == "exponential" and c.rate == pytest.approx(0.0665) and c.sign == 1
    assert asymptotic_monotonicity(psi1).nondecreasing
    quartic = Mul(Const(2.0), Mul(Mul(X, X), Mul(X, X)))
    c = asymptotic_class(quartic)
    assert (c.kind, c.degree, c.sign) == ("polynomial", 4, 1)
    comp1, comp2 = composite_pair()
    c = asymptotic_class(comp1)
    assert c.kind == "polynomial" and c.degree == 4
    m = asymptotic_monotonicity(comp1)
    assert not m.nondecreasing
    assert any("exp(-0.05967" in v for v in m.violations)
    assert asymptotic_class(comp2).kind == "log_polynomial"
    assert asymptotic_monotonicity(comp2).nondecreasing


def test_asymptotic_unknown_for_unrepresentable():
    assert asymptotic_class(Exp(Mul(X, X))).kind == "unknown"
    assert asymptotic_class(Exp(Exp(X))).kind == "unknown"
    assert asymptotic_class(Ln(Mul(Const(-1.0), X))).kind == "unknown"


def test_asymptotic_log_and_decay():
    assert asymptotic_class(Ln(X)).kind == "log_polynomial"
    assert asymptotic_class(Exp(Mul(Const(-1.0), X))).kind == "decaying"
    assert asymptotic_class(Const(3.0)).kind == "constant"
    assert asymptotic_class(Add(X, Mul(Const(-1.0), X))).kind == "zero"


@settings(max_examples=400)
@given(st.integers(0, 2**32 - 1))
def test_asymptotic_sign_never_contradicts_far_evaluation(seed):
    cfg = GpConfig(unary=("exp", "ln"))
    e = random_tree(np.random.default_rng(seed), cfg, 5)
    c = asymptotic_class(e)
    if c.kind in ("unknown", "zero"):
        return
    v = float(evaluate(e, np.array([1e6]))[0])
    if np.isfinite(v) and v != 0:
        assert np.sign(v) == c.sign


def test_coercivity_examples():
    c = coercivity_check(*composite_pair())
    assert c.status == "established" and (c.p, c.q) == (4, 2) and c.alpha > 0
    assert coercivity_check(*treloar_pair()).status == "marginal"
    assert coercivity_check(lin(0.2), lin(0.05)).status == "not_established"
    c = coercivity_check(Exp(lin(0.1)), Mul(Const(0.3), Mul(X, X)))
    assert c.status == "established" and c.p == 2 and c.q == 2


def test_stress_free_examples():
    for pair in (treloar_pair(), composite_pair()):
        assert stress_free_check(*pair).ok
    nh = Mul(Const(0.5), X)  # mu = 1
    r = stress_free_check(nh, Const(0.0), alpha0=0.0)
    assert not r.ok
    np.testing.assert_allclose(r.stress, np.eye(3))
    with pytest.raises(AnalysisError):
        stress_free_check(Ln(Add(X, Const(-3.0))), lin(1.0))


def test_fixture_verdicts():
    v = analyze_pair(*treloar_pair(), *FIXTURE_INTERVALS["treloar"])
    assert v.finite_range_ok and v.psi1.asymptotic_nondecreasing and v.psi2.asymptotic_nondecreasing
    assert v.coercivity.status == "marginal" and v.stress_free.ok
    v = analyze_pair(*composite_pair(), *FIXTURE_INTERVALS["composite"])
    assert v.psi1.convex and v.psi2.convex and v.finite_range_ok
    assert not v.psi1.asymptotic_nondecreasing and v.psi2.asymptotic_nondecreasing
    assert v.coercivity.status == "established"


def test_verdicts_deterministic():
    a = analyze_pair(*composite_pair(), (2, 100), (2, 100)).to_dict()
    b = analyze_pair(*composite_pair(), (2, 100), (2, 100)).to_dict()
    assert a == b
