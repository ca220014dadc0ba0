"""Admissibility checks for discovered shape functions.

Finite-range convexity and monotonicity come from sampling the symbolic first
and second derivatives on a grid. Behaviour as I -> +inf comes from a small
dominant-term algebra: every expression is expanded into a sum of terms

    c * x**d * ln(x)**l * exp(r * x)

and terms are ordered by growth (r, d, l). Compositions the algebra cannot
represent are reported as unknown rather than guessed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .kinematics import alpha0_of, second_pk_general
from .symreg.expr import Add, Const, Div, Exp, Expression, Ln, Mul, Neg, Var, diff_expr, evaluate

INCOMPRESSIBLE_LOWER_BOUND = 2.0
MAX_TERMS = 64
SPOT_CHECK_X = 1e6


class AnalysisError(ValueError):
    pass


# -- finite interval ----------------------------------------------------------


@dataclass
class IntervalCheck:
    lo: float
    hi: float
    n_grid: int
    convex: bool
    nondecreasing: bool
    min_second: float
    argmin_second: float
    min_first: float
    argmin_first: float
    domain_violation: Optional[float] = None


def check_interval(e: Expression, lo: float, hi: float, n_grid: int = 2000, rtol: float = 1e-9) -> IntervalCheck:
    """Sample psi' and psi'' on a uniform grid over [lo, hi]."""
    if lo < INCOMPRESSIBLE_LOWER_BOUND:
        raise AnalysisError(f"interval must start at or above {INCOMPRESSIBLE_LOWER_BOUND}, got {lo}")
    if not hi > lo:
        raise AnalysisError("interval upper bound must exceed the lower bound")
    grid = np.linspace(lo, hi, n_grid)
    d1e = diff_expr(e)
    d1 = evaluate(d1e, grid)
    d2 = evaluate(diff_expr(d1e), grid)
    values = evaluate(e, grid)
    bad = ~(np.isfinite(values) & np.isfinite(d1) & np.isfinite(d2))
    if bad.any():
        x_bad = float(grid[np.argmax(bad)])
        return IntervalCheck(lo, hi, n_grid, False, False, math.nan, x_bad, math.nan, x_bad, x_bad)
    i1, i2 = int(np.argmin(d1)), int(np.argmin(d2))
    tol1 = rtol * float(np.max(np.abs(d1)))
    tol2 = rtol * float(np.max(np.abs(d2)))
    return IntervalCheck(
        lo, hi, n_grid,
        convex=bool(d2[i2] >= -tol2),
        nondecreasing=bool(d1[i1] >= -tol1),
        min_second=float(d2[i2]), argmin_second=float(grid[i2]),
        min_first=float(d1[i1]), argmin_first=float(grid[i1]),
    )


# -- dominant-term algebra ----------------------------------------------------


@dataclass(frozen=True)
class Term:
    coef: float
    rate: float = 0.0
    degree: float = 0.0
    logpow: float = 0.0

    @property
    def key(self):
        return (self.rate, self.degree, self.logpow)

    def describe(self, var: str = "I") -> str:
        parts = [f"{self.coef:+.4g}"]
        if self.degree:
            parts.append(var if self.degree == 1 else f"{var}^{self.degree:g}")
        if self.logpow:
            parts.append(f"ln({var})" if self.logpow == 1 else f"ln({var})^{self.logpow:g}")
        if self.rate:
            parts.append(f"exp({self.rate:.4g}*{var})")
        return "*".join(parts)


@dataclass
class Series:
    terms: List[Term]
    exact: bool = True

    @property
    def leading(self) -> Optional[Term]:
        return self.terms[0] if self.terms else None


def _normalize(terms, exact=True, cancel_tol=1e-12) -> Optional[Series]:
    """Merge like terms, order by decreasing growth. ``None`` on lossy cancellation."""
    merged = {}
    scale = {}
    for t in terms:
        merged[t.key] = merged.get(t.key, 0.0) + t.coef
        scale[t.key] = max(scale.get(t.key, 0.0), abs(t.coef))
    out = []
    for k in sorted(merged, reverse=True):
        c = merged[k]
        if abs(c) <= cancel_tol * scale[k]:
            if not exact:
                return None
            continue
        out.append(Term(c, *k))
    if len(out) > MAX_TERMS:
        out, exact = out[:MAX_TERMS], False
    return Series(out, exact)


def _series(e: Expression) -> Optional[Series]:
    if isinstance(e, Const):
        return Series([Term(e.value)] if e.value != 0 else [])
    if isinstance(e, Var):
        return Series([Term(1.0, degree=1.0)])
    if isinstance(e, Neg):
        s = _series(e.child)
        return None if s is None else Series([Term(-t.coef, t.rate, t.degree, t.logpow) for t in s.terms], s.exact)
    if isinstance(e, (Add, Mul, Div)):
        a, b = _series(e.left), _series(e.right)
        if a is None or b is None:
            return None
        if isinstance(e, Add):
            return _normalize(a.terms + b.terms, a.exact and b.exact)
        if isinstance(e, Div):
            b = _reciprocal(b)
            if b is None:
                return None
        prods = [Term(x.coef * y.coef, x.rate + y.rate, x.degree + y.degree, x.logpow + y.logpow)
                 for x in a.terms for y in b.terms]
        return _normalize(prods, a.exact and b.exact)
    if isinstance(e, Exp):
        return _exp_series(_series(e.child))
    if isinstance(e, Ln):
        return _ln_series(_series(e.child))
    raise TypeError(f"not an expression node: {e!r}")


def _reciprocal(s: Series) -> Optional[Series]:
    lead = s.leading
    if lead is None:
        return None
    exact = s.exact and len(s.terms) == 1
    return Series([Term(1.0 / lead.coef, -lead.rate, -lead.degree, -lead.logpow)], exact)


def _exp_series(s: Optional[Series]) -> Optional[Series]:
    if s is None:
        return None
    c0 = 0.0
    linear = 0.0
    logc = 0.0
    decaying = False
    for t in s.terms:
        if t.key == (0.0, 0.0, 0.0):
            c0 += t.coef
        elif t.key == (0.0, 1.0, 0.0):
            linear += t.coef
        elif t.key == (0.0, 0.0, 1.0):
            logc += t.coef
        elif t.key < (0.0, 0.0, 0.0):
            decaying = True
        else:
            return None  # exp of super-linear growth is outside the algebra
    if abs(c0) > 700:
        return None
    return Series([Term(math.exp(c0), linear, logc, 0.0)], s.exact and not decaying)


def _ln_series(s: Optional[Series]) -> Optional[Series]:
    if s is None or s.leading is None:
        return None
    lead = s.leading
    if lead.coef <= 0 or lead.logpow != 0:
        return None
    terms = [Term(math.log(lead.coef))]
    if lead.rate:
        terms.append(Term(lead.rate, degree=1.0))
    if lead.degree:
        terms.append(Term(lead.degree, logpow=1.0))
    return _normalize(terms, s.exact and len(s.terms) == 1)


@dataclass
class AsymptoticClass:
    kind: str  # exponential | polynomial | log_polynomial | constant | decaying | zero | unknown
    sign: int = 0
    rate: float = 0.0
    degree: float = 0.0
    logpow: float = 0.0
    coefficient: float = 0.0
    terms: List[Term] = field(default_factory=list)

    def describe(self, var: str = "I") -> str:
        if self.kind == "unknown":
            return "unknown"
        if self.kind == "zero":
            return "identically zero"
        return f"{self.kind}, dominant term {self.terms[0].describe(var)}"


def asymptotic_class(e: Expression) -> AsymptoticClass:
    """Dominant behaviour of ``e`` as x -> +inf."""
    s = _series(e)
    if s is None:
        return AsymptoticClass("unknown")
    lead = s.leading
    if lead is None:
        return AsymptoticClass("zero", terms=[])
    sign = 1 if lead.coef > 0 else -1
    with np.errstate(all="ignore"):
        spot = float(evaluate(e, np.array([SPOT_CHECK_X]))[0])
    if np.isfinite(spot) and spot != 0.0 and (spot > 0) != (sign > 0):
        # far tail not reached at the spot-check point; refuse to guess
        return AsymptoticClass("unknown")
    if lead.rate > 0:
        kind = "exponential"
    elif lead.rate < 0 or lead.key < (0.0, 0.0, 0.0):
        kind = "decaying"
    elif lead.degree == 0 and lead.logpow == 0:
        kind = "constant"
    elif lead.logpow != 0:
        kind = "log_polynomial"
    else:
        kind = "polynomial"
    return AsymptoticClass(kind, sign, lead.rate, lead.degree, lead.logpow, lead.coef, list(s.terms))


# -- per-shape-function verdicts ----------------------------------------------


@dataclass
class AsymptoticMonotonicity:
    nondecreasing: bool
    derivative: AsymptoticClass
    violations: List[str]

    def describe(self, var: str = "I") -> str:
        if self.derivative.kind == "unknown":
            return "derivative not classifiable; asymptotic monotonicity not certified"
        if self.nondecreasing:
            return f"every term of the derivative is non-negative as {var} -> +inf"
        return "; ".join(self.violations)


def asymptotic_monotonicity(e: Expression, var: str = "I") -> AsymptoticMonotonicity:
    """Sign conditions on each additive term of psi' for large arguments.

    Certifies non-decreasing behaviour only when every term of the expanded
    derivative has a non-negative coefficient (each term is then positive for
    x > 1). A negative term is reported as a violated sign condition even when
    a faster-growing positive term dominates it.
    """
    d = asymptotic_class(diff_expr(e))
    if d.kind == "unknown":
        return AsymptoticMonotonicity(False, d, ["derivative not classifiable"])
    violations = []
    for t in d.terms:
        if t.coef < 0:
            what = "exponential-rate" if t.rate else "polynomial"
            violations.append(f"derivative term {t.describe(var)} is negative ({what} coefficient < 0); "
                              f"non-decreasing condition violated as {var} -> +inf")
    return AsymptoticMonotonicity(not violations, d, violations)


# -- coercivity ---------------------------------------------------------------


@dataclass
class Coercivity:
    status: str  # established | marginal | not_established
    p: Optional[float] = None
    q: Optional[float] = None
    alpha: Optional[float] = None
    reason: str = ""


def _growth(cls: AsymptoticClass) -> Tuple[float, float]:
    """(largest usable power, coefficient) for a lower bound c * x**p at infinity."""
    if cls.kind == "unknown" or cls.sign <= 0:
        return 0.0, 0.0
    if cls.kind == "exponential":
        return math.inf, cls.coefficient
    if cls.kind in ("polynomial", "log_polynomial"):
        p = cls.degree if cls.logpow >= 0 else math.nextafter(cls.degree, -math.inf)
        return p, cls.coefficient
    return 0.0, 0.0


def coercivity_check(psi1: Expression, psi2: Expression) -> Coercivity:
    """Search a growth witness psi >= alpha (I1^p + I2^q) with p >= 2, q >= p/(p-1)."""
    c1, c2 = asymptotic_class(psi1), asymptotic_class(psi2)
    p_max, a1 = _growth(c1)
    q_max, a2 = _growth(c2)
    if p_max < 2:
        return Coercivity("not_established", reason=f"psi1 grows like I1^{p_max:g} with p < 2")
    if q_max <= 1:
        if math.isinf(p_max) and q_max == 1:
            return Coercivity("marginal", p=math.inf, q=1.0,
                              reason="psi1 grows faster than any power but psi2 is only linear: "
                                     "q >= p/(p-1) holds only in the limit p -> inf")
        return Coercivity("not_established", reason=f"psi2 grows like I2^{q_max:g} with q <= 1")
    if math.isinf(p_max):
        p = 2.0 if q_max >= 2 else float(math.ceil(q_max / (q_max - 1.0)))
        if p / (p - 1.0) > q_max:
            p += 1.0
        alpha1 = a1 * c1.rate ** p / math.factorial(int(p))  # exp(r x) >= (r x)^p / p!
    else:
        p = p_max
        alpha1 = a1
    q = q_max if not math.isinf(q_max) else max(2.0, p / (p - 1.0))
    if q < p / (p - 1.0):
        return Coercivity("not_established", p=p, q=q,
                          reason=f"q = {q:g} < p/(p-1) = {p / (p - 1.0):g}")
    alpha2 = a2 if not math.isinf(q_max) else a2 * c2.rate ** q / math.factorial(int(math.ceil(q)))
    alpha = min(alpha1, alpha2)
    return Coercivity("established", p=p, q=q, alpha=alpha,
                      reason=f"p = {p:g} >= 2 and q = {q:g} >= p/(p-1) = {p / (p - 1.0):g}, alpha = {alpha:.4g} > 0")


# -- stress-free reference state ----------------------------------------------------------


@dataclass
class StressFree:
    ok: bool
    residual: float
    alpha0: float
    stress: np.ndarray


def stress_free_check(psi1: Expression, psi2: Expression, alpha0: Optional[float] = None,
                      stress_scale: float = 1.0) -> StressFree:
    """Stress of the full constrained energy at C = I, p = 0."""
    d1 = float(evaluate(diff_expr(psi1), np.array([3.0]))[0])
    d2 = float(evaluate(diff_expr(psi2), np.array([3.0]))[0])
    if not (np.isfinite(d1) and np.isfinite(d2)):
        raise AnalysisError("shape-function derivative is invalid at I = 3")
    if alpha0 is None:
        alpha0 = alpha0_of(d1, d2)
    s = second_pk_general((d1, d2), np.eye(3), 0.0, alpha0)
    res = float(np.linalg.norm(s))
    return StressFree(res < 1e-8 * stress_scale, res, alpha0, s)


# -- combined verdict ------------------------------------------------------------------


@dataclass
class ShapeVerdict:
    name: str
    interval: IntervalCheck
    value_class: AsymptoticClass
    monotonicity: AsymptoticMonotonicity

    @property
    def convex(self) -> bool:
        return self.interval.convex

    @property
    def nondecreasing(self) -> bool:
        return self.interval.nondecreasing

    @property
    def asymptotic_nondecreasing(self) -> bool:
        return self.monotonicity.nondecreasing


@dataclass
class AnalysisVerdict:
    psi1: ShapeVerdict
    psi2: ShapeVerdict
    coercivity: Coercivity
    stress_free: StressFree

    @property
    def finite_range_ok(self) -> bool:
        return all(v.convex and v.nondecreasing for v in (self.psi1, self.psi2))

    def to_dict(self) -> dict:
        def shape(v: ShapeVerdict):
            it = v.interval
            return {
                "interval": [it.lo, it.hi],
                "grid": it.n_grid,
                "convex_on_interval": it.convex,
                "min_second_derivative": it.min_second,
                "nondecreasing_on_interval": it.nondecreasing,
                "min_first_derivative": it.min_first,
                "domain_violation": it.domain_violation,
                "asymptotic_class": v.value_class.describe(),
                "asymptotic_nondecreasing": v.asymptotic_nondecreasing,
                "derivative_dominant_term": v.monotonicity.derivative.describe(),
                "asymptotic_notes": v.monotonicity.describe(),
            }

        c = self.coercivity
        return {
            "psi1": shape(self.psi1),
            "psi2": shape(self.psi2),
            "coercivity": {"status": c.status, "p": c.p, "q": c.q, "alpha": c.alpha, "reason": c.reason},
            "stress_free": {"ok": self.stress_free.ok, "residual": self.stress_free.residual,
                            "alpha0": self.stress_free.alpha0},
        }


def analyze_pair(psi1: Expression, psi2: Expression, interval1: Tuple[float, float],
                 interval2: Tuple[float, float], n_grid: int = 2000) -> AnalysisVerdict:
    v1 = ShapeVerdict("psi1", check_interval(psi1, *interval1, n_grid=n_grid),
                      asymptotic_class(psi1), asymptotic_monotonicity(psi1, "I1"))
    v2 = ShapeVerdict("psi2", check_interval(psi2, *interval2, n_grid=n_grid),
                      asymptotic_class(psi2), asymptotic_monotonicity(psi2, "I2"))
    return AnalysisVerdict(v1, v2, coercivity_check(psi1, psi2), stress_free_check(psi1, psi2))
