"""Polyconvex neural additive model: psi(I1, I2) = psi1(I1) + psi2(I2).

Each shape function is an ICNN acting on a min-max scaled invariant. The
unconstrained MLP baseline lives here too so both share the trainer.

Models expose a small protocol used by ``pnamsr.training``:

* ``to_vector()`` / ``with_vector(vec)`` for the optimizer,
* ``grads(i1, i2)`` for dpsi/dI1, dpsi/dI2 in data units,
* ``grads_vjp(i1, i2)`` returning the grads and a pullback that maps
  cotangents on (dpsi/dI1, dpsi/dI2) to a gradient over the raw parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Iterable, Tuple

import numpy as np

from .icnn import (
    DEFAULT_WIDTH,
    IcnnParams,
    icnn_forward,
    icnn_init,
    icnn_input_grad,
    icnn_param_tangent,
)
from .kinematics import Invariants, ShapeGradients


@dataclass(frozen=True)
class AffineScaler:
    m: float
    M: float

    def __post_init__(self):
        if not self.M > self.m:
            raise ValueError(f"degenerate scaler range: min={self.m}, max={self.M}")

    @property
    def slope(self) -> float:
        return 1.0 / (self.M - self.m)

    def scale(self, x):
        return (np.asarray(x, dtype=float) - self.m) * self.slope

    def unscale(self, u):
        return np.asarray(u, dtype=float) * (self.M - self.m) + self.m


def fit_scalers(train_invariants: Iterable[Invariants]) -> Tuple[AffineScaler, AffineScaler]:
    """Per-invariant min/max over the training states only."""
    i1 = []
    i2 = []
    for inv in train_invariants:
        i1.append(np.ravel(inv.i1))
        i2.append(np.ravel(inv.i2))
    if not i1:
        raise ValueError("no training invariants to fit scalers on")
    i1 = np.concatenate(i1)
    i2 = np.concatenate(i2)
    return AffineScaler(float(i1.min()), float(i1.max())), AffineScaler(float(i2.min()), float(i2.max()))


@dataclass
class PnamModel:
    net1: IcnnParams
    net2: IcnnParams
    scaler1: AffineScaler
    scaler2: AffineScaler
    stress_scale: float = 1.0

    kind = "pnam"

    @classmethod
    def init(cls, seed: int, scaler1: AffineScaler, scaler2: AffineScaler,
             stress_scale: float = 1.0, width: int = DEFAULT_WIDTH) -> "PnamModel":
        rng = np.random.default_rng(seed)
        s1, s2 = (int(s) for s in rng.integers(0, 2**31 - 1, size=2))
        return cls(icnn_init(s1, width), icnn_init(s2, width), scaler1, scaler2, stress_scale)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.net1.to_vector(), self.net2.to_vector()])

    def with_vector(self, vec: np.ndarray) -> "PnamModel":
        n1 = self.net1.to_vector().shape[0]
        return replace(self, net1=IcnnParams.from_vector(vec[:n1]), net2=IcnnParams.from_vector(vec[n1:]))

    def shape_value(self, which: int, inv):
        net, sc = (self.net1, self.scaler1) if which == 1 else (self.net2, self.scaler2)
        return icnn_forward(net, sc.scale(inv)) / self.stress_scale

    def shape_slope(self, which: int, inv):
        net, sc = (self.net1, self.scaler1) if which == 1 else (self.net2, self.scaler2)
        return icnn_input_grad(net, sc.scale(inv)) * sc.slope / self.stress_scale

    def grads(self, i1, i2) -> ShapeGradients:
        return ShapeGradients(self.shape_slope(1, i1), self.shape_slope(2, i2))

    def energy(self, i1, i2):
        psi0 = self.shape_value(1, 3.0) + self.shape_value(2, 3.0)
        return self.shape_value(1, i1) + self.shape_value(2, i2) - psi0

    def grads_vjp(self, i1, i2) -> Tuple[ShapeGradients, Callable]:
        i1 = np.atleast_1d(np.asarray(i1, dtype=float))
        i2 = np.atleast_1d(np.asarray(i2, dtype=float))
        f1 = self.scaler1.slope / self.stress_scale
        f2 = self.scaler2.slope / self.stress_scale
        _, ds1 = icnn_param_tangent(self.net1, self.scaler1.scale(i1))
        _, ds2 = icnn_param_tangent(self.net2, self.scaler2.scale(i2))
        g = self.grads(i1, i2)

        def pullback(c1, c2):
            return np.concatenate([(c1 * f1) @ ds1, (c2 * f2) @ ds2])

        return g, pullback


def pnam_grads(model: PnamModel, inv: Invariants) -> ShapeGradients:
    return model.grads(inv.i1, inv.i2)


def pnam_energy(model: PnamModel, inv: Invariants):
    """Unconstrained energy with the reference value subtracted (zero at I1 = I2 = 3)."""
    return model.energy(inv.i1, inv.i2)


def elu(x):
    x = np.asarray(x, dtype=float)
    return np.where(x > 0, x, np.expm1(np.minimum(x, 0.0)))


def _elu_d1(x):
    return np.where(x > 0, 1.0, np.exp(np.minimum(x, 0.0)))


def _elu_d2(x):
    return np.where(x > 0, 0.0, np.exp(np.minimum(x, 0.0)))


@dataclass
class BaselineMlp:
    """Unconstrained 2-50-1 ELU network over the scaled (I1, I2)."""

    W: np.ndarray  # (H, 2)
    b: np.ndarray  # (H,)
    w: np.ndarray  # (H,)
    c: float
    scaler1: AffineScaler
    scaler2: AffineScaler
    stress_scale: float = 1.0

    kind = "mlp"

    @classmethod
    def init(cls, seed: int, scaler1: AffineScaler, scaler2: AffineScaler,
             stress_scale: float = 1.0, width: int = DEFAULT_WIDTH) -> "BaselineMlp":
        rng = np.random.default_rng(seed)
        W = rng.normal(0.0, 1.0 / np.sqrt(2.0), size=(width, 2))
        w = rng.normal(0.0, 1.0 / np.sqrt(width), size=width)
        return cls(W, np.zeros(width), w, 0.0, scaler1, scaler2, stress_scale)

    @property
    def width(self) -> int:
        return int(self.b.shape[0])

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.W.ravel(), self.b, self.w, [self.c]])

    def with_vector(self, vec: np.ndarray) -> "BaselineMlp":
        h = self.width
        vec = np.asarray(vec, dtype=float)
        return replace(self, W=vec[:2 * h].reshape(h, 2).copy(), b=vec[2 * h:3 * h].copy(),
                       w=vec[3 * h:4 * h].copy(), c=float(vec[4 * h]))

    def _inputs(self, i1, i2):
        i1 = np.atleast_1d(np.asarray(i1, dtype=float))
        i2 = np.atleast_1d(np.asarray(i2, dtype=float))
        return np.stack([self.scaler1.scale(i1), self.scaler2.scale(i2)], axis=1)

    def raw_value(self, i1, i2):
        u = self._inputs(i1, i2)
        return elu(u @ self.W.T + self.b) @ self.w + self.c

    def energy(self, i1, i2):
        out = (self.raw_value(i1, i2) - self.raw_value(3.0, 3.0)) / self.stress_scale
        return float(out[0]) if np.ndim(i1) == 0 and np.ndim(i2) == 0 else out

    def grads(self, i1, i2) -> ShapeGradients:
        u = self._inputs(i1, i2)
        e1 = _elu_d1(u @ self.W.T + self.b)
        du = (e1 * self.w) @ self.W  # (N, 2)
        g1 = du[:, 0] * self.scaler1.slope / self.stress_scale
        g2 = du[:, 1] * self.scaler2.slope / self.stress_scale
        if np.ndim(i1) == 0 and np.ndim(i2) == 0:
            return ShapeGradients(float(g1[0]), float(g2[0]))
        return ShapeGradients(g1, g2)

    def grads_vjp(self, i1, i2):
        u = self._inputs(i1, i2)
        z = u @ self.W.T + self.b
        e1, e2 = _elu_d1(z), _elu_d2(z)
        fac = np.array([self.scaler1.slope, self.scaler2.slope]) / self.stress_scale
        du = (e1 * self.w) @ self.W
        g = ShapeGradients(du[:, 0] * fac[0], du[:, 1] * fac[1])

        def pullback(c1, c2):
            # cotangent on the input-space derivative g_k = sum_j w_j e'(z_j) W_jk
            ck = np.stack([c1 * fac[0], c2 * fac[1]], axis=1)  # (N, 2)
            cw = ck @ self.W.T  # (N, H): sum_k ck W_jk
            gw = (e1 * cw).sum(axis=0)
            t = self.w * e2 * cw  # (N, H)
            gb = t.sum(axis=0)
            gW = t.T @ u + (self.w * e1).T @ ck
            return np.concatenate([gW.ravel(), gb, gw, [0.0]])

        return g, pullback


def baseline_forward_and_grads(mlp: BaselineMlp, inv: Invariants):
    """Energy (reference value subtracted) and input gradients of the baseline."""
    return mlp.energy(inv.i1, inv.i2), mlp.grads(inv.i1, inv.i2)
