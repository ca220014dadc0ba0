"""Univariate input-convex network with one hidden layer.

    z1  = x * v0 + b0                (H,)
    h1  = softplus(z1)
    z2  = w1 . h1 + x * v1 + b1
    psi = softplus(z2) ** 2

Weights ``v0, w1, v1`` enter through a ReLU projection of the raw parameters,
so the output is convex, non-decreasing and non-negative in ``x`` for any raw
values. Derivatives are written out by hand.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_WIDTH = 50


def softplus(x):
    x = np.asarray(x, dtype=float)
    # softplus(x) = max(x, 0) + log1p(exp(-|x|)) avoids overflow for large |x|
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def sigmoid(x):
    x = np.asarray(x, dtype=float)
    e = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def softplus2(x):
    return softplus(x) ** 2


@dataclass
class IcnnParams:
    v0_raw: np.ndarray
    b0: np.ndarray
    w1_raw: np.ndarray
    v1_raw: float
    b1: float

    @property
    def width(self) -> int:
        return int(self.v0_raw.shape[0])

    @property
    def v0(self) -> np.ndarray:
        return np.maximum(self.v0_raw, 0.0)

    @property
    def w1(self) -> np.ndarray:
        return np.maximum(self.w1_raw, 0.0)

    @property
    def v1(self) -> float:
        return max(self.v1_raw, 0.0)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.v0_raw, self.b0, self.w1_raw, [self.v1_raw, self.b1]])

    @classmethod
    def from_vector(cls, vec: np.ndarray) -> "IcnnParams":
        vec = np.asarray(vec, dtype=float)
        h = (vec.shape[0] - 2) // 3
        if 3 * h + 2 != vec.shape[0]:
            raise ValueError(f"vector of length {vec.shape[0]} is not an ICNN parameter set")
        return cls(
            v0_raw=vec[:h].copy(),
            b0=vec[h:2 * h].copy(),
            w1_raw=vec[2 * h:3 * h].copy(),
            v1_raw=float(vec[3 * h]),
            b1=float(vec[3 * h + 1]),
        )

    def copy(self) -> "IcnnParams":
        return IcnnParams.from_vector(self.to_vector())

    @classmethod
    def zeros(cls, h: int) -> "IcnnParams":
        return cls(np.zeros(h), np.zeros(h), np.zeros(h), 0.0, 0.0)


def icnn_init(seed: int, h: int = DEFAULT_WIDTH) -> IcnnParams:
    """Raw weights ~ |N(0, 1/sqrt(fan_in))|, biases zero."""
    if h < 1:
        raise ValueError("hidden width must be >= 1")
    rng = np.random.default_rng(seed)
    v0 = np.abs(rng.normal(0.0, 1.0, size=h))
    w1 = np.abs(rng.normal(0.0, 1.0 / np.sqrt(h), size=h))
    v1 = float(np.abs(rng.normal(0.0, 1.0)))
    return IcnnParams(v0, np.zeros(h), w1, v1, 0.0)


@dataclass
class _Trace:
    x: np.ndarray  # (N,)
    z1: np.ndarray  # (N, H)
    h1: np.ndarray
    s1: np.ndarray  # sigmoid(z1)
    z2: np.ndarray  # (N,)
    sp2: np.ndarray  # softplus(z2)
    sg2: np.ndarray  # sigmoid(z2)
    slope_z2: np.ndarray  # dz2/dx


def _trace(params: IcnnParams, x) -> _Trace:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    v0, w1 = params.v0, params.w1
    z1 = np.outer(x, v0) + params.b0
    h1 = softplus(z1)
    s1 = sigmoid(z1)
    z2 = h1 @ w1 + x * params.v1 + params.b1
    slope_z2 = s1 @ (w1 * v0) + params.v1
    return _Trace(x, z1, h1, s1, z2, softplus(z2), sigmoid(z2), slope_z2)


def _unwrap(x, out):
    return float(out[0]) if np.ndim(x) == 0 else out


def icnn_forward(params: IcnnParams, x):
    t = _trace(params, x)
    return _unwrap(x, t.sp2 ** 2)


def icnn_input_grad(params: IcnnParams, x):
    t = _trace(params, x)
    return _unwrap(x, 2.0 * t.sp2 * t.sg2 * t.slope_z2)


def icnn_value_and_grad(params: IcnnParams, x):
    t = _trace(params, x)
    return t.sp2 ** 2, 2.0 * t.sp2 * t.sg2 * t.slope_z2


def icnn_param_tangent(params: IcnnParams, x):
    """Jacobians of the value and of the input slope w.r.t. the raw parameters.

    Returns two ``(N, 3H + 2)`` arrays laid out like ``IcnnParams.to_vector``.
    The ReLU projection contributes a subgradient of 1 where raw >= 0, else 0.
    """
    t = _trace(params, x)
    x = t.x
    v0, w1 = params.v0, params.w1
    m_v0 = (params.v0_raw >= 0).astype(float)
    m_w1 = (params.w1_raw >= 0).astype(float)
    m_v1 = 1.0 if params.v1_raw >= 0 else 0.0

    d_s1 = t.s1 * (1.0 - t.s1)  # sigmoid'(z1)
    xc = x[:, None]

    # dz2/dtheta
    dz2_v0 = w1 * t.s1 * xc * m_v0
    dz2_b0 = w1 * t.s1
    dz2_w1 = t.h1 * m_w1
    dz2_v1 = x * m_v1
    dz2_b1 = np.ones_like(x)

    # d(dz2/dx)/dtheta
    ds_v0 = w1 * (d_s1 * xc * v0 + t.s1) * m_v0
    ds_b0 = w1 * d_s1 * v0
    ds_w1 = t.s1 * v0 * m_w1
    ds_v1 = np.full_like(x, m_v1)
    ds_b1 = np.zeros_like(x)

    g1 = 2.0 * t.sp2 * t.sg2  # softplus2'(z2)
    g2 = 2.0 * t.sg2 ** 2 + 2.0 * t.sp2 * t.sg2 * (1.0 - t.sg2)  # softplus2''(z2)

    dz2 = np.hstack([dz2_v0, dz2_b0, dz2_w1, dz2_v1[:, None], dz2_b1[:, None]])
    ds = np.hstack([ds_v0, ds_b0, ds_w1, ds_v1[:, None], ds_b1[:, None]])
    dvalue = g1[:, None] * dz2
    dslope = (g2 * t.slope_z2)[:, None] * dz2 + g1[:, None] * ds
    return dvalue, dslope
