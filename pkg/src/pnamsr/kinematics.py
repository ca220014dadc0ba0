"""Kinematics and stress assembly for isotropic, incompressible hyperelasticity.

Everything here is a pure function of its arguments. Functions that take a
stretch accept scalars or numpy arrays and broadcast.
"""

from __future__ import annotations

import enum
from typing import Callable, NamedTuple, Optional, Tuple

import numpy as np


class LoadingMode(str, enum.Enum):
    UE = "UE"  # uniaxial extension
    EBE = "EBE"  # equibiaxial extension
    PS = "PS"  # pure shear

    def __str__(self) -> str:
        return self.value


class Invariants(NamedTuple):
    i1: np.ndarray
    i2: np.ndarray
    i3: np.ndarray


class ShapeGradients(NamedTuple):
    dpsi_d1: np.ndarray
    dpsi_d2: np.ndarray


GradsAt = Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]


def _check_stretch(lam):
    lam = np.asarray(lam, dtype=float)
    if np.any(~(lam > 0)):
        raise ValueError(f"stretch must be positive, got {lam}")
    return lam


def principal_stretches(mode: LoadingMode, lam) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    lam = _check_stretch(lam)
    mode = LoadingMode(mode)
    if mode is LoadingMode.UE:
        lt = lam ** -0.5
        return lam, lt, lt
    if mode is LoadingMode.EBE:
        return lam, lam, lam ** -2.0
    return lam, 1.0 / lam, np.ones_like(lam)


def deformation_gradient(mode: LoadingMode, lam: float) -> np.ndarray:
    """Diagonal, isochoric deformation gradient for a loading mode."""
    l1, l2, l3 = principal_stretches(mode, float(lam))
    return np.diag([float(l1), float(l2), float(l3)])


def invariants_of(f: np.ndarray) -> Invariants:
    f = np.asarray(f, dtype=float)
    det = np.linalg.det(f)
    if not det > 0:
        raise ValueError(f"deformation gradient must have det > 0, got {det}")
    c = f.T @ f
    i1 = np.trace(c)
    i2 = 0.5 * (i1 * i1 - np.trace(c @ c))
    i3 = np.linalg.det(c)
    return Invariants(float(i1), float(i2), float(i3))


def mode_invariants(mode: LoadingMode, lam) -> Invariants:
    """Invariants of a mode-constructed state, via the diagonal fast path."""
    l1, l2, l3 = principal_stretches(mode, lam)
    c1, c2, c3 = l1 * l1, l2 * l2, l3 * l3
    i1 = c1 + c2 + c3
    i2 = c1 * c2 + c1 * c3 + c2 * c3
    return Invariants(i1, i2, np.ones_like(i1))


def stress_coefficients(mode: LoadingMode, lam):
    """Linear maps from (dpsi/dI1, dpsi/dI2) to the measured nominal stresses.

    Returns ``[(a1, b1, k1), (a3, b3, k3) or None]`` such that
    ``P = 2 * (a * dpsi_d1 + b * dpsi_d2) * k``.
    """
    lam = _check_stretch(lam)
    mode = LoadingMode(mode)
    one = np.ones_like(lam)
    if mode is LoadingMode.UE:
        return (one, 1.0 / lam, lam - lam ** -2.0), None
    if mode is LoadingMode.EBE:
        return (one, lam * lam, lam - lam ** -5.0), None
    return (one, one, lam - lam ** -3.0), (one, lam * lam, 1.0 - lam ** -2.0)


def reduced_stress(grads_at: GradsAt, mode: LoadingMode, lam) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Nominal stress (p1, p3) under a loading mode with pressure eliminated.

    ``p3`` is only defined for pure shear; it is ``None`` otherwise.
    """
    inv = mode_invariants(mode, lam)
    d1, d2 = grads_at(inv.i1, inv.i2)
    first, third = stress_coefficients(mode, lam)
    a, b, k = first
    p1 = 2.0 * (a * d1 + b * d2) * k
    if third is None:
        return p1, None
    a, b, k = third
    return p1, 2.0 * (a * d1 + b * d2) * k


def second_pk_general(grads: ShapeGradients, c: np.ndarray, p: float, alpha0: float) -> np.ndarray:
    """Second Piola-Kirchhoff stress of the full constrained energy.

    S = 2[(psi_1 + I1 psi_2) I - psi_2 C] - (p + 2 alpha0) I3 C^-1,
    with the incompressibility term written as U(I3) = I3 - 1.
    """
    c = np.asarray(c, dtype=float)
    i3 = np.linalg.det(c)
    if abs(i3) < 1e-300:
        raise ValueError("right Cauchy-Green tensor is singular")
    c_inv = np.linalg.inv(c)
    i1 = np.trace(c)
    d1, d2 = grads
    eye = np.eye(3)
    return 2.0 * ((d1 + i1 * d2) * eye - d2 * c) - (p + 2.0 * alpha0) * i3 * c_inv


def alpha0_of(d1_at_3: float, d2_at_3: float) -> float:
    """Coefficient of the I3-linear term that cancels the reference-state stress."""
    return d1_at_3 + 2.0 * d2_at_3
