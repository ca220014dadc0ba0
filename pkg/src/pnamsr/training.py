"""Datasets, stress-matching loss, ADAM, training protocol and metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .kinematics import LoadingMode, mode_invariants, reduced_stress, stress_coefficients
from .pnam import BaselineMlp, PnamModel, fit_scalers


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class StressSample:
    mode: LoadingMode
    lam: float
    p1: float
    p3: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "mode", LoadingMode(self.mode))
        if not self.lam > 0:
            raise ValueError(f"stretch must be positive, got {self.lam}")


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    epochs: int = 20000
    split_fraction: float = 0.9
    stress_scale: float = 1.0
    seed: int = 0
    width: int = 50

    def __post_init__(self):
        if not 0.0 < self.split_fraction < 1.0:
            raise ValueError("split_fraction must lie in (0, 1)")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros_like(cls, params: np.ndarray) -> "AdamState":
        return cls(np.zeros_like(params), np.zeros_like(params))


def adam_step(state: AdamState, params: np.ndarray, grads: np.ndarray, lr: float) -> np.ndarray:
    """One bias-corrected ADAM update. Mutates ``state``; returns new params."""
    if params.shape != grads.shape or state.m.shape != params.shape:
        raise ValueError("parameter, gradient and moment shapes differ")
    state.t += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grads * grads
    m_hat = state.m / (1.0 - state.beta1 ** state.t)
    v_hat = state.v / (1.0 - state.beta2 ** state.t)
    return params - lr * m_hat / (np.sqrt(v_hat) + state.eps)


def split_dataset(data: Sequence[StressSample], fraction: float):
    """Extrapolative split: per mode, the largest stretches go to validation."""
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"split fraction must lie in (0, 1), got {fraction}")
    train: List[StressSample] = []
    val: List[StressSample] = []
    for mode in LoadingMode:
        rows = sorted((s for s in data if s.mode is mode), key=lambda s: s.lam)
        if not rows:
            continue
        if len(rows) < 2:
            raise ValueError(f"mode {mode} needs at least 2 samples to split")
        n_train = int(math.floor(len(rows) * fraction + 1e-9))
        n_train = min(max(n_train, 1), len(rows) - 1)
        train.extend(rows[:n_train])
        val.extend(rows[n_train:])
    return train, val


@dataclass
class _Components:
    """Flattened measured stress components of a batch."""

    i1: np.ndarray
    i2: np.ndarray
    a: np.ndarray
    b: np.ndarray
    k: np.ndarray
    target: np.ndarray

    def __len__(self):
        return self.target.shape[0]


def _components(batch: Sequence[StressSample]) -> _Components:
    cols: Dict[str, list] = {key: [] for key in ("i1", "i2", "a", "b", "k", "target")}
    for s in batch:
        inv = mode_invariants(s.mode, s.lam)
        first, third = stress_coefficients(s.mode, s.lam)
        rows = [(first, s.p1)]
        if third is not None and s.p3 is not None:
            rows.append((third, s.p3))
        for (a, b, k), target in rows:
            cols["i1"].append(float(inv.i1))
            cols["i2"].append(float(inv.i2))
            cols["a"].append(float(a))
            cols["b"].append(float(b))
            cols["k"].append(float(k))
            cols["target"].append(float(target))
    return _Components(**{key: np.asarray(v, dtype=float) for key, v in cols.items()})


def _predict(model, comp: _Components) -> np.ndarray:
    d1, d2 = model.grads(comp.i1, comp.i2)
    return 2.0 * (comp.a * d1 + comp.b * d2) * comp.k


def _loss_from_components(model, comp: _Components) -> float:
    if len(comp) == 0:
        return 0.0
    s = model.stress_scale
    r = s * (_predict(model, comp) - comp.target)
    return float(r @ r)


def _loss_and_grad(model, comp: _Components) -> Tuple[float, np.ndarray]:
    if len(comp) == 0:
        return 0.0, np.zeros_like(model.to_vector())
    s = model.stress_scale
    (d1, d2), pullback = model.grads_vjp(comp.i1, comp.i2)
    pred = 2.0 * (comp.a * d1 + comp.b * d2) * comp.k
    r = s * (pred - comp.target)
    dpred = 2.0 * r * s
    return float(r @ r), pullback(dpred * 2.0 * comp.a * comp.k, dpred * 2.0 * comp.b * comp.k)


def loss(model, batch: Sequence[StressSample]) -> float:
    """Sum of squared residuals of every provided stress component, in scaled units."""
    return _loss_from_components(model, _components(batch))


def loss_gradients(model, batch: Sequence[StressSample]) -> np.ndarray:
    """Exact gradient of ``loss`` w.r.t. the model's raw parameter vector."""
    return _loss_and_grad(model, _components(batch))[1]


def predict_stress(model, mode: LoadingMode, lam):
    """Model nominal stress (p1, p3) in data units; works for any model or energy."""
    return reduced_stress(lambda i1, i2: tuple(model.grads(i1, i2)), mode, lam)


@dataclass
class TrainHistory:
    train: List[float] = field(default_factory=list)
    validation: List[float] = field(default_factory=list)
    best_epoch: int = -1


def init_model(data: Sequence[StressSample], config: TrainConfig, kind: str = "pnam"):
    """Fit scalers on the training split and draw initial parameters."""
    train_set, _ = split_dataset(data, config.split_fraction)
    invs = [mode_invariants(s.mode, s.lam) for s in train_set]
    sc1, sc2 = fit_scalers(invs)
    cls = {"pnam": PnamModel, "mlp": BaselineMlp}[kind]
    return cls.init(config.seed, sc1, sc2, config.stress_scale, config.width)


def train(model, data: Sequence[StressSample], config: TrainConfig):
    """Full-batch ADAM; returns the parameters with the lowest validation loss."""
    if not data:
        raise ValueError("training data is empty")
    train_set, val_set = split_dataset(data, config.split_fraction)
    tr, va = _components(train_set), _components(val_set)
    history = TrainHistory()
    params = model.to_vector()
    best = params.copy()
    best_val = math.inf
    state = AdamState.zeros_like(params)
    current = model
    for epoch in range(config.epochs):
        current = model.with_vector(params)
        train_loss, grad = _loss_and_grad(current, tr)
        val_loss = _loss_from_components(current, va)
        if not (np.isfinite(train_loss) and np.isfinite(val_loss) and np.all(np.isfinite(grad))):
            raise TrainingError(f"loss diverged at epoch {epoch}")
        history.train.append(train_loss)
        history.validation.append(val_loss)
        if val_loss < best_val:
            best_val = val_loss
            best = params.copy()
            history.best_epoch = epoch
        params = adam_step(state, params, grad, config.learning_rate)
    if config.epochs == 0:
        return model, history
    return model.with_vector(best), history


def r2_score(pred, truth) -> float:
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape or truth.size < 2:
        raise ValueError("r2_score needs equal-length inputs with at least 2 values")
    ss_tot = float(np.sum((truth - truth.mean()) ** 2))
    if ss_tot == 0.0:
        raise ValueError("R^2 is undefined for constant ground truth")
    return 1.0 - float(np.sum((truth - pred) ** 2)) / ss_tot


def r2_by_mode(model, data: Sequence[StressSample]) -> Dict[LoadingMode, float]:
    """R^2 of the p1 component per loading mode, over all given samples."""
    out = {}
    for mode in LoadingMode:
        rows = [s for s in data if s.mode is mode]
        if len(rows) < 2:
            continue
        lam = np.array([s.lam for s in rows])
        p1, _ = predict_stress(model, mode, lam)
        out[mode] = r2_score(p1, [s.p1 for s in rows])
    return out


# -- closed-form energies used as synthetic generators -----------------------


@dataclass(frozen=True)
class NeoHookean:
    mu: float = 0.5

    def grads(self, i1, i2):
        i1 = np.asarray(i1, dtype=float)
        return 0.5 * self.mu * np.ones_like(i1), np.zeros_like(np.asarray(i2, dtype=float))

    def energy(self, i1, i2):
        return 0.5 * self.mu * (np.asarray(i1, dtype=float) - 3.0)


@dataclass(frozen=True)
class MooneyRivlin:
    c1: float = 0.2
    c2: float = 0.05

    def grads(self, i1, i2):
        return (self.c1 * np.ones_like(np.asarray(i1, dtype=float)),
                self.c2 * np.ones_like(np.asarray(i2, dtype=float)))

    def energy(self, i1, i2):
        return self.c1 * (np.asarray(i1) - 3.0) + self.c2 * (np.asarray(i2) - 3.0)


@dataclass(frozen=True)
class ExpLog:
    """Exponential-logarithmic rubber energy in I1 only."""

    A: float = 0.195
    a: float = 0.018
    b: float = 0.33

    def _check(self, i1):
        i1 = np.asarray(i1, dtype=float)
        if np.any(i1 <= 2.0):
            raise ValueError("Exp-Log energy requires I1 > 2")
        return i1

    def energy(self, i1, i2):
        i1 = self._check(i1)
        A, a, b = self.A, self.a, self.b
        return A * (np.exp(a * (i1 - 3.0)) / a + b * (i1 - 1.0) * (1.0 - np.log(i1 - 2.0)) - 1.0 / a - b)

    def grads(self, i1, i2):
        i1 = self._check(i1)
        A, a, b = self.A, self.a, self.b
        d1 = A * (np.exp(a * (i1 - 3.0)) + b * (1.0 - np.log(i1 - 2.0)) - b * (i1 - 1.0) / (i1 - 2.0))
        return d1, np.zeros_like(np.asarray(i2, dtype=float))


def generate_synthetic(energy, modes: Sequence[LoadingMode], lambda_grid, noise_sd: float = 0.0,
                       seed: int = 0, with_p3: bool = True) -> List[StressSample]:
    """Stress samples from any object with ``grads(i1, i2)``, plus optional Gaussian noise."""
    rng = np.random.default_rng(seed)
    lam = np.asarray(lambda_grid, dtype=float)
    out: List[StressSample] = []
    for mode in modes:
        mode = LoadingMode(mode)
        p1, p3 = reduced_stress(lambda i1, i2: energy.grads(i1, i2), mode, lam)
        p1 = np.asarray(p1, dtype=float)
        if not np.all(np.isfinite(p1)) or (p3 is not None and not np.all(np.isfinite(p3))):
            raise ValueError(f"energy is not defined on the {mode} stretch grid")
        if noise_sd > 0:
            p1 = p1 + rng.normal(0.0, noise_sd, size=p1.shape)
            if p3 is not None:
                p3 = p3 + rng.normal(0.0, noise_sd, size=p1.shape)
        for j, l in enumerate(lam):
            third = float(p3[j]) if (p3 is not None and with_p3) else None
            out.append(StressSample(mode, float(l), float(p1[j]), third))
    return out
