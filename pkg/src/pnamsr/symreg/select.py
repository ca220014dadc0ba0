"""Bridge from a trained additive model to SR samples, and front-based model selection."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .expr import Expression, diff_expr, evaluate
from .gp import ParetoFront

DEFAULT_SAMPLES = 500


def sample_shape_function(model, which: int, n: int = DEFAULT_SAMPLES) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(I, psi_k(I), psi_k'(I)) on ``n`` evenly spaced points of the training range.

    Values are in data units (stress scaling undone).
    """
    if which not in (1, 2):
        raise ValueError("which must be 1 or 2")
    scaler = getattr(model, f"scaler{which}", None)
    if scaler is None:
        raise ValueError("model has no fitted scaler")
    grid = np.linspace(scaler.m, scaler.M, n)
    return grid, model.shape_value(which, grid), model.shape_slope(which, grid)


@dataclass
class FrontRow:
    complexity: int
    expression: Expression
    mse: float
    grad_mse: float
    value_ok: bool
    grad_ok: bool


@dataclass
class Selection:
    expression: Expression
    complexity: int
    rows: List[FrontRow]
    tau: float


def _grad_mse(e: Expression, x, dy) -> float:
    d = evaluate(diff_expr(e), x)
    if not np.all(np.isfinite(d)):
        return float("inf")
    return float(np.mean((d - dy) ** 2))


def select_model(front: ParetoFront, grad_samples: Optional[Tuple[np.ndarray, np.ndarray]] = None,
                 tau: float = 1.5, value_tol: float = 0.0, grad_tol: float = 0.0) -> Selection:
    """Simplest front entry that is accurate in value and in derivative.

    An entry passes the value test if ``mse <= max(tau * best_mse, value_tol)``
    and the derivative test likewise against the best derivative mse. If no
    entry passes both, the one with the smallest worse-of-two ratio is taken.
    """
    if len(front) == 0:
        raise ValueError("empty Pareto front")
    items = front.items()
    if grad_samples is not None:
        gx, gy = (np.asarray(a, dtype=float) for a in grad_samples)
        gmse = [_grad_mse(e, gx, gy) for _, (e, _) in items]
    else:
        gmse = [0.0] * len(items)
    best_v = min(m for _, (_, m) in items)
    best_g = min(gmse)
    v_cut = max(tau * best_v, value_tol)
    g_cut = max(tau * best_g, grad_tol)
    rows = [FrontRow(c, e, m, g, m <= v_cut, g <= g_cut) for (c, (e, m)), g in zip(items, gmse)]
    for row in rows:
        if row.value_ok and row.grad_ok:
            return Selection(row.expression, row.complexity, rows, tau)

    def worst_ratio(row):
        rv = row.mse / v_cut if v_cut > 0 else (0.0 if row.mse == 0 else np.inf)
        rg = row.grad_mse / g_cut if g_cut > 0 else (0.0 if row.grad_mse == 0 else np.inf)
        return max(rv, rg)

    row = min(rows, key=worst_ratio)
    return Selection(row.expression, row.complexity, rows, tau)
