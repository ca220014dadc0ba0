"""Inference timing: trained network versus its distilled closed form."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .symreg.expr import Expression, compile_expr, diff_expr

SERIES = ("net_value", "net_grad", "sym_value", "sym_grad")


@dataclass
class BenchRow:
    n: int
    mean: dict
    sd: dict


@dataclass
class BenchTable:
    rows: List[BenchRow]
    replicates: int

    @property
    def symbolic_faster(self) -> bool:
        """Symbolic value evaluation at the largest query count is not slower than the network."""
        last = self.rows[-1]
        return last.mean["sym_value"] <= last.mean["net_value"]

    def markdown(self) -> List[str]:
        head = "| n | " + " | ".join(f"{s} mean (s) | {s} sd (s)" for s in SERIES) + " |"
        lines = [head, "|---:|" + "---:|" * (2 * len(SERIES))]
        for r in self.rows:
            cells = " | ".join(f"{r.mean[s]:.3e} | {r.sd[s]:.3e}" for s in SERIES)
            lines.append(f"| {r.n} | {cells} |")
        lines.append("")
        if self.symbolic_faster:
            lines.append("Symbolic value evaluation is faster than the network at the largest n.")
        else:
            lines.append("FLAG: symbolic value evaluation is slower than the network at the largest n on this host.")
        return lines


def _time(fn, *args) -> float:
    t0 = time.perf_counter()
    fn(*args)
    return time.perf_counter() - t0


def benchmark_inference(model, pair: Tuple[Expression, Expression], n_points: Sequence[int] = (100, 1000, 10000, 100000),
                        replicates: int = 20, seed: int = 0) -> BenchTable:
    """Mean and sd of wall time for energy and gradient queries, one seed per replicate."""
    psi1, psi2 = pair
    f1, f2 = compile_expr(psi1), compile_expr(psi2)
    g1, g2 = compile_expr(diff_expr(psi1)), compile_expr(diff_expr(psi2))
    lo1, hi1 = model.scaler1.m, model.scaler1.M
    lo2, hi2 = model.scaler2.m, model.scaler2.M

    def sym_value(i1, i2):
        return f1(i1) + f2(i2)

    def sym_grad(i1, i2):
        return g1(i1), g2(i2)

    rows = []
    for n in n_points:
        samples = {s: [] for s in SERIES}
        for r in range(replicates):
            rng = np.random.default_rng([seed, int(n), r])
            i1 = rng.uniform(lo1, hi1, int(n))
            i2 = rng.uniform(lo2, hi2, int(n))
            samples["net_value"].append(_time(model.energy, i1, i2))
            samples["net_grad"].append(_time(model.grads, i1, i2))
            samples["sym_value"].append(_time(sym_value, i1, i2))
            samples["sym_grad"].append(_time(sym_grad, i1, i2))
        rows.append(BenchRow(int(n), {s: float(np.mean(v)) for s, v in samples.items()},
                             {s: float(np.std(v, ddof=1)) if len(v) > 1 else 0.0 for s, v in samples.items()}))
    return BenchTable(rows, replicates)
