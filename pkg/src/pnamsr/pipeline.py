"""Stage functions for fit -> distill -> analyze -> report, and their artifacts."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from .analysis import INCOMPRESSIBLE_LOWER_BOUND, AnalysisVerdict, analyze_pair
from .config import RunConfig, save_config
from .dataio import (
    Checkpoint,
    bundled_dataset,
    load_checkpoint,
    load_dataset,
    load_distilled,
    save_checkpoint,
    save_distilled,
)
from .symreg.expr import Expression, to_string
from .symreg.gp import GpConfig, ParetoFront, gp_search
from .symreg.select import Selection, sample_shape_function, select_model
from .training import StressSample, init_model, train

log = logging.getLogger(__name__)

CHECKPOINT = "checkpoint.json"
BASELINE = "baseline.json"
EXPRESSIONS = "expressions.json"
ANALYSIS = "analysis.json"
CONFIG = "config.ini"


@dataclass
class Distilled:
    fronts: Dict[str, ParetoFront]
    selections: Dict[str, Selection]
    samples: Dict[str, Tuple[np.ndarray, np.ndarray, np.ndarray]]

    @property
    def pair(self) -> Tuple[Expression, Expression]:
        return self.selections["psi1"].expression, self.selections["psi2"].expression


def dataset_for(cfg: RunConfig) -> Tuple[Path, List[StressSample]]:
    path = Path(cfg.dataset) if cfg.dataset else bundled_dataset()
    return path, load_dataset(path)


def fit_stage(cfg: RunConfig, data: List[StressSample]) -> Tuple[Checkpoint, Optional[Checkpoint]]:
    tc = cfg.train
    model, history = train(init_model(data, tc, "pnam"), data, tc)
    ckpt = Checkpoint(model, tc, history, cfg.seed)
    base = None
    if cfg.baseline:
        mlp, mlp_hist = train(init_model(data, tc, "mlp"), data, tc)
        base = Checkpoint(mlp, tc, mlp_hist, cfg.seed)
    return ckpt, base


def _search(args):
    x, y, gp = args
    return gp_search(x, y, gp)


def sample_range(scaler, widen: float) -> Tuple[float, float]:
    span = scaler.M - scaler.m
    return scaler.m - widen * span / 2.0, scaler.M + widen * span / 2.0


def distill_stage(cfg: RunConfig, model) -> Distilled:
    """Sample both shape functions, run one search per function, select from each front."""
    samples = {}
    for k in (1, 2):
        scaler = getattr(model, f"scaler{k}")
        lo, hi = sample_range(scaler, cfg.select.widen)
        grid = np.linspace(lo, hi, cfg.select.n_samples)
        samples[f"psi{k}"] = (grid, model.shape_value(k, grid), model.shape_slope(k, grid))
    jobs = [(samples["psi1"][0], samples["psi1"][1], cfg.gp1),
            (samples["psi2"][0], samples["psi2"][1], cfg.gp2)]
    if cfg.parallel:
        with ProcessPoolExecutor(max_workers=2) as pool:
            fronts_list = list(pool.map(_search, jobs))
    else:
        fronts_list = [_search(j) for j in jobs]
    fronts = {"psi1": fronts_list[0], "psi2": fronts_list[1]}
    selections = {
        name: select_model(front, (samples[name][0], samples[name][2]), cfg.select.tau,
                           cfg.select.value_tol, cfg.select.grad_tol)
        for name, front in fronts.items()
    }
    return Distilled(fronts, selections, samples)


def analysis_intervals(cfg: RunConfig, model) -> Tuple[Tuple[float, float], Tuple[float, float]]:
    out = []
    for k, fixed in ((1, cfg.analysis.interval1), (2, cfg.analysis.interval2)):
        if fixed is not None:
            out.append(tuple(fixed))
        else:
            sc = getattr(model, f"scaler{k}")
            out.append((max(INCOMPRESSIBLE_LOWER_BOUND, sc.m), sc.M))
    return out[0], out[1]


def analyze_stage(cfg: RunConfig, model, pair: Tuple[Expression, Expression]) -> AnalysisVerdict:
    iv1, iv2 = analysis_intervals(cfg, model)
    return analyze_pair(pair[0], pair[1], iv1, iv2, cfg.analysis.n_grid)


# -- artifact plumbing ------------------------------------------------------------


def write_fit(out: Path, ckpt: Checkpoint, base: Optional[Checkpoint]) -> None:
    save_checkpoint(out / CHECKPOINT, ckpt)
    if base is not None:
        save_checkpoint(out / BASELINE, base)


def write_distilled(out: Path, d: Distilled) -> None:
    ranges = {k: [float(v[0][0]), float(v[0][-1]), int(v[0].size)] for k, v in d.samples.items()}
    save_distilled(out / EXPRESSIONS, d.fronts, {k: to_string(s.expression) for k, s in d.selections.items()},
                   ranges)


def read_distilled(out: Path, cfg: RunConfig, model) -> Distilled:
    fronts, selected, ranges = load_distilled(out / EXPRESSIONS)
    samples = {}
    for k, name in ((1, "psi1"), (2, "psi2")):
        lo, hi, n = ranges.get(name, [*sample_range(getattr(model, f"scaler{k}"), cfg.select.widen),
                                      cfg.select.n_samples])
        grid = np.linspace(lo, hi, int(n))
        samples[name] = (grid, model.shape_value(k, grid), model.shape_slope(k, grid))
    selections = {}
    for name, front in fronts.items():
        sel = select_model(front, (samples[name][0], samples[name][2]), cfg.select.tau,
                           cfg.select.value_tol, cfg.select.grad_tol)
        if to_string(sel.expression) != to_string(selected[name]):
            # selection settings changed since distill; honour the stored choice
            rows = sel.rows
            chosen = selected[name]
            sel = Selection(chosen, next(r.complexity for r in rows if to_string(r.expression) == to_string(chosen)),
                            rows, sel.tau)
        selections[name] = sel
    return Distilled(fronts, selections, samples)


def write_analysis(out: Path, verdict: AnalysisVerdict) -> None:
    (out / ANALYSIS).write_text(json.dumps(verdict.to_dict(), indent=1, sort_keys=True) + "\n")


def run_all(cfg: RunConfig, out: Optional[Path] = None):
    """Full pipeline; every artifact lands in ``out`` (default ``cfg.out_dir``)."""
    from .report import emit_report

    cfg = cfg.seeded()
    out = Path(out or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_config(out / CONFIG, cfg)
    path, data = dataset_for(cfg)
    log.info("fit: %d samples from %s", len(data), path)
    ckpt, base = fit_stage(cfg, data)
    write_fit(out, ckpt, base)
    log.info("distill")
    distilled = distill_stage(cfg, ckpt.model)
    write_distilled(out, distilled)
    verdict = analyze_stage(cfg, ckpt.model, distilled.pair)
    write_analysis(out, verdict)
    files = emit_report(ckpt, distilled, verdict, data, out, baseline=base, svg=cfg.svg,
                        dataset_name=path.name)
    return ckpt, distilled, verdict, files


def load_run(out: Path, cfg: RunConfig):
    ckpt = load_checkpoint(out / CHECKPOINT)
    base = load_checkpoint(out / BASELINE) if (out / BASELINE).exists() else None
    return ckpt, base
