"""Markdown report, plot data and SVG figures for a finished run.

Output is a pure function of the run artifacts: no timestamps, no timings,
fixed float formatting. Two runs with the same config and seed therefore
produce byte-identical files.
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .analysis import AnalysisVerdict, ShapeVerdict
from .fixtures import ExpressionEnergy
from .kinematics import LoadingMode
from .plots import line_plot, write_columns
from .symreg.expr import complexity, diff_expr, display, evaluate, to_string
from .training import StressSample, predict_stress, r2_by_mode, split_dataset

PLOTS = "plots"
REPORT = "report.md"
MAX_LOSS_ROWS = 2000


def _r2_row(model, data) -> Dict[LoadingMode, float]:
    try:
        return r2_by_mode(model, data)
    except ValueError:
        return {}


def r2_table(rows: Dict[str, object], data: Sequence[StressSample]) -> List[str]:
    modes = [m for m in LoadingMode if sum(s.mode is m for s in data) >= 2]
    lines = ["| model | " + " | ".join(m.value for m in modes) + " |",
             "|---|" + "---:|" * len(modes)]
    for name, model in rows.items():
        r2 = _r2_row(model, data)
        cells = [f"{r2[m]:.4f}" if m in r2 else "n/a" for m in modes]
        lines.append(f"| {name} | " + " | ".join(cells) + " |")
    return lines


# -- analysis text --------------------------------------------------------------


def _shape_lines(v: ShapeVerdict, var: str) -> List[str]:
    it = v.interval
    yes = {True: "yes", False: "no"}
    lines = [f"- interval [{it.lo:.4g}, {it.hi:.4g}], {it.n_grid} grid points"]
    if it.domain_violation is not None:
        lines.append(f"- domain violation: expression is not evaluable at {var} = {it.domain_violation:.6g}")
        return lines
    lines += [
        f"- convex on interval: {yes[it.convex]} (min second derivative {it.min_second:.4g} at {it.argmin_second:.4g})",
        f"- non-decreasing on interval: {yes[it.nondecreasing]} (min slope {it.min_first:.4g} at {it.argmin_first:.4g})",
        f"- growth as {var} -> +inf: {v.value_class.describe(var)}",
        f"- derivative as {var} -> +inf: {v.monotonicity.derivative.describe(var)}",
        f"- non-decreasing as {var} -> +inf: {yes[v.asymptotic_nondecreasing]}; {v.monotonicity.describe(var)}",
    ]
    return lines


def conclusion(verdict: AnalysisVerdict) -> str:
    """One-paragraph summary assembled from the individual verdicts."""
    parts = []
    both = (verdict.psi1, verdict.psi2)
    if all(v.convex for v in both):
        parts.append("Both shape functions are convex on the checked intervals")
    else:
        bad = [n for n, v in zip(("psi1", "psi2"), both) if not v.convex]
        parts.append(f"Convexity fails on the checked interval for {', '.join(bad)}")
    if all(v.nondecreasing for v in both):
        parts.append("both are non-decreasing there")
    else:
        bad = [n for n, v in zip(("psi1", "psi2"), both) if not v.nondecreasing]
        parts.append(f"{', '.join(bad)} decreases somewhere on its interval")
    text = ", and ".join(parts) + "."
    for name, var, v in (("psi1", "I1", verdict.psi1), ("psi2", "I2", verdict.psi2)):
        if not v.asymptotic_nondecreasing:
            if v.monotonicity.derivative.kind == "unknown":
                text += f" The behaviour of {name} as {var} -> +inf could not be classified."
            else:
                neg = [t.describe(var) for t in v.monotonicity.derivative.terms if t.coef < 0]
                text += (f" {name} violates the non-decreasing condition as {var} -> +inf: its derivative "
                         f"contains the negative term {', '.join(neg)}, so polyconvexity is only certified "
                         f"on the sampled range.")
    c = verdict.coercivity
    if c.status == "established":
        text += f" The growth condition holds with p = {c.p:g}, q = {c.q:g} and alpha = {c.alpha:.4g}."
    elif c.status == "marginal":
        text += f" The growth condition is marginally violated: {c.reason}."
    else:
        text += f" The growth condition is not established: {c.reason}."
    sf = verdict.stress_free
    text += (" The reference state is stress free." if sf.ok else
             f" The reference state carries residual stress {sf.residual:.3g}.")
    return text


def render_analysis(verdict: AnalysisVerdict, title: str = "Admissibility analysis") -> List[str]:
    c = verdict.coercivity
    lines = [f"## {title}", "", "### psi1(I1)", *_shape_lines(verdict.psi1, "I1"), "",
             "### psi2(I2)", *_shape_lines(verdict.psi2, "I2"), "", "### Growth condition",
             f"- status: {c.status}"]
    if c.p is not None:
        lines.append(f"- witness: p = {c.p:g}, q = {c.q:g}" + (f", alpha = {c.alpha:.4g}" if c.alpha else ""))
    lines += [f"- reason: {c.reason}", "", "### Reference state",
              f"- alpha0 = {verdict.stress_free.alpha0:.17g}",
              f"- stress at C = I, p = 0: Frobenius norm {verdict.stress_free.residual:.3g}"
              f" ({'stress free' if verdict.stress_free.ok else 'NOT stress free'})",
              "", "### Conclusion", conclusion(verdict), ""]
    return lines


# -- plot data ------------------------------------------------------------------------


def _loss_files(plots: Path, tag: str, history, svg: bool, files: List[Path]) -> None:
    n = len(history.train)
    if n == 0:
        return
    stride = max(1, -(-n // MAX_LOSS_ROWS))
    idx = np.arange(0, n, stride)
    path = plots / f"loss_{tag}.dat"
    write_columns(path, ["epoch", "train", "validation"],
                  [idx, np.asarray(history.train)[idx], np.asarray(history.validation)[idx]],
                  [f"{tag} losses, every {stride} epoch(s); best validation epoch {history.best_epoch}"])
    files.append(path)
    if svg:
        p = plots / f"loss_{tag}.svg"
        line_plot(p, [("train", idx, np.asarray(history.train)[idx]),
                      ("validation", idx, np.asarray(history.validation)[idx])],
                  "epoch", "loss", f"{tag} training", logy=True, vlines=[history.best_epoch])
        files.append(p)


def emit_report(ckpt, distilled, verdict: AnalysisVerdict, data: Sequence[StressSample], out_dir,
                baseline=None, svg: bool = True, dataset_name: str = "") -> List[Path]:
    """Write report.md plus plots/*.dat (and *.svg); returns every written path."""
    out = Path(out_dir)
    plots = out / PLOTS
    try:
        plots.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create report directory {plots}: {exc}") from None
    files: List[Path] = []
    model = ckpt.model
    psi1, psi2 = distilled.pair
    symbolic = ExpressionEnergy(psi1, psi2)

    _loss_files(plots, "pnam", ckpt.history, svg, files)
    if baseline is not None:
        _loss_files(plots, "baseline", baseline.history, svg, files)

    # Pareto fronts, value and derivative panels
    for name, front in distilled.fronts.items():
        sel = distilled.selections[name]
        rows = sel.rows
        path = plots / f"pareto_{name}.dat"
        write_columns(path, ["complexity", "mse", "derivative_mse", "selected"],
                      [[r.complexity for r in rows], [r.mse for r in rows], [r.grad_mse for r in rows],
                       [float(r.complexity == sel.complexity) for r in rows]],
                      [f"Pareto front for {name}; selection tau = {sel.tau:g}"])
        files.append(path)
        if svg:
            p = plots / f"pareto_{name}.svg"
            cx = [r.complexity for r in rows]
            line_plot(p, [("value mse", cx, [r.mse for r in rows]),
                          ("derivative mse", cx, [r.grad_mse for r in rows])],
                      "complexity", "mse", f"{name} front", logy=True, vlines=[sel.complexity])
            files.append(p)

    # shape-function overlays
    for k, name in ((1, "psi1"), (2, "psi2")):
        grid, val, slope = distilled.samples[name]
        e = distilled.selections[name].expression
        sv = evaluate(e, grid)
        sd = evaluate(diff_expr(e), grid)
        path = plots / f"shape_{name}.dat"
        write_columns(path, ["I", "network", "symbolic", "network_slope", "symbolic_slope"],
                      [grid, val, sv, slope, sd], [f"{name} shape function, network vs selected expression"])
        files.append(path)
        if svg:
            p = plots / f"shape_{name}.svg"
            line_plot(p, [("network", grid, val), ("symbolic", grid, sv)], f"I{k}", name, f"{name} overlay")
            files.append(p)
            p = plots / f"slope_{name}.svg"
            line_plot(p, [("network", grid, slope), ("symbolic", grid, sd)], f"I{k}", f"d{name}/dI{k}",
                      f"{name} derivative")
            files.append(p)

    # stress predictions with train/validation boundary
    split = ckpt.train_config.split_fraction
    train_set, _ = split_dataset(data, split)
    in_train = {(s.mode, s.lam) for s in train_set}
    predictors = {"network": model, "symbolic": symbolic}
    if baseline is not None:
        predictors["baseline"] = baseline.model
    for mode in LoadingMode:
        rows = sorted((s for s in data if s.mode is mode), key=lambda s: s.lam)
        if not rows:
            continue
        lam = np.array([s.lam for s in rows])
        boundary = max(s.lam for s in rows if (s.mode, s.lam) in in_train)
        dense = np.linspace(1.0, lam.max(), 200)
        cols = [lam, [s.p1 for s in rows]]
        names = ["lambda", "data"]
        curves = []
        for pname, pm in predictors.items():
            cols.append(predict_stress(pm, mode, lam)[0])
            names.append(pname)
            curves.append((pname, dense, predict_stress(pm, mode, dense)[0]))
        cols.append([0.0 if (s.mode, s.lam) in in_train else 1.0 for s in rows])
        names.append("validation")
        path = plots / f"stress_{mode.value}.dat"
        write_columns(path, names, cols, [f"{mode.value} nominal stress P11 (MPa)",
                                          f"train/validation boundary at lambda = {boundary:.6g}"])
        files.append(path)
        path = plots / f"stress_{mode.value}_curves.dat"
        write_columns(path, ["lambda"] + [c[0] for c in curves], [dense] + [c[2] for c in curves],
                      [f"{mode.value} predicted P11 (MPa) on a dense stretch grid"])
        files.append(path)
        if svg:
            p = plots / f"stress_{mode.value}.svg"
            line_plot(p, [("data", lam, cols[1])] + curves, "stretch", "P11 (MPa)", mode.value,
                      vlines=[boundary], markers=[True])
            files.append(p)

    # the report itself
    rows = {"network (PNAM)": model, "symbolic": symbolic}
    if baseline is not None:
        rows["baseline MLP"] = baseline.model
    counts = {m.value: sum(s.mode is m for s in data) for m in LoadingMode}
    lines = ["# Discovered hyperelastic energy", "",
             f"Dataset: {dataset_name or 'custom'} ({', '.join(f'{k} {v}' for k, v in counts.items())} samples). "
             f"Seed {ckpt.seed}. Training keeps the epoch with the lowest validation loss "
             f"(epoch {ckpt.history.best_epoch} of {len(ckpt.history.train)}).", "",
             "## Energy", "",
             "psi(C) = psi1(I1) + psi2(I2) - alpha0 * (I3 - 1) - psi0, with psi0 making psi vanish at C = I.", "",
             "| | display | complexity |", "|---|---|---:|",
             f"| psi1(I1) | `{display(psi1, 'I1')}` | {complexity(psi1)} |",
             f"| psi2(I2) | `{display(psi2, 'I2')}` | {complexity(psi2)} |", "",
             "Canonical form (17 significant digits, parseable):", "", "```",
             f"psi1 = {to_string(psi1, var='I1')}", f"psi2 = {to_string(psi2, var='I2')}",
             f"alpha0 = {verdict.stress_free.alpha0:.17g}", "```", "",
             "## R^2 of the nominal stress per loading mode", "",
             *r2_table(rows, data), "",
             *render_analysis(verdict),
             "## Files", ""]
    lines += [f"- `{p.relative_to(out).as_posix()}`" for p in files]
    report = out / REPORT
    report.write_text("\n".join(lines) + "\n")
    return [report] + files
