"""Command line entry point: ``pnamsr <subcommand>``.

Exit codes: 0 success, 1 user or configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from . import pipeline
from .analysis import AnalysisError, analyze_pair
from .bench import benchmark_inference
from .config import ConfigError, RunConfig, dump_config, load_config, save_config
from .dataio import CheckpointError, DatasetError
from .fixtures import FIXTURE_INTERVALS, composite_pair, treloar_pair
from .kinematics import LoadingMode
from .plots import write_columns
from .report import emit_report, render_analysis
from .symreg.expr import ParseError, display, parse
from .symreg.gp import SearchError
from .training import TrainingError, predict_stress

log = logging.getLogger("pnamsr")

USER_ERRORS = (ConfigError, DatasetError, CheckpointError, ParseError, FileNotFoundError, PermissionError)
NUMERIC_ERRORS = (TrainingError, SearchError, AnalysisError, FloatingPointError)


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    over = {}
    if args.seed is not None:
        over["seed"] = args.seed
    if args.out is not None:
        over["out_dir"] = args.out
    if args.dataset is not None:
        over["dataset"] = args.dataset
    cfg = dataclasses.replace(cfg, **over).seeded()
    if args.no_time_budget:
        cfg = cfg.without_time_budget()
    return cfg


def _out(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_fit(cfg, args):
    out = _out(cfg)
    save_config(out / pipeline.CONFIG, cfg)
    path, data = pipeline.dataset_for(cfg)
    ckpt, base = pipeline.fit_stage(cfg, data)
    pipeline.write_fit(out, ckpt, base)
    print(f"fit: {len(data)} samples from {path}; best validation epoch {ckpt.history.best_epoch}; "
          f"wrote {out / pipeline.CHECKPOINT}")


def cmd_distill(cfg, args):
    out = Path(cfg.out_dir)
    ckpt, _ = pipeline.load_run(out, cfg)
    d = pipeline.distill_stage(cfg, ckpt.model)
    pipeline.write_distilled(out, d)
    for name, sel in d.selections.items():
        print(f"{name}: complexity {sel.complexity}: {display(sel.expression)}")


def _parse_interval(text):
    lo, hi = (float(t) for t in text.split(","))
    return lo, hi


def cmd_analyze(cfg, args):
    if args.fixture or args.psi1:
        if args.fixture:
            pair = {"treloar": treloar_pair, "composite": composite_pair}[args.fixture]()
            iv1, iv2 = FIXTURE_INTERVALS[args.fixture]
        else:
            if not args.psi2:
                raise ConfigError("--psi1 needs --psi2")
            pair = (parse(args.psi1), parse(args.psi2))
            iv1 = iv2 = (3.0, 100.0)
        if args.interval1:
            iv1 = _parse_interval(args.interval1)
        if args.interval2:
            iv2 = _parse_interval(args.interval2)
        verdict = analyze_pair(pair[0], pair[1], iv1, iv2, cfg.analysis.n_grid)
        print("\n".join(render_analysis(verdict)))
        return
    out = Path(cfg.out_dir)
    ckpt, _ = pipeline.load_run(out, cfg)
    d = pipeline.read_distilled(out, cfg, ckpt.model)
    verdict = pipeline.analyze_stage(cfg, ckpt.model, d.pair)
    pipeline.write_analysis(out, verdict)
    print("\n".join(render_analysis(verdict)))


def cmd_predict(cfg, args):
    out = Path(cfg.out_dir)
    ckpt, _ = pipeline.load_run(out, cfg)
    parts = [float(t) for t in args.lambda_range.split(",")]
    if len(parts) not in (2, 3) or not 0 < parts[0] < parts[1]:
        raise ConfigError("--lambda-range expects lo,hi[,n] with 0 < lo < hi")
    lam = np.linspace(parts[0], parts[1], int(parts[2]) if len(parts) == 3 else 50)
    mode = LoadingMode(args.mode)
    p1, p3 = predict_stress(ckpt.model, mode, lam)
    names, cols = ["lambda", "p1_network"], [lam, p1]
    if (out / pipeline.EXPRESSIONS).exists():
        from .fixtures import ExpressionEnergy
        d = pipeline.read_distilled(out, cfg, ckpt.model)
        names.append("p1_symbolic")
        cols.append(predict_stress(ExpressionEnergy(*d.pair), mode, lam)[0])
    if p3 is not None:
        names.append("p3_network")
        cols.append(p3)
    target = Path(args.output) if args.output else Path("/dev/stdout")
    write_columns(target, names, cols, [f"{mode.value} nominal stress (MPa)"])


def cmd_report(cfg, args):
    out = Path(cfg.out_dir)
    ckpt, base = pipeline.load_run(out, cfg)
    path, data = pipeline.dataset_for(cfg)
    d = pipeline.read_distilled(out, cfg, ckpt.model)
    verdict = pipeline.analyze_stage(cfg, ckpt.model, d.pair)
    pipeline.write_analysis(out, verdict)
    files = emit_report(ckpt, d, verdict, data, out, baseline=base, svg=cfg.svg, dataset_name=path.name)
    print(f"report: {files[0]} ({len(files) - 1} plot files)")


def cmd_bench(cfg, args):
    out = Path(cfg.out_dir)
    ckpt, _ = pipeline.load_run(out, cfg)
    d = pipeline.read_distilled(out, cfg, ckpt.model)
    table = benchmark_inference(ckpt.model, d.pair, cfg.bench.n_points, cfg.bench.replicates, cfg.seed)
    lines = ["# Inference timing", "", f"{table.replicates} replicates per query count.", ""] + table.markdown()
    (out / "bench.md").write_text("\n".join(lines) + "\n")
    n = [r.n for r in table.rows]
    cols = [n]
    names = ["n"]
    for s in ("net_value", "net_grad", "sym_value", "sym_grad"):
        names += [f"{s}_mean", f"{s}_sd"]
        cols += [[r.mean[s] for r in table.rows], [r.sd[s] for r in table.rows]]
    write_columns(out / "bench.dat", names, cols, ["wall time in seconds"])
    print("\n".join(lines))


def cmd_run(cfg, args):
    _, d, verdict, files = pipeline.run_all(cfg)
    print(f"report: {files[0]}")


def cmd_config(cfg, args):
    sys.stdout.write(dump_config(cfg))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI run configuration")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory (overrides out_dir)")
    common.add_argument("--dataset", help="CSV dataset (overrides dataset)")
    common.add_argument("--no-time-budget", action="store_true", help="disable the search wall-clock cap")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="pnamsr", description="Discover and distill polyconvex hyperelastic energies.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("fit", parents=[common], help="train the additive ICNN model")
    sub.add_parser("distill", parents=[common], help="symbolic regression of both shape functions")
    a = sub.add_parser("analyze", parents=[common], help="convexity, monotonicity and growth checks")
    a.add_argument("--fixture", choices=["treloar", "composite"], help="analyze a bundled closed-form energy")
    a.add_argument("--psi1", help="expression in x for psi1")
    a.add_argument("--psi2", help="expression in x for psi2")
    a.add_argument("--interval1", help="lo,hi for the I1 checks")
    a.add_argument("--interval2", help="lo,hi for the I2 checks")
    pr = sub.add_parser("predict", parents=[common], help="stress predictions of a fitted model")
    pr.add_argument("--mode", required=True, choices=[m.value for m in LoadingMode])
    pr.add_argument("--lambda-range", required=True, help="lo,hi[,n]")
    pr.add_argument("--output", help="write columns here instead of stdout")
    sub.add_parser("report", parents=[common], help="markdown report and plot data")
    sub.add_parser("bench", parents=[common], help="network vs symbolic inference timing")
    sub.add_parser("run", parents=[common], help="fit, distill, analyze and report in one go")
    sub.add_parser("config", parents=[common], help="print the configuration with documented defaults")
    return p


COMMANDS = {"fit": cmd_fit, "distill": cmd_distill, "analyze": cmd_analyze, "predict": cmd_predict,
            "report": cmd_report, "bench": cmd_bench, "run": cmd_run, "config": cmd_config}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = _config(args)
        COMMANDS[args.command](cfg, args)
    except NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
