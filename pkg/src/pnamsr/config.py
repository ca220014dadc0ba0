"""Run configuration: one INI file with a section per pipeline stage.

``dump_config`` writes every key with a comment stating its meaning, so
``pnamsr config`` output doubles as the reference for the defaults.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple

from .symreg.gp import GpConfig
from .training import TrainConfig


class ConfigError(ValueError):
    pass


@dataclass
class SelectConfig:
    tau: float = 1.5
    value_tol: float = 0.0
    grad_tol: float = 0.0
    n_samples: int = 500
    widen: float = 0.0


@dataclass
class AnalysisConfig:
    interval1: Optional[Tuple[float, float]] = None
    interval2: Optional[Tuple[float, float]] = None
    n_grid: int = 2000


@dataclass
class BenchConfig:
    n_points: Tuple[int, ...] = (100, 1000, 10000, 100000)
    replicates: int = 20


@dataclass
class RunConfig:
    seed: int = 0
    dataset: str = ""
    out_dir: str = "run"
    baseline: bool = True
    parallel: bool = True
    svg: bool = True
    train: TrainConfig = field(default_factory=lambda: TrainConfig(stress_scale=0.05))
    gp1: GpConfig = field(default_factory=GpConfig)
    gp2: GpConfig = field(default_factory=GpConfig)
    select: SelectConfig = field(default_factory=SelectConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    bench: BenchConfig = field(default_factory=BenchConfig)

    def seeded(self) -> "RunConfig":
        """Copy with every stage seed derived from ``seed``."""
        return dataclasses.replace(
            self,
            train=dataclasses.replace(self.train, seed=self.seed),
            gp1=dataclasses.replace(self.gp1, seed=2 * self.seed + 1),
            gp2=dataclasses.replace(self.gp2, seed=2 * self.seed + 2),
        )

    def without_time_budget(self) -> "RunConfig":
        return dataclasses.replace(self, gp1=dataclasses.replace(self.gp1, time_budget=None),
                                   gp2=dataclasses.replace(self.gp2, time_budget=None))


DOCS = {
    "run": {
        "seed": "master seed; training uses it directly, the two searches use 2*seed+1 and 2*seed+2",
        "dataset": "CSV with header mode,lambda,p1,p3 (MPa); empty means the bundled Treloar data",
        "out_dir": "directory for checkpoint, expressions, report and plot data",
        "baseline": "also train the unconstrained two-input MLP for comparison",
        "parallel": "run the two symbolic searches in two worker processes",
        "svg": "write SVG line plots next to the plot-data files",
    },
    "train": {
        "learning_rate": "ADAM step size",
        "epochs": "full-batch epochs; parameters with the lowest validation loss are kept",
        "split_fraction": "per mode, the lowest-stretch fraction used for training (rest validates)",
        "stress_scale": "multiplier applied to stresses before the loss (0.05 suits the Treloar data)",
        "width": "hidden units per shape-function network",
    },
    "gp": {
        "binary": "binary operators (add, mul)",
        "unary": "unary operators (exp, ln); empty for none",
        "max_size": "node-count cap",
        "max_depth": "depth cap",
        "population": "individuals per generation",
        "tournament": "tournament size",
        "p_crossover": "crossover probability",
        "p_mutation": "mutation probability (remainder is reproduction)",
        "iterations": "generation cap",
        "time_budget": "wall-clock cap in seconds; none disables it",
        "nested_unary_ban": "forbid unary operators inside unary operators",
        "init_depth": "maximum depth of initial random trees",
        "refine_top": "individuals per generation whose constants are refined",
        "jitter_sigma": "relative size of constant-jitter mutations",
        "max_retries": "attempts to draw a valid offspring before copying the parent",
    },
    "select": {
        "tau": "accept a front entry within tau times the best value and derivative mse",
        "value_tol": "absolute value-mse below which an entry always passes",
        "grad_tol": "absolute derivative-mse below which an entry always passes",
        "n_samples": "shape-function samples handed to each search",
        "widen": "fraction by which the sampling range is widened beyond the training range",
    },
    "analysis": {
        "interval1": "lo,hi for the I1 checks; auto means the training range (lo at least 2)",
        "interval2": "lo,hi for the I2 checks; auto means the training range (lo at least 2)",
        "n_grid": "grid points for sampled convexity and monotonicity",
    },
    "bench": {
        "n_points": "query counts to time",
        "replicates": "replicates per query count, each with its own seed",
    },
}

_SECTIONS = {"train": "train", "gp.psi1": "gp1", "gp.psi2": "gp2", "select": "select",
             "analysis": "analysis", "bench": "bench"}


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ",".join(_fmt(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse_value(text: str, default, name: str):
    text = text.strip()
    try:
        if isinstance(default, bool):
            low = text.lower()
            if low not in ("true", "false", "yes", "no", "1", "0"):
                raise ValueError(text)
            return low in ("true", "yes", "1")
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float) or (default is None and name == "time_budget"):
            return None if text.lower() == "none" else float(text)
        if isinstance(default, str):
            return text
        if isinstance(default, tuple) or name in ("interval1", "interval2"):
            if name in ("interval1", "interval2"):
                if text.lower() == "auto":
                    return None
                lo, hi = (float(t) for t in text.split(","))
                return (lo, hi)
            items = [t.strip() for t in text.split(",") if t.strip()]
            if name == "n_points":
                return tuple(int(t) for t in items)
            return tuple(items)
    except ValueError:
        raise ConfigError(f"bad value for {name}: {text!r}") from None
    raise ConfigError(f"unsupported key {name}")


def _section_fields(obj):
    return [f for f in dataclasses.fields(obj) if f.name != "seed"]


def load_config(path) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        read = parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if not read:
        raise ConfigError(f"config file not found: {path}")
    cfg = RunConfig()
    for section in parser.sections():
        if section == "run":
            target, attr = cfg, None
        elif section in _SECTIONS:
            attr = _SECTIONS[section]
            target = getattr(cfg, attr)
        else:
            raise ConfigError(f"{path}: unknown section [{section}]")
        known = {f.name: f for f in dataclasses.fields(target)}
        updates = {}
        for key, text in parser.items(section):
            if key not in known or (section != "run" and key == "seed") or key in _SECTIONS.values():
                raise ConfigError(f"{path}: unknown key {key!r} in [{section}]")
            updates[key] = _parse_value(text, getattr(target, key), key)
        try:
            new = dataclasses.replace(target, **updates)
        except ValueError as exc:
            raise ConfigError(f"{path}: [{section}] {exc}") from None
        if attr is None:
            cfg = new
        else:
            cfg = dataclasses.replace(cfg, **{attr: new})
    return cfg


def dump_config(cfg: RunConfig, comments: bool = True) -> str:
    lines = []

    def section(name, obj, keys, doc):
        lines.append(f"[{name}]")
        for k in keys:
            if comments:
                lines.append(f"# {doc[k]}")
            v = getattr(obj, k)
            text = "auto" if v is None and k.startswith("interval") else _fmt(v)
            lines.append(f"{k} = {text}")
        lines.append("")

    section("run", cfg, list(DOCS["run"]), DOCS["run"])
    for name, attr in _SECTIONS.items():
        obj = getattr(cfg, attr)
        doc = DOCS["gp" if attr.startswith("gp") else attr]
        section(name, obj, [f.name for f in _section_fields(obj)], doc)
    return "\n".join(lines)


def save_config(path, cfg: RunConfig) -> None:
    Path(path).write_text(dump_config(cfg))
