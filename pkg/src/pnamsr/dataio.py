"""Dataset CSV parsing, model checkpoints and Pareto-front files."""

from __future__ import annotations

import csv
import json
import re
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .icnn import IcnnParams
from .kinematics import LoadingMode
from .pnam import AffineScaler, BaselineMlp, PnamModel
from .symreg.expr import parse, to_string
from .symreg.gp import ParetoFront
from .training import StressSample, TrainConfig, TrainHistory

CHECKPOINT_VERSION = 1
HEADER = ["mode", "lambda", "p1", "p3"]


class DatasetError(ValueError):
    pass


class CheckpointError(ValueError):
    pass


# -- datasets -----------------------------------------------------------------


def bundled_dataset(name: str = "treloar.csv") -> Path:
    return Path(str(resources.files("pnamsr") / "data" / name))


def read_header_counts(path) -> Dict[LoadingMode, int]:
    """Per-mode row counts declared in a ``# counts: UE=.. EBE=..`` comment."""
    for line in Path(path).read_text().splitlines():
        if line.startswith("#") and "counts:" in line:
            pairs = re.findall(r"(\w+)=(\d+)", line.split("counts:", 1)[1])
            return {LoadingMode(k): int(v) for k, v in pairs}
    return {}


def load_dataset(path) -> List[StressSample]:
    """Parse ``mode,lambda,p1,p3`` rows (stress in MPa). ``#`` lines are comments."""
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"dataset not found: {path}")
    samples = []
    header_seen = False
    with path.open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
                continue
            row = [c.strip() for c in row]
            if not header_seen:
                if row != HEADER:
                    raise DatasetError(f"{path}:{lineno}: expected header {','.join(HEADER)}, got {','.join(row)}")
                header_seen = True
                continue
            if len(row) != 4:
                raise DatasetError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
            mode_s, lam_s, p1_s, p3_s = row
            try:
                mode = LoadingMode(mode_s)
            except ValueError:
                raise DatasetError(f"{path}:{lineno}: unknown loading mode {mode_s!r}") from None
            try:
                lam, p1 = float(lam_s), float(p1_s)
                p3 = float(p3_s) if p3_s else None
            except ValueError:
                raise DatasetError(f"{path}:{lineno}: non-numeric value") from None
            if p3 is not None and mode is not LoadingMode.PS:
                raise DatasetError(f"{path}:{lineno}: p3 is only defined for PS rows")
            if not (np.isfinite(lam) and np.isfinite(p1) and (p3 is None or np.isfinite(p3))):
                raise DatasetError(f"{path}:{lineno}: non-finite value")
            try:
                samples.append(StressSample(mode, lam, p1, p3))
            except ValueError as exc:
                raise DatasetError(f"{path}:{lineno}: {exc}") from None
    if not header_seen:
        raise DatasetError(f"{path}: missing header line")
    if not samples:
        raise DatasetError(f"{path}: no data rows")
    return samples


def write_dataset(path, samples: Sequence[StressSample], comments: Sequence[str] = ()) -> None:
    lines = [f"# {c}" for c in comments] + [",".join(HEADER)]
    for s in samples:
        p3 = "" if s.p3 is None else repr(float(s.p3))
        lines.append(f"{s.mode.value},{float(s.lam)!r},{float(s.p1)!r},{p3}")
    Path(path).write_text("\n".join(lines) + "\n")


# -- checkpoints ----------------------------------------------------------------


@dataclass
class Checkpoint:
    model: object
    train_config: TrainConfig
    history: TrainHistory = field(default_factory=TrainHistory)
    seed: int = 0
    version: int = CHECKPOINT_VERSION


def _floats(a) -> list:
    return [float(v) for v in np.asarray(a, dtype=float).ravel()]


def _net_dict(p: IcnnParams) -> dict:
    return {"v0_raw": _floats(p.v0_raw), "b0": _floats(p.b0), "w1_raw": _floats(p.w1_raw),
            "v1_raw": float(p.v1_raw), "b1": float(p.b1)}


def _net_from(d: dict) -> IcnnParams:
    return IcnnParams(np.array(d["v0_raw"], dtype=float), np.array(d["b0"], dtype=float),
                      np.array(d["w1_raw"], dtype=float), float(d["v1_raw"]), float(d["b1"]))


def model_to_dict(model) -> dict:
    common = {"kind": model.kind, "scaler1": [model.scaler1.m, model.scaler1.M],
              "scaler2": [model.scaler2.m, model.scaler2.M], "stress_scale": float(model.stress_scale)}
    if isinstance(model, PnamModel):
        return {**common, "net1": _net_dict(model.net1), "net2": _net_dict(model.net2)}
    if isinstance(model, BaselineMlp):
        return {**common, "width": model.width, "W": _floats(model.W), "b": _floats(model.b),
                "w": _floats(model.w), "c": float(model.c)}
    raise TypeError(f"cannot serialize {type(model).__name__}")


def model_from_dict(d: dict):
    sc1 = AffineScaler(*(float(v) for v in d["scaler1"]))
    sc2 = AffineScaler(*(float(v) for v in d["scaler2"]))
    if d["kind"] == "pnam":
        return PnamModel(_net_from(d["net1"]), _net_from(d["net2"]), sc1, sc2, float(d["stress_scale"]))
    if d["kind"] == "mlp":
        h = int(d["width"])
        return BaselineMlp(np.array(d["W"], dtype=float).reshape(h, 2), np.array(d["b"], dtype=float),
                           np.array(d["w"], dtype=float), float(d["c"]), sc1, sc2, float(d["stress_scale"]))
    raise CheckpointError(f"unknown model kind {d['kind']!r}")


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True, allow_nan=False) + "\n"


def save_checkpoint(path, ckpt: Checkpoint) -> None:
    payload = {
        "format_version": ckpt.version,
        "seed": int(ckpt.seed),
        "train_config": asdict(ckpt.train_config),
        "history": {"train": _floats(ckpt.history.train), "validation": _floats(ckpt.history.validation),
                    "best_epoch": int(ckpt.history.best_epoch)},
        "model": model_to_dict(ckpt.model),
    }
    Path(path).write_text(_dump(payload))


def load_checkpoint(path) -> Checkpoint:
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except FileNotFoundError:
        raise CheckpointError(f"checkpoint not found: {path}") from None
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CheckpointError(f"{path}: corrupt checkpoint ({exc})") from None
    if not isinstance(payload, dict) or "format_version" not in payload:
        raise CheckpointError(f"{path}: not a checkpoint file")
    if payload["format_version"] != CHECKPOINT_VERSION:
        raise CheckpointError(f"{path}: checkpoint format {payload['format_version']} is incompatible "
                              f"with this version (expects {CHECKPOINT_VERSION})")
    try:
        h = payload["history"]
        history = TrainHistory(list(h["train"]), list(h["validation"]), int(h["best_epoch"]))
        return Checkpoint(model_from_dict(payload["model"]), TrainConfig(**payload["train_config"]),
                          history, int(payload["seed"]), payload["format_version"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"{path}: corrupt checkpoint ({exc!r})") from None


# -- distilled expressions --------------------------------------------------------


def front_to_list(front: ParetoFront) -> list:
    return [{"complexity": c, "expression": to_string(e), "mse": float(m)} for c, (e, m) in front.items()]


def front_from_list(rows: list) -> ParetoFront:
    front = ParetoFront()
    for r in rows:
        front.entries[int(r["complexity"])] = (parse(r["expression"]), float(r["mse"]))
    front.entries = dict(sorted(front.entries.items()))
    return front


def save_distilled(path, fronts: Dict[str, ParetoFront], selected: Dict[str, str],
                   ranges: Optional[Dict[str, list]] = None) -> None:
    payload = {"fronts": {k: front_to_list(f) for k, f in fronts.items()}, "selected": selected,
               "sample_ranges": ranges or {}}
    Path(path).write_text(_dump(payload))


def load_distilled(path):
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
        fronts = {k: front_from_list(v) for k, v in payload["fronts"].items()}
        selected = {k: parse(v) for k, v in payload["selected"].items()}
    except FileNotFoundError:
        raise CheckpointError(f"distilled expressions not found: {path}") from None
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"{path}: corrupt expression file ({exc})") from None
    return fronts, selected, payload.get("sample_ranges", {})
