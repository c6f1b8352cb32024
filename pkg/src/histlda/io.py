"""CSV data files and the JSON model file."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .gibbs import FitConfig, FitResult
from .histogram import Histogram, Range
from .model import Collection

SCHEMA_VERSION = 1


class DataError(ValueError):
    """Malformed or out-of-range input data."""


def read_collection(path, rng: Range) -> Collection:
    """Read a headered ``unit_id,t`` CSV. Unit ids keep first-appearance order."""
    ids: dict[str, int] = {}
    ts, units = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["unit_id", "t"]:
            raise DataError("line 1: expected header 'unit_id,t'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise DataError(f"line {lineno}: expected 2 fields, got {len(row)}")
            uid, raw = row[0].strip(), row[1].strip()
            try:
                t = float(raw)
            except ValueError:
                raise DataError(f"line {lineno}: cannot parse t={raw!r}") from None
            if not rng.t0 <= t < rng.t1:
                raise DataError(f"line {lineno}: t={raw} outside [{rng.t0!r}, {rng.t1!r})")
            ts.append(t)
            units.append(ids.setdefault(uid, len(ids)))
    if not ts:
        raise DataError("no observations")
    return Collection(rng, np.array(ts), np.array(units), len(ids), tuple(ids))


def write_collection(path, c: Collection) -> None:
    ids = c.unit_ids or tuple(str(u) for u in range(c.n_units))
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["unit_id", "t"])
        for u, t in zip(c.unit, c.t):
            wr.writerow([ids[u], repr(float(t))])


@dataclass
class ModelFile:
    range: Range
    unit_ids: list[str]
    w_hat: list[int]
    phi_hat: list[list[float]]
    theta_hat: list[list[float]]
    alpha_hat: float
    beta_hat: float
    config: dict
    seed: int
    trace: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    @property
    def k(self) -> int:
        return len(self.w_hat)

    @classmethod
    def from_result(cls, result: FitResult, unit_ids) -> "ModelFile":
        cfg = result.config.to_dict() if result.config else {}
        return cls(
            range=result.range,
            unit_ids=list(unit_ids),
            w_hat=[int(w) for w in result.w_hat],
            phi_hat=[b.masses.tolist() for b in result.bases],
            theta_hat=result.theta_hat.tolist(),
            alpha_hat=float(result.alpha_hat),
            beta_hat=float(result.beta_hat),
            config=cfg,
            seed=int(cfg.get("seed", 0)),
            trace={
                "log_joint": result.log_joint_trace.tolist(),
                "w": result.w_trace.tolist(),
                "alpha": result.alpha_trace.tolist(),
                "beta": result.beta_trace.tolist(),
            },
        )

    def to_result(self) -> FitResult:
        cfg = FitConfig(**self.config) if self.config else None
        tr = self.trace
        return FitResult(
            theta_hat=np.array(self.theta_hat, dtype=np.float64).reshape(len(self.unit_ids), self.k),
            bases=tuple(Histogram(self.range, m) for m in self.phi_hat),
            alpha_hat=self.alpha_hat,
            beta_hat=self.beta_hat,
            log_joint_trace=np.array(tr.get("log_joint", []), dtype=np.float64),
            w_trace=np.array(tr.get("w", []), dtype=np.int64).reshape(-1, self.k),
            alpha_trace=np.array(tr.get("alpha", []), dtype=np.float64),
            beta_trace=np.array(tr.get("beta", []), dtype=np.float64),
            config=cfg,
        )

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "range": [self.range.t0, self.range.t1],
            "k": self.k,
            "unit_ids": self.unit_ids,
            "w_hat": self.w_hat,
            "phi_hat": self.phi_hat,
            "theta_hat": self.theta_hat,
            "alpha_hat": self.alpha_hat,
            "beta_hat": self.beta_hat,
            "config": self.config,
            "seed": self.seed,
            "trace": self.trace,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelFile":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise DataError(f"unsupported model schema {d.get('schema_version')!r}")
        out = cls(
            range=Range(*d["range"]),
            unit_ids=list(d["unit_ids"]),
            w_hat=[int(w) for w in d["w_hat"]],
            phi_hat=[[float(x) for x in row] for row in d["phi_hat"]],
            theta_hat=[[float(x) for x in row] for row in d["theta_hat"]],
            alpha_hat=float(d["alpha_hat"]),
            beta_hat=float(d["beta_hat"]),
            config=dict(d.get("config", {})),
            seed=int(d.get("seed", 0)),
            trace=dict(d.get("trace", {})),
        )
        if out.k != d.get("k", out.k) or any(len(p) != w for p, w in zip(out.phi_hat, out.w_hat)):
            raise DataError("model file is internally inconsistent")
        return out


def model_json(model: ModelFile) -> str:
    # json writes floats with repr, which round-trips every double exactly
    return json.dumps(model.to_dict(), sort_keys=True, indent=1) + "\n"


def save_model(path, model: ModelFile) -> None:
    Path(path).write_text(model_json(model))


def load_model(path) -> ModelFile:
    try:
        return ModelFile.from_dict(json.loads(Path(path).read_text()))
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise DataError(f"malformed model file: {exc}") from exc
