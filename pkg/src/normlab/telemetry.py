"""Per-step training telemetry and its CSV/JSONL serialization.

One record per (step, group) captures weight magnitude, spread, effective
learning rate, the running maximum of the reciprocal magnitude statistic,
batch loss/accuracy, and an overflow flag. The reciprocal statistic is
1/norm for length-normalized groups and 1/std for standardized ones; its
running maximum is tracked jointly over all groups (the value written to
records) and per group for diagnosis. Floats serialize with 17 significant
digits so a round-trip is lossless.
"""

from __future__ import annotations

import csv
import json
import math
import subprocess
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path

from .exceptions import NormlabError
from .model import effective_lr

__all__ = [
    "TelemetryRecord", "TelemetryLog", "GroupStats", "observe_groups", "RunManifest",
    "export", "read_csv", "read_jsonl",
    "telemetry_path", "manifest_path", "code_revision",
]

CSV_FIELDS = ["step", "group_id", "norm", "std", "eff_lr", "recip_max",
              "loss", "train_acc", "overflow"]


@dataclass
class TelemetryRecord:
    step: int
    group_id: str
    norm: float
    std: float
    eff_lr: float
    recip_max: float
    loss: float
    train_acc: float
    overflow: bool


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass
class GroupStats:
    group_id: str
    norm: float
    std: float
    eff_lr: float
    recip: float

    @property
    def finite(self) -> bool:
        return all(map(math.isfinite, (self.norm, self.std, self.eff_lr, self.recip)))


def observe_groups(groups, eta_t) -> list[GroupStats]:
    """Per-group monitored quantities for one step.

    The reciprocal basis is the std for standardized groups and the norm
    for everything else; a zero basis yields an infinite reciprocal, which
    downstream logic treats as an overflow signal.
    """
    out = []
    for g in groups:
        norm = g.norm
        _, std = g.mean_std
        basis = std if g.kind.family == "ws" else norm
        recip = 1.0 / basis if basis > 0.0 else math.inf
        try:
            elr = effective_lr(g, eta_t)
        except NormlabError:
            elr = math.inf
        out.append(GroupStats(g.group_id, norm, std, elr, recip))
    return out


class TelemetryLog:
    """Collects records for one run; the stream terminates permanently on
    the first overflow record. Thinning via record_every only drops row
    emission; the running maxima and the overflow check see every step."""

    def __init__(self, record_every: int = 1):
        if record_every < 1:
            raise ValueError("record_every must be >= 1")
        self.record_every = record_every
        self.records: list[TelemetryRecord] = []
        self.recip_max = 0.0
        self.per_group_recip_max: dict[str, float] = {}
        self.terminated = False

    def record_step(self, step, stats, loss, train_acc, force=False,
                    declare_overflow=False):
        """Ingest one step's GroupStats; returns True when every monitored
        quantity was finite and no overflow was declared by the caller."""
        if self.terminated:
            raise NormlabError("telemetry stream already terminated by overflow")
        overflow = declare_overflow or not (math.isfinite(loss) and math.isfinite(train_acc))
        for s in stats:
            gmax = self.per_group_recip_max.get(s.group_id, 0.0)
            self.per_group_recip_max[s.group_id] = max(gmax, s.recip)
            self.recip_max = max(self.recip_max, s.recip)
            if not s.finite:
                overflow = True
        if force or overflow or (step % self.record_every == 0):
            for s in stats:
                self.records.append(TelemetryRecord(
                    step=step, group_id=s.group_id, norm=s.norm, std=s.std,
                    eff_lr=s.eff_lr, recip_max=self.recip_max,
                    loss=loss, train_acc=train_acc, overflow=overflow,
                ))
        if overflow:
            self.terminated = True
        return not overflow


@dataclass
class RunManifest:
    run_id: str
    seed: int
    config_digest: str
    started_at: str
    code_revision: str
    outcome: str = "completed"            # completed | overflowed | diverged
    overflow_step: int | None = None

    def write(self, path):
        Path(path).write_text(json.dumps(asdict(self), indent=2) + "\n")


def code_revision() -> str:
    try:
        out = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            capture_output=True, text=True, timeout=5, check=False,
        )
        rev = out.stdout.strip()
        return rev if out.returncode == 0 and rev else "unknown"
    except OSError:
        return "unknown"


def now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


def telemetry_path(out_dir, run_id: str, fmt: str) -> Path:
    return Path(out_dir) / f"{run_id}.telemetry.{fmt}"


def manifest_path(out_dir, run_id: str) -> Path:
    return Path(out_dir) / f"{run_id}.manifest.json"


def export(records, fmt: str, path):
    """Write records as 'csv' (fixed header) or 'jsonl' (one object per line)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_FIELDS)
            for r in records:
                writer.writerow([
                    r.step, r.group_id, _fmt(r.norm), _fmt(r.std), _fmt(r.eff_lr),
                    _fmt(r.recip_max), _fmt(r.loss), _fmt(r.train_acc),
                    "true" if r.overflow else "false",
                ])
    elif fmt == "jsonl":
        with open(path, "w") as fh:
            for r in records:
                obj = {
                    "step": r.step, "group_id": r.group_id,
                    "norm": float(_fmt(r.norm)), "std": float(_fmt(r.std)),
                    "eff_lr": float(_fmt(r.eff_lr)), "recip_max": float(_fmt(r.recip_max)),
                    "loss": float(_fmt(r.loss)), "train_acc": float(_fmt(r.train_acc)),
                    "overflow": r.overflow,
                }
                fh.write(json.dumps(obj) + "\n")
    else:
        raise ValueError(f"unknown telemetry format '{fmt}'")
    return path


def _record_from_fields(step, group_id, norm, std, eff_lr, recip_max, loss, train_acc, overflow):
    return TelemetryRecord(int(step), str(group_id), float(norm), float(std),
                           float(eff_lr), float(recip_max), float(loss),
                           float(train_acc), overflow)


def read_csv(path) -> list[TelemetryRecord]:
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_FIELDS:
            raise NormlabError(f"unexpected telemetry header in {path}")
        for row in reader:
            out.append(_record_from_fields(
                row["step"], row["group_id"], row["norm"], row["std"], row["eff_lr"],
                row["recip_max"], row["loss"], row["train_acc"],
                row["overflow"] == "true",
            ))
    return out


def read_jsonl(path) -> list[TelemetryRecord]:
    out = []
    with open(path) as fh:
        for line in fh:
            obj = json.loads(line)
            out.append(_record_from_fields(
                obj["step"], obj["group_id"], obj["norm"], obj["std"], obj["eff_lr"],
                obj["recip_max"], obj["loss"], obj["train_acc"], bool(obj["overflow"]),
            ))
    return out
