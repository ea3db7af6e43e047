"""Deterministic synthetic datasets and tabular/IDX file ingestion.

Materialization is a pure function of the spec: generated data is split
80/20 by a seeded shuffle, and features are standardized per column with
statistics fitted on the train split only. Labels come out as 0-based
contiguous integers; any remapping is reported in the returned metadata.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data_idx import read_idx_images, read_idx_labels
from .exceptions import ConfigurationError, DataFormatError
from .linalg import RngStream
from .model import Batch

__all__ = [
    "Blobs", "TwoMoons", "CsvFile", "IdxPair", "DatasetSpec",
    "materialize", "dataset_from_config",
]

TRAIN_FRACTION = 0.8


@dataclass(frozen=True)
class Blobs:
    classes: int = 3
    dim: int = 2
    points_per_class: int = 200
    spread: float = 0.5
    seed: int = 0


@dataclass(frozen=True)
class TwoMoons:
    points: int = 400
    noise: float = 0.1
    seed: int = 0


@dataclass(frozen=True)
class CsvFile:
    path: str
    label_column: str


@dataclass(frozen=True)
class IdxPair:
    images_path: str
    labels_path: str
    subset_size: int | None = None


DatasetSpec = Blobs | TwoMoons | CsvFile | IdxPair


def _blob_points(spec: Blobs):
    rng = RngStream(spec.seed, lane=7)
    # Class centers on a circle of radius 3 in the first two dims, zero
    # elsewhere; deterministic given the class count.
    angles = 2.0 * np.pi * np.arange(spec.classes) / spec.classes
    centers = np.zeros((spec.classes, spec.dim))
    centers[:, 0] = 3.0 * np.cos(angles)
    if spec.dim > 1:
        centers[:, 1] = 3.0 * np.sin(angles)
    xs, ys = [], []
    for c in range(spec.classes):
        pts = centers[c] + rng.normal((spec.points_per_class, spec.dim), std=1.0) * spec.spread
        xs.append(pts)
        ys.append(np.full(spec.points_per_class, c, dtype=np.int64))
    return np.vstack(xs), np.concatenate(ys)


def _two_moons_points(spec: TwoMoons):
    rng = RngStream(spec.seed, lane=7)
    n1 = spec.points // 2
    n2 = spec.points - n1
    t1 = np.pi * rng.uniform(0.0, 1.0, n1)
    t2 = np.pi * rng.uniform(0.0, 1.0, n2)
    x1 = np.stack([np.cos(t1), np.sin(t1)], axis=1)
    x2 = np.stack([1.0 - np.cos(t2), 0.5 - np.sin(t2)], axis=1)
    x = np.vstack([x1, x2]) + rng.normal((spec.points, 2), std=1.0) * spec.noise
    y = np.concatenate([np.zeros(n1, dtype=np.int64), np.ones(n2, dtype=np.int64)])
    return x, y


def _read_csv(spec: CsvFile):
    path = Path(spec.path)
    if not path.exists():
        raise ConfigurationError(f"dataset file not found: {path}")
    rows = []
    labels_raw = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty CSV") from None
        header = [h.strip() for h in header]
        if spec.label_column not in header:
            raise DataFormatError(f"{path}: no column named '{spec.label_column}'")
        label_idx = header.index(spec.label_column)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataFormatError(f"{path}: line {lineno}: expected {len(header)} cells, got {len(row)}")
            feats = []
            for col, cell in enumerate(row):
                if col == label_idx:
                    continue
                try:
                    feats.append(float(cell))
                except ValueError:
                    raise DataFormatError(
                        f"{path}: line {lineno}: non-numeric cell '{cell.strip()}' in column '{header[col]}'"
                    ) from None
            rows.append(feats)
            labels_raw.append(row[label_idx].strip())
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    x = np.asarray(rows, dtype=np.float64)
    return x, labels_raw


def _read_idx(spec: IdxPair):
    images = read_idx_images(spec.images_path)
    labels = read_idx_labels(spec.labels_path)
    if images.shape[0] != labels.shape[0]:
        raise DataFormatError(
            f"image count {images.shape[0]} != label count {labels.shape[0]}")
    if spec.subset_size is not None:
        images = images[: spec.subset_size]
        labels = labels[: spec.subset_size]
    x = images.reshape(images.shape[0], -1).astype(np.float64)
    return x, [str(int(v)) for v in labels]


def _remap_labels(labels_raw):
    uniq = sorted(set(labels_raw))
    mapping = {lab: i for i, lab in enumerate(uniq)}
    y = np.asarray([mapping[lab] for lab in labels_raw], dtype=np.int64)
    return y, mapping


def materialize(spec: DatasetSpec):
    """Produce (train, validation, meta) for a dataset spec.

    meta holds the label mapping (file-backed data), the split seed, and
    the train-fitted standardization parameters.
    """
    mapping = None
    if isinstance(spec, Blobs):
        x, y = _blob_points(spec)
        seed = spec.seed
    elif isinstance(spec, TwoMoons):
        x, y = _two_moons_points(spec)
        seed = spec.seed
    elif isinstance(spec, CsvFile):
        x, labels_raw = _read_csv(spec)
        y, mapping = _remap_labels(labels_raw)
        seed = 0
    elif isinstance(spec, IdxPair):
        x, labels_raw = _read_idx(spec)
        y, mapping = _remap_labels(labels_raw)
        seed = 0
    else:
        raise ConfigurationError(f"unknown dataset spec {spec!r}")

    order = RngStream(seed, lane=11).permutation(x.shape[0])
    x, y = x[order], y[order]
    n_train = int(round(TRAIN_FRACTION * x.shape[0]))
    n_train = min(max(n_train, 1), x.shape[0] - 1) if x.shape[0] > 1 else x.shape[0]
    x_train, x_val = x[:n_train], x[n_train:]
    y_train, y_val = y[:n_train], y[n_train:]

    mean = x_train.mean(axis=0)
    std = x_train.std(axis=0)
    safe_std = np.where(std > 0.0, std, 1.0)
    x_train = (x_train - mean) / safe_std
    x_val = (x_val - mean) / safe_std

    meta = {
        "label_mapping": mapping,
        "split_seed": seed,
        "feature_mean": mean,
        "feature_std": std,
    }
    return Batch(x_train, y_train), Batch(x_val, y_val), meta


def dataset_from_config(cfg: dict) -> DatasetSpec:
    kind = cfg.get("type")
    if kind == "blobs":
        return Blobs(
            classes=int(cfg.get("classes", 3)),
            dim=int(cfg.get("dim", 2)),
            points_per_class=int(cfg.get("points_per_class", 200)),
            spread=float(cfg.get("spread", 0.5)),
            seed=int(cfg.get("seed", 0)),
        )
    if kind == "two_moons":
        return TwoMoons(
            points=int(cfg.get("points", 400)),
            noise=float(cfg.get("noise", 0.1)),
            seed=int(cfg.get("seed", 0)),
        )
    if kind == "csv":
        if "path" not in cfg or "label_column" not in cfg:
            raise ConfigurationError("csv dataset needs 'path' and 'label_column'")
        return CsvFile(path=cfg["path"], label_column=cfg["label_column"])
    if kind == "idx":
        if "images_path" not in cfg or "labels_path" not in cfg:
            raise ConfigurationError("idx dataset needs 'images_path' and 'labels_path'")
        subset = cfg.get("subset_size")
        return IdxPair(cfg["images_path"], cfg["labels_path"],
                       None if subset is None else int(subset))
    raise ConfigurationError(f"unknown dataset type '{kind}'")
