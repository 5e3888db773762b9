"""Data model for recorded model outputs.

A :class:`PredictionRecord` holds everything the toolkit knows about one
input: the model's output samples, an optional ground truth, and split and
source tags. Classification outputs are per-class probability rows (one row
per sample), regression outputs are scalars or (mean, variance) pairs. A
:class:`Dataset` is an immutable bag of records plus free-form metadata.

Records are validated lazily: :func:`validate_dataset` reports violations as
data instead of raising, so callers can inspect defective files.
"""

from __future__ import annotations

import dataclasses
from types import MappingProxyType
from typing import NamedTuple

import numpy as np

CLASSIFICATION = "classification"
REGRESSION = "regression"
TASKS = (CLASSIFICATION, REGRESSION)
SPLITS = ("train", "validation", "test")

# Exported softmax rows rarely sum to exactly 1 in float32.
SUM_TOLERANCE = 1e-4


@dataclasses.dataclass(frozen=True, eq=False)
class PredictionRecord:
    """One input's recorded outputs.

    ``outputs`` shapes: (T, C) class distributions for classification,
    (T,) scalars or (T, 2) mean/variance pairs for regression. T = 1 for
    point predictors, T >= 2 for sampled models.
    """

    input_id: str
    outputs: np.ndarray
    task: str = CLASSIFICATION
    ground_truth: int | float | None = None
    split: str = "test"
    source: str = "nominal"

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}")
        arr = np.asarray(self.outputs, dtype=float)
        if arr.size == 0:
            raise ValueError(f"record {self.input_id!r}: outputs are empty")
        if self.task == CLASSIFICATION:
            if arr.ndim != 2:
                raise ValueError(
                    f"record {self.input_id!r}: classification outputs must be "
                    f"(samples, classes), got shape {arr.shape}")
        else:
            if arr.ndim not in (1, 2) or (arr.ndim == 2 and arr.shape[1] != 2):
                raise ValueError(
                    f"record {self.input_id!r}: regression outputs must be "
                    f"scalars or (mean, variance) pairs, got shape {arr.shape}")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "outputs", arr)

    @property
    def num_samples(self) -> int:
        return self.outputs.shape[0]

    @property
    def num_classes(self) -> int | None:
        if self.task == CLASSIFICATION:
            return self.outputs.shape[1]
        return None

    @property
    def has_variance_channel(self) -> bool:
        return self.task == REGRESSION and self.outputs.ndim == 2


@dataclasses.dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable collection of records with free-form string metadata."""

    records: tuple[PredictionRecord, ...]
    metadata: MappingProxyType

    def __init__(self, records, metadata=None):
        object.__setattr__(self, "records", tuple(records))
        object.__setattr__(
            self, "metadata", MappingProxyType(dict(metadata or {})))

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


class Violation(NamedTuple):
    """One failed invariant, tied to the record that failed it."""

    input_id: str
    message: str

    def __str__(self):
        return f"{self.input_id}: {self.message}"


def validate_dataset(d: Dataset, sum_tolerance: float = SUM_TOLERANCE):
    """Check every record invariant; returns a list of Violations.

    An empty list means the dataset is valid. Checks per record: finite
    entries, probability rows in [0, 1] summing to 1 within tolerance,
    at least two classes, non-negative variance channels, ground truth in
    range, known split. Dataset-wide: unique input ids and a single class
    count across classification records.
    """
    violations = []
    seen_ids = set()
    num_classes = None
    for r in d.records:
        if r.input_id in seen_ids:
            violations.append(Violation(r.input_id, "duplicate input_id"))
        seen_ids.add(r.input_id)
        if r.split not in SPLITS:
            violations.append(Violation(
                r.input_id, f"unknown split {r.split!r}"))
        if not np.isfinite(r.outputs).all():
            violations.append(Violation(r.input_id, "non-finite output value"))
            continue
        if r.task == CLASSIFICATION:
            if r.num_classes < 2:
                violations.append(Violation(
                    r.input_id, f"needs >= 2 classes, got {r.num_classes}"))
            if num_classes is None:
                num_classes = r.num_classes
            elif r.num_classes != num_classes:
                violations.append(Violation(
                    r.input_id,
                    f"{r.num_classes} classes, dataset has {num_classes}"))
            if (r.outputs < 0).any() or (r.outputs > 1).any():
                violations.append(Violation(
                    r.input_id, "probability outside [0, 1]"))
            sums = r.outputs.sum(axis=1)
            bad = np.nonzero(np.abs(sums - 1.0) > sum_tolerance)[0]
            if bad.size:
                violations.append(Violation(
                    r.input_id,
                    f"sample {bad[0]} sums to {sums[bad[0]]:.6g}, "
                    f"exceeds tolerance {sum_tolerance:g}"))
            if r.ground_truth is not None:
                gt = r.ground_truth
                try:
                    ok = gt == int(gt) and 0 <= int(gt) < r.num_classes
                except (TypeError, ValueError):
                    ok = False
                if not ok:
                    violations.append(Violation(
                        r.input_id,
                        f"ground truth {gt!r} not a class index in "
                        f"[0, {r.num_classes})"))
        else:
            if r.has_variance_channel and (r.outputs[:, 1] < 0).any():
                violations.append(Violation(
                    r.input_id, "negative variance channel"))
            if r.ground_truth is not None and not np.isfinite(r.ground_truth):
                violations.append(Violation(
                    r.input_id, "non-finite ground truth"))
    return violations


def partition(d: Dataset, by: str):
    """Split a dataset by record field; ``by`` is "split" or "source".

    Returns a dict keyed in first-appearance order. Record order is
    preserved within each part and metadata is copied to every part.
    """
    if by not in ("split", "source"):
        raise ValueError(f"can only partition by split or source, got {by!r}")
    groups: dict[str, list] = {}
    for r in d.records:
        groups.setdefault(getattr(r, by), []).append(r)
    return {k: Dataset(v, d.metadata) for k, v in groups.items()}
