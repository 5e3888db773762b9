"""Tiny record/dataset constructors shared across test modules."""

import numpy as np

from uqsup import CLASSIFICATION, Dataset, PredictionRecord


def make_record(outputs, *, input_id="x0", task=CLASSIFICATION,
                ground_truth=None, split="test", source="nominal"):
    return PredictionRecord(input_id, np.asarray(outputs, dtype=float),
                            task, ground_truth, split, source)


def make_dataset(rows_per_record, *, task=CLASSIFICATION, labels=None,
                 splits=None, sources=None, metadata=None):
    records = []
    for i, rows in enumerate(rows_per_record):
        records.append(PredictionRecord(
            f"x{i}", np.asarray(rows, dtype=float), task,
            None if labels is None else labels[i],
            "test" if splits is None else splits[i],
            "nominal" if sources is None else sources[i]))
    return Dataset(records, metadata or {})
