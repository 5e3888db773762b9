"""Writes version-1 record files.

The format is specified in the repository's FORMAT.md. This writer is
deliberately self-contained: the file format, not a shared library, is
the contract between the exporter and whatever analyzes the records.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .spec import SPLITS, ExportError

FORMAT_VERSION = 1


def _round9(x):
    # 9 significant digits, the format's float precision contract.
    return float(f"{float(x):.9g}")


def _atomic_write(path, text):
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(
        dir=directory, prefix=os.path.basename(path) + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def write_classification_records(path, ids, outputs, labels, split, source,
                                 metadata=None):
    """Serialize (n, T, C) class probabilities as a v1 record file.

    ``labels`` is None (no record gets one) or a sequence of n entries,
    each a class index or None. Caller has already vetted the outputs as
    probability rows; this only enforces structure.
    """
    outputs = np.asarray(outputs, dtype=float)
    if outputs.ndim != 3 or outputs.shape[0] == 0:
        raise ExportError(
            f"expected (n, samples, classes) outputs, got {outputs.shape}")
    n, t, c = outputs.shape
    if c < 2:
        raise ExportError(f"need at least 2 classes, got {c}")
    ids = [str(i) for i in ids]
    if len(ids) != n or len(set(ids)) != n:
        raise ExportError("ids must be unique and one per input")
    if labels is None:
        labels = [None] * n
    labels = list(labels)
    if len(labels) != n:
        raise ExportError(f"{len(labels)} labels for {n} inputs")
    for label in labels:
        if label is not None and not (0 <= int(label) < c):
            raise ExportError(
                f"label {label!r} outside class range 0..{c - 1}")
    if split not in SPLITS:
        raise ExportError(f"unknown split {split!r}")

    header: dict = {"version": FORMAT_VERSION, "task": "classification",
                    "num_classes": int(c), "samples_per_record": int(t)}
    for k in sorted(metadata or {}):
        header[f"meta.{k}"] = str(metadata[k])
    lines = [json.dumps(header, ensure_ascii=False)]
    for id_, rows, label in zip(ids, outputs, labels):
        obj: dict = {"id": id_,
                     "outputs": [[_round9(x) for x in row] for row in rows]}
        if label is not None:
            obj["label"] = int(label)
        obj["split"] = split
        obj["source"] = str(source)
        lines.append(json.dumps(obj, ensure_ascii=False))
    _atomic_write(path, "\n".join(lines) + "\n")
