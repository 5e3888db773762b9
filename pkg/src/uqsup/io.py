"""File formats: record files, supervisor configs, reports, and grids.

Record files are newline-delimited JSON: one header object on the first
line, then one record object per line. Header keys: version, task,
num_classes (classification), samples_per_record, and metadata flattened
as "meta.<name>". Record keys: id, outputs, label (optional), split,
source. Floats in record files are written with 9 significant digits;
configs, reports and grids keep full precision. See FORMAT.md for the
normative description.

All writers are atomic (temp file + rename) and deterministic: identical
inputs produce byte-identical files.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
import tempfile

import numpy as np

from .analysis import SweepGrid
from .errors import PreconditionError, RecordFormatError
from .metrics import EvaluationReport
from .records import (CLASSIFICATION, REGRESSION, SPLITS, SUM_TOLERANCE,
                      TASKS, Dataset, PredictionRecord, validate_dataset)
from .supervisor import MODES, SupervisorConfig

FORMAT_VERSION = 1

RECORD_KEYS = {"id", "outputs", "label", "split", "source"}
HEADER_KEYS = {"version", "task", "num_classes", "samples_per_record"}
CONFIG_KEYS = ("quantifier", "threshold", "orientation", "epsilon", "mode",
               "achieved_fpr", "calibration_size", "degenerate")
REPORT_KEYS = ("objective", "unsupervised_objective", "supervised_objective",
               "acceptance_rate", "s_beta", "tpr", "fpr", "tnr", "fnr", "f1",
               "acc", "auroc", "avgpr", "n_accepted", "n_rejected",
               "n_unlabeled_excluded", "undefined")


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


def atomic_write_text(path, text):
    """Public alias: write text so the target never holds a partial file."""
    _atomic_write(path, text)


def dumps_json(obj):
    """House JSON style: UTF-8, indented, trailing newline."""
    return json.dumps(obj, ensure_ascii=False, indent=2) + "\n"


def _round9(x):
    # 9 significant digits; the shortest repr of the rounded value
    # round-trips exactly, keeping files byte-stable.
    return float(f"{float(x):.9g}")


def _read_lines(path):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as e:
        raise PreconditionError(f"cannot read {path}: {e}") from e
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise RecordFormatError(
            f"not valid UTF-8 at byte {e.start}: {e.reason}") from e
    return text.splitlines()


def _parse_json_line(line, lineno):
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise RecordFormatError(
            f"invalid JSON at column {e.colno}: {e.msg}", line=lineno) from e
    if not isinstance(obj, dict):
        raise RecordFormatError("expected a JSON object", line=lineno)
    return obj


def write_records(d: Dataset, path, sum_tolerance: float = SUM_TOLERANCE):
    """Serialize a dataset; rejects datasets that fail validation.

    All records must share one task and one samples-per-record count,
    since both are fixed in the file header. An empty dataset writes a
    header-only classification file.
    """
    violations = validate_dataset(d, sum_tolerance)
    if violations:
        raise PreconditionError(
            f"dataset fails validation ({len(violations)} violations), "
            f"first: {violations[0]}")
    if d.records:
        task = d.records[0].task
        t = d.records[0].num_samples
        c = d.records[0].num_classes
        for r in d.records:
            if r.task != task:
                raise PreconditionError(
                    f"record {r.input_id!r} is {r.task}, file is {task}")
            if r.num_samples != t:
                raise PreconditionError(
                    f"record {r.input_id!r} has {r.num_samples} samples, "
                    f"file has {t}")
    else:
        task, t, c = CLASSIFICATION, 1, 2

    header: dict = {"version": FORMAT_VERSION, "task": task}
    if task == CLASSIFICATION:
        header["num_classes"] = int(c)
    header["samples_per_record"] = int(t)
    for k in sorted(d.metadata):
        header[f"meta.{k}"] = str(d.metadata[k])
    lines = [json.dumps(header, ensure_ascii=False)]
    for r in d.records:
        if r.task == REGRESSION and r.outputs.ndim == 1:
            outputs = [_round9(x) for x in r.outputs]
        else:
            outputs = [[_round9(x) for x in row] for row in r.outputs]
        obj: dict = {"id": r.input_id, "outputs": outputs}
        if r.ground_truth is not None:
            if task == CLASSIFICATION:
                obj["label"] = int(r.ground_truth)
            else:
                obj["label"] = _round9(r.ground_truth)
        obj["split"] = r.split
        obj["source"] = r.source
        lines.append(json.dumps(obj, ensure_ascii=False))
    _atomic_write(path, "\n".join(lines) + "\n")


def _parse_outputs(raw, task, c, t, lineno):
    if not isinstance(raw, list) or not raw:
        raise RecordFormatError("outputs must be a nonempty list", line=lineno)
    if len(raw) != t:
        raise RecordFormatError(
            f"{len(raw)} samples, header says {t}", line=lineno)
    if task == CLASSIFICATION:
        for row in raw:
            if not isinstance(row, list) or len(row) != c:
                raise RecordFormatError(
                    f"each sample needs {c} probabilities, got "
                    f"{len(row) if isinstance(row, list) else type(row).__name__}",
                    line=lineno)
            if not all(isinstance(x, (int, float)) for x in row):
                raise RecordFormatError(
                    "probabilities must be numbers", line=lineno)
        return np.asarray(raw, dtype=float)
    scalar = isinstance(raw[0], (int, float))
    for x in raw:
        if scalar != isinstance(x, (int, float)):
            raise RecordFormatError(
                "regression samples must be all scalars or all "
                "(mean, variance) pairs", line=lineno)
        if not scalar and (not isinstance(x, list) or len(x) != 2 or
                           not all(isinstance(v, (int, float)) for v in x)):
            raise RecordFormatError(
                "regression pairs must be [mean, variance]", line=lineno)
    return np.asarray(raw, dtype=float)


def read_records(path, sum_tolerance: float = SUM_TOLERANCE) -> Dataset:
    """Parse a record file into a validated Dataset.

    Every failure is a RecordFormatError carrying the offending line
    number; validation violations are reported with the line that
    produced them.
    """
    lines = _read_lines(path)
    if not lines or not lines[0].strip():
        raise RecordFormatError("missing header line", line=1)
    header = _parse_json_line(lines[0], 1)
    unknown = [k for k in header
               if k not in HEADER_KEYS and not k.startswith("meta.")]
    if unknown:
        raise RecordFormatError(f"unknown header key {unknown[0]!r}", line=1)
    version = header.get("version")
    if version != FORMAT_VERSION:
        raise RecordFormatError(
            f"unsupported format version {version!r}, expected "
            f"{FORMAT_VERSION}", line=1)
    task = header.get("task")
    if task not in TASKS:
        raise RecordFormatError(f"unknown task {task!r}", line=1)
    t = header.get("samples_per_record")
    if not isinstance(t, int) or t < 1:
        raise RecordFormatError(
            f"samples_per_record must be a positive integer, got {t!r}",
            line=1)
    c = header.get("num_classes")
    if task == CLASSIFICATION:
        if not isinstance(c, int) or c < 2:
            raise RecordFormatError(
                f"num_classes must be an integer >= 2, got {c!r}", line=1)
    elif c is not None:
        raise RecordFormatError(
            "num_classes is a classification-only key", line=1)
    metadata = {k[len("meta."):]: str(v) for k, v in header.items()
                if k.startswith("meta.")}

    records = []
    line_of = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        obj = _parse_json_line(line, lineno)
        unknown = [k for k in obj if k not in RECORD_KEYS]
        if unknown:
            raise RecordFormatError(
                f"unknown record key {unknown[0]!r}", line=lineno)
        for required in ("id", "outputs", "split", "source"):
            if required not in obj:
                raise RecordFormatError(
                    f"missing record key {required!r}", line=lineno)
        if not isinstance(obj["id"], str):
            raise RecordFormatError("id must be a string", line=lineno)
        if obj["split"] not in SPLITS:
            raise RecordFormatError(
                f"unknown split {obj['split']!r}", line=lineno)
        if not isinstance(obj["source"], str):
            raise RecordFormatError("source must be a string", line=lineno)
        outputs = _parse_outputs(obj["outputs"], task, c, t, lineno)
        label = obj.get("label")
        if label is not None:
            if task == CLASSIFICATION:
                if isinstance(label, bool) or not isinstance(label, int):
                    raise RecordFormatError(
                        f"label must be a class index, got {label!r}",
                        line=lineno)
            elif not isinstance(label, (int, float)):
                raise RecordFormatError(
                    f"label must be a number, got {label!r}", line=lineno)
        try:
            record = PredictionRecord(
                obj["id"], outputs, task, label, obj["split"], obj["source"])
        except ValueError as e:
            raise RecordFormatError(str(e), line=lineno) from e
        if record.input_id not in line_of:
            line_of[record.input_id] = lineno
        records.append(record)

    dataset = Dataset(records, metadata)
    violations = validate_dataset(dataset, sum_tolerance)
    if violations:
        first = violations[0]
        raise RecordFormatError(
            f"{first.message} ({len(violations)} violations in total)",
            line=line_of.get(first.input_id))
    return dataset


def _format_config_value(value):
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_config(config: SupervisorConfig, path):
    """One "key: value" line per field, in fixed order."""
    lines = []
    for key in CONFIG_KEYS:
        value = getattr(config, key)
        if value is None and key in ("epsilon", "achieved_fpr",
                                     "calibration_size"):
            continue
        lines.append(f"{key}: {_format_config_value(value)}")
    _atomic_write(path, "\n".join(lines) + "\n")


def read_config(path) -> SupervisorConfig:
    values: dict = {}
    for lineno, line in enumerate(_read_lines(path), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        key, sep, raw = line.partition(":")
        key = key.strip()
        if not sep:
            raise RecordFormatError(
                f"expected 'key: value', got {line!r}", line=lineno)
        if key not in CONFIG_KEYS:
            raise RecordFormatError(f"unknown key {key!r}", line=lineno)
        if key in values:
            raise RecordFormatError(f"duplicate key {key!r}", line=lineno)
        values[key] = (raw.strip(), lineno)

    def take(key, convert, required=False, default=None):
        if key not in values:
            if required:
                raise RecordFormatError(f"missing key {key!r}")
            return default
        raw, lineno = values[key]
        try:
            return convert(raw)
        except (TypeError, ValueError) as e:
            raise RecordFormatError(
                f"bad value for {key!r}: {raw!r}", line=lineno) from e

    def optional_float(raw):
        return None if raw == "none" else float(raw)

    def boolean(raw):
        if raw not in ("true", "false"):
            raise ValueError(raw)
        return raw == "true"

    config = SupervisorConfig(
        quantifier=take("quantifier", lambda s: None if s == "none" else s,
                        required=True),
        threshold=take("threshold", float, required=True),
        orientation=take("orientation", str, required=True),
        epsilon=take("epsilon", optional_float),
        mode=take("mode", str, required=True),
        achieved_fpr=take("achieved_fpr", optional_float),
        calibration_size=take("calibration_size",
                              lambda s: None if s == "none" else int(s)),
        degenerate=take("degenerate", boolean, default=False),
    )
    if config.orientation not in ("uncertainty", "confidence"):
        raise RecordFormatError(
            f"unknown orientation {config.orientation!r}")
    if config.mode not in MODES:
        raise RecordFormatError(f"unknown mode {config.mode!r}")
    if math.isnan(config.threshold):
        raise RecordFormatError("threshold must not be NaN")
    return config


def write_report(report: EvaluationReport, path, manifest=None):
    """Machine-readable report as a single JSON object, full precision."""
    payload = {}
    for key in REPORT_KEYS:
        value = getattr(report, key)
        if key == "s_beta":
            value = {repr(float(b)): v for b, v in value.items()}
        payload[key] = value
    if manifest is not None:
        payload["manifest"] = manifest
    _atomic_write(path, json.dumps(payload, ensure_ascii=False, indent=2)
                  + "\n")


def read_report(path):
    """Returns (EvaluationReport, manifest-or-None)."""
    lines = _read_lines(path)
    obj = _parse_json_line("\n".join(lines), 1)
    manifest = obj.pop("manifest", None)
    unknown = [k for k in obj if k not in REPORT_KEYS]
    if unknown:
        raise RecordFormatError(f"unknown report key {unknown[0]!r}")
    missing = [k for k in REPORT_KEYS if k not in obj]
    if missing:
        raise RecordFormatError(f"missing report key {missing[0]!r}")
    try:
        obj["s_beta"] = {float(k): v for k, v in obj["s_beta"].items()}
        report = EvaluationReport(**obj)
    except (TypeError, ValueError, AttributeError) as e:
        raise RecordFormatError(f"malformed report: {e}") from e
    return report, manifest


def write_grid(grid: SweepGrid, path, manifest=None):
    values = [[None if not np.isfinite(x) else float(x) for x in row]
              for row in grid.values]
    payload = {
        "axis1": list(grid.axis1),
        "axis2": list(grid.axis2),
        "values": values,
        "metadata": dict(grid.metadata),
    }
    if manifest is not None:
        payload["manifest"] = manifest
    _atomic_write(path, json.dumps(payload, ensure_ascii=False, indent=2)
                  + "\n")


def read_grid(path):
    """Returns (SweepGrid, manifest-or-None)."""
    obj = _parse_json_line("\n".join(_read_lines(path)), 1)
    manifest = obj.pop("manifest", None)
    unknown = [k for k in obj
               if k not in ("axis1", "axis2", "values", "metadata")]
    if unknown:
        raise RecordFormatError(f"unknown grid key {unknown[0]!r}")
    try:
        values = [[math.nan if x is None else float(x) for x in row]
                  for row in obj["values"]]
        return SweepGrid(obj["axis1"], obj["axis2"], values,
                         obj.get("metadata", {})), manifest
    except (TypeError, ValueError, KeyError) as e:
        raise RecordFormatError(f"malformed grid: {e}") from e


def write_pgm(values, path):
    """Grayscale ASCII PGM dump of a matrix, min-max scaled to 0..255.

    NaN cells and constant matrices render as black.
    """
    v = np.asarray(getattr(values, "values", values), dtype=float)
    finite = np.isfinite(v)
    scaled = np.zeros(v.shape, dtype=int)
    if finite.any():
        lo, hi = v[finite].min(), v[finite].max()
        if hi > lo:
            scaled[finite] = np.rint((v[finite] - lo) / (hi - lo) * 255)
    rows = [" ".join(str(x) for x in row) for row in scaled]
    text = f"P2\n{v.shape[1]} {v.shape[0]}\n255\n" + "\n".join(rows) + "\n"
    _atomic_write(path, text)
