"""Run a Keras model over inputs and dump its outputs as a record file.

Three entry points cover the three ways of producing prediction samples:
one deterministic pass (point), T training-mode passes with dropout
active (sampled), and one pass per ensemble member (ensemble). The
exporter never computes uncertainty; it samples and serializes, and all
scoring happens downstream on the files it writes.
"""

from __future__ import annotations

import os

import numpy as np

from .spec import ExportError, ExportSpec
from .writer import write_classification_records

SUM_TOLERANCE = 1e-4

_DROPOUT_LAYER_NAMES = ("Dropout", "AlphaDropout", "GaussianDropout")


def load_model(path, seed: int = 0):
    """Seed everything, then load; the order is the reproducibility contract.

    Keras fixes each dropout layer's random stream when the layer object
    is created, so seeding after a model already exists cannot reproduce
    a sampling run. Load models through this function (or pass paths to
    the export functions, which do) and a fixed seed gives byte-identical
    export files.
    """
    import keras

    keras.utils.set_random_seed(int(seed))
    try:
        return keras.saving.load_model(path)
    except (OSError, ValueError) as e:
        raise ExportError(f"cannot load model {os.fspath(path)!r}: {e}") from e


def _resolve(model, spec: ExportSpec):
    if isinstance(model, (str, os.PathLike)):
        return load_model(model, spec.seed)
    return model


def _as_inputs(inputs):
    x = np.asarray(inputs)
    if x.ndim < 1 or len(x) == 0:
        raise ExportError("inputs must be a nonempty array of examples")
    return x


def _predict(model, x, batch_size, training):
    from keras import ops

    rows = []
    for start in range(0, len(x), batch_size):
        out = model(x[start:start + batch_size], training=training)
        rows.append(np.asarray(ops.convert_to_numpy(out), dtype=float))
    out = np.concatenate(rows, axis=0)
    if out.ndim != 2 or out.shape[1] < 2:
        raise ExportError(
            f"expected (batch, classes >= 2) model outputs, got shape "
            f"{out.shape}")
    return out


def _check_probabilities(outputs):
    worst = float(np.abs(outputs.sum(axis=-1) - 1.0).max())
    if worst > SUM_TOLERANCE or bool((outputs < 0).any()):
        raise ExportError(
            "model outputs are not probability vectors (row sums off by up "
            f"to {worst:.3g}); give the model a final softmax activation")


def _labels_list(labels, n, c):
    if labels is None:
        return None
    labels = np.asarray(labels)
    if labels.shape != (n,):
        raise ExportError(
            f"labels must be one class index per input, got shape "
            f"{labels.shape} for {n} inputs")
    if not np.issubdtype(labels.dtype, np.integer):
        if not np.all(labels == labels.astype(int)):
            raise ExportError("labels must be integer class indices")
        labels = labels.astype(int)
    if labels.min() < 0 or labels.max() >= c:
        raise ExportError(
            f"labels must lie in 0..{c - 1}, got range "
            f"{labels.min()}..{labels.max()}")
    return [int(v) for v in labels]


def _has_dropout(model):
    import keras

    classes = tuple(getattr(keras.layers, name)
                    for name in _DROPOUT_LAYER_NAMES
                    if hasattr(keras.layers, name))
    stack = [model]
    seen = set()
    while stack:
        layer = stack.pop()
        if id(layer) in seen:
            continue
        seen.add(id(layer))
        if isinstance(layer, classes):
            return True
        stack.extend(getattr(layer, "layers", None) or ())
    return False


def _write(spec: ExportSpec, outputs, labels):
    _check_probabilities(outputs)
    labels = _labels_list(labels, outputs.shape[0], outputs.shape[2])
    ids = [f"{spec.id_prefix}{i:05d}" for i in range(outputs.shape[0])]
    write_classification_records(spec.out, ids, outputs, labels, spec.split,
                                 spec.source, dict(spec.metadata))
    return spec.out


def export_point(model, inputs, labels, spec: ExportSpec):
    """One deterministic inference pass per input; writes a T=1 file."""
    x = _as_inputs(inputs)
    model = _resolve(model, spec)
    probs = _predict(model, x, spec.batch_size, training=False)
    return _write(spec, probs[:, None, :], labels)


def export_sampled(model, inputs, labels, spec: ExportSpec):
    """spec.samples training-mode passes per input, dropout active.

    Requires at least one dropout layer; without one the passes would be
    identical and the samples would fake certainty. With samples=1 this
    reduces to a single deterministic pass, exactly as export_point.
    Reproducibility: pass the model as a path, or load it with
    load_model, so the dropout streams start from spec.seed.
    """
    x = _as_inputs(inputs)
    model = _resolve(model, spec)
    if not _has_dropout(model):
        raise ExportError(
            "model has no dropout layer, so training-mode passes are "
            "deterministic; add dropout or use the point export")
    if spec.samples == 1:
        return export_point(model, inputs, labels, spec)
    samples = np.stack(
        [_predict(model, x, spec.batch_size, training=True)
         for _ in range(spec.samples)], axis=1)
    return _write(spec, samples, labels)


def export_ensemble(model_paths, inputs, labels, spec: ExportSpec):
    """One inference pass per ensemble member, members loaded one at a time.

    Sequential loading bounds memory by the largest single member. All
    members must agree on the number of classes.
    """
    import keras

    paths = tuple(os.fspath(p) for p in model_paths)
    if len(paths) < 2:
        raise ExportError(
            f"ensemble export needs at least 2 models, got {len(paths)}")
    x = _as_inputs(inputs)
    member_outputs = []
    for path in paths:
        model = load_model(path, spec.seed)
        out = _predict(model, x, spec.batch_size, training=False)
        if member_outputs and out.shape[1] != member_outputs[0].shape[1]:
            raise ExportError(
                f"member {path!r} outputs {out.shape[1]} classes, earlier "
                f"members output {member_outputs[0].shape[1]}")
        member_outputs.append(out)
        del model
        keras.utils.clear_session()
    return _write(spec, np.stack(member_outputs, axis=1), labels)
