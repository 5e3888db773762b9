"""Command line entry: run a model over stored inputs, write a record file.

    uqexport point   model.keras --inputs x.npz --out records.jsonl
    uqexport sampled model.keras --inputs x.npz --samples 20 --out r.jsonl
    uqexport ensemble m1.keras m2.keras m3.keras --inputs x.npz --out r.jsonl

Inputs come from a .npz (arrays "inputs" and optional "labels"), a bare
.npy of inputs, or a directory holding inputs.npy and optionally
labels.npy; --labels overrides with its own .npy. Exit codes: 0 success,
2 usage or data errors, 1 internal errors.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .spec import SPLITS, ExportError, ExportSpec
from . import export


def _load_arrays(inputs_path, labels_path):
    inputs = labels = None
    path = os.fspath(inputs_path)
    if os.path.isdir(path):
        candidate = os.path.join(path, "inputs.npy")
        if not os.path.exists(candidate):
            raise ExportError(f"directory {path!r} has no inputs.npy")
        inputs = np.load(candidate)
        side = os.path.join(path, "labels.npy")
        if os.path.exists(side):
            labels = np.load(side)
    elif path.endswith(".npz"):
        with np.load(path) as bundle:
            if "inputs" not in bundle:
                raise ExportError(f"{path!r} has no array named 'inputs'")
            inputs = bundle["inputs"]
            if "labels" in bundle:
                labels = bundle["labels"]
    else:
        inputs = np.load(path)
    if labels_path is not None:
        labels = np.load(os.fspath(labels_path))
    return inputs, labels


def _parse_meta(pairs):
    meta = {}
    for pair in pairs or ():
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise ExportError(f"metadata must be key=value, got {pair!r}")
        if key in meta:
            raise ExportError(f"duplicate metadata key {key!r}")
        meta[key] = value
    return meta


def _add_common(p):
    p.add_argument("--inputs", required=True,
                   help=".npz/.npy file or directory of .npy arrays")
    p.add_argument("--labels", help=".npy of class indices (optional)")
    p.add_argument("--out", required=True, help="record file to write")
    p.add_argument("--split", default="test", choices=SPLITS)
    p.add_argument("--source", default="nominal")
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--id-prefix", default="x")
    p.add_argument("--meta", action="append", metavar="KEY=VALUE",
                   help="dataset metadata, repeatable")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="uqexport",
        description="Export model predictions to a record file.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("point", help="one deterministic pass per input")
    p.add_argument("model", help="saved model path")
    _add_common(p)

    p = sub.add_parser("sampled",
                       help="T training-mode passes per input (MC dropout)")
    p.add_argument("model", help="saved model path")
    p.add_argument("--samples", type=int, default=20, metavar="T")
    _add_common(p)

    p = sub.add_parser("ensemble", help="one pass per ensemble member")
    p.add_argument("models", nargs="+", help="saved member model paths")
    _add_common(p)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        inputs, labels = _load_arrays(args.inputs, args.labels)
        spec = ExportSpec(
            out=args.out,
            model_paths=tuple(getattr(args, "models", ())) or
            ((args.model,) if hasattr(args, "model") else ()),
            samples=getattr(args, "samples", 1),
            split=args.split,
            source=args.source,
            batch_size=args.batch_size,
            seed=args.seed,
            id_prefix=args.id_prefix,
            metadata=_parse_meta(args.meta))
        if args.command == "point":
            export.export_point(args.model, inputs, labels, spec)
        elif args.command == "sampled":
            export.export_sampled(args.model, inputs, labels, spec)
        else:
            export.export_ensemble(args.models, inputs, labels, spec)
    except (ExportError, FileNotFoundError, PermissionError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # noqa: BLE001 - last-resort CLI boundary
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    n = len(inputs)
    print(f"wrote {n} records to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
