"""Command line front end.

Seven subcommands cover the recorded-output workflow end to end:

    synth        generate synthetic record files
    quantify     score each record with one or all applicable quantifiers
    calibrate    fit an accept threshold on validation records
    evaluate     judge model + supervisor on test records
    compare      rank quantifiers across evaluation reports
    sweep        supervised objective vs calibration-set size
    sensitivity  neighborhood stability maps over a result grid

Exit codes: 0 success, 2 usage or input validation failure, 1 internal
error. All machine outputs are written atomically and are byte-identical
across runs given identical inputs (and --seed where applicable). JSON
reports embed a run manifest describing the exact invocation.

The environment variable UQSUP_THREADS caps worker threads for the
sweep command (default: up to 8, bounded by the CPU count).
"""

from __future__ import annotations

import argparse
import os
import sys
import warnings

from . import analysis, metrics, quantifiers, records, supervisor, synth
from . import io as recio
from .errors import (
    CalibrationWarning,
    PreconditionError,
    RecordFormatError,
    UndefinedMetricError,
)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2


def _threads():
    cap = os.environ.get("UQSUP_THREADS", "")
    default = min(8, os.cpu_count() or 1)
    try:
        cap = int(cap)
    except ValueError:
        return default
    return max(1, min(default, cap)) if cap > 0 else default


def _fmt(value, places):
    if value is None:
        return "n/a"
    return f"{value:.{places}f}"


def _places(args):
    return 2 if getattr(args, "paper_style", False) else 4


def _objective(args):
    if args.objective == metrics.ACCURACY:
        if args.objective_bounds is not None:
            raise PreconditionError(
                "--objective-bounds only applies to --objective mse")
        return metrics.accuracy_objective()
    low, high = args.objective_bounds or (None, None)
    if low is None:
        raise PreconditionError(
            "--objective mse requires --objective-bounds LOW HIGH")
    return metrics.mse_objective(low, high)


def _betas(args):
    return tuple(args.beta) if args.beta else (1.0,)


def _parse_sizes(text):
    sizes = []
    for part in text.split(","):
        part = part.strip()
        if ":" in part:
            lo, _, hi = part.partition(":")
            sizes.extend(range(int(lo), int(hi) + 1))
        elif part:
            sizes.append(int(part))
    if not sizes:
        raise PreconditionError(f"no sizes in {text!r}")
    return sorted(set(sizes))


def _manifest(command, args, extra=None):
    skip = {"func", "paper_style"}
    flags = {k: v for k, v in sorted(vars(args).items())
             if k not in skip and v is not None}
    flags.pop("command", None)
    manifest = {"command": command, "arguments": flags}
    if extra:
        manifest.update(extra)
    return manifest


# -- subcommands --------------------------------------------------------


def cmd_synth(args):
    splits = tuple(args.splits)
    dataset = synth.gaussian_cluster_records(
        args.n, classes=args.classes, samples=args.samples,
        noise=args.noise, separation=args.separation, seed=args.seed,
        splits=splits, source=args.source)
    recio.write_records(dataset, args.out)
    counts = {}
    for r in dataset:
        counts[r.split] = counts.get(r.split, 0) + 1
    parts = ", ".join(f"{k}={v}" for k, v in sorted(counts.items()))
    print(f"wrote {args.out}: {len(dataset)} records ({parts})")
    return EXIT_OK


def _quantifier_table(dataset, qid):
    lines = ["id\tpredicted\tscore\torientation"]
    for q in quantifiers.quantify_dataset(dataset, qid):
        pred = repr(q.predicted)
        lines.append(f"{q.input_id}\t{pred}\t{q.score!r}\t{q.orientation}")
    return "\n".join(lines) + "\n"


def cmd_quantify(args):
    dataset = recio.read_records(args.records)
    if args.quantifier == "all":
        ids = quantifiers.applicable_quantifiers(dataset)
        if not ids:
            raise PreconditionError("no quantifier is applicable")
        stem, ext = os.path.splitext(args.out)
        for qid in ids:
            path = f"{stem}.{qid}{ext or '.tsv'}"
            recio.atomic_write_text(path, _quantifier_table(dataset, qid))
            print(f"wrote {path}")
    else:
        recio.atomic_write_text(args.out,
                                _quantifier_table(dataset, args.quantifier))
        print(f"wrote {args.out}")
    return EXIT_OK


def _select_split(dataset, split):
    if split == "all":
        return dataset
    kept = [r for r in dataset.records if r.split == split]
    if not kept:
        raise PreconditionError(f"no records with split {split!r}")
    return records.Dataset(kept, dict(dataset.metadata))


def cmd_calibrate(args):
    dataset = _select_split(recio.read_records(args.records), args.split)
    quantified = quantifiers.quantify_dataset(dataset, args.quantifier)
    benign = metrics.correctness(quantified, dataset.records,
                                 args.imprecision)
    scores = [(q.score, ok) for q, ok in zip(quantified, benign)
              if ok is not None]
    if not scores:
        raise PreconditionError("no labeled records to calibrate on")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", CalibrationWarning)
        config = supervisor.calibrate_threshold(
            scores, args.epsilon, quantifiers.ORIENTATIONS[args.quantifier],
            mode=args.mode, quantifier=args.quantifier)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if config.degenerate and not args.allow_degenerate:
        print("error: calibration is degenerate (no usable threshold "
              "reaches the target rate); rerun with --allow-degenerate "
              "to keep it", file=sys.stderr)
        return EXIT_USAGE
    recio.write_config(config, args.out)
    note = " [degenerate]" if config.degenerate else ""
    print(f"threshold {config.threshold!r} achieves FPR "
          f"{config.achieved_fpr:.4f} (target {args.epsilon:g}, "
          f"mode {args.mode}, n={config.calibration_size}){note}")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_evaluate(args):
    dataset = _select_split(recio.read_records(args.records), args.split)
    config = recio.read_config(args.config)
    if config.quantifier is None:
        raise PreconditionError(f"{args.config}: config names no quantifier")
    quantified = quantifiers.quantify_dataset(dataset, config.quantifier)
    decisions = supervisor.apply(config, quantified)
    objective = _objective(args)
    report = metrics.evaluate_supervised(
        dataset.records, quantified, decisions, objective,
        betas=_betas(args), imprecision=args.imprecision)
    manifest = _manifest("evaluate", args, {
        "quantifier": config.quantifier,
        "epsilon": config.epsilon,
        "mode": config.mode,
        "threshold": config.threshold,
        "dataset_meta": dict(dataset.metadata),
    })
    recio.write_report(report, args.out, manifest=manifest)
    p = _places(args)
    label = "ACC" if objective.kind == metrics.ACCURACY else "OBJ"
    beta = 1.0 if 1.0 in report.s_beta else _betas(args)[0]
    print(f"{label} | {label}bar | delta_u | S{beta:g}")
    print(" | ".join([
        _fmt(report.unsupervised_objective, p),
        _fmt(report.supervised_objective, p),
        _fmt(report.acceptance_rate, p),
        _fmt(report.s_beta.get(beta), p),
    ]))
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_compare(args):
    paths = [os.path.join(args.reports, name)
             for name in sorted(os.listdir(args.reports))
             if name.endswith(".json")]
    if not paths:
        raise PreconditionError(f"no .json reports under {args.reports}")
    results = []
    for path in paths:
        report, manifest = recio.read_report(path)
        if manifest is None or "quantifier" not in manifest:
            raise PreconditionError(f"{path}: report has no run manifest")
        score = report.s_beta.get(args.beta)
        if score is None:
            raise PreconditionError(
                f"{path}: no S score for beta={args.beta:g}")
        meta = manifest.get("dataset_meta") or {}
        group = []
        for key in args.group_by:
            if key == "epsilon":
                group.append(str(manifest.get("epsilon")))
            else:
                group.append(str(meta.get(key, "unknown")))
        results.append((manifest["quantifier"], tuple(group), score))
    table = analysis.rank_order(results)
    payload = {
        "group_by": list(args.group_by),
        "beta": args.beta,
        "quantifiers": list(table.quantifiers),
        "groups": [list(g) for g in table.groups],
        "ranks": {q: {"/".join(g): table.ranks[(q, g)]
                      for g in table.groups if (q, g) in table.ranks}
                  for q in table.quantifiers},
        "average_rank": dict(table.average_rank),
        "counts": dict(table.counts),
        "manifest": _manifest("compare", args),
    }
    recio.atomic_write_text(args.out, recio.dumps_json(payload))
    best = min(table.average_rank.values())
    print("quantifier | avg_rank | groups")
    for qid in sorted(table.quantifiers,
                      key=lambda q: (table.average_rank[q], q)):
        name = f"*{qid}*" if table.average_rank[qid] == best else qid
        print(f"{name} | {table.average_rank[qid]:.2f} | {table.counts[qid]}")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_sweep(args):
    dataset = recio.read_records(args.records)
    sizes = _parse_sizes(args.sizes)
    objective = _objective(args)
    result = analysis.sample_size_sweep(
        dataset, args.quantifier, args.epsilon, sizes, mode=args.mode,
        obj=objective, beta=args.beta, imprecision=args.imprecision,
        workers=_threads())
    column = {"obj_bar": 0, "delta": 1, "s": 2}[args.metric]
    nan = float("nan")
    row = [result[s][column] if result[s][column] is not None else nan
           for s in sizes]
    grid = analysis.SweepGrid(
        [args.row], sizes, [row],
        metadata={"quantifier": args.quantifier,
                  "epsilon": str(args.epsilon), "mode": args.mode,
                  "metric": args.metric})
    recio.write_grid(grid, args.out, manifest=_manifest("sweep", args))
    p = _places(args)
    print(f"size | obj_bar | delta_u | S{args.beta:g}")
    for s in sizes:
        ob, d, sb = result[s]
        print(f"{s} | {_fmt(ob, p)} | {_fmt(d, p)} | {_fmt(sb, p)}")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_sensitivity(args):
    if os.path.isdir(args.grid):
        paths = [os.path.join(args.grid, name)
                 for name in sorted(os.listdir(args.grid))
                 if name.endswith(".json")]
        if not paths:
            raise PreconditionError(f"no .json grids under {args.grid}")
        grid = analysis.stack_grids([recio.read_grid(p)[0] for p in paths])
    else:
        grid, _ = recio.read_grid(args.grid)
    mean, std = analysis.neighborhood_stats(grid, window=args.window)
    manifest = _manifest("sensitivity", args)
    recio.write_grid(mean, args.out + ".mean.json", manifest=manifest)
    recio.write_grid(std, args.out + ".std.json", manifest=manifest)
    written = [args.out + ".mean.json", args.out + ".std.json"]
    if args.pgm:
        recio.write_pgm(std, args.out + ".std.pgm")
        written.append(args.out + ".std.pgm")
    x = grid if args.raw else mean
    try:
        r, pval = analysis.sensitivity_correlation(x, std)
        kind = "raw" if args.raw else "mean"
        print(f"correlation({kind}, std): r={r:.6f} p={pval:.6g}")
    except UndefinedMetricError as exc:
        print(f"correlation undefined: {exc}")
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


# -- parser --------------------------------------------------------------


def _add_objective_flags(sub):
    sub.add_argument("--objective",
                     choices=[metrics.ACCURACY, metrics.MEAN_SQUARED_ERROR],
                     default=metrics.ACCURACY,
                     help="supervised objective (default: accuracy)")
    sub.add_argument("--objective-bounds", nargs=2, type=float,
                     metavar=("LOW", "HIGH"), default=None,
                     help="worst and best attainable mse values")
    sub.add_argument("--imprecision", type=float, default=None,
                     help="acceptable absolute error for regression labels")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="uqsup",
        description="Uncertainty quantification and supervision over "
                    "recorded model outputs.")
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("synth", help="generate synthetic records")
    s.add_argument("--out", required=True, help="record file to write")
    s.add_argument("--n", type=int, required=True, help="number of records")
    s.add_argument("--classes", type=int, default=3)
    s.add_argument("--samples", type=int, default=1,
                   help="stochastic passes per record")
    s.add_argument("--noise", type=float, default=1.0)
    s.add_argument("--separation", type=float, default=4.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--splits", nargs=3, type=float, default=[0.0, 0.5, 0.5],
                   metavar=("TRAIN", "VAL", "TEST"))
    s.add_argument("--source", default="nominal")
    s.set_defaults(func=cmd_synth)

    s = subs.add_parser("quantify", help="score records")
    s.add_argument("records", help="record file")
    s.add_argument("--quantifier", required=True,
                   choices=sorted(quantifiers.ORIENTATIONS) + ["all"])
    s.add_argument("--out", required=True, help="table file to write")
    s.set_defaults(func=cmd_quantify)

    s = subs.add_parser("calibrate", help="fit an accept threshold")
    s.add_argument("records", help="validation record file")
    s.add_argument("--quantifier", required=True,
                   choices=sorted(quantifiers.ORIENTATIONS))
    s.add_argument("--epsilon", type=float, required=True,
                   help="target false positive rate")
    s.add_argument("--mode", choices=sorted(supervisor.MODES),
                   default=supervisor.ABOVE)
    s.add_argument("--split", default="validation",
                   choices=sorted(records.SPLITS) + ["all"],
                   help="which records to calibrate on (default: validation)")
    s.add_argument("--imprecision", type=float, default=None)
    s.add_argument("--allow-degenerate", action="store_true",
                   help="keep a threshold even when the target rate is "
                        "unreachable")
    s.add_argument("--out", required=True, help="config file to write")
    s.set_defaults(func=cmd_calibrate)

    s = subs.add_parser("evaluate", help="judge model plus supervisor")
    s.add_argument("records", help="test record file")
    s.add_argument("--config", required=True, help="supervisor config file")
    s.add_argument("--split", default="test",
                   choices=sorted(records.SPLITS) + ["all"],
                   help="which records to evaluate (default: test)")
    s.add_argument("--beta", type=float, action="append", default=None,
                   help="S-score beta (repeatable; default 1.0)")
    _add_objective_flags(s)
    s.add_argument("--paper-style", action="store_true",
                   help="print 2 decimal places instead of 4")
    s.add_argument("--out", required=True, help="report file to write")
    s.set_defaults(func=cmd_evaluate)

    s = subs.add_parser("compare", help="rank quantifiers across reports")
    s.add_argument("reports", help="directory of evaluation reports")
    s.add_argument("--group-by", nargs="+", default=["epsilon"],
                   help="manifest keys that define comparison groups")
    s.add_argument("--beta", type=float, default=1.0)
    s.add_argument("--out", required=True, help="rank table file to write")
    s.set_defaults(func=cmd_compare)

    s = subs.add_parser("sweep", help="objective vs calibration-set size")
    s.add_argument("records", help="record file with validation and test")
    s.add_argument("--quantifier", required=True,
                   choices=sorted(quantifiers.ORIENTATIONS))
    s.add_argument("--epsilon", type=float, required=True)
    s.add_argument("--mode", choices=sorted(supervisor.MODES),
                   default=supervisor.ABOVE)
    s.add_argument("--sizes", required=True,
                   help="comma list and/or LO:HI ranges, e.g. 2:10,20,50")
    s.add_argument("--metric", choices=["obj_bar", "delta", "s"],
                   default="s", help="which value fills the output grid")
    s.add_argument("--beta", type=float, default=1.0)
    s.add_argument("--row", type=int, default=0,
                   help="first-axis coordinate of this dataset in the grid "
                        "(e.g. training epoch)")
    _add_objective_flags(s)
    s.add_argument("--paper-style", action="store_true")
    s.add_argument("--out", required=True, help="grid file to write")
    s.set_defaults(func=cmd_sweep)

    s = subs.add_parser("sensitivity", help="neighborhood stability maps")
    s.add_argument("grid", help="grid file, or directory of single-row "
                                "grid files to stack")
    s.add_argument("--window", type=int, default=5)
    s.add_argument("--raw", action="store_true",
                   help="correlate raw cell values (not neighborhood "
                        "means) against neighborhood std")
    s.add_argument("--pgm", action="store_true",
                   help="also write the std map as a PGM image")
    s.add_argument("--out", required=True,
                   help="output prefix for .mean.json / .std.json")
    s.set_defaults(func=cmd_sensitivity)

    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (PreconditionError, RecordFormatError, UndefinedMetricError,
            FileNotFoundError, NotADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
