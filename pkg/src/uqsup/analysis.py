"""Study-level analyses: quantifier rank ordering, sample-size sweeps, and
hyperparameter-sensitivity statistics.

The sample-size sweep asks how many stochastic samples (dropout passes or
ensemble members) a quantifier needs before its supervision quality
stabilizes: records are truncated to their first s samples, the threshold is
recalibrated on the validation split, and the test split is re-evaluated.
Sensitivity analysis runs a square mean/std filter over a metric grid
(for example epochs x samples) and correlates local mean with local spread.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from types import MappingProxyType

import numpy as np
from scipy import stats

from .errors import PreconditionError, UndefinedMetricError
from .metrics import (ObjectiveSpec, accuracy_objective, correctness,
                      evaluate_supervised, point_biserial)
from .quantifiers import ORIENTATIONS, quantify_dataset
from .records import Dataset, PredictionRecord, partition
from .supervisor import ABOVE, apply, calibrate_threshold


@dataclasses.dataclass(frozen=True, eq=False)
class SweepGrid:
    """Metric values on a rectangular (axis1 x axis2) integer grid.

    Holes (cells that were never computed) are NaN in ``values``.
    """

    axis1: tuple
    axis2: tuple
    values: np.ndarray
    metadata: MappingProxyType

    def __init__(self, axis1, axis2, values, metadata=None):
        axis1 = tuple(int(a) for a in axis1)
        axis2 = tuple(int(a) for a in axis2)
        for axis in (axis1, axis2):
            if any(b <= a for a, b in zip(axis, axis[1:])):
                raise ValueError("grid axes must be strictly increasing")
        arr = np.array(values, dtype=float)
        if arr.shape != (len(axis1), len(axis2)):
            raise ValueError(
                f"values shape {arr.shape} does not match axes "
                f"({len(axis1)}, {len(axis2)})")
        arr.setflags(write=False)
        object.__setattr__(self, "axis1", axis1)
        object.__setattr__(self, "axis2", axis2)
        object.__setattr__(self, "values", arr)
        object.__setattr__(
            self, "metadata", MappingProxyType(dict(metadata or {})))


@dataclasses.dataclass(frozen=True, eq=False)
class RankTable:
    """Per-group ranks of quantifiers by a score, higher score = rank 1.

    ``counts[q]`` is the number of groups in which q was ranked.
    """

    quantifiers: tuple
    groups: tuple
    ranks: dict
    average_rank: dict
    counts: dict


def rank_order(results) -> RankTable:
    """Rank quantifiers by score within each group; ties get average ranks.

    ``results`` is an iterable of (quantifier, group_key, score) with each
    quantifier appearing at most once per group.
    """
    results = list(results)
    if not results:
        raise PreconditionError("nothing to rank")
    groups: dict = {}
    quantifiers: list = []
    for q, g, s in results:
        cell = groups.setdefault(g, {})
        if q in cell:
            raise PreconditionError(
                f"duplicate entry for quantifier {q!r} in group {g!r}")
        cell[q] = float(s)
        if q not in quantifiers:
            quantifiers.append(q)
    ranks = {}
    for g, cell in groups.items():
        qs = list(cell)
        scores = np.asarray([cell[q] for q in qs])
        for q, rank in zip(qs, stats.rankdata(-scores, method="average")):
            ranks[q, g] = float(rank)
    average = {}
    counts = {}
    for q in quantifiers:
        got = [ranks[q, g] for g in groups if (q, g) in ranks]
        counts[q] = len(got)
        average[q] = sum(got) / len(got)
    return RankTable(
        quantifiers=tuple(quantifiers), groups=tuple(groups),
        ranks=ranks, average_rank=average, counts=counts)


def truncate_samples(d: Dataset, size: int) -> Dataset:
    """Keep the first ``size`` samples of every record.

    Prefixes rather than random subsets: samples are exchangeable, so
    prefixes are unbiased, and the result is deterministic.
    """
    if size < 1:
        raise PreconditionError(f"size must be >= 1, got {size}")
    out = []
    for r in d.records:
        if size > r.num_samples:
            raise PreconditionError(
                f"size {size} exceeds the {r.num_samples} samples of "
                f"record {r.input_id!r}")
        out.append(PredictionRecord(
            r.input_id, r.outputs[:size], r.task, r.ground_truth,
            r.split, r.source))
    return Dataset(out, d.metadata)


def calibrated_evaluation(d: Dataset, quantifier: str, epsilon: float,
                          mode: str = ABOVE, obj: ObjectiveSpec | None = None,
                          betas=(1.0,), imprecision=None):
    """Calibrate on the validation split, evaluate on the test split.

    Returns (EvaluationReport, SupervisorConfig). Calibration uses labeled
    validation records only; their benign flag is whether the quantifier's
    own point prediction was good enough.
    """
    obj = obj or accuracy_objective()
    parts = partition(d, "split")
    for needed in ("validation", "test"):
        if needed not in parts or not len(parts[needed]):
            raise PreconditionError(f"dataset has no {needed} split")
    val, test = parts["validation"], parts["test"]
    q_val = quantify_dataset(val, quantifier)
    benign = correctness(q_val, val.records, imprecision)
    pairs = [(q.score, b) for q, b in zip(q_val, benign) if b is not None]
    config = calibrate_threshold(
        pairs, epsilon, ORIENTATIONS[quantifier], mode, quantifier)
    q_test = quantify_dataset(test, quantifier)
    decisions = apply(config, q_test)
    report = evaluate_supervised(
        test.records, q_test, decisions, obj, betas, imprecision)
    return report, config


def sample_size_sweep(d: Dataset, quantifier: str, epsilon: float, sizes,
                      mode: str = ABOVE, obj: ObjectiveSpec | None = None,
                      beta: float = 1.0, imprecision=None, workers: int = 1):
    """Evaluate at several sample counts; returns {size: (obj_bar, delta, s)}.

    Each size runs the full pipeline on records truncated to their first
    ``size`` samples, including threshold recalibration, so a sweep entry
    is exactly what a dataset recorded with that many samples would yield.
    """
    sizes = [int(s) for s in sizes]
    t_max = min(r.num_samples for r in d.records)
    for s in sizes:
        if s < 2:
            raise PreconditionError(f"sweep sizes must be >= 2, got {s}")
        if s > t_max:
            raise PreconditionError(
                f"size {s} exceeds the dataset's {t_max} samples per record")

    def one(size):
        report, _ = calibrated_evaluation(
            truncate_samples(d, size), quantifier, epsilon, mode, obj,
            (beta,), imprecision)
        return size, (report.supervised_objective, report.acceptance_rate,
                      report.s_beta[beta])

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            done = list(pool.map(one, sizes))
    else:
        done = [one(s) for s in sizes]
    return dict(done)


def neighborhood_stats(grid: SweepGrid, window: int = 5):
    """Mean and population std over a window x window neighborhood per cell.

    Boundary cells use the truncated in-grid part of their window; NaN
    holes are excluded from every neighborhood. Returns (mean, std) as two
    grids congruent with the input.
    """
    if window % 2 == 0 or window < 3:
        raise PreconditionError(f"window must be odd and >= 3, got {window}")
    v = grid.values
    if v.shape[0] < window or v.shape[1] < window:
        raise PreconditionError(
            f"grid {v.shape} is smaller than the {window}x{window} window")
    h = window // 2
    mean = np.full(v.shape, np.nan)
    std = np.full(v.shape, np.nan)
    for i in range(v.shape[0]):
        for j in range(v.shape[1]):
            block = v[max(0, i - h):i + h + 1, max(0, j - h):j + h + 1]
            vals = block[np.isfinite(block)]
            if vals.size:
                # Equal-valued windows get exact zeros; the naive mean
                # subtraction would leave ~1e-16 residue.
                if vals.min() == vals.max():
                    mean[i, j] = vals[0]
                    std[i, j] = 0.0
                else:
                    mean[i, j] = vals.mean()
                    std[i, j] = vals.std()
    meta = dict(grid.metadata)
    meta["window"] = str(window)
    return (SweepGrid(grid.axis1, grid.axis2, mean, {**meta, "stat": "mean"}),
            SweepGrid(grid.axis1, grid.axis2, std, {**meta, "stat": "std"}))


def sensitivity_correlation(mean_grid, std_grid, min_cells: int = 3):
    """Pearson correlation between paired grid cells, with a two-sided p.

    Typically fed (neighborhood mean, neighborhood std) to test whether low
    local performance co-occurs with high local sensitivity. NaN cells are
    dropped pairwise; the p-value uses the t distribution on n - 2 degrees
    of freedom.
    """
    a = mean_grid.values if isinstance(mean_grid, SweepGrid) else np.asarray(
        mean_grid, dtype=float)
    b = std_grid.values if isinstance(std_grid, SweepGrid) else np.asarray(
        std_grid, dtype=float)
    if a.shape != b.shape:
        raise PreconditionError(
            f"grids are not congruent: {a.shape} vs {b.shape}")
    keep = np.isfinite(a) & np.isfinite(b)
    x = a[keep]
    y = b[keep]
    if x.size < min_cells:
        raise PreconditionError(
            f"need at least {min_cells} paired cells, got {x.size}")
    r = point_biserial(x, y)
    n = x.size
    if abs(r) == 1.0:
        return r, 0.0
    t = r * np.sqrt((n - 2) / (1.0 - r * r))
    p = 2.0 * float(stats.t.sf(abs(t), n - 2))
    return r, p


def stack_grids(grids) -> SweepGrid:
    """Combine single-axis1 grids (one per epoch, say) into one grid.

    All inputs must share axis2; duplicate axis1 values are rejected. Rows
    are ordered by axis1 value.
    """
    grids = list(grids)
    if not grids:
        raise PreconditionError("no grids to stack")
    axis2 = grids[0].axis2
    rows: dict = {}
    for g in grids:
        if g.axis2 != axis2:
            raise PreconditionError(
                f"grid axis2 {g.axis2} differs from {axis2}")
        for a1, row in zip(g.axis1, g.values):
            if a1 in rows:
                raise PreconditionError(f"duplicate axis1 value {a1}")
            rows[a1] = row
    axis1 = sorted(rows)
    values = np.vstack([rows[a] for a in axis1])
    return SweepGrid(axis1, axis2, values, grids[0].metadata)
