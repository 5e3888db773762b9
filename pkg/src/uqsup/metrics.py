"""Joint assessment of model and supervisor.

Supervised metrics: the objective restricted to accepted inputs (obj-bar),
the acceptance rate (delta), and their weighted harmonic mean (the S score).
Classical supervision metrics treat misbehaving inputs as the positive
class: an input is malicious when the deployed point prediction is wrong
(classification) or its error exceeds a configured imprecision
(regression), and the supervisor's rejection is the positive call.

Every metric with an empty denominator raises UndefinedMetricError rather
than returning NaN; report assembly converts those into explicit markers.
"""

from __future__ import annotations

import dataclasses
from typing import Callable

import numpy as np
from scipy import stats

from .errors import PreconditionError, UndefinedMetricError
from .quantifiers import CONFIDENCE
from .records import CLASSIFICATION

ACCURACY = "accuracy"
MEAN_SQUARED_ERROR = "mean_squared_error"
CUSTOM = "custom"
MAXIMIZE = "maximize"
MINIMIZE = "minimize"


@dataclasses.dataclass(frozen=True)
class ObjectiveSpec:
    """An objective plus the bounds used to normalize it into [0, 1]."""

    kind: str
    lower: float = 0.0
    upper: float = 1.0
    direction: str = MAXIMIZE
    fn: Callable | None = None

    def __post_init__(self):
        if self.kind not in (ACCURACY, MEAN_SQUARED_ERROR, CUSTOM):
            raise ValueError(f"unknown objective kind {self.kind!r}")
        if not self.lower < self.upper:
            raise ValueError("objective bounds must satisfy lower < upper")
        if self.direction not in (MAXIMIZE, MINIMIZE):
            raise ValueError(f"unknown direction {self.direction!r}")
        if self.kind == ACCURACY and (
                self.lower != 0.0 or self.upper != 1.0
                or self.direction != MAXIMIZE):
            raise ValueError("accuracy is maximize with bounds [0, 1]")
        if self.kind == CUSTOM and self.fn is None:
            raise ValueError("custom objective needs fn")


def accuracy_objective() -> ObjectiveSpec:
    return ObjectiveSpec(ACCURACY, 0.0, 1.0, MAXIMIZE)


def mse_objective(lower: float, upper: float) -> ObjectiveSpec:
    return ObjectiveSpec(MEAN_SQUARED_ERROR, lower, upper, MINIMIZE)


@dataclasses.dataclass(frozen=True)
class EvaluationReport:
    """Everything one (dataset, quantifier, threshold) evaluation produced.

    ``undefined`` maps metric names to the reason they have no value here;
    such metrics are None in their own field.
    """

    objective: str
    unsupervised_objective: float | None
    supervised_objective: float | None
    acceptance_rate: float
    s_beta: dict
    tpr: float | None
    fpr: float | None
    tnr: float | None
    fnr: float | None
    f1: float | None
    acc: float | None
    auroc: float | None
    avgpr: float | None
    n_accepted: int
    n_rejected: int
    n_unlabeled_excluded: int
    undefined: dict


def _objective_value(obj: ObjectiveSpec, predicted, truths):
    predicted = np.asarray(predicted, dtype=float)
    truths = np.asarray(truths, dtype=float)
    if obj.kind == ACCURACY:
        return float((predicted == truths).mean())
    if obj.kind == MEAN_SQUARED_ERROR:
        return float(((predicted - truths) ** 2).mean())
    return float(obj.fn(predicted, truths))


def supervised_objective(decisions, quantified, records, obj: ObjectiveSpec):
    """Objective over exactly the accepted subset.

    All three sequences are aligned per input. Every accepted record must
    carry a ground truth; with nothing accepted the value does not exist
    and UndefinedMetricError is raised.
    """
    predicted, truths = [], []
    for d, q, r in zip(decisions, quantified, records):
        if not d.accepted:
            continue
        if r.ground_truth is None:
            raise PreconditionError(
                f"accepted record {r.input_id!r} has no ground truth")
        predicted.append(q.predicted)
        truths.append(r.ground_truth)
    if not predicted:
        raise UndefinedMetricError("undefined: no accepted inputs")
    return _objective_value(obj, predicted, truths)


def acceptance_rate(decisions) -> float:
    decisions = list(decisions)
    if not decisions:
        raise PreconditionError("no decisions")
    return sum(d.accepted for d in decisions) / len(decisions)


def s_score(obj_bar: float, delta: float, obj: ObjectiveSpec,
            beta: float = 1.0) -> float:
    """Weighted harmonic mean of the normalized objective and acceptance rate.

    beta > 1 weights the acceptance rate higher, beta < 1 the objective.
    Defined as 0 when both terms are 0.
    """
    if beta <= 0:
        raise PreconditionError(f"beta must be positive, got {beta}")
    if not 0.0 <= delta <= 1.0:
        raise PreconditionError(f"acceptance rate must be in [0, 1], got {delta}")
    nu = (obj_bar - obj.lower) / (obj.upper - obj.lower)
    nu = float(np.clip(nu, 0.0, 1.0))
    if obj.direction == MINIMIZE:
        nu = 1.0 - nu
    b2 = beta * beta
    denom = b2 * nu + delta
    if denom == 0.0:
        return 0.0
    return (1.0 + b2) * nu * delta / denom


def correctness(quantified, records, imprecision=None):
    """Per-input benign flags: True when the point prediction is good enough.

    Classification: predicted class equals the ground truth. Regression:
    absolute error at most ``imprecision`` (required). Unlabeled records
    get None.
    """
    flags = []
    for q, r in zip(quantified, records):
        if r.ground_truth is None:
            flags.append(None)
        elif r.task == CLASSIFICATION:
            flags.append(int(q.predicted) == int(r.ground_truth))
        else:
            if imprecision is None:
                raise PreconditionError(
                    "regression benign/malicious labels need an "
                    "acceptable imprecision")
            flags.append(abs(q.predicted - r.ground_truth) <= imprecision)
    return flags


def binary_supervisor_metrics(decisions, malicious):
    """Confusion rates with malicious as positive and rejection as the call.

    Returns {"tpr", "fpr", "tnr", "fnr", "f1", "acc"}; a rate whose
    denominator is empty is None, F1 is 0.0 when precision or recall is
    undefined or zero.
    """
    pairs = [(m, not d.accepted) for d, m in zip(decisions, malicious)
             if m is not None]
    if not pairs:
        raise PreconditionError("no labeled records to score the supervisor on")
    tp = sum(1 for m, r in pairs if m and r)
    fn = sum(1 for m, r in pairs if m and not r)
    fp = sum(1 for m, r in pairs if not m and r)
    tn = sum(1 for m, r in pairs if not m and not r)
    tpr = tp / (tp + fn) if tp + fn else None
    fpr = fp / (fp + tn) if fp + tn else None
    precision = tp / (tp + fp) if tp + fp else None
    if precision and tpr:
        f1 = 2.0 * precision * tpr / (precision + tpr)
    else:
        f1 = 0.0
    return {
        "tpr": tpr,
        "fpr": fpr,
        "tnr": None if fpr is None else 1.0 - fpr,
        "fnr": None if tpr is None else 1.0 - tpr,
        "f1": f1,
        "acc": (tp + tn) / len(pairs),
    }


def auroc(scores) -> float:
    """Probability that a malicious input scores above a benign one.

    ``scores`` is an iterable of (uncertainty, is_malicious); ties count
    half. Computed exactly through rank sums.
    """
    pairs = list(scores)
    u = np.asarray([s for s, _ in pairs], dtype=float)
    mal = np.asarray([bool(m) for _, m in pairs])
    n_pos = int(mal.sum())
    n_neg = mal.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError(
            "undefined: AUROC needs both benign and malicious inputs")
    ranks = stats.rankdata(u)
    return float(
        (ranks[mal].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def avgpr(scores) -> float:
    """Average precision over the descending threshold sweep.

    Step-wise interpolation: AP = sum over threshold steps of
    (recall_k - recall_{k-1}) * precision_k, with tied scores entering
    together.
    """
    pairs = list(scores)
    u = np.asarray([s for s, _ in pairs], dtype=float)
    mal = np.asarray([bool(m) for _, m in pairs])
    n_pos = int(mal.sum())
    if n_pos == 0:
        raise UndefinedMetricError("undefined: AVGPR needs a malicious input")
    order = np.argsort(-u, kind="stable")
    u = u[order]
    mal = mal[order]
    # Last index of each tie group = cumulative counts at that threshold.
    boundary = np.nonzero(np.append(u[1:] != u[:-1], True))[0]
    tp = np.cumsum(mal)[boundary]
    flagged = boundary + 1.0
    precision = tp / flagged
    recall = tp / n_pos
    prev = np.concatenate(([0.0], recall[:-1]))
    return float(((recall - prev) * precision).sum())


def point_biserial(errors, uncertainties) -> float:
    """Correlation between observed errors and quantified uncertainty.

    Binary 0/1 errors give the point-biserial coefficient; continuous
    errors fall back to plain Pearson correlation (the former is Pearson
    with a dichotomous variable, so both routes share one formula).
    """
    x = np.asarray(errors, dtype=float)
    y = np.asarray(uncertainties, dtype=float)
    if x.size != y.size or x.size < 3:
        raise PreconditionError(
            "correlation needs equally many errors and uncertainties, >= 3")
    x = x - x.mean()
    y = y - y.mean()
    vx = float((x * x).sum())
    vy = float((y * y).sum())
    if vx == 0.0 or vy == 0.0:
        raise UndefinedMetricError(
            "undefined correlation: zero variance input")
    r = float((x * y).sum() / np.sqrt(vx * vy))
    return max(-1.0, min(1.0, r))


def evaluate_supervised(records, quantified, decisions, obj: ObjectiveSpec,
                        betas=(1.0,), imprecision=None) -> EvaluationReport:
    """Assemble the full report for one evaluated dataset.

    Unlabeled records are excluded from every label-dependent metric and
    counted in ``n_unlabeled_excluded``. Metrics that do not exist on this
    data appear as None with the reason recorded under ``undefined``.
    """
    records = list(records)
    quantified = list(quantified)
    decisions = list(decisions)
    if not records:
        raise PreconditionError("empty dataset")
    if len(quantified) != len(records) or len(decisions) != len(records):
        raise PreconditionError(
            "records, quantified predictions and decisions must align")
    for r, q, d in zip(records, quantified, decisions):
        if q.input_id != r.input_id or d.input_id != r.input_id:
            raise PreconditionError(
                f"misaligned inputs: record {r.input_id!r}, quantified "
                f"{q.input_id!r}, decision {d.input_id!r}")
    undefined = {}
    n_accepted = sum(d.accepted for d in decisions)
    n_rejected = len(decisions) - n_accepted
    delta = acceptance_rate(decisions)

    benign = correctness(quantified, records, imprecision)
    labeled = [(d, q, r, b) for d, q, r, b in
               zip(decisions, quantified, records, benign) if b is not None]
    n_unlabeled = len(records) - len(labeled)

    unsupervised = None
    if labeled:
        unsupervised = _objective_value(
            obj, [q.predicted for _, q, _, _ in labeled],
            [r.ground_truth for _, _, r, _ in labeled])
    else:
        undefined["unsupervised_objective"] = "no labeled records"

    obj_bar = None
    accepted_labeled = [(q, r) for d, q, r, _ in labeled if d.accepted]
    if accepted_labeled:
        obj_bar = _objective_value(
            obj, [q.predicted for q, _ in accepted_labeled],
            [r.ground_truth for _, r in accepted_labeled])
    else:
        undefined["supervised_objective"] = "no accepted labeled inputs"

    s_beta = {}
    for beta in betas:
        if obj_bar is not None:
            s_beta[beta] = s_score(obj_bar, delta, obj, beta)
        elif delta == 0.0:
            # Zero acceptance forces the score to zero for every beta.
            s_beta[beta] = 0.0
        else:
            s_beta[beta] = None
            undefined.setdefault(
                "s_beta", "supervised objective undefined")

    rates = {k: None for k in ("tpr", "fpr", "tnr", "fnr", "f1", "acc")}
    if labeled:
        rates = binary_supervisor_metrics(
            [d for d, _, _, _ in labeled],
            [not b for _, _, _, b in labeled])
        for k, v in rates.items():
            if v is None:
                undefined[k] = "empty denominator"
    else:
        undefined["binary_metrics"] = "no labeled records"

    # Threshold-free metrics read the decision score as an uncertainty;
    # confidence scores are negated, which flips no ranking-based metric.
    uncertainty_scores = []
    for d, q, r, b in labeled:
        s = -d.score if q.orientation == CONFIDENCE else d.score
        uncertainty_scores.append((s, not b))
    auroc_v = avgpr_v = None
    if uncertainty_scores:
        try:
            auroc_v = auroc(uncertainty_scores)
        except UndefinedMetricError as e:
            undefined["auroc"] = str(e)
        try:
            avgpr_v = avgpr(uncertainty_scores)
        except UndefinedMetricError as e:
            undefined["avgpr"] = str(e)
    else:
        undefined["auroc"] = "no labeled records"
        undefined["avgpr"] = "no labeled records"

    return EvaluationReport(
        objective=obj.kind,
        unsupervised_objective=unsupervised,
        supervised_objective=obj_bar,
        acceptance_rate=delta,
        s_beta=s_beta,
        auroc=auroc_v,
        avgpr=avgpr_v,
        n_accepted=int(n_accepted),
        n_rejected=int(n_rejected),
        n_unlabeled_excluded=int(n_unlabeled),
        undefined=undefined,
        **rates,
    )
