"""Uncertainty and confidence quantifiers over recorded outputs.

Point-predictor quantifiers (single softmax vector): max softmax (SM),
prediction confidence score (PCS), softmax entropy (SME). Sample-based
quantifiers (T stochastic passes or ensemble members): variation ratio (VR),
predictive entropy (PE), mutual information (MI), mean softmax (MS).
Regression: predictive variance (PRED_VAR) over scalar samples and the mean
of per-sample predicted variances (MEAN_VAR).

Conventions, fixed for reproducibility: natural log everywhere, 0*ln(0) = 0,
and argmax/mode ties broken by the lowest class index. Probabilities are
used exactly as recorded, never renormalized.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .errors import PreconditionError
from .records import CLASSIFICATION, REGRESSION, Dataset, PredictionRecord

SM = "SM"
PCS = "PCS"
SME = "SME"
VR = "VR"
PE = "PE"
MI = "MI"
MS = "MS"
PRED_VAR = "PRED_VAR"
MEAN_VAR = "MEAN_VAR"

CONFIDENCE = "confidence"
UNCERTAINTY = "uncertainty"

# Orientation is a fixed property of each quantifier, not of the data.
ORIENTATIONS = {
    SM: CONFIDENCE,
    PCS: CONFIDENCE,
    SME: UNCERTAINTY,
    VR: UNCERTAINTY,
    PE: UNCERTAINTY,
    MI: UNCERTAINTY,
    MS: CONFIDENCE,
    PRED_VAR: UNCERTAINTY,
    MEAN_VAR: UNCERTAINTY,
}

POINT_QUANTIFIERS = (SM, PCS, SME)
SAMPLED_QUANTIFIERS = (VR, PE, MI, MS)
REGRESSION_QUANTIFIERS = (PRED_VAR, MEAN_VAR)


@dataclasses.dataclass(frozen=True)
class QuantifiedPrediction:
    """Point prediction plus a scalar score for one input.

    ``orientation`` says how to read the score: "confidence" scores are
    high when the model is sure, "uncertainty" scores are high when it
    is not.
    """

    input_id: str
    predicted: int | float
    score: float
    orientation: str


def _entropy(p):
    # 0*ln(0) := 0 by continuity.
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0.0, p * np.log(np.where(p > 0.0, p, 1.0)), 0.0)
    return -terms.sum(axis=-1)


def _class_samples(r: PredictionRecord, quantifier, min_samples, max_samples=None):
    if r.task != CLASSIFICATION:
        raise PreconditionError(
            f"{quantifier} requires classification records, record "
            f"{r.input_id!r} is {r.task}")
    if r.num_classes < 2:
        raise PreconditionError(
            f"{quantifier} requires >= 2 classes, record "
            f"{r.input_id!r} has {r.num_classes}")
    if r.num_samples < min_samples:
        raise PreconditionError(
            f"{quantifier} requires at least {min_samples} samples, record "
            f"{r.input_id!r} has {r.num_samples}")
    if max_samples is not None and r.num_samples > max_samples:
        raise PreconditionError(
            f"{quantifier} requires a single sample, record "
            f"{r.input_id!r} has {r.num_samples}")
    return r.outputs


def _scalar_samples(r: PredictionRecord, quantifier):
    if r.task != REGRESSION:
        raise PreconditionError(
            f"{quantifier} requires regression records, record "
            f"{r.input_id!r} is {r.task}")
    if r.num_samples < 2:
        raise PreconditionError(
            f"{quantifier} requires at least 2 samples, record "
            f"{r.input_id!r} has {r.num_samples}")
    return r.outputs


def max_softmax(r: PredictionRecord) -> QuantifiedPrediction:
    """Highest softmax score as confidence."""
    probs = _class_samples(r, SM, 1, 1)[0]
    k = int(np.argmax(probs))
    return QuantifiedPrediction(r.input_id, k, float(probs[k]), CONFIDENCE)


def pcs(r: PredictionRecord) -> QuantifiedPrediction:
    """Difference between the two highest softmax scores as confidence."""
    probs = _class_samples(r, PCS, 1, 1)[0]
    k = int(np.argmax(probs))
    top2 = np.partition(probs, -2)[-2:]
    return QuantifiedPrediction(
        r.input_id, k, float(top2[1] - top2[0]), CONFIDENCE)


def softmax_entropy(r: PredictionRecord) -> QuantifiedPrediction:
    """Entropy of the softmax output as uncertainty."""
    probs = _class_samples(r, SME, 1, 1)[0]
    k = int(np.argmax(probs))
    return QuantifiedPrediction(
        r.input_id, k, float(_entropy(probs)), UNCERTAINTY)


def variation_ratio(r: PredictionRecord) -> QuantifiedPrediction:
    """Share of samples whose winner is not the modal winning class."""
    samples = _class_samples(r, VR, 2)
    winners = np.argmax(samples, axis=1)
    counts = np.bincount(winners, minlength=samples.shape[1])
    k = int(np.argmax(counts))
    score = 1.0 - counts[k] / samples.shape[0]
    return QuantifiedPrediction(r.input_id, k, float(score), UNCERTAINTY)


def predictive_entropy(r: PredictionRecord) -> QuantifiedPrediction:
    """Entropy of the mean distribution over samples."""
    samples = _class_samples(r, PE, 2)
    mean = samples.mean(axis=0)
    k = int(np.argmax(mean))
    return QuantifiedPrediction(
        r.input_id, k, float(_entropy(mean)), UNCERTAINTY)


def mutual_information(r: PredictionRecord) -> QuantifiedPrediction:
    """Predictive entropy minus the mean per-sample entropy."""
    samples = _class_samples(r, MI, 2)
    mean = samples.mean(axis=0)
    k = int(np.argmax(mean))
    score = _entropy(mean) - _entropy(samples).mean()
    return QuantifiedPrediction(r.input_id, k, float(score), UNCERTAINTY)


def mean_softmax(r: PredictionRecord) -> QuantifiedPrediction:
    """Average softmax score of the class with the highest score sum."""
    samples = _class_samples(r, MS, 2)
    sums = samples.sum(axis=0)
    k = int(np.argmax(sums))
    return QuantifiedPrediction(
        r.input_id, k, float(sums[k] / samples.shape[0]), CONFIDENCE)


def predictive_variance(r: PredictionRecord) -> QuantifiedPrediction:
    """Unbiased sample variance of scalar outputs.

    The constant inverse-model-precision term is omitted: it shifts every
    score equally, so accept/reject decisions are unaffected.
    """
    samples = _scalar_samples(r, PRED_VAR)
    # (mean, variance) records contribute their mean channel
    if samples.ndim == 2:
        samples = samples[:, 0]
    return QuantifiedPrediction(
        r.input_id, float(samples.mean()), float(samples.var(ddof=1)),
        UNCERTAINTY)


def mean_variance(r: PredictionRecord) -> QuantifiedPrediction:
    """Mean of per-sample predicted variances, prediction is the mean of means."""
    samples = _scalar_samples(r, MEAN_VAR)
    if samples.ndim != 2:
        raise PreconditionError(
            f"{MEAN_VAR} requires a (mean, variance) channel, record "
            f"{r.input_id!r} has scalar samples")
    return QuantifiedPrediction(
        r.input_id, float(samples[:, 0].mean()), float(samples[:, 1].mean()),
        UNCERTAINTY)


QUANTIFIERS = {
    SM: max_softmax,
    PCS: pcs,
    SME: softmax_entropy,
    VR: variation_ratio,
    PE: predictive_entropy,
    MI: mutual_information,
    MS: mean_softmax,
    PRED_VAR: predictive_variance,
    MEAN_VAR: mean_variance,
}


def quantify(r: PredictionRecord, quantifier: str) -> QuantifiedPrediction:
    """Apply one quantifier, selected by id, to a single record."""
    if quantifier not in QUANTIFIERS:
        raise PreconditionError(f"unknown quantifier {quantifier!r}")
    return QUANTIFIERS[quantifier](r)


def quantify_dataset(d: Dataset, quantifier: str):
    """Apply one quantifier to every record, preserving order.

    The first record violating the quantifier's preconditions aborts the
    run with an error naming that record.
    """
    if quantifier not in QUANTIFIERS:
        raise PreconditionError(f"unknown quantifier {quantifier!r}")
    fn = QUANTIFIERS[quantifier]
    return [fn(r) for r in d.records]


def applicable_quantifiers(d: Dataset):
    """Quantifier ids whose preconditions every record of ``d`` satisfies."""
    out = []
    for q in QUANTIFIERS:
        try:
            quantify_dataset(d, q)
        except PreconditionError:
            continue
        out.append(q)
    return out
