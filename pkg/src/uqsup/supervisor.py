"""Accept/reject supervision with FPR-calibrated thresholds.

The supervisor accepts an input when its uncertainty is strictly below the
threshold (or its confidence strictly above it). The threshold is calibrated
on benign validation scores against a target false positive rate epsilon,
where a false positive is a benign input the supervisor rejects.

Calibration considers every observed benign score plus an accept-all
sentinel as candidate thresholds; the empirical FPR only changes at those
points. The default mode picks the smallest achievable FPR at or above
epsilon; "at-most" picks the largest achievable FPR at or below it. When the
score distribution is so coarse that no FPR strictly between 0 and 1 fits
the request, the result is flagged degenerate.
"""

from __future__ import annotations

import dataclasses
import math
import warnings

import numpy as np

from .errors import CalibrationWarning, PreconditionError
from .quantifiers import CONFIDENCE, UNCERTAINTY, ORIENTATIONS

ABOVE = "above"
AT_MOST = "at-most"
MODES = (ABOVE, AT_MOST)

EPSILON_PRESETS = (0.01, 0.05, 0.1)


@dataclasses.dataclass(frozen=True)
class SupervisorConfig:
    """A calibrated (or manually chosen) decision threshold.

    ``achieved_fpr`` is the empirical FPR the threshold produces on its own
    calibration set; ``degenerate`` marks calibrations where the score
    distribution admitted no useful FPR near the target.
    """

    quantifier: str | None
    threshold: float
    orientation: str
    epsilon: float | None = None
    mode: str = ABOVE
    achieved_fpr: float | None = None
    calibration_size: int | None = None
    degenerate: bool = False


@dataclasses.dataclass(frozen=True)
class Decision:
    input_id: str
    accepted: bool
    score: float


def _candidate_fprs(benign, orientation):
    """(threshold, empirical FPR) for every useful candidate threshold."""
    n = benign.size
    values = np.unique(benign)
    if orientation == UNCERTAINTY:
        # accept iff score < t, so FPR(t) = #(score >= t) / n
        counts = n - np.searchsorted(np.sort(benign), values, side="left")
        sentinel = math.inf
    else:
        # accept iff score > t, so FPR(t) = #(score <= t) / n
        counts = np.searchsorted(np.sort(benign), values, side="right")
        sentinel = -math.inf
    pairs = [(float(t), c / n) for t, c in zip(values, counts)]
    pairs.append((sentinel, 0.0))
    return pairs


def calibrate_threshold(scores, epsilon, orientation, mode=ABOVE,
                        quantifier=None) -> SupervisorConfig:
    """Pick a threshold from benign validation scores for a target FPR.

    ``scores`` is an iterable of (score, is_benign) pairs; non-benign
    entries are ignored here and only matter for reporting elsewhere.
    Warns when the achieved FPR differs from epsilon by more than half of
    epsilon, which happens for coarsely discretized quantifiers.
    """
    if not 0.0 < epsilon < 1.0:
        raise PreconditionError(f"epsilon must be in (0, 1), got {epsilon}")
    if orientation not in (UNCERTAINTY, CONFIDENCE):
        raise PreconditionError(f"unknown orientation {orientation!r}")
    if quantifier is not None and ORIENTATIONS.get(quantifier, orientation) != orientation:
        raise PreconditionError(
            f"{quantifier} scores are {ORIENTATIONS[quantifier]} oriented, "
            f"not {orientation}")
    if mode not in MODES:
        raise PreconditionError(f"unknown mode {mode!r}")
    pairs = list(scores)
    all_scores = np.asarray([s for s, _ in pairs], dtype=float)
    if all_scores.size and not np.isfinite(all_scores).all():
        raise PreconditionError("calibration scores must be finite")
    benign = np.asarray([s for s, b in pairs if b], dtype=float)
    if benign.size == 0:
        raise PreconditionError("calibration needs at least one benign score")

    candidates = _candidate_fprs(benign, orientation)
    usable = [(t, f) for t, f in candidates if f < 1.0]
    degenerate = False
    if mode == ABOVE:
        hits = [(f, t) for t, f in usable if f >= epsilon]
        if hits:
            achieved, threshold = min(hits)
        else:
            # Nothing at or above epsilon short of rejecting everything:
            # fall back to the largest informative FPR and flag it.
            achieved, threshold = max((f, t) for t, f in usable)
            degenerate = True
    else:
        hits = [(f, t) for t, f in usable if f <= epsilon]
        achieved, threshold = max(hits)
        degenerate = bool(max(f for _, f in usable) == 0.0)
    if abs(achieved - epsilon) > epsilon / 2.0:
        warnings.warn(
            f"achieved FPR {achieved:.4g} is far from target {epsilon:.4g} "
            f"(coarse score distribution)", CalibrationWarning, stacklevel=2)
    return SupervisorConfig(
        quantifier=quantifier, threshold=float(threshold),
        orientation=orientation, epsilon=float(epsilon), mode=mode,
        achieved_fpr=float(achieved), calibration_size=int(benign.size),
        degenerate=degenerate)


def apply(config: SupervisorConfig, quantified) -> list:
    """Turn quantified predictions into accept/reject decisions.

    Strict inequalities at the threshold: uncertainty accepts on
    score < t, confidence accepts on score > t.
    """
    decisions = []
    for q in quantified:
        if q.orientation != config.orientation:
            raise PreconditionError(
                f"config is {config.orientation} oriented but prediction "
                f"{q.input_id!r} is {q.orientation}")
        if config.orientation == UNCERTAINTY:
            accepted = q.score < config.threshold
        else:
            accepted = q.score > config.threshold
        decisions.append(Decision(q.input_id, bool(accepted), q.score))
    return decisions
