"""Synthetic classification records with controllable difficulty.

Instead of running a real model, fabricate what one would have recorded:
inputs are Gaussian clusters (one per class), each input carries its own
noise level, and the recorded softmax rows come from distances to the
cluster centers. Noisier inputs land closer to foreign centers, so they
are both misclassified more often and flatter in their softmax: exactly
the regime where uncertainty scores carry signal. With samples > 1, each
stochastic pass re-jitters the input, so sample dispersion grows with
noise as well.
"""

from __future__ import annotations

import numpy as np

from .records import CLASSIFICATION, Dataset, PredictionRecord


def _softmax(logits):
    z = logits - logits.max()
    e = np.exp(z)
    return e / e.sum()


def gaussian_cluster_records(n, *, classes=3, samples=1, noise=1.0,
                             separation=4.0, seed=0, splits=(0.0, 0.5, 0.5),
                             source="nominal", id_prefix="r",
                             metadata=None) -> Dataset:
    """Generate ``n`` labeled records, deterministically for a given seed.

    ``noise`` scales the per-input noise level, drawn uniformly from
    [0.25, 1.75] * noise; ``separation`` is the distance of each cluster
    center from the origin. ``splits`` gives the (train, validation, test)
    fractions by record index.
    """
    if classes < 2:
        raise ValueError(f"need at least 2 classes, got {classes}")
    if samples < 1:
        raise ValueError(f"need at least 1 sample, got {samples}")
    if len(splits) != 3 or min(splits) < 0 or abs(sum(splits) - 1.0) > 1e-9:
        raise ValueError("splits must be 3 non-negative fractions summing to 1")
    rng = np.random.default_rng(seed)
    centers = separation * np.eye(classes)
    n_train = round(n * splits[0])
    n_val = round(n * splits[1])
    records = []
    for i in range(n):
        label = int(rng.integers(classes))
        sigma = noise * rng.uniform(0.25, 1.75)
        x = centers[label] + sigma * rng.standard_normal(classes)
        rows = []
        for _ in range(samples):
            # Stochastic passes see a re-jittered input; jitter grows with
            # the input's own noise, like dropout under a hard example.
            x_t = x + 0.5 * sigma * rng.standard_normal(classes) \
                if samples > 1 else x
            logits = -0.5 * ((x_t - centers) ** 2).sum(axis=1)
            rows.append(_softmax(logits))
        if i < n_train:
            split = "train"
        elif i < n_train + n_val:
            split = "validation"
        else:
            split = "test"
        records.append(PredictionRecord(
            f"{id_prefix}{i:05d}", np.asarray(rows), CLASSIFICATION,
            label, split, source))
    meta = {"generator": "gaussian-clusters", "noise": str(noise),
            "separation": str(separation), "seed": str(seed)}
    meta.update(metadata or {})
    return Dataset(records, meta)
