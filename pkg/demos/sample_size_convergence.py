"""How many stochastic forward passes are enough?

Sampling-based quantifiers average over T forward passes; small T makes
their scores (and everything calibrated on them) noisy. This sweep
re-runs calibration and evaluation with each record truncated to its
first T samples, showing the combined score stabilize as T grows.
"""

from uqsup import gaussian_cluster_records, sample_size_sweep

d = gaussian_cluster_records(3000, classes=4, samples=32, noise=1.6, seed=3)
sizes = [2, 4, 8, 16, 32]

for quantifier in ("VR", "MI"):
    swept = sample_size_sweep(d, quantifier, 0.1, sizes, workers=4)
    print(f"\n{quantifier}, epsilon = 0.1")
    print("  T   ACCbar   delta      S1")
    for t in sizes:
        obj_bar, delta, s = swept[t]
        print(f"{t:3d}   {obj_bar:.4f}   {delta:.4f}   {s:.4f}")
