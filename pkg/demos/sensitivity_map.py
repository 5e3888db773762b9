"""Map where the supervised pipeline is unstable, not just where it is bad.

Rows are independently trained runs (here: fresh synthetic datasets),
columns are sample counts. Each cell is the combined score S1. The
neighborhood standard deviation then shows how much S1 moves under small
configuration changes; correlating it with the neighborhood mean tests
whether weak regions are also the twitchy ones.
"""

import tempfile
from pathlib import Path

import numpy as np

from uqsup import (SweepGrid, gaussian_cluster_records, neighborhood_stats,
                   sample_size_sweep, sensitivity_correlation, write_grid,
                   write_pgm)

sizes = [2, 4, 6, 8, 10, 12]
runs = range(1, 9)
rows = []
for run in runs:
    d = gaussian_cluster_records(1200, classes=4, samples=12, noise=1.6,
                                 seed=run)
    swept = sample_size_sweep(d, "MI", 0.1, sizes, workers=4)
    rows.append([swept[t][2] for t in sizes])

grid = SweepGrid(runs, sizes, np.asarray(rows), {"metric": "s1"})
mean, std = neighborhood_stats(grid, window=3)
r, p = sensitivity_correlation(mean, std)

out = Path(tempfile.mkdtemp(prefix="uqsup-demo-"))
write_grid(grid, out / "s1.json")
write_pgm(std, out / "s1_sensitivity.pgm")

print("S1 by (run, samples):")
print("run  " + "".join(f"  T={t:<4d}" for t in sizes))
for run, row in zip(runs, rows):
    print(f"{run:3d}  " + "".join(f"  {v:.3f}" for v in row))
print(f"\nneighborhood std range: {np.nanmin(std.values):.4f} .. "
      f"{np.nanmax(std.values):.4f}")
print(f"corr(local mean, local std): r = {r:+.3f}, p = {p:.3g}")
print("negative r means weak cells are also the unstable ones")
print(f"artifacts in {out}")
