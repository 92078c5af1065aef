"""
Timing study
============

Walltime of the full ratio posterior (two spatial fits, Laplace posteriors,
and the per-bin Beta Prime parameters) for bin counts logarithmically spaced
from 10 to 1000, averaged over 5 trials with fresh data each.  The cost is
dominated by the O(n^3) eigendecomposition and covariance solve; even at
1000 bins the whole pipeline stays in the seconds range.
"""

import time

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from countratio import ratio_estimation_permproc, toy_ratio_problem, wendland_kernel

bin_counts = [10, 22, 46, 100, 215, 464, 1000]
trials = 5

means = []
print(f"{'n_bins':>8} {'mean_s':>9} {'min_s':>9} {'max_s':>9}")
for n in bin_counts:
    times = []
    for trial in range(trials):
        problem = toy_ratio_problem(n, seed=trial)
        km = wendland_kernel(problem.grid.centers, support_width=0.75, variance=1.0)
        start = time.perf_counter()
        ratio_estimation_permproc(problem.counts_num, problem.counts_denom, km)
        times.append(time.perf_counter() - start)
    means.append(np.mean(times))
    print(f"{n:>8d} {np.mean(times):>9.4f} {np.min(times):>9.4f} {np.max(times):>9.4f}")

fig, ax = plt.subplots(figsize=(7, 4.5))
ax.loglog(bin_counts, means, "o-")
ax.set_xlabel("number of bins")
ax.set_ylabel("mean walltime over 5 trials (s)")
ax.grid(True, which="both", alpha=0.3)
fig.tight_layout()
fig.savefig("timing_study.png", dpi=150)
print("wrote timing_study.png")
