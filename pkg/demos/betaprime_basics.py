"""
Generalized Beta Prime basics
=============================

Draws from ``bp_sample`` are compared against the analytic density, CDF, and
quantile function for the parameter set (alpha=10, beta=20, p=2, q=0.5).
The three panels should agree closely already at 1000 draws.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from countratio import GenBetaPrime, bp_cdf, bp_pdf, bp_quantile, bp_sample

law = GenBetaPrime(alpha=10.0, beta=20.0, p=2.0, q=0.5)
n_draws = 1000
draws = bp_sample(n_draws, law, seed=7)

xs = np.arange(0.0, 0.75, 1e-4)
us = np.arange(0.0, 1.0 + 1e-9, 0.003)

fig, axes = plt.subplots(1, 3, figsize=(13, 4))

# Histogram vs density.
axes[0].hist(draws, bins=40, density=True, alpha=0.5, label=f"{n_draws} draws")
axes[0].plot(xs, bp_pdf(xs, law), "k", label="analytic pdf")
axes[0].set_xlabel("x")
axes[0].legend()
axes[0].set_title("density")

# Empirical CDF vs analytic CDF.
sorted_draws = np.sort(draws)
ecdf = np.arange(1, n_draws + 1) / n_draws
axes[1].step(sorted_draws, ecdf, where="post", label="empirical")
axes[1].plot(xs, bp_cdf(xs, law), "k--", label="analytic cdf")
axes[1].set_xlabel("x")
axes[1].legend()
axes[1].set_title("cumulative distribution")

# Empirical quantiles vs analytic quantiles.
interior = (us > 0) & (us < 1)
axes[2].plot(
    bp_quantile(us[interior], law),
    np.quantile(draws, us[interior]),
    ".",
    label="empirical vs analytic",
)
axes[2].axline((0.2, 0.2), slope=1.0, color="k", lw=0.8)
axes[2].set_xlabel("analytic quantile")
axes[2].set_ylabel("empirical quantile")
axes[2].legend()
axes[2].set_title("quantiles")

fig.tight_layout()
fig.savefig("betaprime_basics.png", dpi=150)
print("wrote betaprime_basics.png")
print(f"sample mean {draws.mean():.4f}, median draw {np.median(draws):.4f}, "
      f"analytic median {bp_quantile(0.5, law):.4f}")
