"""Generators for the demonstration problems and generic binned-Poisson data.

The demonstration target on ``[-1, 1]`` is the ratio

    Z(x) = (25 sin(pi x / 2)^2 + 10) / (8 cos(pi x / 2)^2 + 10)

with one Poisson draw per bin and process; the quantity-of-interest variant
adds the nonlinear transform ``T(x) = 5 (Z(x)^2 + 2)``, i.e. the forward
model ``Z = (T/5 - 2)^(1/2)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DataError
from .kernels import BinGrid
from .permanental import CountData
from .ratio import QoiModel

__all__ = [
    "ToyRatioProblem",
    "ToyQoiProblem",
    "TOY_QOI_MODEL",
    "toy_numerator_intensity",
    "toy_denominator_intensity",
    "toy_ratio",
    "toy_qoi",
    "toy_ratio_problem",
    "toy_qoi_problem",
    "simulate_binned_poisson",
]

#: Forward model of the demonstration transform T = 5 (Z^2 + 2).
TOY_QOI_MODEL = QoiModel(m=0.2, z0=-2.0, p=0.5)


def toy_numerator_intensity(x):
    return 25.0 * np.sin(0.5 * np.pi * np.asarray(x, dtype=float)) ** 2 + 10.0


def toy_denominator_intensity(x):
    return 8.0 * np.cos(0.5 * np.pi * np.asarray(x, dtype=float)) ** 2 + 10.0


def toy_ratio(x):
    return toy_numerator_intensity(x) / toy_denominator_intensity(x)


def toy_qoi(x):
    return 5.0 * (toy_ratio(x) ** 2 + 2.0)


@dataclass(frozen=True)
class ToyRatioProblem:
    grid: BinGrid
    counts_num: CountData
    counts_denom: CountData
    true_ratio: np.ndarray
    seed: int | None


@dataclass(frozen=True)
class ToyQoiProblem:
    grid: BinGrid
    counts_num: CountData
    counts_denom: CountData
    true_ratio: np.ndarray
    true_qoi: np.ndarray
    model: QoiModel
    seed: int | None


def simulate_binned_poisson(intensity, realizations: int = 1, seed=None) -> CountData:
    """Independent Poisson draws per bin and realization, deterministic for a
    fixed seed."""
    lam = np.asarray(intensity, dtype=float)
    if lam.ndim != 1:
        raise DataError(f"intensity must be a vector, got shape {lam.shape}")
    if np.any(lam < 0.0) or not np.all(np.isfinite(lam)):
        raise DataError("intensities must be non-negative and finite")
    if realizations < 1:
        raise DataError(f"realizations must be at least 1, got {realizations}")
    rng = np.random.default_rng(seed)
    counts = rng.poisson(lam[:, None], size=(lam.size, realizations))
    return CountData(counts=counts.astype(float))


def toy_ratio_problem(n_bins: int, seed=None) -> ToyRatioProblem:
    """Counts for the demonstration ratio target: ``[-1, 1]`` split into
    ``n_bins`` equal bins, Poisson means set to the intensity functions at
    the bin centers, one realization per process."""
    grid = BinGrid.regular(n_bins)
    x = grid.centers
    rng = np.random.default_rng(seed)
    counts_num = CountData(rng.poisson(toy_numerator_intensity(x)).astype(float))
    counts_denom = CountData(rng.poisson(toy_denominator_intensity(x)).astype(float))
    return ToyRatioProblem(
        grid=grid,
        counts_num=counts_num,
        counts_denom=counts_denom,
        true_ratio=toy_ratio(x),
        seed=seed,
    )


def toy_qoi_problem(n_bins: int, seed=None) -> ToyQoiProblem:
    """The ratio problem plus the transformed truth ``T = 5 (Z^2 + 2)`` and
    its forward model.  Counts are identical to :func:`toy_ratio_problem`
    for the same seed."""
    base = toy_ratio_problem(n_bins, seed=seed)
    return ToyQoiProblem(
        grid=base.grid,
        counts_num=base.counts_num,
        counts_denom=base.counts_denom,
        true_ratio=base.true_ratio,
        true_qoi=5.0 * (base.true_ratio**2 + 2.0),
        model=TOY_QOI_MODEL,
        seed=seed,
    )
