"""Posterior laws for intensity ratios and derived quantities of interest.

Two estimation routes produce per-bin Gamma posteriors for the numerator and
denominator intensities: the spatial permanental-process fit and a pointwise
conjugate-Gamma update.  Either way the ratio ``Z = Lambda_a / Lambda_b`` of
independent Gamma variables follows a generalized Beta Prime law per bin,
``BP(shape_a, shape_b, 1, rate_b/rate_a)``, and a monotone forward model
``Z = (m*T + z0)**p`` maps it to a shifted Beta Prime law for ``T``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .betaprime import GenBetaPrime, bp_cdf, bp_pdf, bp_quantile
from .exceptions import DataError, ParameterError
from .kernels import KernelMatrix
from .permanental import CountData, GammaPosterior, PermanentalFit, permprocest

__all__ = [
    "QoiModel",
    "RatioPosterior",
    "QoiPosterior",
    "ratio_estimation_permproc",
    "zbetaprime",
    "t_given_ab",
    "qoi_from_ratio",
]


@dataclass(frozen=True)
class QoiModel:
    """Forward-model coefficients linking the ratio to the quantity of
    interest through ``Z = (m*T + z0)**p``.

    Only increasing transforms (``m > 0`` and ``p > 0``) are supported; for
    other signs the support flips and the shifted Beta Prime form no longer
    holds.
    """

    m: float
    z0: float
    p: float

    def __post_init__(self):
        if not (np.isfinite(self.m) and self.m > 0.0):
            raise ParameterError(f"m must be positive, got {self.m}")
        if not (np.isfinite(self.p) and self.p > 0.0):
            raise ParameterError(f"p must be positive, got {self.p}")
        if not np.isfinite(self.z0):
            raise ParameterError(f"z0 must be finite, got {self.z0}")

    def ratio_to_qoi(self, z):
        """Invert the forward model: ``T = (Z**(1/p) - z0) / m``."""
        return (np.asarray(z, dtype=float) ** (1.0 / self.p) - self.z0) / self.m

    def qoi_to_ratio(self, t):
        """Apply the forward model: ``Z = (m*T + z0)**p``."""
        return (self.m * np.asarray(t, dtype=float) + self.z0) ** self.p


@dataclass
class RatioPosterior:
    """Per-bin posterior of the intensity ratio.

    ``law`` is a vector-parameter generalized Beta Prime with ``p = 1`` and
    ``q_i = rate_b_i / rate_a_i``; ``map_estimate`` is the ratio of the MAP
    (or posterior-mode) intensities.  ``valid`` flags bins whose posterior is
    proper; ``converged`` is False when an underlying fit hit its iteration
    limit.
    """

    law: GenBetaPrime
    map_estimate: np.ndarray
    gamma_num: GammaPosterior
    gamma_denom: GammaPosterior
    valid: np.ndarray
    converged: bool
    fits: tuple[PermanentalFit, PermanentalFit] | None = None

    @property
    def n_bins(self) -> int:
        return np.size(self.law.alpha)

    def pdf(self, z):
        return bp_pdf(z, self.law)

    def cdf(self, z):
        return bp_cdf(z, self.law)

    def quantile(self, u):
        return bp_quantile(u, self.law)

    def median(self):
        return bp_quantile(0.5, self.law)

    def bin_law(self, i: int) -> GenBetaPrime:
        """The scalar-parameter law of a single bin."""
        return GenBetaPrime(
            alpha=float(np.asarray(self.law.alpha)[i]),
            beta=float(np.asarray(self.law.beta)[i]),
            p=float(np.atleast_1d(np.asarray(self.law.p))[min(i, np.size(self.law.p) - 1)]),
            q=float(np.asarray(self.law.q)[i]),
        )


@dataclass
class QoiPosterior:
    """Posterior of the quantity of interest: a per-bin generalized Beta
    Prime shifted to the support ``[-z0/m, inf)``."""

    shift: float
    law: GenBetaPrime
    model: QoiModel
    ratio: RatioPosterior
    map_estimate: np.ndarray

    @property
    def n_bins(self) -> int:
        return self.ratio.n_bins

    def pdf(self, t):
        ta = np.asarray(t, dtype=float)
        inside = ta > self.shift
        vals = bp_pdf(np.where(inside, ta - self.shift, 1.0), self.law)
        out = np.where(inside, vals, 0.0)
        return float(out) if np.ndim(t) == 0 and np.ndim(self.law.alpha) == 0 else out

    def cdf(self, t):
        ta = np.asarray(t, dtype=float)
        inside = ta > self.shift
        vals = bp_cdf(np.where(inside, ta - self.shift, 0.0), self.law)
        out = np.where(inside, vals, 0.0)
        return float(out) if np.ndim(t) == 0 and np.ndim(self.law.alpha) == 0 else out

    def quantile(self, u):
        return self.shift + bp_quantile(u, self.law)

    def median(self):
        return self.quantile(0.5)

    def bin_law(self, i: int) -> GenBetaPrime:
        return GenBetaPrime(
            alpha=float(np.asarray(self.law.alpha)[i]),
            beta=float(np.asarray(self.law.beta)[i]),
            p=float(np.atleast_1d(np.asarray(self.law.p))[min(i, np.size(self.law.p) - 1)]),
            q=float(np.asarray(self.law.q)[i]),
        )


def _ratio_from_gammas(gamma_num, gamma_denom, map_num, map_denom, valid, converged, fits=None):
    q = gamma_denom.rate / gamma_num.rate
    law = GenBetaPrime(alpha=gamma_num.shape, beta=gamma_denom.shape, p=1.0, q=q)
    with np.errstate(divide="ignore", invalid="ignore"):
        map_estimate = np.where(map_denom > 0.0, map_num / map_denom, np.nan)
    return RatioPosterior(
        law=law,
        map_estimate=map_estimate,
        gamma_num=gamma_num,
        gamma_denom=gamma_denom,
        valid=valid,
        converged=converged,
        fits=fits,
    )


def ratio_estimation_permproc(
    counts_num,
    counts_denom,
    km_num: KernelMatrix,
    km_denom: KernelMatrix | None = None,
    c1: float = 1.0,
    c2: float = 1.0,
    g1: float = 1.0,
    g2: float = 1.0,
    maxiter: int = 300,
) -> RatioPosterior:
    """Spatial ratio posterior: two independent permanental fits combined
    into per-bin Beta Prime laws.

    ``km_denom`` defaults to the numerator kernel.  A non-converged fit still
    yields a posterior, flagged through ``converged=False``.
    """
    if km_denom is None:
        km_denom = km_num
    fit_num = permprocest(counts_num, km_num, g=g1, c=c1, maxiter=maxiter)
    fit_denom = permprocest(counts_denom, km_denom, g=g2, c=c2, maxiter=maxiter)
    if fit_num.gamma_post.shape.shape != fit_denom.gamma_post.shape.shape:
        raise DataError("numerator and denominator must share the bin grid")
    valid = np.ones(fit_num.lambda_hat.shape, dtype=bool)
    return _ratio_from_gammas(
        fit_num.gamma_post,
        fit_denom.gamma_post,
        fit_num.lambda_hat,
        fit_denom.lambda_hat,
        valid,
        converged=fit_num.converged and fit_denom.converged,
        fits=(fit_num, fit_denom),
    )


def zbetaprime(
    counts_num,
    counts_denom,
    a1: float = 1.0,
    b1: float = 0.0,
    a2: float = 1.0,
    b2: float = 0.0,
) -> RatioPosterior:
    """Pointwise ratio posterior from conjugate Gamma updates.

    Each bin is treated independently: with ``n`` observed realizations
    totalling ``S`` counts, a ``Gamma(a, b)`` prior becomes
    ``Gamma(a + S, b + n)``.  The default priors are flat (shape 1, rate 0).
    Missing realizations (NaN) simply do not contribute, so bins may have
    different numbers of observations.  Bins with no data under a flat prior
    have an improper posterior and are flagged invalid (``valid=False``)
    with NaN parameters replaced by the prior.
    """
    if not (a1 > 0.0 and a2 > 0.0):
        raise ParameterError("prior shapes a1, a2 must be positive")
    if b1 < 0.0 or b2 < 0.0:
        raise ParameterError("prior rates b1, b2 must be non-negative")
    num = CountData.from_array(counts_num)
    den = CountData.from_array(counts_denom)
    if num.n_bins != den.n_bins:
        raise DataError(
            f"numerator has {num.n_bins} bins but denominator has {den.n_bins}"
        )

    shape_num = a1 + num.totals
    rate_num = b1 + num.exposures
    shape_den = a2 + den.totals
    rate_den = b2 + den.exposures
    valid = (rate_num > 0.0) & (rate_den > 0.0)
    # Improper bins keep a usable placeholder law (rate floored at 1).
    rate_num_safe = np.where(rate_num > 0.0, rate_num, 1.0)
    rate_den_safe = np.where(rate_den > 0.0, rate_den, 1.0)

    gamma_num = GammaPosterior(shape=shape_num, rate=rate_num_safe)
    gamma_den = GammaPosterior(shape=shape_den, rate=rate_den_safe)
    mode_num = np.maximum(shape_num - 1.0, 0.0) / rate_num_safe
    mode_den = np.maximum(shape_den - 1.0, 0.0) / rate_den_safe
    post = _ratio_from_gammas(
        gamma_num, gamma_den, mode_num, mode_den, valid, converged=True
    )
    post.map_estimate[~valid] = np.nan
    return post


def qoi_from_ratio(ratio: RatioPosterior, model: QoiModel) -> QoiPosterior:
    """Push a ratio posterior through ``Z = (m*T + z0)**p``:
    ``T ~ -z0/m + BP(alpha_a, alpha_b, p, q**(1/p)/m)`` per bin."""
    q_t = np.asarray(ratio.law.q, dtype=float) ** (1.0 / model.p) / model.m
    law = GenBetaPrime(alpha=ratio.law.alpha, beta=ratio.law.beta, p=model.p, q=q_t)
    with np.errstate(invalid="ignore"):
        map_estimate = model.ratio_to_qoi(ratio.map_estimate)
    return QoiPosterior(
        shift=-model.z0 / model.m,
        law=law,
        model=model,
        ratio=ratio,
        map_estimate=map_estimate,
    )


def t_given_ab(
    counts_num,
    counts_denom,
    m: float,
    z0: float,
    p: float,
    spatial: bool = True,
    km_num: KernelMatrix | None = None,
    km_denom: KernelMatrix | None = None,
    c1: float = 1.0,
    c2: float = 1.0,
    g1: float = 1.0,
    g2: float = 1.0,
    maxiter: int = 300,
    a1: float = 1.0,
    b1: float = 0.0,
    a2: float = 1.0,
    b2: float = 0.0,
) -> QoiPosterior:
    """Posterior of the quantity of interest ``T`` under ``Z = (m*T + z0)**p``.

    Dispatches to :func:`ratio_estimation_permproc` when ``spatial`` (the
    default, requires ``km_num``) and to :func:`zbetaprime` otherwise, then
    transforms the ratio posterior per bin.
    """
    model = QoiModel(m=m, z0=z0, p=p)
    if spatial:
        if km_num is None:
            raise ParameterError("spatial estimation requires a kernel matrix (km_num)")
        ratio = ratio_estimation_permproc(
            counts_num,
            counts_denom,
            km_num,
            km_denom,
            c1=c1,
            c2=c2,
            g1=g1,
            g2=g2,
            maxiter=maxiter,
        )
    else:
        ratio = zbetaprime(counts_num, counts_denom, a1=a1, b1=b1, a2=a2, b2=b2)
    return qoi_from_ratio(ratio, model)
