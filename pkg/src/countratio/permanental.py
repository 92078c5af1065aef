"""MAP estimation of binned Poisson intensities under a squared-Gaussian prior.

The intensity in bin ``i`` is ``Lambda_i = (c/2) f_i**2`` with latent
``f ~ N(0, K/gamma)``.  Writing ``f = Ktilde psi`` with the equivalent kernel
``Ktilde^-1 = c I + gamma K^-1`` turns MAP estimation into an unconstrained
smooth problem

    l(psi) = sum_i a_i log((c/2) (Ktilde psi)_i**2) - (1/2) psi^T Ktilde psi

maximized by nonlinear conjugate gradients with the analytic gradient
``-Ktilde psi + 2 Ktilde (a / (Ktilde psi))``.  A Laplace approximation
around the optimum gives per-bin Gaussian laws for ``f_i``, which are
moment-matched to Gamma laws for ``Lambda_i``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .exceptions import DataError, NumericalError
from .kernels import (
    EquivalentKernel,
    KernelMatrix,
    _floored_eigenvalues,
    equivalent_kernel,
    weighted_equivalent_kernel,
)

__all__ = [
    "CountData",
    "GammaPosterior",
    "PermanentalFit",
    "log_posterior",
    "log_posterior_gradient",
    "permprocest",
]

#: Relative gradient max-norm below which a fit counts as converged.
GRADIENT_TOLERANCE = 1e-6


@dataclass(frozen=True)
class CountData:
    """Bins-by-realizations matrix of observed counts; NaN marks missing."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=float)
        if counts.ndim == 1:
            counts = counts[:, None]
        if counts.ndim != 2 or counts.size == 0:
            raise DataError(f"counts must be a bins x realizations matrix, got shape {counts.shape}")
        present = ~np.isnan(counts)
        if np.any(counts[present] < 0.0) or np.any(np.isinf(counts)):
            raise DataError("counts must be non-negative (NaN for missing entries)")
        if np.any(present.sum(axis=0) == 0):
            raise DataError("every realization column needs at least one observed bin")
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_array(cls, counts) -> "CountData":
        if isinstance(counts, cls):
            return counts
        return cls(counts=counts)

    @property
    def n_bins(self) -> int:
        return self.counts.shape[0]

    @property
    def n_realizations(self) -> int:
        return self.counts.shape[1]

    @property
    def totals(self) -> np.ndarray:
        """Per-bin count totals over the observed realizations."""
        return np.nansum(self.counts, axis=1)

    @property
    def exposures(self) -> np.ndarray:
        """Per-bin number of observed (non-missing) realizations."""
        return (~np.isnan(self.counts)).sum(axis=1).astype(float)

    @property
    def is_complete(self) -> bool:
        return not np.any(np.isnan(self.counts))


@dataclass(frozen=True)
class GammaPosterior:
    """Per-bin Gamma(shape, rate) posterior laws of the intensities."""

    shape: np.ndarray
    rate: np.ndarray

    def __post_init__(self):
        shape = np.asarray(self.shape, dtype=float)
        rate = np.asarray(self.rate, dtype=float)
        if shape.shape != rate.shape:
            raise DataError("shape and rate vectors must have matching lengths")
        if np.any(shape <= 0.0) or np.any(rate <= 0.0):
            raise DataError("Gamma shape and rate parameters must be positive")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "rate", rate)

    @property
    def mean(self) -> np.ndarray:
        return self.shape / self.rate

    @property
    def variance(self) -> np.ndarray:
        return self.shape / self.rate**2


@dataclass
class PermanentalFit:
    """MAP fit, Laplace posterior, and per-bin Gamma laws for one process."""

    psi_hat: np.ndarray
    f_hat: np.ndarray
    lambda_hat: np.ndarray
    sigma_hat: np.ndarray
    mu: np.ndarray
    sigma2: np.ndarray
    gamma_post: GammaPosterior
    converged: bool
    iterations: int
    grad_norm: float
    grad_tol: float
    eq: EquivalentKernel
    c: float
    n_realizations: int


def log_posterior(psi, counts, eq: EquivalentKernel, c: float = 1.0) -> float:
    """Log-posterior of the representer coefficients.

    ``counts`` is the per-bin count vector (totals when several realizations
    were pooled).  Returns ``-inf`` when ``(Ktilde psi)_i`` vanishes in a bin
    with positive counts, which the optimizer treats as an infeasible step.
    """
    psi = np.asarray(psi, dtype=float)
    a = np.asarray(counts, dtype=float)
    f = eq.matrix @ psi
    observed = a > 0
    if np.any(f[observed] == 0.0):
        return -np.inf
    quad = 0.5 * float(psi @ f)
    if not np.any(observed):
        return -quad
    fo = f[observed]
    ll = float(np.sum(a[observed] * (np.log(0.5 * c) + 2.0 * np.log(np.abs(fo)))))
    return ll - quad


def log_posterior_gradient(psi, counts, eq: EquivalentKernel, c: float = 1.0) -> np.ndarray:
    """Analytic gradient ``-Ktilde psi + 2 Ktilde (a / (Ktilde psi))`` with
    elementwise division restricted to bins that have counts."""
    psi = np.asarray(psi, dtype=float)
    a = np.asarray(counts, dtype=float)
    f = eq.matrix @ psi
    observed = a > 0
    if np.any(f[observed] == 0.0):
        raise NumericalError("gradient undefined: fitted value vanishes in a bin with counts")
    ratio = np.zeros_like(f)
    ratio[observed] = a[observed] / f[observed]
    return -f + 2.0 * (eq.matrix @ ratio)


def _initial_psi(a: np.ndarray, exposures: np.ndarray, eq: EquivalentKernel, c: float) -> np.ndarray:
    """Stationarity-anchored start: at any optimum ``psi = 2 a / f``
    elementwise, so seed with ``f0 = sqrt(2 (a + 1/2) / exposure)``.

    Solving ``Ktilde psi0 = f0`` exactly would divide the Poisson noise of
    ``f0`` by the floored near-null eigenvalues of ``Ktilde``, exploding the
    prior term and stalling the optimizer, so the anchored form is used
    instead and checked for feasibility.
    """
    c_eff = c * np.maximum(exposures, 1.0)
    f0 = np.sqrt(2.0 * (a + 0.5) / c_eff)
    psi0 = np.where(a > 0, 2.0 * a / f0, 0.0)
    if np.all((eq.matrix @ psi0)[a > 0] > 0.0):
        return psi0
    # Fall back to a constant coefficient vector scaled to the data.
    ones = np.ones_like(a)
    base = eq.matrix @ ones
    if np.all(base[a > 0] > 0.0):
        scale = float(np.mean(f0) / np.mean(base))
        return scale * ones
    raise NumericalError("could not construct a feasible starting point")


def _line_search(value, grad, psi, fx, direction, slope, step):
    """Armijo backtracking followed by secant refinement of the line minimum.

    Returns ``(t, trial, ft, g_trial)`` or ``None`` when no feasible uphill
    step exists.  Steps where the objective is ``-inf`` (a zero fitted value
    at a bin with counts) are rejected by the backtracking loop.
    """
    t = step
    accepted = False
    for _ in range(80):
        trial = psi + t * direction
        ft = value(trial)
        if np.isfinite(ft) and ft >= fx + 1e-4 * t * slope:
            accepted = True
            break
        t *= 0.5
    if not accepted:
        return None

    g_trial = grad(trial)
    t_lo, s_lo = 0.0, slope
    for _ in range(8):
        s_t = float(g_trial @ direction)
        if abs(s_t) <= 0.1 * abs(slope):
            break
        if s_t > 0.0:
            # Minimum lies further out: expand (secant has no bracket yet).
            t_lo, s_lo = t, s_t
            t_next = 2.0 * t
        else:
            # Bracketed: secant step towards the zero of the directional
            # derivative, safeguarded by bisection.
            t_next = t_lo + s_lo * (t - t_lo) / (s_lo - s_t)
            if not t_lo < t_next < t:
                t_next = 0.5 * (t_lo + t)
        candidate = psi + t_next * direction
        fc = value(candidate)
        if not np.isfinite(fc) or fc < ft:
            break
        t, trial, ft = t_next, candidate, fc
        g_trial = grad(trial)
    return t, trial, ft, g_trial


def _maximize_log_posterior(psi0, a, eq, c, maxiter, gtol_abs, precond=None):
    """Polak-Ribiere conjugate gradients with restarts and a backtracking
    line search that rejects steps onto the log barrier.

    ``precond`` is an optional symmetric positive-definite matrix applied to
    gradients before forming search directions; convergence is still judged
    on the raw gradient max-norm.
    """

    def value(p):
        return log_posterior(p, a, eq, c)

    def grad(p):
        return log_posterior_gradient(p, a, eq, c)

    def precondition(g):
        return g if precond is None else precond @ g

    psi = np.asarray(psi0, dtype=float).copy()
    fx = value(psi)
    if not np.isfinite(fx):
        raise NumericalError("infeasible starting point for the optimizer")
    gx = grad(psi)
    sx = precondition(gx)
    direction = sx.copy()
    step = 1.0
    iterations = 0

    for iterations in range(1, maxiter + 1):
        gnorm = float(np.max(np.abs(gx)))
        if gnorm < gtol_abs:
            return psi, True, iterations - 1, gnorm
        slope = float(gx @ direction)
        if slope <= 0.0:
            direction = sx.copy()
            slope = float(gx @ sx)
        result = _line_search(value, grad, psi, fx, direction, slope, step)
        if result is None:
            if np.array_equal(direction, sx):
                break
            direction = sx.copy()
            result = _line_search(value, grad, psi, fx, direction, float(gx @ sx), 1.0)
            if result is None:
                break
        t, trial, ft, g_new = result
        s_new = precondition(g_new)
        beta = max(0.0, float(g_new @ (s_new - sx)) / float(gx @ sx))
        direction = s_new + beta * direction
        psi, fx, gx, sx = trial, ft, g_new, s_new
        step = max(t, 1e-12)

    gnorm = float(np.max(np.abs(gx)))
    return psi, gnorm < gtol_abs, iterations, gnorm


def _laplace_covariance(eq: EquivalentKernel, a: np.ndarray, f_hat: np.ndarray) -> np.ndarray:
    """Posterior covariance of ``f``: ``(Ktilde^-1 + W)^-1`` with
    ``W = diag(2 a_i / f_i**2)`` (zero rows for empty bins).

    Equals the textbook ``Ktilde - Ktilde (D^-1 + Ktilde)^-1 Ktilde`` form
    when every bin has counts, but stays defined when some ``a_i = 0``.
    """
    w = np.zeros_like(f_hat)
    observed = a > 0
    w[observed] = 2.0 * a[observed] / f_hat[observed] ** 2
    precision = eq.inverse + np.diag(w)
    try:
        cf = linalg.cho_factor(precision)
        cov = linalg.cho_solve(cf, np.eye(precision.shape[0]))
    except linalg.LinAlgError as exc:
        raise NumericalError("Laplace precision matrix is not positive definite") from exc
    return 0.5 * (cov + cov.T)


def moment_matched_gamma(mu, sigma2, c: float = 1.0) -> GammaPosterior:
    """Gamma(shape, rate) with the same mean and variance as
    ``(c/2) f**2`` for ``f ~ N(mu, sigma2)``:

    shape = (mu^2 + s2)^2 / (2 s2 (2 mu^2 + s2)),
    rate  = (mu^2 + s2) / (s2 c (2 mu^2 + s2)).
    """
    mu = np.asarray(mu, dtype=float)
    sigma2 = np.asarray(sigma2, dtype=float)
    m2 = mu**2 + sigma2
    denom = sigma2 * (2.0 * mu**2 + sigma2)
    return GammaPosterior(shape=m2**2 / (2.0 * denom), rate=m2 / (c * denom))


def permprocest(
    counts,
    km: KernelMatrix,
    g: float = 1.0,
    c: float = 1.0,
    maxiter: int = 300,
) -> PermanentalFit:
    """Fit one binned process: MAP intensities, Laplace posterior, and
    moment-matched per-bin Gamma laws.

    ``counts`` may be a vector, a bins-by-realizations matrix (NaN marks
    missing entries), or a :class:`CountData`.  With ``R`` complete
    realizations the totals are fitted against exposure ``R*c``; with uneven
    missingness each bin gets its own exposure count.  ``g`` is the marginal
    precision of the latent field and ``c`` its intensity scaling.  A fit
    that hits ``maxiter`` is returned with ``converged=False`` rather than
    raising.
    """
    data = CountData.from_array(counts)
    if data.n_bins != km.d:
        raise DataError(f"counts have {data.n_bins} bins but the kernel has {km.d}")
    if maxiter < 1:
        raise DataError(f"maxiter must be at least 1, got {maxiter}")

    a = data.totals
    exposures = data.exposures
    if np.all(exposures == exposures[0]):
        eq = equivalent_kernel(km, c=c * float(exposures[0]), gamma=g)
    else:
        eq = weighted_equivalent_kernel(km, c=c * exposures, gamma=g)

    # Near the optimum the Hessian is close to Ktilde (I + c_eff Ktilde), so
    # its eigen-inverse makes an effective fixed preconditioner.
    c_mean = c * float(np.mean(exposures))
    eta, _ = _floored_eigenvalues(km)
    h = eta / (c_mean * eta + g)
    phi = km.eigenvectors
    precond = (phi / (h * (1.0 + c_mean * h))) @ phi.T

    gtol_abs = GRADIENT_TOLERANCE * (1.0 + float(np.max(np.abs(eq.matrix @ a))))
    psi0 = _initial_psi(a, exposures, eq, c)
    psi_hat, converged, iterations, grad_norm = _maximize_log_posterior(
        psi0, a, eq, c, maxiter, gtol_abs, precond=precond
    )

    f_hat = eq.matrix @ psi_hat
    lambda_hat = 0.5 * c * f_hat**2
    sigma_hat = _laplace_covariance(eq, a, f_hat)
    sigma2 = np.diag(sigma_hat).copy()
    sigma2 = np.maximum(sigma2, np.finfo(float).tiny)
    gamma_post = moment_matched_gamma(f_hat, sigma2, c)

    return PermanentalFit(
        psi_hat=psi_hat,
        f_hat=f_hat,
        lambda_hat=lambda_hat,
        sigma_hat=sigma_hat,
        mu=f_hat,
        sigma2=sigma2,
        gamma_post=gamma_post,
        converged=converged,
        iterations=iterations,
        grad_norm=grad_norm,
        grad_tol=gtol_abs,
        eq=eq,
        c=float(c),
        n_realizations=data.n_realizations,
    )
