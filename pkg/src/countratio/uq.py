"""Scoring and credible-set utilities.

Continuous ranked probability scores for gridded and Gaussian predictive
distributions, and highest-posterior-density sets for gridded (possibly
multimodal) and Gaussian densities.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special
from scipy.integrate import cumulative_trapezoid, trapezoid
from scipy.stats import norm

from .exceptions import DomainError, ParameterError, RenormalizationWarning, TruncationWarning

__all__ = [
    "GriddedDensity",
    "HpdSet",
    "crps",
    "crps_gaussian",
    "hpd_set",
    "hpd_interval_gaussian",
]

#: Densities integrating to 1 within this tolerance are rescaled silently.
MASS_TOLERANCE = 1e-3


@dataclass(frozen=True)
class GriddedDensity:
    """A distribution tabulated on a strictly increasing grid.

    ``kind`` is ``"pdf"`` for density values or ``"cdf"`` for cumulative
    values.  Densities are rescaled to unit mass at construction; ``mass``
    records the trapezoid integral before rescaling.  CDF values are used
    as given (they cannot be renormalized meaningfully).
    """

    grid: np.ndarray
    values: np.ndarray
    kind: str = "pdf"
    mass: float = field(default=1.0, compare=False)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.size < 2:
            raise DomainError("grid must be a 1-D array with at least two points")
        if values.shape != grid.shape:
            raise DomainError(
                f"values shape {values.shape} does not match grid shape {grid.shape}"
            )
        if not np.all(np.isfinite(grid)) or not np.all(np.isfinite(values)):
            raise DomainError("grid and values must be finite")
        if np.any(np.diff(grid) <= 0.0):
            raise DomainError("grid must be strictly increasing")
        if self.kind not in ("pdf", "cdf"):
            raise ParameterError(f"kind must be 'pdf' or 'cdf', got {self.kind!r}")
        if self.kind == "pdf":
            if np.any(values < 0.0):
                raise DomainError("density values must be non-negative")
            total = float(trapezoid(values, grid))
            if total <= 0.0:
                raise DomainError("density has zero mass on the grid")
            if abs(total - 1.0) > MASS_TOLERANCE:
                warnings.warn(
                    f"density integrates to {total:.6g}; rescaling to unit mass",
                    RenormalizationWarning,
                    stacklevel=3,
                )
            values = values / total
            object.__setattr__(self, "mass", total)
        else:
            if np.any(np.diff(values) < -1e-12) or values[0] < -1e-12 or values[-1] > 1.0 + 1e-12:
                raise DomainError("cdf values must be non-decreasing within [0, 1]")
            values = np.clip(values, 0.0, 1.0)
            object.__setattr__(self, "mass", float(values[-1] - values[0]))
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_pdf(cls, grid, values) -> "GriddedDensity":
        return cls(grid=grid, values=values, kind="pdf")

    @classmethod
    def from_cdf(cls, grid, values) -> "GriddedDensity":
        return cls(grid=grid, values=values, kind="cdf")

    def cdf_values(self) -> np.ndarray:
        """Cumulative values on the grid (cumulative trapezoid for densities,
        clamped to [0, 1])."""
        if self.kind == "cdf":
            return self.values
        cdf = cumulative_trapezoid(self.values, self.grid, initial=0.0)
        return np.clip(cdf, 0.0, 1.0)


@dataclass(frozen=True)
class HpdSet:
    """A highest-density set: grid members, covering intervals, the solved
    density threshold, and the probability mass actually captured."""

    member_points: np.ndarray
    intervals: list[tuple[float, float]]
    threshold: float
    achieved_mass: float

    @property
    def lower(self) -> float:
        return self.intervals[0][0]

    @property
    def upper(self) -> float:
        return self.intervals[-1][1]

    def contains(self, x) -> np.ndarray:
        """Elementwise membership of ``x`` in any of the intervals."""
        xa = np.asarray(x, dtype=float)
        hit = np.zeros(xa.shape, dtype=bool)
        for lo, hi in self.intervals:
            hit |= (xa >= lo) & (xa <= hi)
        return hit


def crps(dist: GriddedDensity, xhat: float) -> float:
    """Continuous ranked probability score of a gridded predictive
    distribution against the observed value ``xhat``.

    Evaluates ``integral (F(y) - H(y - xhat))**2 dy`` by the trapezoid rule
    on the grid, with ``H`` the right-continuous Heaviside step.  Densities
    are first integrated to a CDF via the cumulative trapezoid rule.  A
    ``TruncationWarning`` is emitted when the CDF does not reach
    approximately 1 at the right endpoint.
    """
    grid = dist.grid
    cdf = dist.cdf_values()
    if cdf[-1] < 1.0 - MASS_TOLERANCE:
        warnings.warn(
            f"cdf reaches only {cdf[-1]:.6g} at the right grid endpoint; "
            "the score is truncated",
            TruncationWarning,
            stacklevel=2,
        )
    step = np.where(grid >= xhat, 1.0, 0.0)
    return float(trapezoid((cdf - step) ** 2, grid))


def crps_gaussian(mu: float, sigma: float, xhat: float) -> float:
    """Closed-form CRPS of a Gaussian predictive distribution:
    ``sigma * (z*(2*Phi(z) - 1) + 2*phi(z) - 1/sqrt(pi))`` with
    ``z = (xhat - mu)/sigma``."""
    if not sigma > 0.0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    z = (xhat - mu) / sigma
    return float(sigma * (z * (2.0 * special.ndtr(z) - 1.0) + 2.0 * norm.pdf(z) - 1.0 / np.sqrt(np.pi)))


def _masked_mass(grid: np.ndarray, values: np.ndarray, mask: np.ndarray) -> float:
    """Trapezoid integral of ``values`` over cells whose both endpoints are in
    ``mask``."""
    both = mask[:-1] & mask[1:]
    if not np.any(both):
        return 0.0
    dx = np.diff(grid)
    avg = 0.5 * (values[:-1] + values[1:])
    return float(np.sum(dx[both] * avg[both]))


def _intervals_from_mask(grid: np.ndarray, mask: np.ndarray) -> list[tuple[float, float]]:
    starts = list(np.flatnonzero(mask[1:] & ~mask[:-1]) + 1)
    if mask[0]:
        starts.insert(0, 0)
    intervals = []
    for start in starts:
        stop = start
        while stop + 1 < mask.size and mask[stop + 1]:
            stop += 1
        intervals.append((float(grid[start]), float(grid[stop])))
    return intervals


def hpd_set(dist: GriddedDensity, alpha: float) -> HpdSet:
    """Highest-posterior-density set of mass ``alpha`` for a gridded density.

    Solves ``g(h) = integral_{f >= h} f dx - alpha = 0`` by bracketed
    rootfinding for ``h`` in ``[0, max f]`` and returns all grid points with
    ``f >= h`` grouped into disjoint closed intervals, so multimodal
    densities yield several intervals.  When the density has a flat top
    (``g`` never changes sign, e.g. a uniform), tied points are included
    left to right until the requested mass is reached.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if dist.kind != "pdf":
        raise ParameterError("hpd_set requires a density (kind='pdf')")
    grid = dist.grid
    f = dist.values
    fmax = float(f.max())

    def excess(h):
        return _masked_mass(grid, f, f >= h) - alpha

    if excess(fmax) > 0.0:
        return _plateau_fill(grid, f, alpha, fmax)

    h_root = optimize.brentq(excess, 0.0, fmax, xtol=1e-10 * fmax, rtol=8.9e-16)
    # g is a step function of h; snap to whichever neighbouring density level
    # captures mass closest to alpha.
    levels = np.unique(f)
    idx = int(np.searchsorted(levels, h_root))
    candidates = [h_root]
    if idx < levels.size:
        candidates.append(float(levels[idx]))
    if idx > 0:
        candidates.append(float(levels[idx - 1]))
    best = min(candidates, key=lambda h: abs(excess(h)))
    mask = f >= best
    return HpdSet(
        member_points=grid[mask],
        intervals=_intervals_from_mask(grid, mask),
        threshold=float(best),
        achieved_mass=float(excess(best) + alpha),
    )


def _plateau_fill(grid: np.ndarray, f: np.ndarray, alpha: float, fmax: float) -> HpdSet:
    """Tie-break for flat-topped densities: keep everything strictly above the
    top level, then add tied points left to right until mass alpha."""
    tied = f >= fmax
    mask = np.zeros(f.size, dtype=bool)
    order = np.flatnonzero(tied)
    for j in order:
        mask[j] = True
        if _masked_mass(grid, f, mask) >= alpha:
            break
    return HpdSet(
        member_points=grid[mask],
        intervals=_intervals_from_mask(grid, mask),
        threshold=fmax,
        achieved_mass=_masked_mass(grid, f, mask),
    )


def hpd_interval_gaussian(mu: float, sigma: float, alpha: float) -> HpdSet:
    """Exact ``alpha``-HPD interval of ``N(mu, sigma^2)``:
    ``mu + sigma * PhiInv((1 -/+ alpha)/2)``."""
    if not sigma > 0.0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    lo = mu + sigma * special.ndtri(0.5 * (1.0 - alpha))
    hi = mu + sigma * special.ndtri(0.5 * (1.0 + alpha))
    return HpdSet(
        member_points=np.array([lo, hi]),
        intervals=[(float(lo), float(hi))],
        threshold=float(norm.pdf(hi, loc=mu, scale=sigma)),
        achieved_mass=float(alpha),
    )
