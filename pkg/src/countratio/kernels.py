"""Prior kernel matrices over bin centers and the ridge-regularized kernel.

The spatial prior on the latent vector is ``f ~ N(0, K/gamma)`` with ``K``
built from a positive-definite kernel at the bin centers.  Folding the
quadratic exposure penalty ``(c/2)<f, f>`` into the prior produces the
equivalent kernel ``Ktilde`` with ``Ktilde^-1 = c*I + gamma*K^-1``, computed
here through the eigendecomposition of ``K`` so that rank-deficient kernels
stay usable (small eigenvalues are floored at a relative jitter).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .exceptions import DataError, NumericalError, ParameterError

__all__ = [
    "BinGrid",
    "KernelMatrix",
    "EquivalentKernel",
    "wendland_kernel",
    "equivalent_kernel",
]

#: Relative floor applied to kernel eigenvalues before inversion.
EIGENVALUE_JITTER = 1e-10


@dataclass(frozen=True)
class BinGrid:
    """Bin centers (rows for N-dimensional coordinates) and bin widths."""

    centers: np.ndarray
    widths: np.ndarray

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=float)
        widths = np.asarray(self.widths, dtype=float)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "widths", widths)
        if centers.ndim not in (1, 2):
            raise DataError("centers must be a vector or a matrix of row coordinates")
        d = centers.shape[0]
        if d < 2:
            raise DataError(f"need at least 2 bins, got {d}")
        if widths.shape != (d,):
            raise DataError(f"widths must have shape ({d},), got {widths.shape}")
        if np.any(widths <= 0.0) or not np.all(np.isfinite(widths)):
            raise DataError("bin widths must be positive and finite")
        pts = centers if centers.ndim == 2 else centers[:, None]
        if np.unique(pts, axis=0).shape[0] != d:
            raise DataError("bin centers must be pairwise distinct")

    @classmethod
    def regular(cls, n_bins: int, lower: float = -1.0, upper: float = 1.0) -> "BinGrid":
        """Equal subdivision of ``[lower, upper]`` with centers at midpoints."""
        if n_bins < 2:
            raise DataError(f"need at least 2 bins, got {n_bins}")
        if not upper > lower:
            raise ParameterError("upper must exceed lower")
        width = (upper - lower) / n_bins
        centers = lower + width * (np.arange(n_bins) + 0.5)
        return cls(centers=centers, widths=np.full(n_bins, width))

    @property
    def n_bins(self) -> int:
        return self.centers.shape[0]


@dataclass(frozen=True)
class KernelMatrix:
    """A symmetric PSD kernel matrix together with its eigendecomposition.

    ``eigenvalues`` are sorted descending; ``eigenvectors`` holds the matching
    orthonormal eigenvectors as columns.
    """

    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @classmethod
    def from_matrix(cls, matrix) -> "KernelMatrix":
        """Validate symmetry and near-positive-semidefiniteness and decompose."""
        K = np.asarray(matrix, dtype=float)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise DataError(f"kernel matrix must be square, got shape {K.shape}")
        if not np.all(np.isfinite(K)):
            raise DataError("kernel matrix contains non-finite entries")
        scale = max(1.0, float(np.abs(K).max()))
        if float(np.abs(K - K.T).max()) > 1e-12 * scale:
            raise DataError("kernel matrix is not symmetric")
        K = 0.5 * (K + K.T)
        eigenvalues, eigenvectors = np.linalg.eigh(K)
        eigenvalues = eigenvalues[::-1].copy()
        eigenvectors = eigenvectors[:, ::-1].copy()
        top = eigenvalues[0]
        if top > 0 and eigenvalues[-1] < -1e-10 * top:
            raise DataError(
                "kernel matrix is not positive semidefinite "
                f"(most negative eigenvalue {eigenvalues[-1]:.3e})"
            )
        return cls(matrix=K, eigenvalues=eigenvalues, eigenvectors=eigenvectors)

    @property
    def d(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class EquivalentKernel:
    """``Ktilde = Phi diag(eta/(c*eta + gamma)) Phi^T`` and its exact inverse.

    ``n_floored`` reports how many kernel eigenvalues were raised to the
    jitter floor before inversion.  ``c`` is a scalar for uniform exposure or
    a per-bin vector when realizations are missing unevenly.
    """

    matrix: np.ndarray
    inverse: np.ndarray
    c: float | np.ndarray
    gamma: float
    n_floored: int

    @property
    def d(self) -> int:
        return self.matrix.shape[0]


def wendland_kernel(grid, support_width: float, variance: float = 1.0) -> KernelMatrix:
    """Compactly supported Wendland covariance over the bin centers.

    ``K_ij = variance * (1 - r/rho)_+^4 * (4r/rho + 1)`` with ``r`` the
    Euclidean distance between centers and ``rho = support_width``; entries
    vanish for ``r >= rho`` and the diagonal equals ``variance``.
    """
    if not support_width > 0.0:
        raise ParameterError(f"support_width must be positive, got {support_width}")
    if not variance > 0.0:
        raise ParameterError(f"variance must be positive, got {variance}")
    centers = grid.centers if isinstance(grid, BinGrid) else np.asarray(grid, dtype=float)
    pts = centers if centers.ndim == 2 else centers[:, None]
    r = cdist(pts, pts)
    u = r / support_width
    K = variance * np.clip(1.0 - u, 0.0, None) ** 4 * (4.0 * u + 1.0)
    return KernelMatrix.from_matrix(K)


def _floored_eigenvalues(km: KernelMatrix):
    eta = km.eigenvalues
    top = float(eta[0])
    if top <= 0.0:
        raise NumericalError("degenerate kernel: all eigenvalues vanish")
    jitter = EIGENVALUE_JITTER * top
    floored = int(np.count_nonzero(eta < jitter))
    return np.maximum(eta, jitter), floored


def equivalent_kernel(km: KernelMatrix, c: float = 1.0, gamma: float = 1.0) -> EquivalentKernel:
    """Build ``(c*I + gamma*K^-1)^-1`` from the eigendecomposition of ``K``."""
    if not c > 0.0:
        raise ParameterError(f"c must be positive, got {c}")
    if not gamma > 0.0:
        raise ParameterError(f"gamma must be positive, got {gamma}")
    eta, n_floored = _floored_eigenvalues(km)
    phi = km.eigenvectors
    h = eta / (c * eta + gamma)
    matrix = (phi * h) @ phi.T
    inverse = (phi * (c + gamma / eta)) @ phi.T
    return EquivalentKernel(
        matrix=0.5 * (matrix + matrix.T),
        inverse=0.5 * (inverse + inverse.T),
        c=float(c),
        gamma=float(gamma),
        n_floored=n_floored,
    )


def weighted_equivalent_kernel(km: KernelMatrix, c: np.ndarray, gamma: float = 1.0) -> EquivalentKernel:
    """Equivalent kernel for per-bin exposure ``(diag(c) + gamma*K^-1)^-1``.

    Used when realizations are missing unevenly across bins, in which case the
    exposure penalty is ``diag(c_i)`` instead of ``c*I``.  Entries of ``c``
    may be zero (bins with no data); ``gamma`` keeps the matrix invertible.
    """
    c = np.asarray(c, dtype=float)
    if c.shape != (km.d,):
        raise DataError(f"c must have shape ({km.d},), got {c.shape}")
    if np.any(c < 0.0):
        raise ParameterError("per-bin exposure must be non-negative")
    if not gamma > 0.0:
        raise ParameterError(f"gamma must be positive, got {gamma}")
    eta, n_floored = _floored_eigenvalues(km)
    phi = km.eigenvectors
    a = phi.T @ (c[:, None] * phi) + np.diag(gamma / eta)
    matrix = phi @ np.linalg.solve(a, phi.T)
    inverse = phi @ a @ phi.T
    return EquivalentKernel(
        matrix=0.5 * (matrix + matrix.T),
        inverse=0.5 * (inverse + inverse.T),
        c=c,
        gamma=float(gamma),
        n_floored=n_floored,
    )
