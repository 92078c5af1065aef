"""Bayesian estimation and uncertainty quantification for ratios of Poisson
intensities from spatially binned count data.

The pipeline fits per-bin Poisson intensities either through a spatial
squared-Gaussian (permanental) model with closed-form Laplace posteriors or
through pointwise conjugate Gamma updates, turns the two fits into per-bin
generalized Beta Prime laws for the intensity ratio, optionally pushes those
laws through a monotone forward model ``Z = (m*T + z0)**p``, and provides
CRPS scoring and highest-posterior-density sets for the results.
"""

from .betaprime import GenBetaPrime, bp_cdf, bp_pdf, bp_quantile, bp_sample
from .exceptions import (
    CountRatioError,
    DataError,
    DomainError,
    NumericalError,
    ParameterError,
    RenormalizationWarning,
    TruncationWarning,
)
from .kernels import (
    BinGrid,
    EquivalentKernel,
    KernelMatrix,
    equivalent_kernel,
    wendland_kernel,
)
from .permanental import (
    CountData,
    GammaPosterior,
    PermanentalFit,
    log_posterior,
    log_posterior_gradient,
    moment_matched_gamma,
    permprocest,
)
from .ratio import (
    QoiModel,
    QoiPosterior,
    RatioPosterior,
    qoi_from_ratio,
    ratio_estimation_permproc,
    t_given_ab,
    zbetaprime,
)
from .synthetic import (
    TOY_QOI_MODEL,
    simulate_binned_poisson,
    toy_qoi_problem,
    toy_ratio_problem,
)
from .uq import (
    GriddedDensity,
    HpdSet,
    crps,
    crps_gaussian,
    hpd_interval_gaussian,
    hpd_set,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "GenBetaPrime",
    "bp_pdf",
    "bp_cdf",
    "bp_quantile",
    "bp_sample",
    "BinGrid",
    "KernelMatrix",
    "EquivalentKernel",
    "wendland_kernel",
    "equivalent_kernel",
    "CountData",
    "GammaPosterior",
    "PermanentalFit",
    "log_posterior",
    "log_posterior_gradient",
    "moment_matched_gamma",
    "permprocest",
    "QoiModel",
    "RatioPosterior",
    "QoiPosterior",
    "ratio_estimation_permproc",
    "zbetaprime",
    "t_given_ab",
    "qoi_from_ratio",
    "GriddedDensity",
    "HpdSet",
    "crps",
    "crps_gaussian",
    "hpd_set",
    "hpd_interval_gaussian",
    "simulate_binned_poisson",
    "toy_ratio_problem",
    "toy_qoi_problem",
    "TOY_QOI_MODEL",
    "CountRatioError",
    "ParameterError",
    "DomainError",
    "DataError",
    "NumericalError",
    "TruncationWarning",
    "RenormalizationWarning",
]
