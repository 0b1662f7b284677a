"""Free Gibbs Transport - One-variable Oracles"""

from .classical import (
    ClassicalTransport,
    GeneratorGrid,
    GibbsDensity,
    GridFunc,
    classical_transport_1d,
    gaussian_moment,
    log_partition_derivative,
    oracle_error,
    poisson_gradient,
    quantile_transport,
    uniform_grid,
)
from .equilibrium import (
    EqMeasure,
    cdf_quantile,
    equilibrium_measure,
    principal_value_residual,
    quartic_endpoint,
    semicircle_moment,
    spectral_ks,
)

__all__ = [
    "ClassicalTransport",
    "EqMeasure",
    "GeneratorGrid",
    "GibbsDensity",
    "GridFunc",
    "cdf_quantile",
    "classical_transport_1d",
    "equilibrium_measure",
    "gaussian_moment",
    "log_partition_derivative",
    "oracle_error",
    "poisson_gradient",
    "principal_value_residual",
    "quantile_transport",
    "quartic_endpoint",
    "semicircle_moment",
    "spectral_ks",
    "uniform_grid",
]
