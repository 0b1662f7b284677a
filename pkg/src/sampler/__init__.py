"""Free Gibbs Transport - Matrix Model Sampler Package"""

from .chain import ChainResult, integrated_autocorr_time, run_chain, sample_ensemble
from .concentration import CovarianceEstimate, concentration_check, trace_series
from .langevin import (
    PotentialField,
    as_field,
    hermitian_noise,
    langevin_step,
    mala_move,
    mala_step,
    real_norm2,
)

__all__ = [
    "ChainResult",
    "CovarianceEstimate",
    "PotentialField",
    "as_field",
    "concentration_check",
    "hermitian_noise",
    "integrated_autocorr_time",
    "langevin_step",
    "mala_move",
    "mala_step",
    "real_norm2",
    "run_chain",
    "sample_ensemble",
    "trace_series",
]
