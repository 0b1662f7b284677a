"""Free Gibbs Transport - Free SDE Package"""

from .family import PotentialFamily, load_family, resolve_family
from .sde import (
    ContractionResult,
    NoiseSource,
    RecordingNoise,
    SdePath,
    SharedNoise,
    brownian_increment,
    coupled_contraction,
    euler_step,
    integrate,
    sde_path,
    stability_bound,
    step_count,
)
from .semigroup import (
    GeneratorCheck,
    ItoResidual,
    MartingaleReport,
    RefinementResult,
    SemigroupEstimate,
    SemigroupPropertyResult,
    dt_refinement,
    generator_check,
    ito_residual,
    martingale_check,
    ou_second_moment,
    probe_matrices,
    semigroup_eval,
    semigroup_property_check,
)

__all__ = [
    "ContractionResult",
    "GeneratorCheck",
    "ItoResidual",
    "MartingaleReport",
    "NoiseSource",
    "PotentialFamily",
    "RecordingNoise",
    "RefinementResult",
    "SdePath",
    "SharedNoise",
    "SemigroupEstimate",
    "SemigroupPropertyResult",
    "brownian_increment",
    "coupled_contraction",
    "dt_refinement",
    "euler_step",
    "generator_check",
    "integrate",
    "ito_residual",
    "load_family",
    "martingale_check",
    "ou_second_moment",
    "probe_matrices",
    "resolve_family",
    "sde_path",
    "semigroup_eval",
    "semigroup_property_check",
    "stability_bound",
    "step_count",
]
