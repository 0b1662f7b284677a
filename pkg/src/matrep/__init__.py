"""Free Gibbs Transport - Matrix Representation Package"""

from .certify import (
    COUNTEREXAMPLE_MIN_EIG,
    CertificateResult,
    ColumnBlock,
    certify_convexity,
    old_convexity_counterexample,
)
from .evaluate import (
    CompiledPoly,
    CompiledTensor,
    WordTable,
    eval_poly,
    eval_scalar,
    eval_tensor_apply,
    eval_trace_poly,
)
from .hessian import HermCoordinates, HessianKernel, hessian_min_eig, real_inner
from .identities import IDENTITIES, IdentityResult, check_identity, run_identity_suite
from .matrices import (
    Ensemble,
    MatrixTuple,
    check_confinement,
    check_hermitian,
    hermitize,
    op_norm,
    random_hermitian,
    random_tuple,
    tau_hat,
)
from .residuals import SDResidual, monomial_battery, sd_residual

__all__ = [
    "COUNTEREXAMPLE_MIN_EIG",
    "IDENTITIES",
    "CertificateResult",
    "ColumnBlock",
    "CompiledPoly",
    "CompiledTensor",
    "Ensemble",
    "HermCoordinates",
    "HessianKernel",
    "IdentityResult",
    "MatrixTuple",
    "SDResidual",
    "WordTable",
    "certify_convexity",
    "check_confinement",
    "check_hermitian",
    "check_identity",
    "eval_poly",
    "eval_scalar",
    "eval_tensor_apply",
    "eval_trace_poly",
    "hermitize",
    "hessian_min_eig",
    "monomial_battery",
    "old_convexity_counterexample",
    "op_norm",
    "random_hermitian",
    "random_tuple",
    "real_inner",
    "run_identity_suite",
    "sd_residual",
    "tau_hat",
]
