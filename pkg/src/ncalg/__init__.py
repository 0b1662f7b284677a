"""Free Gibbs Transport - Non-commutative Calculus Package"""

from .calculus import (
    compose,
    compose_trace,
    cyclic_derivative,
    cyclic_grad,
    cyclic_gradient_poly,
    delta_flat,
    delta_V,
    directional,
    evaluate_scalar,
    fdq,
    fdq_iter,
    fdq_tensor,
    finite_n_correction,
    generator,
    hash_multi,
    hash_op,
    hessian,
    laplacian,
    laplacian_V,
    multiply_legs,
    rho,
    sd_residual_expr,
    substitute_tensor,
    tensor_trace,
)
from .poly import NCPoly, TensorPoly, TracePoly, as_trace, tensor, variables
from .potential import PotentialSpec, combine, load_potential, resolve_potential, univariate

__all__ = [
    "NCPoly",
    "TracePoly",
    "TensorPoly",
    "PotentialSpec",
    "as_trace",
    "combine",
    "compose",
    "compose_trace",
    "cyclic_derivative",
    "cyclic_grad",
    "cyclic_gradient_poly",
    "delta_V",
    "delta_flat",
    "directional",
    "evaluate_scalar",
    "fdq",
    "fdq_iter",
    "fdq_tensor",
    "finite_n_correction",
    "generator",
    "hash_multi",
    "hash_op",
    "hessian",
    "laplacian",
    "laplacian_V",
    "load_potential",
    "multiply_legs",
    "resolve_potential",
    "rho",
    "sd_residual_expr",
    "substitute_tensor",
    "tensor",
    "tensor_trace",
    "univariate",
    "variables",
]
