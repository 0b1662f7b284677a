"""
Free Gibbs Transport - Langevin Moves

Hermitian Gaussian noise, compiled potential fields and single Langevin /
MALA moves targeting μ_{V,N} ∝ exp(−N Tr V) on (Herm_N)ⁿ. With noise
entries of variance 1/N the continuous-time dynamics
dX = −½𝒟V(X)dt + dW is stationary for μ_{V,N}; the same noise drives the
free SDE, so τ̂(W_t²) = t.
"""

from typing import Optional, Tuple, Union

import numpy as np

from matrep import CompiledPoly, MatrixTuple, WordTable, hermitize
from ncalg import NCPoly, PotentialSpec, as_trace, cyclic_gradient_poly


def hermitian_noise(rng: np.random.Generator, shape: tuple, N: int) -> np.ndarray:
    """Hermitian Gaussian matrices of shape shape + (N, N).

    Diagonal entries are real 𝒩(0, 1/N); off-diagonal real and imaginary
    parts are 𝒩(0, 1/(2N)), so E τ̂(W²) = 1.
    """
    G = rng.standard_normal(shape + (N, N)) + 1j * rng.standard_normal(shape + (N, N))
    return (G + np.conj(np.swapaxes(G, -1, -2))) / (2.0 * np.sqrt(N))


def real_norm2(A: np.ndarray) -> np.ndarray:
    """Σᵢ Re Tr(Aᵢ²) over the trailing (n, N, N) axes."""
    return np.real(np.einsum("...iab,...iba->...", A, A))


class PotentialField:
    """Compiled potential: energy N·Re Tr V and gradients 𝒟ᵢV."""

    def __init__(self, V: Union[NCPoly, PotentialSpec]):
        if isinstance(V, PotentialSpec):
            V = V.expand()
        if not isinstance(V, NCPoly):
            V = as_trace(V).to_ncpoly()
        self.V = V
        self.n = V.n
        self._grads = [
            CompiledPoly(cyclic_gradient_poly(V, i).float_coeffs()) for i in range(1, V.n + 1)
        ]
        self._trace = CompiledPoly(V.lift().trace().float_coeffs())

    def gradient(self, X: np.ndarray, table: Optional[WordTable] = None) -> np.ndarray:
        """(𝒟₁V(X), …, 𝒟ₙV(X)) stacked like X."""
        table = table or WordTable(X)
        return hermitize(np.stack([g(X, table) for g in self._grads], axis=-3))

    def energy(self, X: np.ndarray, table: Optional[WordTable] = None) -> np.ndarray:
        """N·Re Tr V(X) = N²·Re τ̂(V(X))."""
        table = table or WordTable(X)
        N = X.shape[-1]
        return N * N * np.real(self._trace.scalar(X, table))


def as_field(V) -> PotentialField:
    return V if isinstance(V, PotentialField) else PotentialField(V)


def _array(X) -> np.ndarray:
    return X.mats if isinstance(X, MatrixTuple) else np.asarray(X, dtype=np.complex128)


def langevin_step(X, V, h: float, rng: np.random.Generator):
    """Unadjusted step Xᵢ ← Xᵢ − (h/2)𝒟ᵢV(X) + √h·Wᵢ.

    Args:
        X: MatrixTuple or array of shape (..., n, N, N)
        V: NCPoly, PotentialSpec or PotentialField
        h: Step size in time units
        rng: Generator for the noise

    Returns:
        The moved state, of the same kind as X
    """
    field = as_field(V)
    A = _array(X)
    noise = hermitian_noise(rng, A.shape[:-2], A.shape[-1])
    Y = hermitize(A - 0.5 * h * field.gradient(A) + np.sqrt(h) * noise)
    return MatrixTuple(Y, R=X.R) if isinstance(X, MatrixTuple) else Y


def _log_proposal(Y: np.ndarray, X: np.ndarray, gX: np.ndarray, h: float) -> np.ndarray:
    """log q(Y | X) up to a constant, in the Σ Re Tr metric."""
    N = X.shape[-1]
    diff = Y - X + 0.5 * h * gX
    return -N * real_norm2(diff) / (2.0 * h)


def mala_move(
    A: np.ndarray,
    gA: np.ndarray,
    eA: np.ndarray,
    field: PotentialField,
    h: float,
    rng: np.random.Generator,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """One Metropolis-adjusted move with cached gradient and energy.

    Returns:
        (state, gradient, energy, accepted) after the accept/reject step
    """
    noise = hermitian_noise(rng, A.shape[:-2], A.shape[-1])
    Y = hermitize(A - 0.5 * h * gA + np.sqrt(h) * noise)
    table = WordTable(Y)
    gY = field.gradient(Y, table)
    eY = field.energy(Y, table)
    log_alpha = (eA - eY) + _log_proposal(A, Y, gY, h) - _log_proposal(Y, A, gA, h)
    log_u = np.log(rng.random(np.shape(log_alpha)))
    accepted = log_u < log_alpha
    mask = np.asarray(accepted)[..., None, None, None]
    return (
        np.where(mask, Y, A),
        np.where(mask, gY, gA),
        np.where(accepted, eY, eA),
        accepted,
    )


def mala_step(X, V, h: float, rng: np.random.Generator):
    """Metropolis-adjusted Langevin step for μ_{V,N}.

    Returns:
        (new state, accepted); a rejected proposal leaves X unchanged
    """
    field = as_field(V)
    A = _array(X)
    table = WordTable(A)
    gA, eA = field.gradient(A, table), field.energy(A, table)
    Y, _, _, accepted = mala_move(A, gA, eA, field, h, rng)
    if isinstance(X, MatrixTuple):
        return (MatrixTuple(Y, R=X.R) if accepted else X), bool(accepted)
    return Y, accepted
