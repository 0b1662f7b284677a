"""
Free Gibbs Transport - Hessian Superoperator

(H#)ⱼ = Σₖ ∂ₖ𝒟ⱼV(X)#Hₖ acting on (Herm_N)ⁿ with the real inner product
⟨A, B⟩ = Σᵢ Re Tr(AᵢBᵢ). The smallest eigenvalue is found by Lanczos
(scipy eigsh) on an orthonormal real coordinate system of Herm_N.
"""

import logging
from typing import List, Optional

import numpy as np
from scipy.linalg import eigvalsh
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from core.errors import ConvergenceError, DimensionMismatch, HermitianViolation
from ncalg import NCPoly, hessian

from .evaluate import CompiledTensor, WordTable, _mats
from .matrices import hermitize

logger = logging.getLogger(__name__)

# Operators of this dimension or less are diagonalized densely
DENSE_LIMIT = 64
SYMMETRY_TOL = 1e-8


class HessianKernel:
    """Compiled ∂ₖ𝒟ⱼV for repeated application at many points."""

    def __init__(self, V: NCPoly):
        self.n = V.n
        H = hessian(V)
        # entries[j][k] applies ∂ₖ𝒟ⱼV to Hₖ
        self.entries: List[List[Optional[CompiledTensor]]] = [
            [CompiledTensor(H[k][j]) if H[k][j] else None for k in range(V.n)]
            for j in range(V.n)
        ]

    def apply(self, X, H: np.ndarray, table: WordTable = None) -> np.ndarray:
        """Hessian action on a (batched) direction tuple H of shape (..., n, N, N)."""
        X = _mats(X)
        table = table or WordTable(X)
        out = np.zeros(np.broadcast_shapes(X.shape, H.shape), dtype=np.complex128)
        for j in range(self.n):
            for k in range(self.n):
                entry = self.entries[j][k]
                if entry is not None:
                    out[..., j, :, :] += entry.apply(X, H[..., k, :, :], table)
        return out


def real_inner(A: np.ndarray, B: np.ndarray) -> float:
    """Σᵢ Re Tr(AᵢBᵢ) for tuples of shape (n, N, N)."""
    return float(np.real(np.einsum("iab,iba->", A, B)))


class HermCoordinates:
    """Orthonormal real coordinates on (Herm_N)ⁿ for ⟨A,B⟩ = Σ Re Tr(AB)."""

    def __init__(self, n: int, N: int):
        self.n = n
        self.N = N
        self.iu = np.triu_indices(N, k=1)
        self.dim = n * N * N

    def to_tuple(self, v: np.ndarray) -> np.ndarray:
        n, N = self.n, self.N
        off = N * (N - 1) // 2
        v = v.reshape(n, N * N)
        out = np.zeros((n, N, N), dtype=np.complex128)
        idx = np.arange(N)
        out[:, idx, idx] = v[:, :N]
        vals = (v[:, N:N + off] + 1j * v[:, N + off:]) / np.sqrt(2.0)
        out[:, self.iu[0], self.iu[1]] = vals
        out[:, self.iu[1], self.iu[0]] = np.conj(vals)
        return out

    def to_vector(self, A: np.ndarray) -> np.ndarray:
        N = self.N
        idx = np.arange(N)
        upper = A[:, self.iu[0], self.iu[1]] * np.sqrt(2.0)
        parts = [np.real(A[:, idx, idx]), np.real(upper), np.imag(upper)]
        return np.concatenate(parts, axis=1).ravel()


def hessian_operator(V: NCPoly, X, kernel: HessianKernel = None) -> LinearOperator:
    """Real symmetric LinearOperator for the Hessian at X."""
    X = _mats(X)
    if X.ndim != 3:
        raise DimensionMismatch("hessian_operator takes a single tuple")
    if X.shape[0] != V.n:
        raise DimensionMismatch(f"V has {V.n} letters, tuple has {X.shape[0]}")
    kernel = kernel or HessianKernel(V)
    coords = HermCoordinates(X.shape[0], X.shape[1])
    table = WordTable(X)

    def matvec(v):
        H = coords.to_tuple(np.asarray(v).ravel())
        return coords.to_vector(hermitize(kernel.apply(X, H, table)))

    return LinearOperator((coords.dim, coords.dim), matvec=matvec, dtype=np.float64)


def check_symmetric(op: LinearOperator, seed: int = 0, tol: float = SYMMETRY_TOL) -> float:
    """|⟨u,Av⟩ − ⟨Au,v⟩| relative to |Au||v|; raises when above tol."""
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(op.shape[0])
    v = rng.standard_normal(op.shape[0])
    Au, Av = op.matvec(u), op.matvec(v)
    scale = max(1.0, np.linalg.norm(Au) * np.linalg.norm(v), np.linalg.norm(Av) * np.linalg.norm(u))
    defect = abs(u @ Av - Au @ v) / scale
    if defect > tol:
        raise HermitianViolation(f"Hessian superoperator not symmetric (defect {defect:.3e})")
    return defect


def hessian_min_eig(
    V: NCPoly,
    X,
    iters: int = 1000,
    tol: float = 1e-10,
    kernel: HessianKernel = None,
) -> float:
    """Smallest eigenvalue of the Hessian superoperator at X.

    Args:
        V: Self-adjoint potential
        X: MatrixTuple or (n, N, N) array
        iters: Lanczos iteration cap
        tol: eigsh relative tolerance
        kernel: Precompiled Hessian kernel to reuse across points

    Returns:
        The minimum eigenvalue as a float
    """
    op = hessian_operator(V, X, kernel)
    check_symmetric(op)
    dim = op.shape[0]
    if dim <= DENSE_LIMIT:
        dense = np.column_stack([op.matvec(e) for e in np.eye(dim)])
        return float(eigvalsh(0.5 * (dense + dense.T))[0])
    v0 = np.ones(dim) / np.sqrt(dim)
    try:
        vals = eigsh(op, k=1, which="SA", maxiter=iters, tol=tol, v0=v0,
                     return_eigenvectors=False)
    except ArpackNoConvergence as e:
        residual = None
        if len(e.eigenvalues):
            vec = e.eigenvectors[:, 0]
            residual = float(np.linalg.norm(op.matvec(vec) - e.eigenvalues[0] * vec))
        raise ConvergenceError(f"Lanczos did not converge in {iters} iterations", residual) from e
    logger.debug(f"Hessian min eigenvalue {vals[0]:.6g} (dim {dim})")
    return float(vals[0])
