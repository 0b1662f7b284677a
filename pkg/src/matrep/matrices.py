"""
Free Gibbs Transport - Matrix Tuples

Hermitian matrix tuples and ensembles. Arrays are stacked: a MatrixTuple
holds shape (n, N, N), an Ensemble (count, n, N, N), both complex128.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterator, Optional

import numpy as np

from core.errors import (
    DimensionMismatch,
    DivergenceError,
    EmptyEnsembleError,
    HermitianViolation,
)

# Relative conjugate-symmetry tolerance
HERMITIAN_TOL = 1e-12


def hermitize(M: np.ndarray) -> np.ndarray:
    """(M + M*)/2 over the last two axes."""
    return 0.5 * (M + np.conj(np.swapaxes(M, -1, -2)))


def check_hermitian(M: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate conjugate symmetry within tol·max(1, |M|) and symmetrize."""
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim < 2 or M.shape[-1] != M.shape[-2]:
        raise DimensionMismatch(f"expected square matrices, got shape {M.shape}")
    defect = np.max(np.abs(M - np.conj(np.swapaxes(M, -1, -2))), initial=0.0)
    scale = max(1.0, float(np.max(np.abs(M), initial=0.0)))
    if defect > tol * scale:
        raise HermitianViolation(f"conjugate-symmetry defect {defect:.3e}")
    return hermitize(M)


def tau_hat(M: np.ndarray):
    """Normalized trace (1/N)Tr over the last two axes."""
    M = np.asarray(M)
    if M.shape[-1] != M.shape[-2]:
        raise DimensionMismatch(f"expected square matrices, got shape {M.shape}")
    return np.trace(M, axis1=-2, axis2=-1) / M.shape[-1]


def op_norm(M: np.ndarray) -> np.ndarray:
    """Operator norm of Hermitian matrices (largest |eigenvalue|)."""
    return np.max(np.abs(np.linalg.eigvalsh(M)), axis=-1)


def check_confinement(A: np.ndarray, radius: float, step: int = 0) -> float:
    """Largest operator norm in A (bounded by Frobenius when small); raises above radius."""
    frob = float(np.sqrt(np.max(np.sum(np.abs(A) ** 2, axis=(-2, -1)))))
    if frob <= radius:
        return frob
    norm = float(np.max(op_norm(A)))
    if norm > radius:
        raise DivergenceError(step, norm, radius)
    return norm


@dataclass(frozen=True, eq=False)
class MatrixTuple:
    """n Hermitian N×N matrices, optionally tagged with a norm cap R."""

    mats: np.ndarray
    R: Optional[float] = None

    def __post_init__(self):
        mats = np.asarray(self.mats, dtype=np.complex128)
        if mats.ndim == 2:
            mats = mats[None]
        if mats.ndim != 3:
            raise DimensionMismatch(f"expected (n, N, N), got shape {mats.shape}")
        object.__setattr__(self, "mats", check_hermitian(mats))

    @classmethod
    def of(cls, *mats, R: Optional[float] = None) -> "MatrixTuple":
        return cls(np.stack([np.asarray(m, dtype=np.complex128) for m in mats]), R=R)

    @classmethod
    def zeros(cls, n: int, N: int) -> "MatrixTuple":
        return cls(np.zeros((n, N, N), dtype=np.complex128))

    @property
    def n(self) -> int:
        return self.mats.shape[0]

    @property
    def N(self) -> int:
        return self.mats.shape[1]

    def __getitem__(self, i: int) -> np.ndarray:
        return self.mats[i]

    def max_norm(self) -> float:
        return float(np.max(op_norm(self.mats)))

    def within_cap(self) -> bool:
        return self.R is None or self.max_norm() <= self.R


@dataclass(eq=False)
class Ensemble:
    """Samples of a matrix model plus provenance metadata."""

    samples: np.ndarray  # (count, n, N, N)
    meta: Dict = field(default_factory=dict)

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128)
        if samples.ndim != 4 or samples.shape[-1] != samples.shape[-2]:
            raise DimensionMismatch(f"expected (count, n, N, N), got {samples.shape}")
        self.samples = samples

    @classmethod
    def from_tuples(cls, tuples, meta: Optional[Dict] = None) -> "Ensemble":
        tuples = list(tuples)
        if not tuples:
            raise EmptyEnsembleError("no samples")
        shapes = {t.mats.shape for t in tuples}
        if len(shapes) != 1:
            raise DimensionMismatch(f"samples disagree on (n, N): {sorted(shapes)}")
        return cls(np.stack([t.mats for t in tuples]), meta or {})

    @property
    def count(self) -> int:
        return self.samples.shape[0]

    @property
    def n(self) -> int:
        return self.samples.shape[1]

    @property
    def N(self) -> int:
        return self.samples.shape[2]

    def __len__(self) -> int:
        return self.count

    def __getitem__(self, k: int) -> MatrixTuple:
        return MatrixTuple(self.samples[k])

    def __iter__(self) -> Iterator[MatrixTuple]:
        for k in range(self.count):
            yield self[k]

    def require_samples(self) -> None:
        if self.count == 0:
            raise EmptyEnsembleError("ensemble has no samples")

    def eigenvalues(self, letter: int = 1) -> np.ndarray:
        """Pooled spectrum of Xᵢ across samples."""
        self.require_samples()
        return np.linalg.eigvalsh(self.samples[:, letter - 1]).ravel()

    def moments(self, order: int, letter: int = 1) -> np.ndarray:
        """Per-sample τ̂(Xᵢ^order)."""
        eig = np.linalg.eigvalsh(self.samples[:, letter - 1])
        return np.mean(eig ** order, axis=-1)


def random_hermitian(rng: np.random.Generator, N: int, scale: float = 1.0) -> np.ndarray:
    """GUE-like matrix with entry variance scale²/N."""
    G = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    return scale * hermitize(G) / np.sqrt(N)


def random_tuple(rng: np.random.Generator, n: int, N: int, scale: float = 1.0) -> MatrixTuple:
    return MatrixTuple(np.stack([random_hermitian(rng, N, scale) for _ in range(n)]))
