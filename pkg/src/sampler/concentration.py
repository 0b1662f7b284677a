"""
Free Gibbs Transport - Concentration

Covariance of normalized traces across an ensemble. Under a convex
potential it decays like 1/N², so N²·covariance is reported alongside.
"""

from dataclasses import dataclass

import numpy as np

from matrep import CompiledPoly, Ensemble, WordTable
from ncalg import NCPoly, as_trace


@dataclass
class CovarianceEstimate:
    """|E[τ̂(P)τ̂(Q)] − E[τ̂(P)]E[τ̂(Q)]| at one matrix size."""

    N: int
    count: int
    covariance: float
    stderr: float

    @property
    def scaled(self) -> float:
        """N²·covariance, O(1) when concentration holds."""
        return self.N * self.N * self.covariance

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "count": self.count,
            "covariance": self.covariance,
            "stderr": self.stderr,
            "scaled": self.scaled,
        }


def trace_series(ens: Ensemble, P) -> np.ndarray:
    """Per-sample τ̂(P(X)) (complex)."""
    ens.require_samples()
    return CompiledPoly(as_trace(P).trace().float_coeffs()).scalar(ens.samples)


def concentration_check(ens: Ensemble, P: NCPoly, Q: NCPoly) -> CovarianceEstimate:
    """Sample covariance of τ̂(P) and τ̂(Q) with a delta-method standard error."""
    ens.require_samples()
    table = WordTable(ens.samples)
    a = CompiledPoly(as_trace(P).trace().float_coeffs()).scalar(ens.samples, table)
    b = CompiledPoly(as_trace(Q).trace().float_coeffs()).scalar(ens.samples, table)
    count = ens.count
    products = (a - a.mean()) * np.conj(b - b.mean())
    if count < 2:
        return CovarianceEstimate(ens.N, count, 0.0, 0.0)
    cov = products.sum() / (count - 1)
    stderr = float(np.std(np.real(products), ddof=1) / np.sqrt(count))
    return CovarianceEstimate(ens.N, count, float(abs(cov)), stderr)
