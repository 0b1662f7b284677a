"""
Free Gibbs Transport - Schwinger–Dyson Residuals

Empirical defect of τ⊗τ(∂ᵢP) = τ(P𝒟ᵢV) over an ensemble. "paired" mode
averages the per-sample defect τ̂(a)τ̂(b) − τ̂(P𝒟ᵢV); "factorized" mode
multiplies ensemble means, which exposes the finite-N covariance term.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from core.errors import EmptyEnsembleError
from ncalg import NCPoly, evaluate_scalar, sd_residual_expr
from workers.pool import chunks, parallel_map

from .evaluate import WordTable
from .matrices import Ensemble

logger = logging.getLogger(__name__)

MODES = ("paired", "factorized")
# Samples per evaluation chunk
CHUNK = 64


@dataclass
class SDResidual:
    """Residual of one (P, i) pair with its Monte-Carlo standard error."""

    poly: str
    letter: int
    mean: float
    stderr: float
    mode: str = "paired"

    def to_dict(self) -> dict:
        return {
            "poly": self.poly,
            "letter": self.letter,
            "mean": self.mean,
            "stderr": self.stderr,
            "mode": self.mode,
        }


def _trace_words(expr) -> List[tuple]:
    words = set()
    for (_, traces), _ in expr.terms.items():
        words.update(traces)
    return sorted(words, key=lambda w: (len(w), w))


def _moment_table(
    ensemble: Ensemble, words: Sequence[tuple], threads=None
) -> Dict[tuple, np.ndarray]:
    """Per-sample τ̂(word) for every word."""

    def run(idx: range) -> Dict[tuple, np.ndarray]:
        table = WordTable(ensemble.samples[idx.start:idx.stop])
        return {w: np.asarray(table.trace(w)) for w in words}

    parts = parallel_map(run, chunks(ensemble.count, CHUNK), threads)
    return {w: np.concatenate([p[w] for p in parts]) for w in words}


def _paired(expr, moments: Dict[tuple, np.ndarray], count: int) -> np.ndarray:
    values = np.zeros(count, dtype=np.complex128)
    for (_, traces), c in expr.terms.items():
        term = np.full(count, complex(c))
        for t in traces:
            term = term * moments[t]
        values = values + term
    return values


def _factorized(expr, moments: Dict[tuple, np.ndarray]) -> Tuple[float, float]:
    """Product-of-means estimate with a jackknife standard error."""
    count = len(next(iter(moments.values()))) if moments else 1
    means = {w: complex(np.mean(v)) for w, v in moments.items()}
    estimate = _real(evaluate_scalar(expr, lambda w: means.get(w, 1.0)))
    if count < 2 or not moments:
        return estimate, 0.0
    totals = {w: complex(np.sum(v)) for w, v in moments.items()}
    loo = np.empty(count)
    for k in range(count):
        m = {w: (totals[w] - moments[w][k]) / (count - 1) for w in moments}
        loo[k] = _real(evaluate_scalar(expr, lambda w: m.get(w, 1.0)))
    stderr = float(np.sqrt((count - 1) / count * np.sum((loo - loo.mean()) ** 2)))
    return estimate, stderr


def sd_residual(
    ensemble: Ensemble,
    V: NCPoly,
    test_polys: Sequence[NCPoly],
    mode: str = "paired",
    threads=None,
) -> List[SDResidual]:
    """Residuals τ̂⊗τ̂(∂ᵢP) − τ̂(P𝒟ᵢV) for every test polynomial and letter.

    Args:
        ensemble: Samples of μ_{V,N}
        V: Potential
        test_polys: Battery of plain polynomials
        mode: "paired" (per-sample products) or "factorized" (products of means)
        threads: Worker count for per-sample evaluation

    Returns:
        One SDResidual per (P, i), in battery order then letter order
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if ensemble.count == 0:
        raise EmptyEnsembleError("sd_residual needs samples")
    exprs = [(P, i, sd_residual_expr(P, V, i)) for P in test_polys for i in range(1, V.n + 1)]
    words = sorted({w for _, _, e in exprs for w in _trace_words(e)}, key=lambda w: (len(w), w))
    moments = _moment_table(ensemble, words, threads) if words else {}
    results = []
    for P, i, expr in exprs:
        if mode == "paired":
            values = np.real(_paired(expr, moments, ensemble.count))
            mean = float(np.mean(values))
            stderr = _stderr(values)
        else:
            mean, stderr = _factorized(expr, {w: moments[w] for w in _trace_words(expr)})
        results.append(SDResidual(str(P), i, mean, stderr, mode))
    logger.debug(f"Computed {len(results)} SD residuals ({mode}) on {ensemble.count} samples")
    return results


def monomial_battery(n: int, max_degree: int = 4) -> List[NCPoly]:
    """All non-constant monomials in n letters up to max_degree."""
    battery = []
    frontier = [()]
    for _ in range(max_degree):
        frontier = [w + (i,) for w in frontier for i in range(1, n + 1)]
        battery.extend(NCPoly.monomial(w, n) for w in frontier)
    return battery


def _real(value) -> float:
    return float(np.real(complex(value)))


def _stderr(values: np.ndarray) -> float:
    if len(values) < 2:
        return 0.0
    return float(np.std(values, ddof=1) / np.sqrt(len(values)))
