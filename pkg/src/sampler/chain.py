"""
Free Gibbs Transport - Ensemble Sampler

Runs independent Langevin or MALA chains for μ_{V,N} and collects thinned
samples into an Ensemble. Chain k draws step t from stream(seed, k, t), so
results do not depend on the thread count.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from core.config import ChainConfig, config_to_dict
from core.errors import DimensionMismatch
from core.rng import stream
from matrep import (
    Ensemble,
    WordTable,
    certify_convexity,
    check_confinement,
    hermitize,
    random_hermitian,
)
from ncalg import PotentialSpec, resolve_potential
from workers.pool import parallel_map

from .langevin import PotentialField, hermitian_noise, mala_move

logger = logging.getLogger(__name__)

# Sokal window constant for the integrated autocorrelation time
SOKAL_C = 5.0
# Counter lane for initial-state draws, kept apart from step noise
INIT_LANE = 1


def integrated_autocorr_time(series: np.ndarray, c: float = SOKAL_C) -> float:
    """τ_int = 1 + 2Σ ρ(k) with Sokal's self-consistent window M ≥ c·τ(M)."""
    x = np.asarray(series, dtype=float)
    n = len(x)
    if n < 2:
        return 1.0
    x = x - x.mean()
    f = np.fft.rfft(x, 2 * n)
    acf = np.fft.irfft(f * np.conj(f))[:n]
    if acf[0] <= 0:
        return 1.0
    acf = acf / acf[0]
    taus = 2.0 * np.cumsum(acf) - 1.0
    window = np.arange(n) >= c * taus
    M = int(np.argmax(window)) if np.any(window) else n - 1
    return float(max(taus[M], 1.0))


@dataclass
class ChainResult:
    """Output of one chain."""

    index: int
    samples: np.ndarray  # (count, n, N, N)
    accepted: int = 0
    proposals: int = 0
    trace_series: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iact: float = 1.0
    norm_bound: float = 0.0

    @property
    def acceptance(self) -> float:
        return self.accepted / self.proposals if self.proposals else 1.0

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "count": int(self.samples.shape[0]),
            "acceptance": self.acceptance,
            "iact": self.iact,
            "norm_bound": self.norm_bound,
        }


def run_chain(
    index: int,
    count: int,
    field_: PotentialField,
    cfg: ChainConfig,
    x0: Optional[np.ndarray] = None,
) -> ChainResult:
    """Run chain number index and keep count thinned samples.

    Args:
        index: Chain index (RNG key)
        count: Samples to keep after burn-in
        field_: Compiled potential
        cfg: Chain settings (step, burnin, thin, mala, seed, ...)
        x0: Optional starting tuple; otherwise zeros or a scaled random tuple

    Returns:
        ChainResult with samples, acceptance and τ̂(X₁²) autocorrelation time
    """
    n, N, h = field_.n, cfg.N, cfg.step
    if x0 is not None:
        A = np.array(x0, dtype=np.complex128)
    elif cfg.init_scale > 0:
        rng = stream(cfg.seed, index, 0, INIT_LANE)
        A = np.stack([random_hermitian(rng, N, cfg.init_scale) for _ in range(n)])
    else:
        A = np.zeros((n, N, N), dtype=np.complex128)

    table = WordTable(A)
    gA = field_.gradient(A, table)
    eA = field_.energy(A, table)
    total = cfg.burnin + count * cfg.thin
    kept = np.empty((count, n, N, N), dtype=np.complex128)
    series = np.empty(count * cfg.thin)
    accepted = 0
    norm_bound = 0.0

    for t in range(total):
        rng = stream(cfg.seed, index, t)
        if cfg.mala:
            A, gA, eA, ok = mala_move(A, gA, eA, field_, h, rng)
            accepted += int(ok)
        else:
            noise = hermitian_noise(rng, (n,), N)
            A = hermitize(A - 0.5 * h * gA + np.sqrt(h) * noise)
            gA = field_.gradient(A)
            accepted += 1
        norm_bound = max(norm_bound, check_confinement(A, cfg.blowup_radius, t))
        if t >= cfg.burnin:
            k = t - cfg.burnin
            series[k] = float(np.real(np.trace(A[0] @ A[0]))) / N
            if (k + 1) % cfg.thin == 0:
                kept[k // cfg.thin] = A

    result = ChainResult(index, kept, accepted, total, series, norm_bound=norm_bound)
    result.iact = integrated_autocorr_time(series)
    logger.debug(
        f"Chain {index}: acceptance {result.acceptance:.3f}, IACT {result.iact:.1f} steps"
    )
    return result


def _split(count: int, chains: int) -> List[int]:
    return [count // chains + (1 if k < count % chains else 0) for k in range(chains)]


def warn_if_uncertified(spec: PotentialSpec) -> Optional[float]:
    """Certified constant, or None with a warning."""
    cert = certify_convexity(spec)
    if not cert.certified:
        logger.warning(f"Sampling a potential without a convexity certificate: {cert.reason}")
        return None
    return cert.c


def sample_ensemble(cfg: ChainConfig, threads: Optional[int] = None) -> Ensemble:
    """Sample μ_{V,N} with independent chains.

    Args:
        cfg: Chain configuration (potential, N, step, burnin, thin, count, chains, seed)
        threads: Worker count for running chains in parallel

    Returns:
        Ensemble of cfg.count samples; meta records acceptance and IACT
    """
    spec = resolve_potential(cfg.potential)
    # n = 1 is the default and defers to the potential
    if cfg.n not in (1, spec.n):
        raise DimensionMismatch(f"config n={cfg.n}, potential has n={spec.n}")
    if cfg.step <= 0:
        raise ValueError("step must be positive")
    if cfg.thin < 1 or cfg.count < 1:
        raise ValueError("thin and count must be positive")
    certified_c = warn_if_uncertified(spec)
    field_ = PotentialField(spec)
    chains = max(1, min(cfg.chains, cfg.count))
    counts = _split(cfg.count, chains)

    results = parallel_map(
        lambda k: run_chain(k, counts[k], field_, cfg),
        list(range(chains)),
        threads or cfg.threads or None,
    )
    samples = np.concatenate([r.samples for r in results])
    accepted = sum(r.accepted for r in results)
    proposals = sum(r.proposals for r in results)
    meta = {
        "seed": cfg.seed,
        "potential": spec.to_dict(),
        "chain": config_to_dict(cfg) | {"potential": spec.to_dict()},
        "acceptance": accepted / proposals if proposals else 1.0,
        "iact": float(np.mean([r.iact for r in results])),
        "chains": [r.to_dict() for r in results],
        "certified_c": certified_c,
    }
    logger.info(
        f"Sampled {len(samples)} tuples (n={spec.n}, N={cfg.N}) from {chains} chain(s), "
        f"acceptance {meta['acceptance']:.3f}, IACT {meta['iact']:.1f} steps"
    )
    return Ensemble(samples, meta)
