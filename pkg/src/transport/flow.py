"""
Free Gibbs Transport - Transport Flow

Integrates dF_α/dα = 𝒟g_α(F_α) for every sample of an ensemble with
Heun's predictor–corrector in α, recording moment, Schwinger–Dyson and
norm diagnostics after each α-step. Every drift evaluation draws fresh
noise: α-step m, stage s and sample k use seed derive_seed(seed, m, s)
with key k.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from core.config import TransportConfig
from core.errors import EmptyEnsembleError
from core.rng import derive_seed, stream
from freesde import PotentialFamily, resolve_family
from matrep import (
    Ensemble,
    WordTable,
    check_confinement,
    hermitize,
    monomial_battery,
    op_norm,
    random_hermitian,
    sd_residual,
)
from ncalg import NCPoly, PotentialSpec
from workers.pool import parallel_map

from .gradient import dg_eval

logger = logging.getLogger(__name__)

# Monomial degree of the per-step SD diagnostic
DIAGNOSTIC_DEGREE = 2
# Largest tolerated ‖J − 1‖ for the invertibility proxy
JACOBIAN_LIMIT = 0.5


@dataclass
class AlphaDiagnostics:
    """Ensemble statistics after one α-step."""

    alpha: float
    m2: float
    m2_stderr: float
    m4: float
    m4_stderr: float
    max_norm: float
    sd_max: float
    sd_stderr: float
    dg_stderr: float
    tail_bound: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "m2": self.m2,
            "m2_stderr": self.m2_stderr,
            "m4": self.m4,
            "m4_stderr": self.m4_stderr,
            "max_norm": self.max_norm,
            "sd_max": self.sd_max,
            "sd_stderr": self.sd_stderr,
            "dg_stderr": self.dg_stderr,
            "tail_bound": self.tail_bound,
        }


@dataclass
class FlowResult:
    """Flowed ensemble, the α grid and per-step diagnostics."""

    ensemble: Ensemble
    alphas: List[float]
    diagnostics: List[AlphaDiagnostics] = field(default_factory=list)
    history: List[np.ndarray] = field(default_factory=list)  # samples at each α when kept

    def rows(self) -> List[dict]:
        return [d.to_dict() for d in self.diagnostics]

    def at(self, alpha: float) -> np.ndarray:
        """Samples at the grid point nearest to alpha (needs keep_history)."""
        if not self.history:
            raise ValueError("flow was run without keep_history")
        k = int(np.argmin(np.abs(np.asarray(self.alphas) - alpha)))
        return self.history[k]


def _mean_stderr(values: np.ndarray) -> tuple:
    values = np.asarray(values, dtype=float)
    if len(values) < 2:
        return float(values.mean()), 0.0
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(len(values)))


def diagnose(
    samples: np.ndarray,
    V: NCPoly,
    alpha: float,
    dg_stderr: float = 0.0,
    tail: Optional[float] = None,
    degree: int = DIAGNOSTIC_DEGREE,
    threads: Optional[int] = None,
) -> AlphaDiagnostics:
    ens = Ensemble(samples)
    m2, m2_err = _mean_stderr(ens.moments(2))
    m4, m4_err = _mean_stderr(ens.moments(4))
    residuals = sd_residual(ens, V, monomial_battery(V.n, degree), threads=threads)
    worst = max(residuals, key=lambda r: abs(r.mean)) if residuals else None
    return AlphaDiagnostics(
        alpha=alpha,
        m2=m2,
        m2_stderr=m2_err,
        m4=m4,
        m4_stderr=m4_err,
        max_norm=float(np.max(op_norm(samples))),
        sd_max=abs(worst.mean) if worst else 0.0,
        sd_stderr=worst.stderr if worst else 0.0,
        dg_stderr=dg_stderr,
        tail_bound=tail,
    )


def heun_step(
    Y: np.ndarray,
    fam: PotentialFamily,
    alpha: float,
    h: float,
    cfg: TransportConfig,
    key: int,
    step: int,
    noise: bool = True,
) -> tuple:
    """One predictor–corrector step of size h from α to α + h.

    Returns:
        (new sample, larger drift stderr, larger tail bound)
    """
    k1 = dg_eval(Y, fam, alpha, cfg, key=key, seed=derive_seed(cfg.seed, step, 0), noise=noise)
    predicted = hermitize(Y + h * k1.value)
    check_confinement(predicted, cfg.confinement, step)
    k2 = dg_eval(
        predicted, fam, alpha + h, cfg, key=key, seed=derive_seed(cfg.seed, step, 1), noise=noise
    )
    Y_next = hermitize(Y + 0.5 * h * (k1.value + k2.value))
    check_confinement(Y_next, cfg.confinement, step)
    tails = [b for b in (k1.tail_bound, k2.tail_bound) if b is not None]
    return Y_next, max(k1.max_stderr, k2.max_stderr), max(tails) if tails else None


def alpha_grid(cfg: TransportConfig) -> tuple:
    if cfg.dalpha <= 0:
        raise ValueError("dalpha must be positive")
    steps = max(1, int(round(cfg.alpha_max / cfg.dalpha)))
    return steps, cfg.alpha_max / steps


def flow_transport(
    ens: Ensemble,
    cfg: TransportConfig,
    fam: Optional[PotentialFamily] = None,
    diagnostics: bool = True,
    keep_history: bool = False,
    noise: bool = True,
    threads: Optional[int] = None,
) -> FlowResult:
    """Push ens (samples of μ_{V,N}) along the α-flow up to cfg.alpha_max.

    Args:
        ens: Source ensemble
        cfg: Transport settings (T, dt, paths, dalpha, gradient mode, seed, ...)
        fam: Potential family; cfg.family is resolved when None
        diagnostics: Record moments, SD residuals and norms after each step
        keep_history: Keep the samples at every grid point
        noise: False evaluates the drift along deterministic paths (test mode)
        threads: Worker count over samples

    Returns:
        FlowResult with the flowed ensemble
    """
    ens.require_samples()
    fam = fam or resolve_family(cfg.family)
    if not fam.certified:
        logger.warning("Flowing with an uncertified family; tail bounds are unavailable")
    steps, h = alpha_grid(cfg)
    samples = ens.samples.copy()
    alphas = [0.0]
    result = FlowResult(ens, alphas)
    if keep_history:
        result.history.append(samples.copy())
    if diagnostics:
        result.diagnostics.append(diagnose(samples, fam.potential(0.0), 0.0, threads=threads))

    for m in range(steps):
        alpha = m * h

        def advance(k: int) -> tuple:
            return heun_step(samples[k], fam, alpha, h, cfg, k, m, noise)

        moved = parallel_map(advance, list(range(len(samples))), threads or cfg.threads or None)
        samples = np.stack([r[0] for r in moved])
        next_alpha = (m + 1) * h
        alphas.append(next_alpha)
        stderr = max(r[1] for r in moved)
        tails = [r[2] for r in moved if r[2] is not None]
        tail = max(tails) if tails else None
        if keep_history:
            result.history.append(samples.copy())
        if diagnostics:
            result.diagnostics.append(
                diagnose(samples, fam.potential(next_alpha), next_alpha, stderr, tail,
                         threads=threads)
            )
        logger.info(
            f"alpha {next_alpha:.3f}: max norm {float(np.max(op_norm(samples))):.3f}, "
            f"drift stderr {stderr:.2e}"
        )

    meta = dict(ens.meta)
    meta.update({"flow": {"alpha_max": cfg.alpha_max, "steps": steps, "seed": cfg.seed},
                 "family": fam.to_dict()})
    result.ensemble = Ensemble(samples, meta)
    return result


def quadratic_scale(c: float, alpha: float) -> float:
    """F_α = c_α^{−1/2}X for V = ½X², W = ½(c−1)X², with c_α = 1 + α(c−1)."""
    return float((1.0 + alpha * (c - 1.0)) ** -0.5)


def relative_map_error(original: np.ndarray, flowed: np.ndarray, scale: float) -> np.ndarray:
    """Per-sample sup|F(X) − scale·X| / sup|scale·X| over entries."""
    target = scale * original
    axes = tuple(range(1, original.ndim))
    return np.max(np.abs(flowed - target), axis=axes) / np.max(np.abs(target), axis=axes)


@dataclass
class MomentDistance:
    """Gap between mean τ̂(word) of two ensembles."""

    word: tuple
    gap: float
    stderr: float

    def to_dict(self) -> dict:
        return {"word": list(self.word), "gap": self.gap, "stderr": self.stderr}


@dataclass
class PushforwardReport:
    """SD residuals of a flowed ensemble and its moment distance to a reference."""

    residuals: list
    distances: List[MomentDistance]
    tolerance: float
    sigmas: float = 3.0

    @property
    def passed(self) -> bool:
        sd_ok = all(abs(r.mean) <= self.tolerance + self.sigmas * r.stderr for r in self.residuals)
        moments_ok = all(abs(d.gap) <= self.sigmas * d.stderr + 1e-12 for d in self.distances)
        return sd_ok and moments_ok

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "tolerance": self.tolerance,
            "residuals": [r.to_dict() for r in self.residuals],
            "distances": [d.to_dict() for d in self.distances],
        }


def _moment_words(n: int, degree: int) -> List[tuple]:
    return [tuple(P.terms)[0] for P in monomial_battery(n, degree)]


def _word_moments(samples: np.ndarray, words: Sequence[tuple]) -> dict:
    table = WordTable(samples)
    return {w: np.real(np.asarray(table.trace(w))) for w in words}


def pushforward_check(
    flowed: Ensemble,
    V,
    reference: Optional[Ensemble] = None,
    battery: Optional[Sequence[NCPoly]] = None,
    degree: int = 4,
    tolerance: float = 0.05,
    threads: Optional[int] = None,
) -> PushforwardReport:
    """Check that flowed samples follow μ_{V,N}.

    Args:
        flowed: Transported ensemble
        V: Target potential (NCPoly or PotentialSpec)
        reference: Independent samples of μ_{V,N} for the moment distance
        battery: Test polynomials (default: monomials up to degree)
        degree: Degree of the default battery and of the compared words
        tolerance: Finite-N allowance on each SD residual
        threads: Worker count for residual evaluation

    Returns:
        PushforwardReport; an empty battery gives an empty report
    """
    if isinstance(V, PotentialSpec):
        V = V.expand()
    battery = monomial_battery(V.n, degree) if battery is None else list(battery)
    if not battery:
        return PushforwardReport([], [], tolerance)
    flowed.require_samples()
    residuals = sd_residual(flowed, V, battery, threads=threads)
    distances = []
    if reference is not None:
        if reference.count == 0:
            raise EmptyEnsembleError("reference ensemble has no samples")
        words = _moment_words(V.n, degree)
        ours = _word_moments(flowed.samples, words)
        theirs = _word_moments(reference.samples, words)
        for w in words:
            a, b = ours[w], theirs[w]
            se = 0.0
            if min(len(a), len(b)) > 1:
                se = np.sqrt(a.var(ddof=1) / len(a) + b.var(ddof=1) / len(b))
            distances.append(MomentDistance(w, float(a.mean() - b.mean()), float(se)))
    report = PushforwardReport(residuals, distances, tolerance)
    logger.info(f"Pushforward check: {len(residuals)} residuals, passed={report.passed}")
    return report


def flow_back(
    flowed: Ensemble,
    cfg: TransportConfig,
    fam: Optional[PotentialFamily] = None,
    **kwargs,
) -> FlowResult:
    """Flow from V+W back to V along the reversed family (W replaced by −W)."""
    fam = fam or resolve_family(cfg.family)
    return flow_transport(flowed, cfg, fam.reverse(), **kwargs)


@dataclass
class JacobianProbe:
    """Finite-difference action of the flow map's Jacobian on one direction."""

    deviation: float  # ‖J·H − H‖ / ‖H‖ in operator norm
    limit: float = JACOBIAN_LIMIT

    @property
    def within(self) -> bool:
        return self.deviation < self.limit

    def to_dict(self) -> dict:
        return {"deviation": self.deviation, "limit": self.limit, "within": self.within}


def flow_map(
    Y: np.ndarray,
    cfg: TransportConfig,
    fam: PotentialFamily,
    key: int = 0,
    noise: bool = True,
) -> np.ndarray:
    """F_{α_max}(Y) for one sample, with the same seeds flow_transport uses for sample key."""
    steps, h = alpha_grid(cfg)
    for m in range(steps):
        Y, _, _ = heun_step(Y, fam, m * h, h, cfg, key, m, noise)
    return Y


def flow_jacobian_probe(
    Y,
    cfg: TransportConfig,
    fam: Optional[PotentialFamily] = None,
    direction: Optional[np.ndarray] = None,
    eps: float = 1e-4,
    noise: bool = True,
) -> JacobianProbe:
    """Invertibility proxy: how far J(F)·H is from H for a probe direction H.

    Both evaluations reuse the same noise, so the difference isolates the
    map's derivative.
    """
    fam = fam or resolve_family(cfg.family)
    Y = np.asarray(getattr(Y, "mats", Y), dtype=np.complex128)
    if direction is None:
        rng = stream(cfg.seed, 0, 0, 2)
        direction = np.stack([random_hermitian(rng, Y.shape[-1]) for _ in range(Y.shape[0])])
    H = direction / float(np.max(op_norm(direction)))
    plus = flow_map(Y + eps * H, cfg, fam, noise=noise)
    minus = flow_map(Y - eps * H, cfg, fam, noise=noise)
    JH = (plus - minus) / (2.0 * eps)
    deviation = float(np.max(op_norm(hermitize(JH - H))))
    return JacobianProbe(deviation)


__all__ = [
    "AlphaDiagnostics",
    "FlowResult",
    "JacobianProbe",
    "MomentDistance",
    "PushforwardReport",
    "alpha_grid",
    "diagnose",
    "flow_back",
    "flow_jacobian_probe",
    "flow_map",
    "flow_transport",
    "heun_step",
    "pushforward_check",
    "quadratic_scale",
    "relative_map_error",
]
