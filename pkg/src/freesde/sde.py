"""
Free Gibbs Transport - Free SDE Paths

Matrix Euler–Maruyama for dX = dS − ½𝒟V_α(X)dt, where S is Hermitian
Brownian motion with τ̂(S_t²) = t. States are batched as
(paths, n, N, N) and re-symmetrized after every step. Increments for step
k of path batch b come from stream(seed, b, k), so any path can be replayed.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from core.errors import ConvergenceError
from core.rng import stream
from matrep import MatrixTuple, check_confinement, hermitize, hessian_min_eig, op_norm
from sampler import PotentialField, hermitian_noise, real_norm2

from .family import PotentialFamily

logger = logging.getLogger(__name__)


def brownian_increment(
    N: int, dt: float, rng: np.random.Generator, shape: tuple = ()
) -> np.ndarray:
    """√dt·W with the sampler's noise normalization, so E τ̂(ΔS²) = dt."""
    if dt < 0:
        raise ValueError("dt must be non-negative")
    if dt == 0:
        return np.zeros(shape + (N, N), dtype=np.complex128)
    return np.sqrt(dt) * hermitian_noise(rng, shape, N)


class NoiseSource:
    """Brownian increments addressed by (seed, key, step).

    With antithetic=True the leading batch axis is split in two halves
    driven by opposite increments. Passing rng instead draws sequentially
    from that generator (no replay).
    """

    def __init__(
        self,
        seed: int = 0,
        key: int = 0,
        antithetic: bool = False,
        rng: Optional[np.random.Generator] = None,
    ):
        self.seed = seed
        self.key = key
        self.antithetic = antithetic
        self.rng = rng

    def draw(self, step: int, shape: tuple, N: int, dt: float) -> np.ndarray:
        rng = self.rng if self.rng is not None else stream(self.seed, self.key, step)
        if not self.antithetic:
            return brownian_increment(N, dt, rng, shape)
        if not shape or shape[0] % 2:
            raise ValueError("antithetic noise needs an even leading batch size")
        half = brownian_increment(N, dt, rng, (shape[0] // 2,) + shape[1:])
        return np.concatenate([half, -half])


class SharedNoise:
    """One increment broadcast over a leading axis of copies (common random numbers)."""

    def __init__(self, source: NoiseSource):
        self.source = source

    def draw(self, step: int, shape: tuple, N: int, dt: float) -> np.ndarray:
        return self.source.draw(step, shape[1:], N, dt)[None]


class RecordingNoise:
    """Keeps every increment it hands out."""

    def __init__(self, source: NoiseSource):
        self.source = source
        self.increments: list = []

    def draw(self, step: int, shape: tuple, N: int, dt: float) -> np.ndarray:
        dS = self.source.draw(step, shape, N, dt)
        self.increments.append(dS)
        return dS


def euler_step(A: np.ndarray, field: PotentialField, dt: float, dS) -> np.ndarray:
    """X ← X + ΔS − (dt/2)𝒟V(X), symmetrized."""
    return hermitize(A + dS - 0.5 * dt * field.gradient(A))


def step_count(T: float, dt: float) -> int:
    if dt <= 0:
        raise ValueError("dt must be positive")
    steps = int(round(T / dt))
    if abs(steps * dt - T) > 1e-9 * max(1.0, T):
        logger.warning(f"T={T} is not a multiple of dt={dt}; integrating to {steps * dt}")
    return steps


def _batch(X0, paths: int) -> np.ndarray:
    A = X0.mats if isinstance(X0, MatrixTuple) else np.asarray(X0, dtype=np.complex128)
    if A.ndim == 3:
        A = np.broadcast_to(A, (paths,) + A.shape)
    return np.array(A, dtype=np.complex128)


def stability_bound(fam: PotentialFamily, alpha: float, X) -> Optional[float]:
    """4/λ_max of the Hessian at X: explicit Euler is stable below this dt."""
    V = fam.potential(alpha)
    try:
        lam_max = -hessian_min_eig(V.scale(-1), X)
    except ConvergenceError as e:
        logger.debug(f"Skipping stability estimate: {e}")
        return None
    return 4.0 / lam_max if lam_max > 0 else None


def integrate(
    A: np.ndarray,
    field: PotentialField,
    dt: float,
    steps: int,
    noise: Optional[NoiseSource],
    callback: Optional[Callable[[int, np.ndarray], None]] = None,
    blowup_radius: float = np.inf,
) -> np.ndarray:
    """Run steps Euler steps on the batch A; callback(k, state) after each step k ≥ 1."""
    shape = A.shape[:-2]
    N = A.shape[-1]
    for k in range(steps):
        dS = noise.draw(k, shape, N, dt) if noise is not None else 0.0
        A = euler_step(A, field, dt, dS)
        if np.isfinite(blowup_radius):
            check_confinement(A, blowup_radius, k + 1)
        if callback is not None:
            callback(k + 1, A)
    return A


@dataclass(eq=False)
class SdePath:
    """Stored states of a batch of paths on the grid k·store_every·dt."""

    times: np.ndarray
    states: np.ndarray  # (len(times), paths, n, N, N)
    alpha: float
    dt: float
    store_every: int = 1
    seed: int = 0
    key: int = 0
    noise: Optional[np.ndarray] = None  # (steps, paths, n, N, N) when stored
    family: Optional[PotentialFamily] = None

    @property
    def paths(self) -> int:
        return self.states.shape[1]

    @property
    def n(self) -> int:
        return self.states.shape[2]

    @property
    def N(self) -> int:
        return self.states.shape[3]

    @property
    def endpoint(self) -> np.ndarray:
        return self.states[-1]

    def state(self, k: int, path: int = 0) -> MatrixTuple:
        return MatrixTuple(self.states[k, path])

    def replay_noise(self, step: int) -> np.ndarray:
        """Increment of a stored or counter-addressed step."""
        if self.noise is not None:
            return self.noise[step]
        return NoiseSource(self.seed, self.key).draw(step, (self.paths, self.n), self.N, self.dt)


def sde_path(
    X0,
    fam: PotentialFamily,
    alpha: float,
    T: float,
    dt: float,
    rng: Union[int, np.random.Generator, None] = None,
    paths: int = 1,
    key: int = 0,
    store_every: int = 1,
    noise: bool = True,
    store_noise: bool = False,
    blowup_radius: float = 1e3,
    warn_stability: bool = True,
) -> SdePath:
    """Euler–Maruyama path(s) of the free SDE for V_α.

    Args:
        X0: Starting tuple (n, N, N) or batch (paths, n, N, N)
        fam: Potential family
        alpha: Interpolation parameter
        T: Horizon
        dt: Step
        rng: Seed for counter-based noise, or a Generator (noise then stored)
        paths: Batch size when X0 is a single tuple
        key: Batch key for counter-based noise
        store_every: Keep every store_every-th state
        noise: False gives the deterministic drift flow (test mode)
        store_noise: Keep the increments for replay
        blowup_radius: Abort when an operator norm exceeds this
        warn_stability: Compare dt with the Euler bound at X0

    Returns:
        SdePath whose states[0] equals X0
    """
    A = _batch(X0, paths)
    steps = step_count(T, dt)
    field = fam.drift_field(alpha)
    if warn_stability:
        bound = stability_bound(fam, alpha, A[0])
        if bound is not None and dt > bound:
            logger.warning(f"dt={dt} exceeds the Euler stability bound {bound:.3g} at X0")

    seed = rng if isinstance(rng, (int, np.integer)) else 0
    generator = rng if isinstance(rng, np.random.Generator) else None
    source = NoiseSource(int(seed), key, rng=generator) if noise else None
    store_noise = store_noise or generator is not None

    stored = [A.copy()]
    times = [0.0]

    def keep(k: int, state: np.ndarray) -> None:
        if k % store_every == 0 or k == steps:
            stored.append(state.copy())
            times.append(k * dt)

    active = RecordingNoise(source) if (source is not None and store_noise) else source
    integrate(A, field, dt, steps, active, keep, blowup_radius)
    recorded = active.increments if isinstance(active, RecordingNoise) else []
    return SdePath(
        times=np.array(times),
        states=np.stack(stored),
        alpha=alpha,
        dt=dt,
        store_every=store_every,
        seed=int(seed),
        key=key,
        noise=np.stack(recorded) if recorded else None,
        family=fam,
    )


@dataclass
class ContractionResult:
    """Decay of ‖X_t − Y_t‖ for two paths driven by the same noise."""

    times: np.ndarray
    op_norms: np.ndarray
    real_norms: np.ndarray
    slope_op: float
    slope_real: float
    bound: Optional[float]  # −c(α)/2 when certified
    degenerate: bool = False
    tolerance: float = 0.15

    @property
    def passed(self) -> Optional[bool]:
        if self.degenerate or self.bound is None:
            return None
        return max(self.slope_op, self.slope_real) <= self.bound * (1.0 - self.tolerance)

    def to_dict(self) -> dict:
        return {
            "slope_op": self.slope_op,
            "slope_real": self.slope_real,
            "bound": self.bound,
            "degenerate": self.degenerate,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def _fit_slope(times: np.ndarray, norms: np.ndarray) -> float:
    mask = norms > 1e-280
    if mask.sum() < 2:
        return float("nan")
    return float(np.polyfit(times[mask], np.log(norms[mask]), 1)[0])


def coupled_contraction(
    X0,
    Y0,
    fam: PotentialFamily,
    alpha: float,
    T: float,
    dt: float,
    seed: int = 0,
    record_every: int = 10,
    tolerance: float = 0.15,
) -> ContractionResult:
    """Least-squares slope of log‖X_t − Y_t‖ under common random numbers.

    For certified c(α) the slope should not exceed −c(α)/2; both the
    operator norm and the Σ Re Tr norm are fitted.
    """
    A = np.stack([_batch(X0, 1)[0], _batch(Y0, 1)[0]])
    steps = step_count(T, dt)
    c = fam.c(alpha)
    bound = -0.5 * c if c is not None else None
    if np.array_equal(A[0], A[1]):
        logger.warning("Coupled paths start at the same point; the difference stays zero")
        zeros = np.zeros(1)
        return ContractionResult(zeros, zeros, zeros, float("nan"), float("nan"), bound, True,
                                 tolerance)

    field = fam.drift_field(alpha)
    times, op_norms, real_norms = [], [], []

    def record(k: int, state: np.ndarray) -> None:
        if k % record_every == 0 or k == steps:
            D = state[0] - state[1]
            times.append(k * dt)
            op_norms.append(float(np.max(op_norm(D))))
            real_norms.append(float(np.sqrt(max(real_norm2(D), 0.0))))

    record(0, A)
    integrate(A, field, dt, steps, SharedNoise(NoiseSource(seed, 0)), record)
    times_a = np.array(times)
    result = ContractionResult(
        times_a,
        np.array(op_norms),
        np.array(real_norms),
        _fit_slope(times_a, np.array(op_norms)),
        _fit_slope(times_a, np.array(real_norms)),
        bound,
        tolerance=tolerance,
    )
    logger.info(
        f"Contraction slope {result.slope_op:.4f} (op), {result.slope_real:.4f} (Re Tr), "
        f"bound {bound}"
    )
    return result
