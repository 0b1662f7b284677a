"""
Free Gibbs Transport - Semigroup Estimates

Monte Carlo estimates of φ_t(P)(X₀) = E[P(X_t)] from batches of free SDE
paths, plus the diagnostics built on them: the Itô residual (martingale
check), the small-t generator check, dt refinement and the OU semigroup
property.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from core.rng import stream
from matrep import CompiledPoly, eval_trace_poly, random_hermitian, tau_hat
from ncalg import TracePoly, as_trace, generator
from workers.pool import chunks, parallel_map, tree_reduce

from .family import PotentialFamily
from .sde import NoiseSource, SdePath, _batch, euler_step, integrate, step_count

logger = logging.getLogger(__name__)

# Paths simulated together in one vectorized batch
BATCH = 64
# Key for probe-matrix draws, apart from path batch keys
PROBE_KEY = 1 << 40


@dataclass
class SemigroupEstimate:
    """Per-time matrix estimate of φ_t(P)(X₀) with componentwise standard errors."""

    times: np.ndarray
    mean: np.ndarray  # (len(times), N, N)
    stderr_re: np.ndarray
    stderr_im: np.ndarray
    paths: int

    def errors(self, expected) -> np.ndarray:
        return self.mean - np.broadcast_to(expected, self.mean.shape)

    def within(self, expected, sigmas: float = 3.0, floor: float = 1e-10) -> bool:
        """Every component within sigmas·stderr (plus a floor) of expected."""
        err = self.errors(expected)
        ok_re = np.abs(err.real) <= sigmas * self.stderr_re + floor
        ok_im = np.abs(err.imag) <= sigmas * self.stderr_im + floor
        return bool(np.all(ok_re & ok_im))

    def relative_error(self, expected) -> float:
        scale = max(float(np.max(np.abs(expected))), 1e-300)
        return float(np.max(np.abs(self.errors(expected)))) / scale

    def rows(self) -> List[dict]:
        """CSV rows (t, i, j, re, im, stderr_re, stderr_im)."""
        out = []
        for k, t in enumerate(self.times):
            N = self.mean.shape[-1]
            for i in range(N):
                for j in range(N):
                    out.append({
                        "t": float(t),
                        "i": i,
                        "j": j,
                        "re": float(self.mean[k, i, j].real),
                        "im": float(self.mean[k, i, j].imag),
                        "stderr_re": float(self.stderr_re[k, i, j]),
                        "stderr_im": float(self.stderr_im[k, i, j]),
                    })
        return out

    def to_dict(self) -> dict:
        return {
            "times": [float(t) for t in self.times],
            "paths": self.paths,
            "trace": [float(np.real(tau_hat(m))) for m in self.mean],
            "max_stderr": float(max(self.stderr_re.max(), self.stderr_im.max())),
        }


@dataclass
class _Moments:
    total: np.ndarray
    sq_re: np.ndarray
    sq_im: np.ndarray
    count: int

    def __add__(self, other: "_Moments") -> "_Moments":
        return _Moments(
            self.total + other.total,
            self.sq_re + other.sq_re,
            self.sq_im + other.sq_im,
            self.count + other.count,
        )


def _stderr(total: np.ndarray, sq: np.ndarray, count: int) -> np.ndarray:
    if count < 2:
        return np.zeros_like(total)
    var = (sq - total * total / count) / (count - 1)
    return np.sqrt(np.maximum(var, 0.0) / count)


def _time_index(t_grid: Sequence[float], dt: float) -> Dict[int, List[int]]:
    index: Dict[int, List[int]] = {}
    for j, t in enumerate(t_grid):
        if t < 0:
            raise ValueError("times must be non-negative")
        index.setdefault(step_count(t, dt), []).append(j)
    return index


def semigroup_eval(
    P,
    X0,
    fam: PotentialFamily,
    alpha: float,
    t_grid: Sequence[float],
    paths: int,
    dt: float,
    seed: int = 0,
    threads: Optional[int] = None,
    antithetic: bool = False,
    batch: int = BATCH,
) -> SemigroupEstimate:
    """Estimate φ_t(P)(X₀) for every t in t_grid from one set of paths.

    Args:
        P: Observable (NCPoly or TracePoly)
        X0: Starting tuple
        fam: Potential family
        alpha: Interpolation parameter
        t_grid: Evaluation times (need not be sorted)
        paths: Number of Monte Carlo paths
        dt: Euler step
        seed: Run seed; batch b uses stream(seed, b, step)
        threads: Worker count over path batches
        antithetic: Pair each path with its mirrored-noise twin; a pair
            counts as one draw and paths must be even
        batch: Paths per vectorized batch (rounded up to even when antithetic)

    Returns:
        SemigroupEstimate indexed like t_grid
    """
    observable = CompiledPoly(as_trace(P))
    A0 = _batch(X0, 1)[0]
    N = A0.shape[-1]
    index = _time_index(t_grid, dt)
    steps = max(index)
    field_ = fam.drift_field(alpha)
    if antithetic and paths % 2:
        raise ValueError(f"antithetic estimates need an even path count, got {paths}")
    if antithetic and batch % 2:
        batch += 1
    ranges = chunks(paths, batch)

    def run(b: int) -> _Moments:
        size = len(ranges[b])
        moments = _Moments(
            np.zeros((len(t_grid), N, N), np.complex128),
            np.zeros((len(t_grid), N, N)),
            np.zeros((len(t_grid), N, N)),
            size // 2 if antithetic else size,
        )

        def record(k: int, state: np.ndarray) -> None:
            if k not in index:
                return
            values = observable(state)
            if antithetic:
                half = values.shape[0] // 2
                values = 0.5 * (values[:half] + values[half:])
            for j in index[k]:
                moments.total[j] += values.sum(axis=0)
                moments.sq_re[j] += (values.real ** 2).sum(axis=0)
                moments.sq_im[j] += (values.imag ** 2).sum(axis=0)

        A = np.broadcast_to(A0, (size,) + A0.shape).copy()
        record(0, A)
        integrate(A, field_, dt, steps, NoiseSource(seed, b, antithetic), record)
        return moments

    total = tree_reduce(parallel_map(run, list(range(len(ranges))), threads))
    mean = total.total / total.count
    estimate = SemigroupEstimate(
        np.asarray(t_grid, dtype=float),
        mean,
        _stderr(total.total.real, total.sq_re, total.count),
        _stderr(total.total.imag, total.sq_im, total.count),
        paths,
    )
    logger.info(
        f"Semigroup estimate at {len(t_grid)} time(s) from {paths} paths"
        f" ({total.count} independent draws)"
    )
    return estimate


@dataclass
class ItoResidual:
    """M_t = P(X_t) − P(X₀) − ∫₀ᵗ L P(X_s) ds along stored paths."""

    times: np.ndarray
    values: np.ndarray  # (len(times), paths, N, N)

    def paired(self, A: np.ndarray) -> np.ndarray:
        """Re τ̂(M_t·A) per time and path."""
        return np.real(tau_hat(self.values @ A))


def ito_residual(
    P,
    path: SdePath,
    fam: Optional[PotentialFamily] = None,
    alpha: Optional[float] = None,
    finite_n: bool = True,
) -> ItoResidual:
    """Itô residual on the stored grid (trapezoid rule for the drift integral).

    With finite_n the generator includes the exact 1/N² covariation term,
    so the residual is a martingale at the path's matrix size.
    """
    fam = fam or path.family
    alpha = path.alpha if alpha is None else alpha
    P = as_trace(P)
    L = generator(P, fam.potential(alpha), N=path.N if finite_n else None)
    obs, gen = CompiledPoly(P), CompiledPoly(L)
    values = np.empty(path.states.shape[:2] + (path.N, path.N), np.complex128)
    start = obs(path.states[0])
    integral = np.zeros_like(start)
    prev = gen(path.states[0])
    values[0] = 0.0
    for k in range(1, len(path.times)):
        h = path.times[k] - path.times[k - 1]
        cur = gen(path.states[k])
        integral = integral + 0.5 * h * (prev + cur)
        values[k] = obs(path.states[k]) - start - integral
        prev = cur
    return ItoResidual(path.times.copy(), values)


@dataclass
class MartingaleReport:
    """Mean of Re τ̂(M_t·A) over paths for fixed test matrices."""

    times: List[float]
    means: np.ndarray  # (len(times), tests)
    stderrs: np.ndarray
    paths: int
    sigmas: float = 3.0

    @property
    def passed(self) -> bool:
        return bool(np.all(np.abs(self.means) <= self.sigmas * self.stderrs + 1e-12))

    def to_dict(self) -> dict:
        return {
            "times": self.times,
            "means": self.means.tolist(),
            "stderrs": self.stderrs.tolist(),
            "paths": self.paths,
            "passed": self.passed,
        }


def probe_matrices(N: int, seed: int = 0) -> np.ndarray:
    """Identity plus one fixed random Hermitian matrix."""
    rng = stream(seed, PROBE_KEY)
    return np.stack([np.eye(N, dtype=np.complex128), random_hermitian(rng, N)])


def martingale_check(
    P,
    X0,
    fam: PotentialFamily,
    alpha: float,
    check_times: Sequence[float],
    paths: int,
    dt: float,
    seed: int = 0,
    tests: Optional[np.ndarray] = None,
    finite_n: bool = True,
    threads: Optional[int] = None,
) -> MartingaleReport:
    """Streamed Itô residual over many paths; only the check times are kept."""
    P = as_trace(P)
    A0 = _batch(X0, 1)[0]
    N = A0.shape[-1]
    tests = probe_matrices(N, seed) if tests is None else np.asarray(tests)
    L = generator(P, fam.potential(alpha), N=N if finite_n else None)
    obs, gen = CompiledPoly(P), CompiledPoly(L)
    index = _time_index(check_times, dt)
    steps = max(index)
    field_ = fam.drift_field(alpha)
    ranges = chunks(paths, BATCH)

    def run(b: int) -> np.ndarray:
        size = len(ranges[b])
        A = np.broadcast_to(A0, (size,) + A0.shape).copy()
        start = obs(A)
        state = {"prev": gen(A), "integral": np.zeros_like(start)}
        out = np.zeros((len(check_times), len(tests), size))

        def record(k: int, X: np.ndarray) -> None:
            cur = gen(X)
            state["integral"] = state["integral"] + 0.5 * dt * (state["prev"] + cur)
            state["prev"] = cur
            if k in index:
                M = obs(X) - start - state["integral"]
                for j in index[k]:
                    out[j] = np.real(tau_hat(M[None] @ tests[:, None]))

        integrate(A, field_, dt, steps, NoiseSource(seed, b), record)
        return out

    samples = np.concatenate(parallel_map(run, list(range(len(ranges))), threads), axis=-1)
    means = samples.mean(axis=-1)
    stderrs = samples.std(axis=-1, ddof=1) / np.sqrt(samples.shape[-1])
    report = MartingaleReport([float(t) for t in check_times], means, stderrs, paths)
    logger.info(f"Martingale check over {paths} paths: passed={report.passed}")
    return report


@dataclass
class GeneratorCheck:
    """(φ_t(P)(X₀) − P(X₀))/t against L P(X₀)."""

    t: float
    finite_difference: np.ndarray
    generator_value: np.ndarray
    mc_error: float

    @property
    def discrepancy(self) -> float:
        return float(np.max(np.abs(self.finite_difference - self.generator_value)))

    def within(self, order_coeff: float = 1.0, sigmas: float = 3.0) -> bool:
        """Discrepancy bounded by O(t) + sigmas·MC error."""
        return self.discrepancy <= order_coeff * self.t + sigmas * self.mc_error + 1e-12

    def to_dict(self) -> dict:
        return {"t": self.t, "discrepancy": self.discrepancy, "mc_error": self.mc_error}


def generator_check(
    P,
    X0,
    fam: PotentialFamily,
    alpha: float,
    t: float,
    paths: int = 1000,
    dt: Optional[float] = None,
    seed: int = 0,
    antithetic: bool = True,
    threads: Optional[int] = None,
) -> GeneratorCheck:
    P = as_trace(P)
    dt = dt or t / 10
    A0 = _batch(X0, 1)[0]
    est = semigroup_eval(P, A0, fam, alpha, [t], paths, dt, seed, threads, antithetic)
    base = eval_trace_poly(P, A0)
    L = generator(P, fam.potential(alpha), N=A0.shape[-1])
    mc = float(max(est.stderr_re.max(), est.stderr_im.max())) / t
    return GeneratorCheck(t, (est.mean[0] - base) / t, eval_trace_poly(L, A0), mc)


@dataclass
class RefinementResult:
    """Endpoint moments at dt, dt/2, dt/4 under common random numbers."""

    dts: List[float]
    moments: List[float]
    order: float

    def to_dict(self) -> dict:
        return {"dts": self.dts, "moments": self.moments, "order": self.order}


def dt_refinement(
    P,
    X0,
    fam: PotentialFamily,
    alpha: float,
    T: float,
    dt: float,
    paths: int = 1000,
    seed: int = 0,
    levels: int = 3,
) -> RefinementResult:
    """Weak order from Re τ̂(P(X_T)) at dt·2⁻ˡ.

    The coarse levels sum the finest increments, so every level sees the
    same Brownian path.
    """
    observable = CompiledPoly(as_trace(P))
    fine_dt = dt / 2 ** (levels - 1)
    fine_steps = step_count(T, fine_dt)
    A0 = _batch(X0, 1)[0]
    n, N = A0.shape[0], A0.shape[-1]
    field_ = fam.drift_field(alpha)
    dts = [dt / 2 ** level for level in range(levels)]
    sums = np.zeros(levels)

    for b, idx in enumerate(chunks(paths, BATCH)):
        size = len(idx)
        source = NoiseSource(seed, b)
        states = [np.broadcast_to(A0, (size, n, N, N)).copy() for _ in range(levels)]
        pending = [np.zeros((size, n, N, N), np.complex128) for _ in range(levels)]
        for j in range(fine_steps):
            dS = source.draw(j, (size, n), N, fine_dt)
            for level in range(levels):
                pending[level] += dS
                stride = 2 ** (levels - 1 - level)
                if (j + 1) % stride == 0:
                    A = states[level]
                    states[level] = euler_step(A, field_, dts[level], pending[level])
                    pending[level] = np.zeros_like(A)
        for level in range(levels):
            sums[level] += float(np.sum(np.real(tau_hat(observable(states[level])))))

    moments = sums / paths
    e1 = abs(moments[0] - moments[1])
    e2 = abs(moments[1] - moments[2]) if levels > 2 else float("nan")
    order = float(np.log2(e1 / e2)) if levels > 2 and e2 > 0 and e1 > 0 else float("nan")
    logger.info(f"dt refinement moments {moments.tolist()}, observed order {order:.3f}")
    return RefinementResult(dts, moments.tolist(), order)


def ou_second_moment(X0: np.ndarray, t: float, c: float = 1.0) -> np.ndarray:
    """φ_t(X²)(X₀) for V = (c/2)X²: e^{−ct}X₀² + (1 − e^{−ct})/c·I."""
    N = X0.shape[-1]
    decay = np.exp(-c * t)
    return decay * X0 @ X0 + (1.0 - decay) / c * np.eye(N)


@dataclass
class SemigroupPropertyResult:
    direct: SemigroupEstimate
    expected: np.ndarray
    passed: bool = False
    details: dict = field(default_factory=dict)


def semigroup_property_check(
    X0,
    s: float,
    t: float,
    paths: int,
    dt: float,
    c: float = 1.0,
    seed: int = 0,
    threads: Optional[int] = None,
) -> SemigroupPropertyResult:
    """OU check of φ_{s+t}(X²) = φ_s(φ_t(X²)).

    φ_t(X²) = e^{−ct}X² + (1 − e^{−ct})/c is again a polynomial, so φ_s of
    it is estimated by Monte Carlo and compared with the direct estimate
    at s+t and the closed form.
    """
    fam = PotentialFamily.quadratic(c, 1)
    alpha = 1.0
    A0 = _batch(X0, 1)[0]
    X = TracePoly.var(1, 1)
    square = X.mul(X)
    decay = np.exp(-c * t)
    inner = square.scale(float(decay)) + TracePoly.constant(float((1.0 - decay) / c), 1)
    composed = semigroup_eval(inner, A0, fam, alpha, [s], paths, dt, seed, threads)
    direct = semigroup_eval(square, A0, fam, alpha, [s + t], paths, dt, seed + 1, threads)
    expected = ou_second_moment(A0[0], s + t, c)
    stderr_re = np.sqrt(composed.stderr_re ** 2 + direct.stderr_re ** 2)
    gap = np.abs((composed.mean - direct.mean).real)
    passed = bool(np.all(gap <= 3.0 * stderr_re + 1e-10)) and composed.within(expected)
    return SemigroupPropertyResult(
        direct,
        expected,
        passed,
        {"max_gap": float(gap.max()), "composed_rel_error": composed.relative_error(expected)},
    )


__all__ = [
    "GeneratorCheck",
    "ItoResidual",
    "MartingaleReport",
    "RefinementResult",
    "SemigroupEstimate",
    "SemigroupPropertyResult",
    "dt_refinement",
    "generator_check",
    "ito_residual",
    "martingale_check",
    "ou_second_moment",
    "probe_matrices",
    "semigroup_eval",
    "semigroup_property_check",
]
