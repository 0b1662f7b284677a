"""
Free Gibbs Transport - Semigroup Gradients

Estimates Gᵢ = N·∇_{Yᵢ} E[τ̂(W(X_t(Y)))] for the free SDE started at Y,
and the transport drift 𝒟g_α(Y) = −½∫₀^T G_t dt.

The adjoint mode runs the Euler path forward and propagates a co-state
backwards with Λ ← Λ − (dt/2)·Hess(X_k)#Λ; the Hessian superoperator is
self-adjoint, so this is the transpose of the linearized flow. The whole
time integral costs one backward pass because each step adds its
quadrature weight times 𝒟W(X_k). States are recomputed between
checkpoints from the replayable noise.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from core.config import TransportConfig
from core.errors import GradientMismatch, TailBoundExceeded
from freesde import NoiseSource, PotentialFamily, SharedNoise, euler_step, step_count
from matrep import HermCoordinates, HessianKernel, hermitize, op_norm
from ncalg import NCPoly
from sampler import PotentialField

logger = logging.getLogger(__name__)

MODES = ("adjoint", "fd")
# Relative tolerance for the adjoint/FD cross-check
GRADIENT_TOL = 1e-3


@dataclass
class GradientEstimate:
    """Path-averaged gradient tuple with its standard error."""

    value: np.ndarray  # (n, N, N)
    stderr: np.ndarray  # (n, N, N), real
    paths: int
    mode: str = "adjoint"
    tail_bound: Optional[float] = None

    @property
    def max_stderr(self) -> float:
        return float(np.max(self.stderr)) if self.stderr.size else 0.0

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "paths": self.paths,
            "max_abs": float(np.max(np.abs(self.value))),
            "max_stderr": self.max_stderr,
            "tail_bound": self.tail_bound,
        }


def _path_stats(per_path: np.ndarray, antithetic: bool) -> tuple:
    """Mean and stderr over the leading path axis; antithetic pairs count as one draw."""
    if antithetic and per_path.shape[0] % 2 == 0:
        half = per_path.shape[0] // 2
        per_path = 0.5 * (per_path[:half] + per_path[half:])
    mean = per_path.mean(axis=0)
    m = per_path.shape[0]
    if m < 2:
        return mean, np.zeros(mean.shape)
    spread = np.abs(per_path - mean)
    return mean, np.sqrt((spread ** 2).sum(axis=0) / (m - 1) / m)


def _weights(steps: int, dt: float, running: bool) -> np.ndarray:
    if not running:
        w = np.zeros(steps + 1)
        w[-1] = 1.0
        return w
    w = np.full(steps + 1, dt)
    w[0] = w[-1] = 0.5 * dt
    if steps == 0:
        w[:] = 0.0
    return w


class AdjointSolver:
    """Forward/backward sweeps for one family member V_α and observable W."""

    def __init__(self, fam: PotentialFamily, alpha: float, W: Optional[NCPoly] = None):
        self.fam = fam
        self.alpha = alpha
        self.V = fam.potential(alpha)
        self.W = fam.W_poly if W is None else W
        self.field = fam.drift_field(alpha)
        self.grad_W = PotentialField(self.W)
        self.kernel = HessianKernel(self.V)

    def sweep(
        self,
        Y: np.ndarray,
        T: float,
        dt: float,
        noise: Optional[NoiseSource],
        running: bool,
        checkpoint: Optional[int] = None,
    ) -> tuple:
        """Co-state Λ₀ for a batch of paths started at Y (B, n, N, N).

        Returns:
            (Λ₀ per path, max operator norm of 𝒟W seen at checkpoints)
        """
        steps = step_count(T, dt)
        weights = _weights(steps, dt, running)
        C = checkpoint or max(1, int(np.sqrt(steps)))
        shape, N = Y.shape[:-2], Y.shape[-1]

        def increment(k: int):
            return noise.draw(k, shape, N, dt) if noise is not None else 0.0

        checkpoints = {0: Y}
        A = Y
        scale = 0.0
        for k in range(steps):
            if k % C == 0:
                scale = max(scale, float(np.max(op_norm(self.grad_W.gradient(A)))))
            A = euler_step(A, self.field, dt, increment(k))
            if (k + 1) % C == 0:
                checkpoints[k + 1] = A
        gW = self.grad_W.gradient(A)
        scale = max(scale, float(np.max(op_norm(gW))))

        lam = weights[-1] * gW
        for start in reversed(range(0, steps, C)):
            stop = min(start + C, steps)
            states = [checkpoints[start]]
            for k in range(start, stop - 1):
                states.append(euler_step(states[-1], self.field, dt, increment(k)))
            for k in reversed(range(start, stop)):
                X = states[k - start]
                lam = hermitize(lam - 0.5 * dt * self.kernel.apply(X, lam))
                if weights[k]:
                    lam = lam + weights[k] * self.grad_W.gradient(X)
        return lam, scale

    def objective(
        self,
        Y: np.ndarray,
        T: float,
        dt: float,
        noise,
        running: bool,
    ) -> np.ndarray:
        """N·Σ_k w_k τ̂(W(X_k)) per path (the functional the adjoint differentiates)."""
        steps = step_count(T, dt)
        weights = _weights(steps, dt, running)
        shape, N = Y.shape[:-2], Y.shape[-1]
        A = Y
        total = weights[0] * self.grad_W.energy(A) / N
        for k in range(steps):
            dS = noise.draw(k, shape, N, dt) if noise is not None else 0.0
            A = euler_step(A, self.field, dt, dS)
            if weights[k + 1]:
                total = total + weights[k + 1] * self.grad_W.energy(A) / N
        return total


def _paths_batch(Y: np.ndarray, paths: int, antithetic: bool) -> np.ndarray:
    if antithetic and paths % 2:
        paths += 1
    return np.broadcast_to(Y, (paths,) + Y.shape).copy()


def _adjoint(solver, Y, T, dt, paths, seed, key, noise, antithetic, running, checkpoint):
    paths = paths if noise else 1
    batch = _paths_batch(Y, paths, antithetic and noise)
    source = NoiseSource(seed, key, antithetic) if noise else None
    lam, scale = solver.sweep(batch, T, dt, source, running, checkpoint)
    mean, stderr = _path_stats(lam, antithetic and noise)
    return mean, stderr, batch.shape[0], scale


def _finite_difference(solver, Y, T, dt, paths, seed, key, noise, antithetic, running, step):
    """Central differences along an orthonormal Hermitian basis with shared noise."""
    paths = paths if noise else 1
    n, N = Y.shape[0], Y.shape[-1]
    coords = HermCoordinates(n, N)
    basis = np.stack([coords.to_tuple(e) for e in np.eye(coords.dim)])
    starts = np.concatenate([Y + step * basis, Y - step * basis])  # (2·dim, n, N, N)
    batch = _paths_batch(Y, paths, antithetic and noise).shape[0]
    A = np.broadcast_to(starts[:, None], (starts.shape[0], batch, n, N, N)).copy()
    source = SharedNoise(NoiseSource(seed, key, antithetic)) if noise else None
    values = solver.objective(A, T, dt, source, running)  # (2·dim, batch)
    coords_per_path = (values[: coords.dim] - values[coords.dim:]) / (2.0 * step)
    per_path = np.stack([coords.to_tuple(coords_per_path[:, p]) for p in range(batch)])
    mean, stderr = _path_stats(per_path, antithetic and noise)
    return mean, stderr, batch


def semigroup_gradient(
    W: Optional[NCPoly],
    Y,
    fam: PotentialFamily,
    alpha: float,
    t: float,
    paths: int = 8,
    dt: float = 0.01,
    seed: int = 0,
    key: int = 0,
    mode: str = "adjoint",
    fd_step: float = 1e-5,
    noise: bool = True,
    antithetic: bool = False,
    checkpoint: Optional[int] = None,
) -> GradientEstimate:
    """N·∇_Y E[τ̂(W(X_t(Y)))], the matrix stand-in for 𝒟(φ_t(W))(Y).

    Args:
        W: Observable (defaults to the family's W)
        Y: Starting tuple (n, N, N)
        fam: Potential family
        alpha: Interpolation parameter
        t: Time (multiple of dt)
        paths: Monte Carlo paths
        dt: Euler step
        seed: Run seed
        key: Noise key (per sample)
        mode: "adjoint" or "fd" (central differences, the oracle)
        fd_step: Finite-difference step
        noise: False runs the deterministic drift flow
        antithetic: Mirrored noise pairs
        checkpoint: Steps between stored states in the adjoint sweep

    Returns:
        GradientEstimate of shape (n, N, N)
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    Y = np.asarray(getattr(Y, "mats", Y), dtype=np.complex128)
    solver = AdjointSolver(fam, alpha, W)
    if mode == "adjoint":
        mean, stderr, count, _ = _adjoint(
            solver, Y, t, dt, paths, seed, key, noise, antithetic, False, checkpoint
        )
    else:
        mean, stderr, count = _finite_difference(
            solver, Y, t, dt, paths, seed, key, noise, antithetic, False, fd_step
        )
    return GradientEstimate(hermitize(mean), stderr, count, mode)


def tail_bound(scale: float, c: Optional[float], T: float) -> Optional[float]:
    """½∫_T^∞ scale·e^{−cs/2} ds = scale·e^{−cT/2}/c."""
    if c is None or c <= 0:
        return None
    return float(scale * np.exp(-0.5 * c * T) / c)


def dg_eval(
    Y,
    fam: PotentialFamily,
    alpha: float,
    cfg: TransportConfig,
    key: int = 0,
    seed: Optional[int] = None,
    strict: bool = False,
    noise: bool = True,
) -> GradientEstimate:
    """𝒟g_α(Y) = −½∫₀^T 𝒟(φ_t(W))(Y) dt by trapezoid quadrature on the Euler grid.

    One path bundle serves every t. The tail beyond T is bounded by
    scale·e^{−c(α)T/2}/c(α) with scale the largest ‖𝒟W‖ seen; with strict
    a bound above cfg.tail_tol raises TailBoundExceeded.
    """
    Y = np.asarray(getattr(Y, "mats", Y), dtype=np.complex128)
    seed = cfg.seed if seed is None else seed
    solver = AdjointSolver(fam, alpha)
    if solver.W.is_zero():
        return GradientEstimate(np.zeros_like(Y), np.zeros(Y.shape), 0, cfg.gradient, 0.0)

    if cfg.gradient == "adjoint":
        mean, stderr, count, scale = _adjoint(
            solver, Y, cfg.T, cfg.dt, cfg.paths, seed, key, noise, cfg.antithetic, True, None
        )
    elif cfg.gradient == "fd":
        mean, stderr, count = _finite_difference(
            solver, Y, cfg.T, cfg.dt, cfg.paths, seed, key, noise, cfg.antithetic, True,
            cfg.fd_step,
        )
        scale = float(np.max(op_norm(solver.grad_W.gradient(Y))))
    else:
        raise ValueError(f"gradient must be one of {MODES}")

    bound = tail_bound(scale, fam.c(alpha), cfg.T)
    if bound is None:
        logger.warning(f"No convexity constant at alpha={alpha}; tail beyond T is unbounded")
    elif bound > cfg.tail_tol:
        if strict:
            raise TailBoundExceeded(bound, cfg.tail_tol)
        logger.warning(f"Tail bound {bound:.3e} exceeds tolerance {cfg.tail_tol:.3e}")
    return GradientEstimate(hermitize(-0.5 * mean), 0.5 * stderr, count, cfg.gradient, bound)


def gradient_consistency(
    Y,
    fam: PotentialFamily,
    alpha: float,
    t: float,
    paths: int = 4,
    dt: float = 0.01,
    seed: int = 0,
    fd_step: float = 1e-5,
    tolerance: float = GRADIENT_TOL,
    strict: bool = False,
) -> float:
    """Relative gap between adjoint and FD gradients under the same noise.

    The FD result is the reference; with strict a gap above tolerance
    raises GradientMismatch.
    """
    kwargs = dict(paths=paths, dt=dt, seed=seed, fd_step=fd_step)
    adjoint = semigroup_gradient(None, Y, fam, alpha, t, mode="adjoint", **kwargs)
    fd = semigroup_gradient(None, Y, fam, alpha, t, mode="fd", **kwargs)
    scale = max(float(np.max(np.abs(fd.value))), 1e-300)
    rel = float(np.max(np.abs(adjoint.value - fd.value))) / scale
    if rel > tolerance:
        logger.warning(f"Adjoint and FD gradients differ by {rel:.3e} (relative)")
        if strict:
            raise GradientMismatch(rel, tolerance)
    return rel


__all__ = [
    "AdjointSolver",
    "GRADIENT_TOL",
    "GradientEstimate",
    "MODES",
    "dg_eval",
    "gradient_consistency",
    "semigroup_gradient",
    "tail_bound",
]
