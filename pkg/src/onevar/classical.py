"""
Free Gibbs Transport - Classical 1-d Transport

Grid algorithm for the monotone map pushing e^{−V}/Z to e^{−V−W}/Z′:
for each α the centered source W̃ = W − μ_α(W) is evolved by the
semigroup of L = ∂² − V_α′∂ (Crank–Nicolson in s), g_α = −∫P_sW̃ ds
solves L g_α = W̃, and F follows ∂_αF = g_α′(F) by Heun's method.
The quantile map Q_ν∘F_μ is the independent oracle.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import optimize, sparse
from scipy.integrate import cumulative_trapezoid, trapezoid
from scipy.interpolate import CubicSpline, PchipInterpolator
from scipy.sparse.linalg import splu

from core.errors import InstabilityError, TailBoundExceeded

logger = logging.getLogger(__name__)

# Points of the fine grid behind GibbsDensity
DENSITY_POINTS = 20001
# Backward-Euler half steps that damp stiff modes before Crank–Nicolson
RANNACHER_STEPS = 4
BOUNDARIES = ("reflecting", "dirichlet")


@dataclass
class GridFunc:
    """Values on a uniform grid; cubic interpolation off the grid."""

    x: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.x.shape != self.values.shape or self.x.ndim != 1 or len(self.x) < 2:
            raise ValueError("grid and values must be 1-d arrays of equal length")
        steps = np.diff(self.x)
        if np.any(steps <= 0) or np.ptp(steps) > 1e-9 * max(1.0, abs(steps[0])):
            raise ValueError("grid must be sorted and uniform")

    @property
    def spacing(self) -> float:
        return float(self.x[1] - self.x[0])

    def __call__(self, points) -> np.ndarray:
        return CubicSpline(self.x, self.values)(points)

    def derivative(self) -> "GridFunc":
        return GridFunc(self.x, CubicSpline(self.x, self.values)(self.x, 1))

    def is_monotone(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.diff(self.values) >= -tol))

    def sup_distance(self, other, lo: Optional[float] = None, hi: Optional[float] = None) -> float:
        """max |self − other| on the grid points inside [lo, hi]."""
        mask = np.ones_like(self.x, dtype=bool)
        if lo is not None:
            mask &= self.x >= lo
        if hi is not None:
            mask &= self.x <= hi
        theirs = other(self.x[mask]) if callable(other) else np.asarray(other)[mask]
        return float(np.max(np.abs(self.values[mask] - theirs)))

    def rows(self) -> list:
        return [{"x": float(a), "value": float(v)} for a, v in zip(self.x, self.values)]


def uniform_grid(lo: float, hi: float, points: int) -> np.ndarray:
    if hi <= lo or points < 3:
        raise ValueError("grid needs lo < hi and at least 3 points")
    return np.linspace(lo, hi, points)


class GibbsDensity:
    """Classical e^{−V}/Z on [lo, hi] with the cdf/quantile interface of EqMeasure."""

    def __init__(self, V: Sequence[float], lo: float, hi: float, points: int = DENSITY_POINTS):
        self.V = np.asarray(V, dtype=float)
        self.lo, self.hi = float(lo), float(hi)
        self.x = np.linspace(self.lo, self.hi, points)
        potential = npoly.polyval(self.x, self.V)
        weights = np.exp(-(potential - potential.min()))
        cumulative = cumulative_trapezoid(weights, self.x, initial=0.0)
        self.Z = float(cumulative[-1])
        self.log_Z = float(np.log(self.Z) - potential.min())
        self._density = weights / self.Z
        self._cdf = PchipInterpolator(self.x, cumulative / self.Z)

    @property
    def support(self) -> tuple:
        return self.lo, self.hi

    def density(self, x) -> np.ndarray:
        return np.interp(x, self.x, self._density, left=0.0, right=0.0)

    def cdf(self, x) -> np.ndarray:
        return np.clip(self._cdf(np.clip(x, self.lo, self.hi)), 0.0, 1.0)

    def quantile(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)

        def solve(v: float) -> float:
            if v <= 0.0:
                return self.lo
            if v >= 1.0:
                return self.hi
            return optimize.brentq(lambda x: float(self._cdf(x)) - v, self.lo, self.hi,
                                   xtol=1e-13)

        out = np.array([solve(v) for v in np.ravel(u)]).reshape(u.shape)
        return out if out.ndim else float(out)

    def expectation(self, f) -> float:
        values = f(self.x) if callable(f) else npoly.polyval(self.x, f)
        return float(trapezoid(values * self._density, self.x))

    def moment(self, k: int) -> float:
        return self.expectation(lambda x: x ** k)


def quantile_transport(mu, nu, grid: Optional[np.ndarray] = None, points: int = 2048) -> GridFunc:
    """Monotone map T = Q_ν ∘ F_μ on a grid (default: μ's support)."""
    if grid is None:
        lo, hi = mu.support
        grid = uniform_grid(lo, hi, points)
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(nu.quantile(mu.cdf(grid)), dtype=float)
    return GridFunc(grid, np.maximum.accumulate(values))


def oracle_error(F: GridFunc, mu, nu, mass: float = 1e-4) -> float:
    """Sup distance to Q_ν∘F_μ on [Q_μ(mass), Q_μ(1 − mass)].

    The quantile oracle loses precision where F_μ is within rounding of 0
    or 1, so the far tails are excluded.
    """
    lo, hi = mu.quantile(np.array([mass, 1.0 - mass]))
    inside = F.x[(F.x >= lo) & (F.x <= hi)]
    oracle = nu.quantile(mu.cdf(inside))
    return float(np.max(np.abs(F(inside) - oracle)))


def gaussian_moment(k: int, variance: float = 1.0) -> float:
    """E[x^k] for x ~ 𝒩(0, variance): (k−1)!!·variance^{k/2} at even k."""
    if k % 2:
        return 0.0
    double_factorial = float(np.prod(np.arange(k - 1, 0, -2))) if k > 1 else 1.0
    return double_factorial * variance ** (k // 2)


def log_partition_derivative(V, W, alpha: float, lo: float, hi: float) -> float:
    """∂_α log Z_{V+αW} = −μ_{V+αW}(W)."""
    Va = npoly.polyadd(np.asarray(V, dtype=float), alpha * np.asarray(W, dtype=float))
    return -GibbsDensity(Va, lo, hi).expectation(W)


class GeneratorGrid:
    """Finite-volume L = ∂² − V′∂ with zero flux or Dirichlet far field.

    In the zero-flux form L = D⁻¹K with D = diag(e^{−V}dx) and K
    symmetric, so Σ e^{−V}·h·dx is conserved and a centered source stays
    centered.
    """

    def __init__(self, x: np.ndarray, V: Sequence[float], boundary: str = "reflecting"):
        if boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}")
        self.x = x
        self.boundary = boundary
        dx = x[1] - x[0]
        potential = npoly.polyval(x, V)
        faces = npoly.polyval(0.5 * (x[:-1] + x[1:]), V)
        # e^{V_i − V_face}/dx² couples node i to its neighbour across the face
        right = np.exp(potential[:-1] - faces) / dx ** 2
        left = np.exp(potential[1:] - faces) / dx ** 2
        diag = np.zeros(len(x))
        diag[:-1] -= right
        diag[1:] -= left
        L = sparse.diags([left, diag, right], [-1, 0, 1], format="lil")
        if boundary == "dirichlet":
            for i in (0, len(x) - 1):
                L[i, :] = 0.0
        self.L = L.tocsc()
        self.mass = np.exp(-(potential - potential.min())) * dx
        self.mass /= self.mass.sum()

    def norm(self, f: np.ndarray) -> float:
        return float(np.sqrt(np.dot(self.mass, f ** 2)))

    def center(self, f: np.ndarray) -> np.ndarray:
        out = f - float(np.dot(self.mass, f))
        if self.boundary == "dirichlet":
            out[[0, -1]] = 0.0
        return out

    def evolve_integral(self, h0: np.ndarray, horizon: float, ds: float) -> tuple:
        """(∫₀^S P_s h0 ds, P_S h0) by Rannacher-started Crank–Nicolson."""
        steps = int(round(horizon / ds))
        eye = sparse.identity(len(self.x), format="csc")
        implicit = splu((eye - 0.5 * ds * self.L).tocsc())
        explicit = (eye + 0.5 * ds * self.L).tocsr()
        bound = self.norm(h0) * (1.0 + 1e-6) + 1e-12
        h = h0.copy()
        integral = np.zeros_like(h)
        for k in range(steps):
            if k < RANNACHER_STEPS // 2:
                # two backward-Euler half steps
                nxt = implicit.solve(implicit.solve(h))
            else:
                nxt = implicit.solve(explicit @ h)
            integral += 0.5 * ds * (h + nxt)
            h = nxt
            if not np.all(np.isfinite(h)) or self.norm(h) > bound:
                raise InstabilityError(f"semigroup step {k} grew the L²(μ) norm")
        return integral, h


@dataclass
class ClassicalTransport:
    """Output of the grid pipeline."""

    F: GridFunc
    tail: float
    alphas: np.ndarray

    def to_dict(self) -> dict:
        return {"tail": self.tail, "alpha_steps": len(self.alphas) - 1,
                "monotone": self.F.is_monotone()}


def _convexity(x: np.ndarray, V: np.ndarray) -> float:
    return float(np.min(npoly.polyval(x, npoly.polyder(V, 2))))


def poisson_gradient(
    x: np.ndarray,
    V: Sequence[float],
    W: Sequence[float],
    s_horizon: float,
    ds: float,
    boundary: str = "reflecting",
) -> tuple:
    """g′ on the grid for L g = W − μ(W), with the L²(μ) tail bound beyond s_horizon."""
    gen = GeneratorGrid(x, V, boundary)
    source = gen.center(npoly.polyval(x, W))
    integral, last = gen.evolve_integral(source, s_horizon, ds)
    g = GridFunc(x, -integral)
    c = _convexity(x, np.asarray(V, dtype=float))
    tail = gen.norm(last) / c if c > 0 else float("inf")
    return g.derivative(), tail


def classical_transport_1d(
    V: Sequence[float],
    W: Sequence[float],
    grid: np.ndarray,
    alpha_steps: int = 50,
    s_horizon: float = 30.0,
    ds: float = 0.02,
    boundary: str = "reflecting",
    tail_tol: float = 1e-6,
) -> ClassicalTransport:
    """Transport map from e^{−V}/Z to e^{−V−W}/Z′ by the semigroup route.

    Args:
        V: Source potential (ascending coefficients)
        W: Perturbation (ascending coefficients)
        grid: Uniform grid, wide enough to carry both measures
        alpha_steps: Heun steps in α
        s_horizon: Semigroup time horizon
        ds: Crank–Nicolson step
        boundary: "reflecting" (zero flux) or "dirichlet" far field
        tail_tol: Largest accepted L²(μ) tail ‖P_S W̃‖/c

    Returns:
        ClassicalTransport with F at α = 1
    """
    x = np.asarray(grid, dtype=float)
    V = np.asarray(V, dtype=float)
    W = np.asarray(W, dtype=float)
    alphas = np.linspace(0.0, 1.0, alpha_steps + 1)
    F = x.copy()
    if not np.any(W):
        return ClassicalTransport(GridFunc(x, F), 0.0, alphas)
    for alpha in (0.0, 1.0):
        if _convexity(x, npoly.polyadd(V, alpha * W)) <= 0:
            raise ValueError(f"V + {alpha}·W is not uniformly convex on the grid")

    def drift(alpha: float) -> tuple:
        return poisson_gradient(x, npoly.polyadd(V, alpha * W), W, s_horizon, ds, boundary)

    current, worst_tail = drift(0.0)
    h = 1.0 / alpha_steps
    for k in range(alpha_steps):
        k1 = current(F)
        predicted = F + h * k1
        nxt, tail = drift(alphas[k + 1])
        worst_tail = max(worst_tail, tail)
        F = F + 0.5 * h * (k1 + nxt(predicted))
        current = nxt
        logger.debug(f"alpha {alphas[k + 1]:.3f}: F range [{F[0]:.4f}, {F[-1]:.4f}]")
    if worst_tail > tail_tol:
        raise TailBoundExceeded(worst_tail, tail_tol)
    result = ClassicalTransport(GridFunc(x, F), worst_tail, alphas)
    if not result.F.is_monotone():
        logger.warning("Classical transport map is not monotone on the grid")
    return result


__all__ = [
    "BOUNDARIES",
    "ClassicalTransport",
    "GeneratorGrid",
    "GibbsDensity",
    "GridFunc",
    "classical_transport_1d",
    "gaussian_moment",
    "log_partition_derivative",
    "oracle_error",
    "poisson_gradient",
    "quantile_transport",
    "uniform_grid",
]
