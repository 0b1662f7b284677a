"""
Free Gibbs Transport - One-cut Equilibrium Measures

Equilibrium measures of convex polynomial potentials on the line,
normalized so that 2·PV∫dμ(y)/(x−y) = V′(x) on the support (V = x²/2
gives the semicircle on [−2, 2]). The resolvent ansatz
G(z) = ½(V′(z) − Q(z)√((z−a)(z−b))) fixes Q as the polynomial part of
V′(z)/√((z−a)(z−b)); the endpoints solve the two conditions making
G(z) ~ 1/z at infinity.
"""

import logging
from dataclasses import dataclass, field
from math import comb
from typing import Dict, List, Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import integrate, optimize, stats

from core.errors import (
    ConvergenceError,
    DimensionMismatch,
    EmptyEnsembleError,
    TwoCutError,
)
from matrep import Ensemble

logger = logging.getLogger(__name__)

# Endpoint residual accepted from the root finder
ENDPOINT_TOL = 1e-12
# Schwinger–Dyson residual accepted on the test battery
SD_TOL = 1e-8
# Grid used to check Q ≥ 0 on the support
POSITIVITY_POINTS = 512
# Gauss–Legendre nodes for the CDF integral in the angle variable
CDF_NODES = 64
_LEGENDRE = np.polynomial.legendre.leggauss(CDF_NODES)


def _arc_coefficients(a: float, b: float, count: int) -> np.ndarray:
    """c_k with 1/√((z−a)(z−b)) = Σ c_k z^{−k−1}.

    Equivalently c_k = (1/π)∫ y^k dy/√((b−y)(y−a)) over [a, b].
    """
    beta = np.array([comb(2 * j, j) / 4.0 ** j for j in range(count)])
    pa = beta * a ** np.arange(count)
    pb = beta * b ** np.arange(count)
    return np.convolve(pa, pb)[:count]


def _derivative(V: Sequence[float]) -> np.ndarray:
    return npoly.polyder(np.asarray(V, dtype=float))


def _conditions(V_prime: np.ndarray, a: float, b: float) -> np.ndarray:
    """(Σ w_m c_m, Σ w_m c_{m+1} − 2): both vanish for the one-cut endpoints."""
    c = _arc_coefficients(a, b, len(V_prime) + 1)
    first = float(np.dot(V_prime, c[: len(V_prime)]))
    second = float(np.dot(V_prime, c[1: len(V_prime) + 1]))
    return np.array([first, second - 2.0])


def _q_polynomial(V_prime: np.ndarray, a: float, b: float) -> np.ndarray:
    """Polynomial part of V′(z)/√((z−a)(z−b)), ascending coefficients."""
    d = len(V_prime) - 1
    if d < 1:
        return np.zeros(1)
    c = _arc_coefficients(a, b, d)
    Q = np.zeros(d)
    for p in range(d):
        Q[p] = sum(V_prime[m] * c[m - 1 - p] for m in range(p + 1, d + 1))
    return Q


@dataclass
class EqMeasure:
    """dμ = (1/2π)Q(x)√((b−x)(x−a))dx on [a, b]."""

    a: float
    b: float
    Q: np.ndarray  # ascending coefficients
    V: np.ndarray = field(default_factory=lambda: np.zeros(1))
    _moments: Dict[int, float] = field(default_factory=dict, repr=False)

    @property
    def support(self) -> tuple:
        return self.a, self.b

    @property
    def center(self) -> float:
        return 0.5 * (self.a + self.b)

    @property
    def radius(self) -> float:
        return 0.5 * (self.b - self.a)

    def density(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inside = (x > self.a) & (x < self.b)
        root = np.sqrt(np.clip((self.b - x) * (x - self.a), 0.0, None))
        return np.where(inside, npoly.polyval(x, self.Q) * root / (2.0 * np.pi), 0.0)

    def _chebyshev_u(self, degree: int) -> tuple:
        """Nodes and weights exact for ∫ f√((b−x)(x−a))dx with deg f ≤ degree."""
        M = degree // 2 + 2
        j = np.arange(1, M + 1)
        theta = j * np.pi / (M + 1)
        nodes = self.center + self.radius * np.cos(theta)
        weights = np.pi / (M + 1) * np.sin(theta) ** 2 * self.radius ** 2
        return nodes, weights

    def integrate_poly(self, f: Sequence[float]) -> float:
        """∫ f dμ for a polynomial f (ascending coefficients), exact up to rounding."""
        degree = len(f) + len(self.Q)
        nodes, weights = self._chebyshev_u(degree)
        values = npoly.polyval(nodes, self.Q) * npoly.polyval(nodes, f)
        return float(np.dot(weights, values) / (2.0 * np.pi))

    def moment(self, k: int) -> float:
        if k not in self._moments:
            f = np.zeros(k + 1)
            f[k] = 1.0
            self._moments[k] = self.integrate_poly(f)
        return self._moments[k]

    def mass(self) -> float:
        return self.moment(0)

    def _cdf_theta(self, theta: np.ndarray) -> np.ndarray:
        # x = center − radius·cos φ runs from a (φ=0) to b (φ=π)
        nodes, weights = _LEGENDRE
        phi = 0.5 * theta[:, None] * (nodes + 1.0)
        x = self.center - self.radius * np.cos(phi)
        integrand = npoly.polyval(x, self.Q) * np.sin(phi) ** 2
        return 0.5 * theta * (integrand @ weights) * self.radius ** 2 / (2.0 * np.pi)

    def cdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        u = np.clip((self.center - x) / self.radius, -1.0, 1.0)
        out = self._cdf_theta(np.arccos(np.ravel(u))).reshape(x.shape)
        return np.clip(out, 0.0, 1.0)

    def quantile(self, u) -> np.ndarray:
        return cdf_quantile(self, u)

    def sd_residuals(self, max_power: int = 3) -> List[float]:
        """∫∫(f(x)−f(y))/(x−y)dμdμ − ∫f·V′dμ for f = x^p, p ≤ max_power."""
        V_prime = _derivative(self.V)
        out = []
        for p in range(max_power + 1):
            lhs = sum(self.moment(i) * self.moment(p - 1 - i) for i in range(p))
            f = np.zeros(p + 1)
            f[p] = 1.0
            out.append(lhs - self.integrate_poly(npoly.polymul(f, V_prime)))
        return out

    def to_dict(self) -> dict:
        return {
            "support": [self.a, self.b],
            "Q": [float(q) for q in self.Q],
            "V": [float(v) for v in self.V],
            "m2": self.moment(2),
            "m4": self.moment(4),
        }


def _initial_guess(V_prime: np.ndarray) -> np.ndarray:
    curvature = V_prime[1] if len(V_prime) > 1 else 0.0
    r0 = 2.0 / np.sqrt(curvature) if curvature > 0.1 else 2.0
    shift = -V_prime[0] / curvature if curvature > 0.1 else 0.0
    return np.array([shift, np.log(r0)])


def equilibrium_measure(V: Sequence[float], tol: float = ENDPOINT_TOL) -> EqMeasure:
    """One-cut equilibrium measure of V (ascending coefficients).

    Args:
        V: Polynomial coefficients, convex on the relevant interval
        tol: Root-finder tolerance on the endpoint conditions

    Returns:
        EqMeasure with support [a, b] and density factor Q

    Raises:
        ConvergenceError: The endpoint conditions were not solved
        TwoCutError: Q changes sign on the support
    """
    V = np.trim_zeros(np.asarray(V, dtype=float), "b")
    if len(V) < 3:
        raise ValueError("potential must have degree at least 2")
    if len(V) % 2 == 0:
        raise TwoCutError("odd-degree potentials are not confining")
    V_prime = _derivative(V)

    def equations(params):
        center, log_r = params
        r = np.exp(log_r)
        return _conditions(V_prime, center - r, center + r)

    sol = optimize.root(equations, _initial_guess(V_prime), method="hybr", tol=tol * 1e-2)
    residual = float(np.max(np.abs(equations(sol.x))))
    if not sol.success and residual > tol:
        raise ConvergenceError(f"one-cut endpoints not found: {sol.message}", residual)
    center, r = sol.x[0], float(np.exp(sol.x[1]))
    mu = EqMeasure(center - r, center + r, _q_polynomial(V_prime, center - r, center + r), V)

    grid = np.linspace(mu.a, mu.b, POSITIVITY_POINTS)
    q_min = float(np.min(npoly.polyval(grid, mu.Q)))
    if q_min < -1e-10:
        raise TwoCutError(f"density factor takes negative value {q_min:.3e} on the support")
    worst = max(abs(v) for v in mu.sd_residuals())
    if worst > SD_TOL:
        raise ConvergenceError("Schwinger–Dyson residual too large", worst)
    if abs(mu.mass() - 1.0) > 1e-10:
        raise ConvergenceError("measure does not have unit mass", abs(mu.mass() - 1.0))
    logger.debug(f"Equilibrium support [{mu.a:.10f}, {mu.b:.10f}], SD residual {worst:.2e}")
    return mu


def cdf_quantile(mu, u) -> np.ndarray:
    """Inverse CDF by bracketed root finding (monotone, endpoints exact)."""
    u = np.asarray(u, dtype=float)
    if np.any((u < 0) | (u > 1)):
        raise ValueError("u must lie in [0, 1]")
    lo, hi = mu.support

    def solve(v: float) -> float:
        if v <= 0.0:
            return lo
        if v >= 1.0:
            return hi
        return optimize.brentq(lambda x: float(mu.cdf(x)) - v, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps)

    out = np.array([solve(v) for v in np.ravel(u)]).reshape(u.shape)
    return out if out.ndim else float(out)


def principal_value_residual(mu: EqMeasure, xs: Optional[Sequence[float]] = None) -> float:
    """max |2·PV∫ρ(y)/(x−y)dy − V′(x)| over interior points."""
    if xs is None:
        xs = mu.center + mu.radius * np.linspace(-0.9, 0.9, 7)
    V_prime = _derivative(mu.V)
    worst = 0.0
    for x in xs:
        # quad's Cauchy weight integrates f(y)/(y − x)
        pv, _ = integrate.quad(
            lambda y: float(mu.density(y)), mu.a, mu.b, weight="cauchy", wvar=x, limit=200
        )
        worst = max(worst, abs(-2.0 * pv - npoly.polyval(x, V_prime)))
    return float(worst)


def spectral_ks(ens: Ensemble, mu) -> float:
    """Kolmogorov–Smirnov distance between the pooled spectrum and μ."""
    if ens.n != 1:
        raise DimensionMismatch(f"spectral_ks needs n = 1, ensemble has n = {ens.n}")
    if ens.count == 0:
        raise EmptyEnsembleError("spectral_ks needs samples")
    eigs = ens.eigenvalues(1)
    return float(stats.kstest(eigs, mu.cdf).statistic)


def semicircle_moment(k: int) -> float:
    """τ(s^k) for a standard semicircular s: Catalan numbers at even k."""
    if k % 2:
        return 0.0
    m = k // 2
    return float(comb(2 * m, m) // (m + 1))


def quartic_endpoint(t: float) -> float:
    """Right endpoint (16/(3t))^{1/4} of the equilibrium measure of t·x⁴/4."""
    return float((16.0 / (3.0 * t)) ** 0.25)


__all__ = [
    "EqMeasure",
    "cdf_quantile",
    "equilibrium_measure",
    "principal_value_residual",
    "quartic_endpoint",
    "semicircle_moment",
    "spectral_ks",
]
