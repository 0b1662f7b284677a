"""
Free Gibbs Transport - Potentials

PotentialSpec holds either a generic self-adjoint NCPoly or the structured
quartic family

    V = Σⱼ μⱼ υⱼ(Σᵢ λᵢⱼ Xᵢ) + ½ Σᵢₖ Aᵢₖ XᵢXₖ,
    υⱼ(x) = νⱼ₂ x²/2 + νⱼ₃ x³/3 + νⱼ₄ x⁴/4,

whose convexity can be certified symbolically (see matrep.certify).
"""

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence

from core.errors import ConfigError

from . import codec
from .poly import NCPoly
from .words import as_coeff


def to_fraction(value) -> Fraction:
    """Exact rational from JSON input; floats go through their decimal repr."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


def _matrix(rows, shape_name: str) -> List[List[Fraction]]:
    try:
        return [[to_fraction(v) for v in row] for row in rows]
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{shape_name}: {e}") from e


@dataclass
class PotentialSpec:
    """Potential description: generic polynomial or structured quartic."""

    kind: str  # "generic" | "structured"
    n: int
    poly: Optional[NCPoly] = None

    # Structured quartic family
    A: List[List[Fraction]] = field(default_factory=list)  # n x n, symmetric
    lam: List[List[Fraction]] = field(default_factory=list)  # n x k
    mu: List[Fraction] = field(default_factory=list)  # k, non-negative
    nu: List[List[Fraction]] = field(default_factory=list)  # k x 3: ν₂, ν₃, ν₄

    c_claim: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("generic", "structured"):
            raise ConfigError(f"unknown potential kind {self.kind!r}")
        if self.kind == "generic":
            if self.poly is None:
                raise ConfigError("generic potential needs a polynomial")
            if self.poly.n != self.n:
                raise ConfigError(f"polynomial has n={self.poly.n}, potential says n={self.n}")
            return
        if not self.A:
            self.A = [[Fraction(0)] * self.n for _ in range(self.n)]
        if len(self.A) != self.n or any(len(row) != self.n for row in self.A):
            raise ConfigError(f"A must be {self.n}x{self.n}")
        k = len(self.mu)
        if len(self.nu) != k or any(len(row) != 3 for row in self.nu):
            raise ConfigError(f"nu must be {k}x3")
        if len(self.lam) != self.n or any(len(row) != k for row in self.lam):
            raise ConfigError(f"lambda must be {self.n}x{k}")
        if any(self.A[i][j] != self.A[j][i] for i in range(self.n) for j in range(self.n)):
            raise ConfigError("A must be symmetric")

    @property
    def columns(self) -> int:
        return len(self.mu)

    def expand(self) -> NCPoly:
        """Self-adjoint NCPoly for this potential."""
        if self.kind == "generic":
            return self.poly
        n = self.n
        V = NCPoly.zero(n)
        for i in range(n):
            for k in range(n):
                if self.A[i][k]:
                    V = V + NCPoly.monomial((i + 1, k + 1), n, self.A[i][k] / 2)
        for j, mu_j in enumerate(self.mu):
            if not mu_j:
                continue
            L = NCPoly.zero(n)
            for i in range(n):
                if self.lam[i][j]:
                    L = L + NCPoly.var(i + 1, n).scale(self.lam[i][j])
            nu2, nu3, nu4 = self.nu[j]
            L2 = L.mul(L)
            L3 = L2.mul(L)
            L4 = L3.mul(L)
            V = V + (L2.scale(nu2 / 2) + L3.scale(nu3 / 3) + L4.scale(nu4 / 4)).scale(mu_j)
        return V

    def univariate_coeffs(self) -> List[float]:
        """Ascending coefficients of V when n = 1."""
        if self.n != 1:
            raise ConfigError("univariate coefficients need n = 1")
        V = self.expand()
        coeffs = [0.0] * (V.degree + 1)
        for word, c in V.terms.items():
            coeffs[len(word)] += float(c)
        return coeffs

    def to_dict(self) -> dict:
        if self.kind == "generic":
            return {
                "kind": "generic",
                "n": self.n,
                "poly": codec.to_dict(self.poly),
                "c_claim": self.c_claim,
            }
        return {
            "kind": "structured",
            "n": self.n,
            "A": [[str(v) for v in row] for row in self.A],
            "lambda": [[str(v) for v in row] for row in self.lam],
            "mu": [str(v) for v in self.mu],
            "nu": [[str(v) for v in row] for row in self.nu],
            "c_claim": self.c_claim,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PotentialSpec":
        kind = data.get("kind", "structured")
        if kind == "generic":
            if "coeffs" in data:
                poly = univariate(data["coeffs"])
            else:
                poly = codec.from_dict(data["poly"])
            return cls(kind="generic", n=int(data.get("n", poly.n)), poly=poly,
                       c_claim=data.get("c_claim"))
        n = int(data.get("n", len(data.get("A", [])) or len(data.get("lambda", []))))
        return cls(
            kind="structured",
            n=n,
            A=_matrix(data.get("A", []), "A"),
            lam=_matrix(data.get("lambda", []), "lambda"),
            mu=[to_fraction(v) for v in data.get("mu", [])],
            nu=_matrix(data.get("nu", []), "nu"),
            c_claim=data.get("c_claim"),
        )

    @classmethod
    def quadratic(cls, n: int, c=1) -> "PotentialSpec":
        """V = (c/2)ΣXᵢ²."""
        c = to_fraction(c)
        A = [[c if i == j else Fraction(0) for j in range(n)] for i in range(n)]
        return cls(kind="structured", n=n, A=A, lam=[[] for _ in range(n)])

    @classmethod
    def one_variable(cls, quad=1, nu: Sequence = (0, 0, 1), mu=1) -> "PotentialSpec":
        """(quad/2)x² + mu·(ν₂x²/2 + ν₃x³/3 + ν₄x⁴/4)."""
        return cls(
            kind="structured",
            n=1,
            A=[[to_fraction(quad)]],
            lam=[[Fraction(1)]],
            mu=[to_fraction(mu)],
            nu=[[to_fraction(v) for v in nu]],
        )


def univariate(coeffs: Sequence) -> NCPoly:
    """NCPoly in one letter from ascending coefficients."""
    return NCPoly({(1,) * k: as_coeff(to_fraction(c)) for k, c in enumerate(coeffs) if c}, 1)


def load_potential(path: str) -> PotentialSpec:
    """Read a potential JSON file; syntax errors carry line/column."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(e.msg, path=path, line=e.lineno, column=e.colno) from e
    try:
        return PotentialSpec.from_dict(data)
    except ConfigError as e:
        raise ConfigError(str(e), path=path) from e


def combine(V: PotentialSpec, W: PotentialSpec, weight=1) -> PotentialSpec:
    """V + weight·W; structured inputs stay structured so the sum can be certified."""
    if V.n != W.n:
        raise ConfigError(f"potentials disagree on n: {V.n} vs {W.n}")
    weight = to_fraction(weight)
    if V.kind == "structured" and W.kind == "structured" and weight >= 0:
        n = V.n
        A = [[V.A[i][k] + weight * W.A[i][k] for k in range(n)] for i in range(n)]
        lam = [V.lam[i] + W.lam[i] for i in range(n)]
        mu = list(V.mu) + [weight * m for m in W.mu]
        return PotentialSpec(kind="structured", n=n, A=A, lam=lam, mu=mu,
                             nu=list(V.nu) + list(W.nu))
    poly = V.expand() + W.expand().scale(weight)
    return PotentialSpec(kind="generic", n=V.n, poly=poly)


def resolve_potential(value) -> PotentialSpec:
    """Accept a PotentialSpec, its dict form, or a JSON file path."""
    if isinstance(value, PotentialSpec):
        return value
    if isinstance(value, dict):
        return PotentialSpec.from_dict(value)
    if isinstance(value, (str, Path)):
        return load_potential(str(value))
    raise ConfigError(f"cannot interpret potential {value!r}")
