"""
Free Gibbs Transport - Potential Families

V_α = V + αW for α ∈ [0, 1]. The convexity constant of V_α is bounded
below by (1−α)c_V + αc_{V+W} since the Hessian is affine in α.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional

from core.errors import ConfigError
from matrep import certify_convexity
from ncalg import NCPoly, PotentialSpec, combine, resolve_potential
from sampler import PotentialField

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class PotentialFamily:
    """Interpolating family V + αW with convexity constants at both ends."""

    V: PotentialSpec
    W: PotentialSpec
    c_V: Optional[float] = None
    c_VW: Optional[float] = None
    _fields: Dict[float, PotentialField] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.V.n != self.W.n:
            raise ConfigError(f"V has n={self.V.n}, W has n={self.W.n}")
        if self.c_V is None:
            self.c_V = _certified(self.V, "V")
        if self.c_VW is None:
            self.c_VW = _certified(combine(self.V, self.W), "V+W")

    @property
    def n(self) -> int:
        return self.V.n

    @property
    def certified(self) -> bool:
        return self.c_V is not None and self.c_VW is not None

    @property
    def W_poly(self) -> NCPoly:
        return self.W.expand()

    def potential(self, alpha: float) -> NCPoly:
        """V_α as a polynomial (α enters as an exact rational when possible)."""
        return combine(self.V, self.W, alpha).expand()

    def drift_field(self, alpha: float) -> PotentialField:
        key = float(alpha)
        if key not in self._fields:
            self._fields[key] = PotentialField(self.potential(alpha))
        return self._fields[key]

    def c(self, alpha: float) -> Optional[float]:
        """Lower bound (1−α)c_V + αc_{V+W} on the convexity constant of V_α."""
        if not self.certified:
            return None
        return (1.0 - alpha) * self.c_V + alpha * self.c_VW

    def reverse(self) -> "PotentialFamily":
        """Family from V+W back to V (W replaced by −W)."""
        minus_W = PotentialSpec(kind="generic", n=self.n, poly=self.W_poly.scale(-1))
        return PotentialFamily(combine(self.V, self.W), minus_W, c_V=self.c_VW, c_VW=self.c_V)

    def to_dict(self) -> dict:
        return {
            "V": self.V.to_dict(),
            "W": self.W.to_dict(),
            "c_V": self.c_V,
            "c_VW": self.c_VW,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PotentialFamily":
        if "V" not in data or "W" not in data:
            raise ConfigError("family needs both 'V' and 'W'")
        return cls(
            resolve_potential(data["V"]),
            resolve_potential(data["W"]),
            c_V=data.get("c_V"),
            c_VW=data.get("c_VW"),
        )

    @classmethod
    def quadratic(cls, c: float = 2.0, n: int = 1) -> "PotentialFamily":
        """V = ½ΣXᵢ², W = ½(c−1)ΣXᵢ², so V+W = (c/2)ΣXᵢ²."""
        V = PotentialSpec.quadratic(n, 1)
        W = PotentialSpec.quadratic(n, c - 1)
        return cls(V, W)


def _certified(spec: PotentialSpec, label: str) -> Optional[float]:
    cert = certify_convexity(spec)
    if cert.certified:
        return cert.c
    logger.warning(f"{label} has no convexity certificate: {cert.reason}")
    return None


def load_family(path: str) -> PotentialFamily:
    """Read a family JSON file; syntax errors carry line/column."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(e.msg, path=path, line=e.lineno, column=e.colno) from e
    try:
        return PotentialFamily.from_dict(data)
    except ConfigError as e:
        raise ConfigError(str(e), path=path) from e


def resolve_family(value) -> PotentialFamily:
    if isinstance(value, PotentialFamily):
        return value
    if isinstance(value, dict):
        return PotentialFamily.from_dict(value)
    if isinstance(value, (str, Path)):
        return load_family(str(value))
    raise ConfigError(f"cannot interpret family {value!r}")
