"""
Free Gibbs Transport - Errors

Exception hierarchy shared by the calculus, numerics and CLI layers.
Legitimate negative outcomes (rejected certificates, failed checks) are
returned as values; these exceptions mark conditions a run cannot continue from.
"""

from typing import Optional


class FreeGibbsError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(FreeGibbsError):
    """Operands disagree on letter count or matrix size."""


class DegreeBoundExceeded(FreeGibbsError):
    """A symbolic result would exceed the per-call degree bound."""

    def __init__(self, degree: int, bound: int):
        super().__init__(f"degree {degree} exceeds bound {bound}")
        self.degree = degree
        self.bound = bound


class LegIndexError(FreeGibbsError):
    """Contraction slot outside the tensor's legs."""


class LetterCollision(FreeGibbsError):
    """Direction letters overlap the variable letters."""


class HermitianViolation(FreeGibbsError):
    """Matrix is not conjugate-symmetric within tolerance."""


class ConvergenceError(FreeGibbsError):
    """Iterative solver stopped without meeting its tolerance."""

    def __init__(self, message: str, residual: Optional[float] = None):
        super().__init__(message if residual is None else f"{message} (residual {residual:.3e})")
        self.residual = residual


class DivergenceError(FreeGibbsError):
    """A chain or path left the confinement ball."""

    def __init__(self, step: int, norm: float, bound: float):
        super().__init__(f"norm {norm:.4g} exceeds {bound:.4g} at step {step}")
        self.step = step
        self.norm = norm
        self.bound = bound


class TailBoundExceeded(FreeGibbsError):
    """Truncated time integral leaves a tail larger than the tolerance."""

    def __init__(self, bound: float, tolerance: float):
        super().__init__(f"tail bound {bound:.3e} exceeds tolerance {tolerance:.3e}")
        self.bound = bound
        self.tolerance = tolerance


class GradientMismatch(FreeGibbsError):
    """Adjoint and finite-difference gradients disagree."""

    def __init__(self, rel_error: float, tolerance: float):
        super().__init__(f"adjoint/FD relative error {rel_error:.3e} > {tolerance:.3e}")
        self.rel_error = rel_error
        self.tolerance = tolerance


class TwoCutError(FreeGibbsError):
    """One-cut ansatz produced a negative density."""


class InstabilityError(FreeGibbsError):
    """Grid solver violated its maximum principle."""


class EmptyEnsembleError(FreeGibbsError):
    """Operation needs at least one sample."""


class ConfigError(FreeGibbsError):
    """Invalid configuration or potential file."""

    def __init__(
        self,
        message: str,
        path: Optional[str] = None,
        line: Optional[int] = None,
        column: Optional[int] = None,
    ):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}:{column or 0}"
            where += ": "
        super().__init__(f"{where}{message}")
        self.path = path
        self.line = line
        self.column = column


class ArtifactError(FreeGibbsError):
    """Persisted artifact is missing or malformed."""
