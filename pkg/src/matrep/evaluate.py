"""
Free Gibbs Transport - Matrix Evaluation

Evaluates NCPoly, TracePoly and TensorPoly objects on Hermitian matrix
tuples. Inputs may carry leading batch axes: an array of shape
(..., n, N, N) evaluates to (..., N, N). Word products share prefixes, so
each distinct prefix costs one matrix multiplication.
"""

from typing import Dict, Iterable, Union

import numpy as np

from core.errors import DimensionMismatch
from ncalg import NCPoly, TensorPoly, TracePoly, as_trace

from .matrices import MatrixTuple, tau_hat

ArrayLike = Union[np.ndarray, MatrixTuple]


def _mats(X: ArrayLike) -> np.ndarray:
    if isinstance(X, MatrixTuple):
        return X.mats
    X = np.asarray(X)
    if X.ndim < 3:
        raise DimensionMismatch(f"expected (..., n, N, N), got shape {X.shape}")
    return X


def _coeff(c) -> complex:
    return complex(c) if isinstance(c, complex) else float(c)


class WordTable:
    """Memoized word products on one (batched) matrix tuple."""

    def __init__(self, X: np.ndarray):
        self.X = X
        N = X.shape[-1]
        eye = np.broadcast_to(np.eye(N, dtype=np.complex128), X.shape[:-3] + (N, N))
        self._cache: Dict[tuple, np.ndarray] = {(): eye}
        self._traces: Dict[tuple, np.ndarray] = {}

    def word(self, w: tuple) -> np.ndarray:
        value = self._cache.get(w)
        if value is None:
            value = self.word(w[:-1]) @ self.X[..., w[-1] - 1, :, :]
            self._cache[w] = value
        return value

    def trace(self, w: tuple) -> np.ndarray:
        value = self._traces.get(w)
        if value is None:
            value = tau_hat(self.word(w))
            self._traces[w] = value
        return value

    def trace_product(self, traces: Iterable[tuple]):
        value = 1.0
        for t in traces:
            value = value * self.trace(t)
        return value


def _check_letters(n: int, X: np.ndarray) -> None:
    if X.shape[-3] != n:
        raise DimensionMismatch(f"polynomial in {n} letters, tuple has {X.shape[-3]}")


class CompiledPoly:
    """Reusable evaluator for a (trace) polynomial."""

    def __init__(self, P: Union[NCPoly, TracePoly]):
        P = as_trace(P)
        self.n = P.n
        self.terms = [(base, traces, _coeff(c)) for (base, traces), c in P.items()]
        self.is_scalar = all(not base for base, _, _ in self.terms)

    def __call__(self, X: ArrayLike, table: WordTable = None) -> np.ndarray:
        X = _mats(X)
        _check_letters(self.n, X)
        table = table or WordTable(X)
        N = X.shape[-1]
        out = np.zeros(X.shape[:-3] + (N, N), dtype=np.complex128)
        for base, traces, c in self.terms:
            scalar = c * table.trace_product(traces)
            if np.ndim(scalar):
                scalar = np.asarray(scalar)[..., None, None]
            out = out + scalar * table.word(base)
        return out

    def scalar(self, X: ArrayLike, table: WordTable = None) -> np.ndarray:
        """Value of a pure-trace polynomial as a (batched) complex scalar."""
        if not self.is_scalar:
            raise ValueError("polynomial has non-scalar base words")
        X = _mats(X)
        _check_letters(self.n, X)
        table = table or WordTable(X)
        out = np.zeros(X.shape[:-3], dtype=np.complex128)
        for _, traces, c in self.terms:
            out = out + c * table.trace_product(traces)
        return out


class CompiledTensor:
    """Reusable evaluator for H ↦ Σ c·a(X)·H·b(X)·∏τ̂ on two-leg tensors."""

    def __init__(self, T: TensorPoly):
        if T.legs != 2:
            raise DimensionMismatch(f"expected two legs, got {T.legs}")
        self.n = T.n
        self.terms = [(legs[0], legs[1], traces, _coeff(c)) for (legs, traces), c in T.items()]

    def apply(self, X: ArrayLike, H: np.ndarray, table: WordTable = None) -> np.ndarray:
        X = _mats(X)
        _check_letters(self.n, X)
        table = table or WordTable(X)
        out = np.zeros(np.broadcast_shapes(X.shape[:-3] + X.shape[-2:], H.shape), np.complex128)
        for a, b, traces, c in self.terms:
            scalar = c * table.trace_product(traces)
            if np.ndim(scalar):
                scalar = np.asarray(scalar)[..., None, None]
            left = table.word(a) @ H if a else H
            out = out + scalar * (left @ table.word(b) if b else left)
        return out

    def pair_traces(self, X: ArrayLike, table: WordTable = None) -> np.ndarray:
        """τ̂⊗τ̂ of the tensor at X."""
        X = _mats(X)
        table = table or WordTable(X)
        out = np.zeros(X.shape[:-3], dtype=np.complex128)
        for a, b, traces, c in self.terms:
            out = out + c * table.trace(a) * table.trace(b) * table.trace_product(traces)
        return out


def eval_poly(P: NCPoly, X: ArrayLike) -> np.ndarray:
    """P(X); an algebra homomorphism."""
    return CompiledPoly(P)(X)


def eval_trace_poly(P: TracePoly, X: ArrayLike) -> np.ndarray:
    """P(X) with every trace factor replaced by τ̂(word(X))."""
    return CompiledPoly(P)(X)


def eval_scalar(P: TracePoly, X: ArrayLike) -> np.ndarray:
    return CompiledPoly(P).scalar(X)


def eval_tensor_apply(T: TensorPoly, X: ArrayLike, H: np.ndarray) -> np.ndarray:
    """(a⊗b)#H = a(X)·H·b(X), extended linearly."""
    X = _mats(X)
    H = np.asarray(H, dtype=np.complex128)
    if H.shape[-1] != X.shape[-1]:
        raise DimensionMismatch(f"H is {H.shape[-1]}x{H.shape[-1]}, tuple has N={X.shape[-1]}")
    return CompiledTensor(T).apply(X, H)

