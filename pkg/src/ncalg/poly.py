"""
Free Gibbs Transport - Polynomial Types

NCPoly: words in X1..Xn with scalar coefficients.
TracePoly: (base word) x (multiset of trace factors), trace factors kept in
least cyclic rotation and sorted, so nested traces are always flat.
TensorPoly: k-leg word tuples with a shared multiset of trace factors.

All three are immutable; arithmetic returns new objects.
"""

from fractions import Fraction
from numbers import Number
from typing import Dict, Iterable, Iterator, Optional, Sequence, Tuple

from core.errors import DegreeBoundExceeded, DimensionMismatch

from .words import (
    DEFAULT_MAX_DEGREE,
    EMPTY,
    Coeff,
    Word,
    as_coeff,
    check_word,
    conj,
    format_coeff,
    format_word,
    is_zero,
    normalize_traces,
    reversed_word,
)

TraceKey = Tuple[Word, Tuple[Word, ...]]
TensorKey = Tuple[Tuple[Word, ...], Tuple[Word, ...]]


def _is_scalar(value) -> bool:
    return isinstance(value, (Number, str)) and not isinstance(value, bool)


class _Combination:
    """Finite linear combination keyed by a hashable monomial."""

    __slots__ = ("_terms", "n")

    def __init__(self, terms: Optional[Dict] = None, n: int = 1):
        if n < 1:
            raise ValueError("letter count must be positive")
        self.n = int(n)
        merged: Dict = {}
        for key, coeff in (terms or {}).items():
            key = self._normalize_key(key)
            merged[key] = merged.get(key, 0) + as_coeff(coeff)
        self._terms = {k: v for k, v in merged.items() if not is_zero(v)}

    # subclasses override
    def _normalize_key(self, key):
        return key

    @classmethod
    def _raw(cls, terms: Dict, n: int):
        """Build from already-normalized keys, merging nothing."""
        obj = cls.__new__(cls)
        obj.n = n
        obj._terms = {k: v for k, v in terms.items() if not is_zero(v)}
        return obj

    @property
    def terms(self) -> Dict:
        return dict(self._terms)

    def items(self) -> Iterator:
        return iter(sorted(self._terms.items(), key=lambda kv: _sort_key(kv[0])))

    def coefficient(self, key) -> Coeff:
        return self._terms.get(self._normalize_key(key), Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def _check_n(self, other: "_Combination") -> None:
        if self.n != other.n:
            raise DimensionMismatch(f"letter counts differ: {self.n} vs {other.n}")

    def _combine(self, other, sign: int):
        if _is_scalar(other):
            other = self.constant(other, self.n)
        other = self._coerce(other)
        self._check_n(other)
        out = dict(self._terms)
        for key, coeff in other._terms.items():
            out[key] = out.get(key, 0) + sign * coeff
        return type(self)._raw(out, self.n)

    def _coerce(self, other):
        if not isinstance(other, type(self)):
            raise TypeError(f"cannot combine {type(self).__name__} with {type(other).__name__}")
        return other

    def __add__(self, other):
        return self._combine(other, 1)

    def __radd__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __rsub__(self, other):
        return (-self)._combine(other, 1)

    def __neg__(self):
        return type(self)._raw({k: -v for k, v in self._terms.items()}, self.n)

    def scale(self, value) -> "_Combination":
        value = as_coeff(value)
        return type(self)._raw({k: v * value for k, v in self._terms.items()}, self.n)

    def __eq__(self, other) -> bool:
        if _is_scalar(other):
            other = self.constant(other, self.n)
        mixed = (NCPoly, TracePoly)
        if isinstance(other, mixed) and isinstance(self, mixed) and type(other) is not type(self):
            return _as_trace(self) == _as_trace(other)
        if not isinstance(other, type(self)):
            return NotImplemented
        return self.n == other.n and self._terms == other._terms

    __hash__ = None

    def float_coeffs(self):
        return type(self)._raw(
            {k: complex(v) if isinstance(v, complex) else float(v) for k, v in self._terms.items()},
            self.n,
        )


def _sort_key(key):
    if isinstance(key, tuple) and key and isinstance(key[0], tuple):
        return (sum(len(w) for w in _flatten(key)), key)
    return (len(key), key)


def _flatten(key) -> Iterable[Word]:
    for part in key:
        if part and isinstance(part[0], tuple):
            yield from part
        else:
            yield part


class NCPoly(_Combination):
    """Non-commutative polynomial in X1..Xn."""

    __slots__ = ()

    def _normalize_key(self, key) -> Word:
        return check_word(key, self.n)

    @classmethod
    def constant(cls, value, n: int) -> "NCPoly":
        return cls({EMPTY: value}, n)

    @classmethod
    def var(cls, i: int, n: int) -> "NCPoly":
        return cls({(i,): 1}, n)

    @classmethod
    def monomial(cls, word: Sequence[int], n: int, coeff=1) -> "NCPoly":
        return cls({tuple(word): coeff}, n)

    @classmethod
    def zero(cls, n: int) -> "NCPoly":
        return cls({}, n)

    def _combine(self, other, sign: int):
        if isinstance(other, TracePoly):
            return self.lift()._combine(other, sign)
        return super()._combine(other, sign)

    @property
    def degree(self) -> int:
        return max((len(w) for w in self._terms), default=0)

    def mul(self, other: "NCPoly", max_degree: int = DEFAULT_MAX_DEGREE) -> "NCPoly":
        self._check_n(other)
        if self._terms and other._terms and self.degree + other.degree > max_degree:
            raise DegreeBoundExceeded(self.degree + other.degree, max_degree)
        out: Dict[Word, Coeff] = {}
        for w1, c1 in self._terms.items():
            for w2, c2 in other._terms.items():
                key = w1 + w2
                out[key] = out.get(key, 0) + c1 * c2
        return NCPoly._raw(out, self.n)

    def __mul__(self, other):
        if _is_scalar(other):
            return self.scale(other)
        if isinstance(other, TracePoly):
            return self.lift().mul(other)
        if isinstance(other, NCPoly):
            return self.mul(other)
        return NotImplemented

    def __rmul__(self, other):
        if _is_scalar(other):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, k: int) -> "NCPoly":
        out = NCPoly.constant(1, self.n)
        for _ in range(k):
            out = out.mul(self)
        return out

    def adjoint(self) -> "NCPoly":
        return NCPoly._raw({reversed_word(w): conj(c) for w, c in self._terms.items()}, self.n)

    def is_self_adjoint(self) -> bool:
        return self.adjoint() == self

    def lift(self) -> "TracePoly":
        return TracePoly._raw({(w, ()): c for w, c in self._terms.items()}, self.n)

    def with_n(self, n: int) -> "NCPoly":
        if n < self.n:
            raise DimensionMismatch(f"cannot shrink alphabet from {self.n} to {n}")
        return NCPoly._raw(dict(self._terms), n)

    def __repr__(self) -> str:
        return f"NCPoly({self})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        return " + ".join(f"{format_coeff(c)}*{format_word(w)}" for w, c in self.items())


class TracePoly(_Combination):
    """Linear combination of base words times products of trace factors."""

    __slots__ = ()

    def _normalize_key(self, key) -> TraceKey:
        base, traces = key
        base = check_word(base, self.n)
        traces = normalize_traces(check_word(t, self.n) for t in traces)
        return base, traces

    @classmethod
    def constant(cls, value, n: int) -> "TracePoly":
        return cls({(EMPTY, ()): value}, n)

    @classmethod
    def var(cls, i: int, n: int) -> "TracePoly":
        return cls({((i,), ()): 1}, n)

    @classmethod
    def zero(cls, n: int) -> "TracePoly":
        return cls({}, n)

    @classmethod
    def term(cls, base: Sequence[int], traces: Iterable[Sequence[int]], n: int, coeff=1):
        return cls({(tuple(base), tuple(tuple(t) for t in traces)): coeff}, n)

    def _coerce(self, other):
        if isinstance(other, NCPoly):
            return other.lift()
        return super()._coerce(other)

    @property
    def degree(self) -> int:
        return max((len(b) + sum(len(t) for t in ts) for b, ts in self._terms), default=0)

    def mul(self, other, max_degree: int = DEFAULT_MAX_DEGREE) -> "TracePoly":
        other = self._coerce(other)
        self._check_n(other)
        if self._terms and other._terms and self.degree + other.degree > max_degree:
            raise DegreeBoundExceeded(self.degree + other.degree, max_degree)
        out: Dict[TraceKey, Coeff] = {}
        for (b1, t1), c1 in self._terms.items():
            for (b2, t2), c2 in other._terms.items():
                key = (b1 + b2, tuple(sorted(t1 + t2)))
                out[key] = out.get(key, 0) + c1 * c2
        return TracePoly._raw(out, self.n)

    def __mul__(self, other):
        if _is_scalar(other):
            return self.scale(other)
        if isinstance(other, (NCPoly, TracePoly)):
            return self.mul(other)
        return NotImplemented

    def __rmul__(self, other):
        if _is_scalar(other):
            return self.scale(other)
        if isinstance(other, NCPoly):
            return other.lift().mul(self)
        return NotImplemented

    def adjoint(self) -> "TracePoly":
        out = {}
        for (base, traces), c in self._terms.items():
            key = (reversed_word(base), normalize_traces(reversed_word(t) for t in traces))
            out[key] = out.get(key, 0) + conj(c)
        return TracePoly._raw(out, self.n)

    def trace(self) -> "TracePoly":
        """τ(P): every base word moves into the trace multiset."""
        out = {}
        for (base, traces), c in self._terms.items():
            key = (EMPTY, normalize_traces(traces + (base,)))
            out[key] = out.get(key, 0) + c
        return TracePoly._raw(out, self.n)

    @property
    def is_plain(self) -> bool:
        return all(not traces for _, traces in self._terms)

    @property
    def is_scalar(self) -> bool:
        return all(not base for base, _ in self._terms)

    def to_ncpoly(self) -> NCPoly:
        if not self.is_plain:
            raise ValueError("trace polynomial has trace factors")
        return NCPoly._raw({b: c for (b, _), c in self._terms.items()}, self.n)

    def with_n(self, n: int) -> "TracePoly":
        if n < self.n:
            raise DimensionMismatch(f"cannot shrink alphabet from {self.n} to {n}")
        return TracePoly._raw(dict(self._terms), n)

    def __repr__(self) -> str:
        return f"TracePoly({self})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for (base, traces), c in self.items():
            factors = "".join(f"tau({format_word(t)})" for t in traces)
            parts.append(f"{format_coeff(c)}*{format_word(base)}{factors}")
        return " + ".join(parts)


class TensorPoly(_Combination):
    """Linear combination of k-leg word tuples with trace-factor coefficients."""

    __slots__ = ("legs",)

    def __init__(self, terms: Optional[Dict] = None, n: int = 1, legs: int = 2):
        self.legs = int(legs)
        if self.legs < 2:
            raise ValueError("tensor polynomials have at least two legs")
        super().__init__(terms, n)

    def _normalize_key(self, key) -> TensorKey:
        if _looks_like_traces(key, self.legs):
            legs, traces = key
        else:
            legs, traces = key, ()
        legs = tuple(check_word(w, self.n) for w in legs)
        if len(legs) != self.legs:
            raise ValueError(f"expected {self.legs} legs, got {len(legs)}")
        return legs, normalize_traces(check_word(t, self.n) for t in traces)

    @classmethod
    def _raw(cls, terms: Dict, n: int, legs: int = 2):
        obj = cls.__new__(cls)
        obj.n = n
        obj.legs = legs
        obj._terms = {k: v for k, v in terms.items() if not is_zero(v)}
        return obj

    @classmethod
    def constant(cls, value, n: int, legs: int = 2) -> "TensorPoly":
        return cls._raw({((EMPTY,) * legs, ()): as_coeff(value)}, n, legs)

    @classmethod
    def zero(cls, n: int, legs: int = 2) -> "TensorPoly":
        return cls._raw({}, n, legs)

    def _combine(self, other, sign: int):
        if _is_scalar(other):
            other = TensorPoly.constant(other, self.n, self.legs)
        if not isinstance(other, TensorPoly):
            raise TypeError(f"cannot combine TensorPoly with {type(other).__name__}")
        self._check_n(other)
        if other.legs != self.legs:
            raise DimensionMismatch(f"leg counts differ: {self.legs} vs {other.legs}")
        out = dict(self._terms)
        for key, coeff in other._terms.items():
            out[key] = out.get(key, 0) + sign * coeff
        return TensorPoly._raw(out, self.n, self.legs)

    def __neg__(self):
        return TensorPoly._raw({k: -v for k, v in self._terms.items()}, self.n, self.legs)

    def scale(self, value) -> "TensorPoly":
        value = as_coeff(value)
        return TensorPoly._raw({k: v * value for k, v in self._terms.items()}, self.n, self.legs)

    def __eq__(self, other) -> bool:
        if _is_scalar(other):
            other = TensorPoly.constant(other, self.n, self.legs)
        if not isinstance(other, TensorPoly):
            return NotImplemented
        return self.n == other.n and self.legs == other.legs and self._terms == other._terms

    __hash__ = None

    def float_coeffs(self):
        return TensorPoly._raw(
            {k: complex(v) if isinstance(v, complex) else float(v) for k, v in self._terms.items()},
            self.n,
            self.legs,
        )

    def mul(self, other: "TensorPoly", max_degree: int = DEFAULT_MAX_DEGREE) -> "TensorPoly":
        """Leg-wise product (a⊗b)(c⊗d) = ac⊗bd."""
        self._check_n(other)
        if other.legs != self.legs:
            raise DimensionMismatch(f"leg counts differ: {self.legs} vs {other.legs}")
        if self._terms and other._terms and self.degree + other.degree > max_degree:
            raise DegreeBoundExceeded(self.degree + other.degree, max_degree)
        out: Dict[TensorKey, Coeff] = {}
        for (l1, t1), c1 in self._terms.items():
            for (l2, t2), c2 in other._terms.items():
                key = (tuple(a + b for a, b in zip(l1, l2)), tuple(sorted(t1 + t2)))
                out[key] = out.get(key, 0) + c1 * c2
        return TensorPoly._raw(out, self.n, self.legs)

    def __mul__(self, other):
        if _is_scalar(other):
            return self.scale(other)
        if isinstance(other, TensorPoly):
            return self.mul(other)
        return NotImplemented

    def __rmul__(self, other):
        if _is_scalar(other):
            return self.scale(other)
        return NotImplemented

    @property
    def degree(self) -> int:
        return max(
            (sum(len(w) for w in legs) + sum(len(t) for t in ts) for legs, ts in self._terms),
            default=0,
        )

    @property
    def is_plain(self) -> bool:
        return all(not traces for _, traces in self._terms)

    def adjoint(self) -> "TensorPoly":
        """Leg-reversed adjoint: (a⊗b)* = b*⊗a*."""
        out = {}
        for (legs, traces), c in self._terms.items():
            key = (
                tuple(reversed_word(w) for w in reversed(legs)),
                normalize_traces(reversed_word(t) for t in traces),
            )
            out[key] = out.get(key, 0) + conj(c)
        return TensorPoly._raw(out, self.n, self.legs)

    def __repr__(self) -> str:
        return f"TensorPoly({self})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for (legs, traces), c in self.items():
            factors = "".join(f"tau({format_word(t)})" for t in traces)
            body = "⊗".join(format_word(w) for w in legs)
            parts.append(f"{format_coeff(c)}*({body}){factors}")
        return " + ".join(parts)


def _looks_like_traces(key, legs: int) -> bool:
    """(legs, traces) keys carry a tuple of words first; bare leg tuples carry a word."""
    if len(key) != 2 or not isinstance(key[0], tuple) or len(key[0]) != legs:
        return False
    return all(isinstance(w, tuple) for w in key[0])


def tensor(*factors, n: Optional[int] = None) -> TensorPoly:
    """Outer product P₁⊗…⊗P_k of (trace) polynomials; trace factors merge."""
    if len(factors) < 2:
        raise ValueError("tensor needs at least two factors")
    lifted = [_as_trace(f, n) for f in factors]
    n = lifted[0].n
    for f in lifted:
        if f.n != n:
            raise DimensionMismatch("tensor factors disagree on letter count")
    acc: Dict[TensorKey, Coeff] = {((), ()): Fraction(1)}
    for f in lifted:
        nxt: Dict[TensorKey, Coeff] = {}
        for (legs, traces), c1 in acc.items():
            for (base, ts), c2 in f._terms.items():
                key = (legs + (base,), tuple(sorted(traces + ts)))
                nxt[key] = nxt.get(key, 0) + c1 * c2
        acc = nxt
    return TensorPoly._raw(acc, n, len(factors))


def _as_trace(value, n: Optional[int] = None) -> TracePoly:
    if isinstance(value, TracePoly):
        return value
    if isinstance(value, NCPoly):
        return value.lift()
    if _is_scalar(value):
        if n is None:
            raise ValueError("letter count needed for scalar operand")
        return TracePoly.constant(value, n)
    raise TypeError(f"expected polynomial, got {type(value).__name__}")


def as_trace(value, n: Optional[int] = None) -> TracePoly:
    """Public lifting helper: NCPoly or scalar to TracePoly."""
    return _as_trace(value, n)


def variables(n: int) -> Tuple[NCPoly, ...]:
    """X1..Xn as NCPoly objects."""
    return tuple(NCPoly.var(i, n) for i in range(1, n + 1))
