"""
Free Gibbs Transport - Non-commutative Calculus

Free difference quotients, cyclic gradients, flat and V-Laplacians with
their trace derivations, generators, directional derivatives, composition
and Hessians. Every operation is a pure function on the immutable
polynomial types; trace factors behave as scalars throughout.
"""

from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Union

from core.errors import DegreeBoundExceeded, DimensionMismatch, LegIndexError, LetterCollision

from .poly import NCPoly, TensorPoly, TracePoly, as_trace, tensor
from .words import (
    DEFAULT_MAX_DEGREE,
    EMPTY,
    Coeff,
    least_rotation,
    normalize_traces,
    occurrences,
    remove_one,
)

Poly = Union[NCPoly, TracePoly]


def _add(out: Dict, key, coeff) -> None:
    out[key] = out.get(key, 0) + coeff


def _check_letter(i: int, n: int) -> None:
    if i < 1 or i > n:
        raise DimensionMismatch(f"letter {i} outside 1..{n}")


def _merge(traces, *extra) -> tuple:
    return tuple(sorted(traces + normalize_traces(extra)))


# -- difference quotients -------------------------------------------------


def fdq(P: Poly, i: int) -> TensorPoly:
    """Free difference quotient ∂ᵢ; trace factors are constants."""
    P = as_trace(P)
    _check_letter(i, P.n)
    out: Dict = {}
    for (base, traces), c in P.terms.items():
        for left, right in occurrences(base, i):
            _add(out, ((left, right), traces), c)
    return TensorPoly._raw(out, P.n, 2)


def fdq_tensor(T: TensorPoly, i: int, first_leg: bool = False) -> TensorPoly:
    """Apply ∂ᵢ to the legs of T, producing one more leg.

    By default the derivation acts on every leg. With first_leg=True only
    the first leg is differentiated, i.e. (∂ᵢ⊗1^{⊗(k-1)}).
    """
    _check_letter(i, T.n)
    out: Dict = {}
    for (legs, traces), c in T.terms.items():
        targets = range(1) if first_leg else range(len(legs))
        for leg in targets:
            for left, right in occurrences(legs[leg], i):
                key = (legs[:leg] + (left, right) + legs[leg + 1:], traces)
                _add(out, key, c)
    return TensorPoly._raw(out, T.n, T.legs + 1)


def fdq_iter(P: Poly, idx: Sequence[int], first_leg: bool = False) -> TensorPoly:
    """Iterated quotient ∂^k_{(i₁..i_k)}: ∂_{i_k} first, then i_{k-1} … i₁."""
    if len(idx) < 1:
        raise ValueError("fdq_iter needs at least one index")
    T = fdq(P, idx[-1])
    for i in reversed(idx[:-1]):
        T = fdq_tensor(T, i, first_leg=first_leg)
    return T


def rho(T: TensorPoly) -> TensorPoly:
    """Cyclic leg rotation b₀⊗…⊗b_p ↦ b_p⊗b₀⊗…⊗b_{p-1}."""
    out = {}
    for (legs, traces), c in T.terms.items():
        _add(out, ((legs[-1],) + legs[:-1], traces), c)
    return TensorPoly._raw(out, T.n, T.legs)


# -- contractions ----------------------------------------------------------


def _insert_terms(value, n: int):
    """(legs, traces, coeff) triples for an inserted operand."""
    if isinstance(value, TensorPoly):
        if value.n != n:
            raise DimensionMismatch(f"letter counts differ: {n} vs {value.n}")
        return [(legs, traces, c) for (legs, traces), c in value.terms.items()]
    value = as_trace(value, n)
    if value.n != n:
        raise DimensionMismatch(f"letter counts differ: {n} vs {value.n}")
    return [((base,), traces, c) for (base, traces), c in value.terms.items()]


def _pack(out: Dict, legs: int, n: int, plain: bool):
    if legs == 1:
        poly = TracePoly._raw({(k[0][0], k[1]): c for k, c in out.items()}, n)
        return poly.to_ncpoly() if plain and poly.is_plain else poly
    return TensorPoly._raw(out, n, legs)


def hash_multi(T: TensorPoly, inserts: Sequence) -> Union[NCPoly, TracePoly, TensorPoly]:
    """Insert one operand into every gap of a (k+1)-leg tensor.

    t₀⊗…⊗t_k # (A₁,…,A_k) glues the first leg of A_j to t_{j-1} and its
    last leg to t_j, so (a⊗b)#(c⊗d) = ac⊗db and (a⊗b)#h = a·h·b.
    """
    if len(inserts) != T.legs - 1:
        raise LegIndexError(f"{T.legs}-leg tensor takes {T.legs - 1} inserts, got {len(inserts)}")
    plain = T.is_plain and all(isinstance(v, NCPoly) or _plain_tensor(v) for v in inserts)
    acc: Dict = {}
    for (legs, traces), c in T.terms.items():
        partial = [((legs[0],), traces, c)]
        for gap, value in enumerate(inserts, start=1):
            nxt = []
            for cur_legs, cur_traces, cur_c in partial:
                for ins_legs, ins_traces, ins_c in _insert_terms(value, T.n):
                    glued = cur_legs[:-1] + (cur_legs[-1] + ins_legs[0],) + ins_legs[1:]
                    glued = glued[:-1] + (glued[-1] + legs[gap],)
                    nxt.append((glued, tuple(sorted(cur_traces + ins_traces)), cur_c * ins_c))
            partial = nxt
        for cur_legs, cur_traces, cur_c in partial:
            _add(acc, (cur_legs, cur_traces), cur_c)
    legs_out = 1 + sum(_leg_count(v) - 1 for v in inserts)
    return _pack(acc, legs_out, T.n, plain)


def _plain_tensor(value) -> bool:
    return isinstance(value, TensorPoly) and value.is_plain


def _leg_count(value) -> int:
    return value.legs if isinstance(value, TensorPoly) else 1


def hash_op(T: TensorPoly, h, slot: Optional[int] = None):
    """The # contraction: (a⊗b)#h = a·h·b.

    For tensors with more than two legs, slot (1-based gap index) chooses
    where h is inserted; the neighbouring legs merge around it.
    """
    if T.legs == 2 and slot in (None, 1):
        return hash_multi(T, [h])
    if slot is None or slot < 1 or slot > T.legs - 1:
        raise LegIndexError(f"slot {slot} outside 1..{T.legs - 1}")
    inserts: List = [TensorPoly.constant(1, T.n, 2)] * (T.legs - 1)
    inserts[slot - 1] = h
    return hash_multi(T, inserts)


def tensor_trace(T: TensorPoly) -> TracePoly:
    """τ⊗…⊗τ: every leg becomes a trace factor."""
    out = {}
    for (legs, traces), c in T.terms.items():
        _add(out, (EMPTY, _merge(traces, *legs)), c)
    return TracePoly._raw(out, T.n)


def multiply_legs(T: TensorPoly) -> TracePoly:
    """m(a⊗b) = ab on two-leg tensors."""
    if T.legs != 2:
        raise LegIndexError("multiplication map needs two legs")
    out = {}
    for ((a, b), traces), c in T.terms.items():
        _add(out, (a + b, traces), c)
    return TracePoly._raw(out, T.n)


# -- cyclic gradients ------------------------------------------------------


def cyclic_grad(P: Poly, i: int, weight: Optional[Poly] = None) -> TracePoly:
    """Weighted cyclic gradient 𝒟_{i,p}(P).

    Each occurrence aXᵢb in the base word contributes b·p·a. Each
    occurrence eXᵢf inside a trace factor t contributes f·e·τ(p·w) where w
    is the base word, following 𝒟_{i,p}(τ(Q)) = 𝒟_{i,τ(p)}(Q).
    """
    P = as_trace(P)
    _check_letter(i, P.n)
    p = TracePoly.constant(1, P.n) if weight is None else as_trace(weight, P.n)
    if p.n != P.n:
        raise DimensionMismatch(f"letter counts differ: {P.n} vs {p.n}")
    out: Dict = {}
    for (base, traces), c in P.terms.items():
        for (pb, pt), d in p.terms.items():
            for left, right in occurrences(base, i):
                _add(out, (right + pb + left, tuple(sorted(traces + pt))), c * d)
            for k, t in enumerate(traces):
                rest = remove_one(traces, k)
                for left, right in occurrences(t, i):
                    key = (right + left, _merge(rest + pt, pb + base))
                    _add(out, key, c * d)
    return TracePoly._raw(out, P.n)


def cyclic_derivative(P: Poly, i: int) -> TracePoly:
    """𝒟ᵢ = m∘ρ∘∂ᵢ, the unweighted cyclic gradient."""
    return cyclic_grad(P, i)


def cyclic_gradient_poly(V: NCPoly, i: int) -> NCPoly:
    """𝒟ᵢV for a plain polynomial, returned as NCPoly."""
    return cyclic_grad(V, i).to_ncpoly()


# -- Laplacians and generators ---------------------------------------------


def _pair_splits(word):
    """(outer, inner) for every pair p<q of equal letters."""
    for p in range(len(word)):
        for q in range(p + 1, len(word)):
            if word[p] == word[q]:
                yield word[:p] + word[q + 1:], word[p + 1:q]


def laplacian(P: Poly) -> TracePoly:
    """Flat Δ = 2Σᵢ m∘(1⊗τ⊗1)(∂ᵢ⊗1)∂ᵢ on the base word."""
    P = as_trace(P)
    out: Dict = {}
    for (base, traces), c in P.terms.items():
        for outer, inner in _pair_splits(base):
            _add(out, (outer, _merge(traces, inner)), 2 * c)
    return TracePoly._raw(out, P.n)


def delta_flat(P: Poly) -> TracePoly:
    """δ_Δ: derivation over trace factors with δ_Δ(τ(Q)) = τ(ΔQ) for plain Q."""
    P = as_trace(P)
    out: Dict = {}
    for (base, traces), c in P.terms.items():
        for k, t in enumerate(traces):
            rest = remove_one(traces, k)
            for outer, inner in _pair_splits(t):
                _add(out, (base, _merge(rest, outer, inner)), 2 * c)
    return TracePoly._raw(out, P.n)


def _gradients(V: NCPoly) -> List[NCPoly]:
    if not isinstance(V, NCPoly):
        V = as_trace(V).to_ncpoly()
    return [cyclic_gradient_poly(V, i) for i in range(1, V.n + 1)]


def _drift_part(P: TracePoly, grads: List[NCPoly]) -> TracePoly:
    """Σᵢ ∂ᵢ(P)#𝒟ᵢV on the base word."""
    out: Dict = {}
    for (base, traces), c in P.terms.items():
        for i, grad in enumerate(grads, start=1):
            for left, right in occurrences(base, i):
                for word, d in grad.terms.items():
                    _add(out, (left + word + right, traces), c * d)
    return TracePoly._raw(out, P.n)


def _drift_trace_part(P: TracePoly, grads: List[NCPoly]) -> TracePoly:
    """Σₖ Σᵢ τ(∂ᵢ(t_k)#𝒟ᵢV) times the remaining factors."""
    out: Dict = {}
    for (base, traces), c in P.terms.items():
        for k, t in enumerate(traces):
            rest = remove_one(traces, k)
            for i, grad in enumerate(grads, start=1):
                for left, right in occurrences(t, i):
                    for word, d in grad.terms.items():
                        _add(out, (base, _merge(rest, word + right + left)), c * d)
    return TracePoly._raw(out, P.n)


def _check_pair(P: TracePoly, V: NCPoly) -> None:
    if P.n != V.n:
        raise DimensionMismatch(f"letter counts differ: {P.n} vs {V.n}")


def laplacian_V(P: Poly, V: NCPoly, max_degree: int = DEFAULT_MAX_DEGREE) -> TracePoly:
    """Δ_V(P) = Δ(P) − Σᵢ ∂ᵢ(P)#𝒟ᵢV."""
    P = as_trace(P)
    _check_pair(P, V)
    _check_degree(P.degree + V.degree - 2, max_degree)
    return laplacian(P) - _drift_part(P, _gradients(V))


def delta_V(P: Poly, V: NCPoly, max_degree: int = DEFAULT_MAX_DEGREE) -> TracePoly:
    """δ_V: vanishes on plain polynomials, δ_V(τ(Q)) = τ(Δ_V Q)."""
    P = as_trace(P)
    _check_pair(P, V)
    _check_degree(P.degree + V.degree - 2, max_degree)
    return delta_flat(P) - _drift_trace_part(P, _gradients(V))


def finite_n_correction(P: Poly, N: int) -> TracePoly:
    """Quadratic-covariation term of the matrix Itô formula at size N.

    For a term w·∏τ(t_k) the Hermitian Brownian increments couple the base
    word with each trace factor and the trace factors pairwise, each at
    order 1/N². The term vanishes for plain polynomials and as N → ∞.
    """
    P = as_trace(P)
    weight = Fraction(1, N * N)
    out: Dict = {}
    for (base, traces), c in P.terms.items():
        for k, t in enumerate(traces):
            rest = remove_one(traces, k)
            for i in range(1, P.n + 1):
                grads_t = [right + left for left, right in occurrences(t, i)]
                for left, right in occurrences(base, i):
                    for g in grads_t:
                        _add(out, (left + g + right, rest), c * weight)
        for k in range(len(traces)):
            for m in range(k + 1, len(traces)):
                rest = tuple(t for idx, t in enumerate(traces) if idx not in (k, m))
                for i in range(1, P.n + 1):
                    for l1, r1 in occurrences(traces[k], i):
                        for l2, r2 in occurrences(traces[m], i):
                            _add(out, (base, _merge(rest, r1 + l1 + r2 + l2)), c * weight)
    return TracePoly._raw(out, P.n)


def generator(
    P: Poly,
    V: NCPoly,
    N: Optional[int] = None,
    max_degree: int = DEFAULT_MAX_DEGREE,
) -> TracePoly:
    """L = ½(Δ_V + δ_V); with N given, the exact finite-N covariation term is added."""
    P = as_trace(P)
    out = (laplacian_V(P, V, max_degree) + delta_V(P, V, max_degree)).scale(Fraction(1, 2))
    if N is not None:
        out = out + finite_n_correction(P, N)
    return out


def _check_degree(degree: int, bound: int) -> None:
    if degree > bound:
        raise DegreeBoundExceeded(degree, bound)


# -- derivatives along directions, composition ------------------------------


def directional(P: Poly, directions: Optional[Sequence[Optional[int]]] = None) -> TracePoly:
    """D_H(P) = Σⱼ ∂ⱼ(P)#Hⱼ with differentiation under τ.

    directions[j-1] is the letter standing for Hⱼ (None means Hⱼ = 0);
    the default uses letters n+1..2n. The result lives on the extended alphabet.
    """
    P = as_trace(P)
    n = P.n
    if directions is None:
        directions = [n + j for j in range(1, n + 1)]
    if len(directions) != n:
        raise DimensionMismatch(f"expected {n} direction slots, got {len(directions)}")
    used = [h for h in directions if h is not None]
    if any(h <= n for h in used):
        raise LetterCollision(f"direction letters {used} collide with X1..X{n}")
    n_out = max([n] + used)
    out: Dict = {}
    for (base, traces), c in P.terms.items():
        for j, h in enumerate(directions, start=1):
            if h is None:
                continue
            for left, right in occurrences(base, j):
                _add(out, (left + (h,) + right, traces), c)
            for k, t in enumerate(traces):
                rest = remove_one(traces, k)
                for left, right in occurrences(t, j):
                    _add(out, (base, _merge(rest, left + (h,) + right)), c)
    return TracePoly._raw(out, n_out)


def compose(P: NCPoly, Qs: Sequence[NCPoly], max_degree: int = DEFAULT_MAX_DEGREE) -> NCPoly:
    """Substitution P(Q₁,…,Q_n)."""
    if len(Qs) != P.n:
        raise DimensionMismatch(f"expected {P.n} substitutes, got {len(Qs)}")
    m = Qs[0].n
    if any(Q.n != m for Q in Qs):
        raise DimensionMismatch("substitutes disagree on letter count")
    cache: Dict[tuple, NCPoly] = {EMPTY: NCPoly.constant(1, m)}

    def word_value(word):
        if word not in cache:
            cache[word] = word_value(word[:-1]).mul(Qs[word[-1] - 1], max_degree)
        return cache[word]

    out = NCPoly.zero(m)
    for word, c in P.terms.items():
        out = out + word_value(word).scale(c)
    return out


def compose_trace(
    P: Poly, Qs: Sequence[NCPoly], max_degree: int = DEFAULT_MAX_DEGREE
) -> TracePoly:
    """Substitution into a trace polynomial; trace factors are re-normalized."""
    P = as_trace(P)
    m = Qs[0].n
    out = TracePoly.zero(m)
    for (base, traces), c in P.terms.items():
        term = compose(NCPoly.monomial(base, P.n), Qs, max_degree).lift()
        for t in traces:
            term = term.mul(compose(NCPoly.monomial(t, P.n), Qs, max_degree).lift().trace())
        out = out + term.scale(c)
    return out


def substitute_tensor(T: TensorPoly, Qs: Sequence[NCPoly]) -> TensorPoly:
    """Apply a substitution leg-wise (used for ∂P(Q) in chain rules)."""
    m = Qs[0].n
    out = TensorPoly.zero(m, T.legs)
    for (legs, traces), c in T.terms.items():
        parts = [compose(NCPoly.monomial(w, T.n), Qs) for w in legs]
        term = tensor(*parts)
        for t in traces:
            scalar = compose(NCPoly.monomial(t, T.n), Qs).lift().trace()
            term = _scale_by_trace(term, scalar)
        out = out + term.scale(c)
    return out


def _scale_by_trace(T: TensorPoly, scalar: TracePoly) -> TensorPoly:
    out: Dict = {}
    for (legs, traces), c in T.terms.items():
        for (base, ts), d in scalar.terms.items():
            if base:
                raise ValueError("expected a pure-trace scalar")
            _add(out, (legs, tuple(sorted(traces + ts))), c * d)
    return TensorPoly._raw(out, T.n, T.legs)


# -- second-order objects --------------------------------------------------


def hessian(V: NCPoly) -> List[List[TensorPoly]]:
    """Hᵢⱼ = ∂ᵢ𝒟ⱼV as an n×n nested list (0-based indices)."""
    grads = _gradients(V)
    return [[fdq(grads[j], i) for j in range(V.n)] for i in range(1, V.n + 1)]


def sd_residual_expr(P: Poly, V: NCPoly, i: int) -> TracePoly:
    """τ⊗τ(∂ᵢP) − τ(P·𝒟ᵢV), a pure-trace scalar."""
    P = as_trace(P)
    _check_pair(P, V)
    grad = cyclic_gradient_poly(V, i)
    return tensor_trace(fdq(P, i)) - P.mul(grad.lift()).trace()


def evaluate_scalar(expr: TracePoly, tau) -> Coeff:
    """Evaluate a pure-trace polynomial from a moment functional tau(word)."""
    total = 0
    for (base, traces), c in expr.terms.items():
        if base:
            raise ValueError("expression has a non-scalar base word")
        value = c
        for t in traces:
            value = value * tau(least_rotation(t))
        total = total + value
    return total
