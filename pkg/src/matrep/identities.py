"""
Free Gibbs Transport - Identity Suite

Random rational instances of the calculus identities (flip relation,
cyclic derivation rule, Laplacian commutation, the V-generator commutator,
Hessian ρ-symmetry, first and second order chain rules, the cyclic chain
rule, Leibniz rule and adjoint compatibility). Every instance is compared
exactly in the symbolic algebra and numerically on random Hermitian tuples.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.rng import stream
from ncalg import (
    NCPoly,
    TensorPoly,
    TracePoly,
    as_trace,
    compose,
    cyclic_grad,
    cyclic_gradient_poly,
    delta_flat,
    delta_V,
    fdq,
    fdq_iter,
    hash_multi,
    hash_op,
    laplacian,
    laplacian_V,
    rho,
    substitute_tensor,
    tensor,
)

from .evaluate import CompiledPoly
from .matrices import random_hermitian

logger = logging.getLogger(__name__)

# Matrix size and tolerance for the numeric side of every check
NUMERIC_N = 5
NUMERIC_TOL = 1e-9
NUMERIC_POINTS = 20

Sides = Tuple[object, object]


# -- random instances --------------------------------------------------------


def random_coeff(rng: np.random.Generator) -> Fraction:
    num = int(rng.integers(-3, 4)) or 1
    return Fraction(num, int(rng.integers(1, 4)))


def random_word(rng: np.random.Generator, n: int, length: int) -> tuple:
    return tuple(int(v) for v in rng.integers(1, n + 1, size=length))


def random_poly(rng: np.random.Generator, n: int, degree: int, terms: int = 4) -> NCPoly:
    """Random NCPoly with small rational coefficients and words up to degree."""
    out: Dict[tuple, Fraction] = {}
    for _ in range(terms):
        word = random_word(rng, n, int(rng.integers(0, degree + 1)))
        out[word] = out.get(word, 0) + random_coeff(rng)
    return NCPoly(out, n)


def random_self_adjoint(rng: np.random.Generator, n: int, degree: int, terms: int = 3) -> NCPoly:
    P = random_poly(rng, n, degree, terms)
    return (P + P.adjoint()).scale(Fraction(1, 2))


def random_trace_poly(
    rng: np.random.Generator, n: int, degree: int, terms: int = 3, max_traces: int = 2
) -> TracePoly:
    """Random TracePoly; every term's total degree stays within degree."""
    out: Dict[tuple, Fraction] = {}
    for _ in range(terms):
        remaining = int(rng.integers(0, degree + 1))
        traces = []
        for _ in range(int(rng.integers(0, max_traces + 1))):
            if remaining < 1:
                break
            length = int(rng.integers(1, min(remaining, 2) + 1))
            traces.append(random_word(rng, n, length))
            remaining -= length
        base = random_word(rng, n, remaining)
        key = (base, tuple(traces))
        out[key] = out.get(key, 0) + random_coeff(rng)
    return TracePoly(out, n)


# -- identity instances ------------------------------------------------------


def _letter(rng: np.random.Generator, n: int) -> int:
    return int(rng.integers(1, n + 1))


def flip(rng, n: int, degree: int) -> Sides:
    """ρ(∂ᵢP)#Q = 𝒟_{i,Q}(P)."""
    P = random_poly(rng, n, degree)
    Q = random_poly(rng, n, 2, terms=2)
    i = _letter(rng, n)
    return hash_op(rho(fdq(P, i)), Q), cyclic_grad(P, i, weight=Q)


def cyclic_derivation(rng, n: int, degree: int) -> Sides:
    """𝒟_{i,d}(PQ) = 𝒟_{i,Qd}(P) + 𝒟_{i,dP}(Q)."""
    half = max(1, degree // 2)
    P = random_trace_poly(rng, n, half)
    Q = random_trace_poly(rng, n, half)
    d = random_trace_poly(rng, n, 2, terms=2, max_traces=1)
    i = _letter(rng, n)
    lhs = cyclic_grad(P.mul(Q), i, weight=d)
    rhs = cyclic_grad(P, i, weight=Q.mul(d)) + cyclic_grad(Q, i, weight=d.mul(P))
    return lhs, rhs


def laplacian_commutation(rng, n: int, degree: int) -> Sides:
    """𝒟ᵢ(Δ+δ_Δ) = (Δ+δ_Δ)𝒟ᵢ."""
    P = random_trace_poly(rng, n, degree)
    i = _letter(rng, n)
    flat = lambda Q: laplacian(Q) + delta_flat(Q)  # noqa: E731
    return cyclic_grad(flat(P), i), flat(cyclic_grad(P, i))


def generator_commutation(rng, n: int, degree: int) -> Sides:
    """𝒟ᵢ(Δ_V+δ_V)g = (Δ_V+δ_V)𝒟ᵢg − Σⱼ 𝒟_{i,𝒟ⱼg}𝒟ⱼV."""
    g = random_trace_poly(rng, n, degree)
    V = random_self_adjoint(rng, n, 4)
    i = _letter(rng, n)
    gen = lambda Q: laplacian_V(Q, V) + delta_V(Q, V)  # noqa: E731
    lhs = cyclic_grad(gen(g), i)
    rhs = gen(cyclic_grad(g, i))
    for j in range(1, n + 1):
        rhs = rhs - cyclic_grad(cyclic_gradient_poly(V, j), i, weight=cyclic_grad(g, j))
    return lhs, rhs


def hessian_symmetry(rng, n: int, degree: int) -> Sides:
    """ρ(∂ᵢ𝒟ⱼV) = ∂ⱼ𝒟ᵢV."""
    V = random_poly(rng, n, degree)
    i, j = _letter(rng, n), _letter(rng, n)
    return rho(fdq(cyclic_gradient_poly(V, j), i)), fdq(cyclic_gradient_poly(V, i), j)


def chain_rule(rng, n: int, degree: int) -> Sides:
    """∂ⱼ(P∘Q) = Σₘ (∂ₘP)(Q)#∂ⱼQₘ."""
    P = random_poly(rng, n, min(degree, 3))
    Qs = [random_poly(rng, n, 2, terms=2) for _ in range(n)]
    j = _letter(rng, n)
    lhs = fdq(compose(P, Qs), j)
    rhs = TensorPoly.zero(n, 2)
    for m in range(1, n + 1):
        outer = substitute_tensor(fdq(P, m), Qs)
        rhs = rhs + hash_multi(outer, [fdq(Qs[m - 1], j)])
    return lhs, rhs


def chain_rule_second(rng, n: int, degree: int) -> Sides:
    """Second order chain rule with the nested quotient (∂_{j₁}⊗1)∂_{j₂}."""
    P = random_poly(rng, n, min(degree, 3), terms=3)
    Qs = [random_poly(rng, n, 2, terms=2) for _ in range(n)]
    j1, j2 = _letter(rng, n), _letter(rng, n)
    lhs = fdq_iter(compose(P, Qs), (j1, j2), first_leg=True)
    rhs = TensorPoly.zero(n, 3)
    for m1 in range(1, n + 1):
        for m2 in range(1, n + 1):
            outer = substitute_tensor(fdq_iter(P, (m1, m2), first_leg=True), Qs)
            rhs = rhs + hash_multi(outer, [fdq(Qs[m1 - 1], j1), fdq(Qs[m2 - 1], j2)])
    for m in range(1, n + 1):
        outer = substitute_tensor(fdq(P, m), Qs)
        rhs = rhs + hash_multi(outer, [fdq_iter(Qs[m - 1], (j1, j2), first_leg=True)])
    return lhs, rhs


def _shift(d: NCPoly, offset: int, n_out: int) -> NCPoly:
    """Rename X_k to X_{k+offset} in an alphabet of n_out letters."""
    return compose(d, [NCPoly.var(k + offset, n_out) for k in range(1, d.n + 1)])


def cyclic_chain_rule(rng, n: int, degree: int) -> Sides:
    """𝒟_{i,d}(P(Q)) = Σⱼ 𝒟_{i, 𝒟_{Qⱼ,d}(P)(Q)}(Qⱼ)."""
    P = random_poly(rng, n, min(degree, 3))
    Qs = [random_poly(rng, n, 2, terms=2) for _ in range(n)]
    d = random_poly(rng, n, 1, terms=2)
    i = _letter(rng, n)
    lhs = cyclic_grad(compose(P, Qs), i, weight=d)
    wide = 2 * n
    back = Qs + [NCPoly.var(k, n) for k in range(1, n + 1)]
    rhs = TracePoly.zero(n)
    for j in range(1, n + 1):
        inner = cyclic_grad(P.with_n(wide), j, weight=_shift(d, n, wide)).to_ncpoly()
        rhs = rhs + cyclic_grad(Qs[j - 1], i, weight=compose(inner, back))
    return lhs, rhs


def leibniz(rng, n: int, degree: int) -> Sides:
    """∂ᵢ(PQ) = ∂ᵢP·(1⊗Q) + (P⊗1)·∂ᵢQ."""
    half = max(1, degree // 2)
    P = random_poly(rng, n, half)
    Q = random_poly(rng, n, half)
    i = _letter(rng, n)
    one = NCPoly.constant(1, n)
    rhs = fdq(P, i).mul(tensor(one, Q)) + tensor(P, one).mul(fdq(Q, i))
    return fdq(P.mul(Q), i), rhs


def adjoint_compatibility(rng, n: int, degree: int) -> Sides:
    """𝒟ᵢ(P*) = (𝒟ᵢP)* on trace polynomials."""
    P = random_trace_poly(rng, n, degree)
    i = _letter(rng, n)
    return cyclic_grad(P.adjoint(), i), cyclic_grad(P, i).adjoint()


IDENTITIES: Dict[str, Callable] = {
    "flip": flip,
    "cyclic_derivation": cyclic_derivation,
    "laplacian_commutation": laplacian_commutation,
    "generator_commutation": generator_commutation,
    "hessian_symmetry": hessian_symmetry,
    "chain_rule": chain_rule,
    "chain_rule_second": chain_rule_second,
    "cyclic_chain_rule": cyclic_chain_rule,
    "leibniz": leibniz,
    "adjoint_compatibility": adjoint_compatibility,
}


# -- comparison --------------------------------------------------------------


def symbolic_equal(lhs, rhs) -> bool:
    if isinstance(lhs, TensorPoly) or isinstance(rhs, TensorPoly):
        return lhs == rhs
    return as_trace(lhs) == as_trace(rhs)


def _close_tensor(T: TensorPoly) -> Tuple[object, int]:
    """Insert fresh direction letters into every gap of T."""
    n_out = T.n + T.legs - 1
    wide = TensorPoly._raw(dict(T.terms), n_out, T.legs)
    inserts = [NCPoly.var(T.n + s, n_out) for s in range(1, T.legs)]
    return hash_multi(wide, inserts), n_out


def _evaluate(side, X: np.ndarray) -> np.ndarray:
    if isinstance(side, TensorPoly):
        side, _ = _close_tensor(side)
    side = as_trace(side)
    return CompiledPoly(side.float_coeffs())(X[:, : side.n])


def numeric_error(lhs, rhs, rng: np.random.Generator, points: int = NUMERIC_POINTS) -> float:
    """Relative sup difference of both sides on random Hermitian tuples."""
    letters = max(lhs.n, rhs.n)
    if isinstance(lhs, TensorPoly):
        letters += lhs.legs - 1
    X = np.stack([
        np.stack([random_hermitian(rng, NUMERIC_N) for _ in range(letters)])
        for _ in range(points)
    ])
    a = _evaluate(lhs, X)
    b = _evaluate(rhs, X)
    scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    return float(np.max(np.abs(a - b))) / scale


@dataclass
class IdentityResult:
    """Pass/fail tally of one identity over random instances."""

    name: str
    trials: int
    symbolic_failures: int = 0
    numeric_failures: int = 0
    max_numeric_error: float = 0.0
    first_failure: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.symbolic_failures == 0 and self.numeric_failures == 0

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "trials": self.trials,
            "symbolic_failures": self.symbolic_failures,
            "numeric_failures": self.numeric_failures,
            "max_numeric_error": self.max_numeric_error,
            "first_failure": self.first_failure,
            "passed": self.passed,
        }


def check_identity(
    name: str,
    n: int,
    degree: int,
    trials: int,
    seed: int = 0,
    numeric_every: int = 1,
) -> IdentityResult:
    """Run one identity over trials random instances.

    Args:
        name: Key of IDENTITIES
        n: Letter count
        degree: Degree bound for the random polynomials
        trials: Number of random instances
        seed: Base seed; instance k draws from stream(seed, k)
        numeric_every: Evaluate numerically on every k-th instance

    Returns:
        IdentityResult with failure counts and the largest numeric error
    """
    make = IDENTITIES[name]
    result = IdentityResult(name, trials)
    key = sorted(IDENTITIES).index(name)
    for k in range(trials):
        rng = stream(seed, key, k)
        lhs, rhs = make(rng, n, degree)
        if not symbolic_equal(lhs, rhs):
            result.symbolic_failures += 1
            result.first_failure = result.first_failure or f"lhs={lhs} rhs={rhs}"
        if k % max(1, numeric_every) == 0:
            err = numeric_error(lhs, rhs, rng)
            result.max_numeric_error = max(result.max_numeric_error, err)
            if err > NUMERIC_TOL:
                result.numeric_failures += 1
                result.first_failure = result.first_failure or f"numeric error {err:.3e}"
    level = logging.INFO if result.passed else logging.WARNING
    logger.log(level, f"Identity {name}: {trials} trials, passed={result.passed}")
    return result


def run_identity_suite(
    n: int,
    degree: int,
    trials: int,
    seed: int = 0,
    names: Optional[Sequence[str]] = None,
    numeric_every: int = 1,
) -> List[IdentityResult]:
    """check_identity for every named identity (all by default)."""
    names = list(names) if names else list(IDENTITIES)
    unknown = [name for name in names if name not in IDENTITIES]
    if unknown:
        raise ValueError(f"unknown identities: {unknown}")
    return [check_identity(name, n, degree, trials, seed, numeric_every) for name in names]
