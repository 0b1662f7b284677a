"""
Free Gibbs Transport - Non-commutative Calculus Tests

Exact checks of the polynomial types, difference quotients, cyclic
gradients, Laplacians, generators and the potential/codec layer.
"""
import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from core.errors import (
    ArtifactError,
    ConfigError,
    DegreeBoundExceeded,
    DimensionMismatch,
    LegIndexError,
    LetterCollision,
)
from ncalg import (
    NCPoly,
    PotentialSpec,
    TensorPoly,
    TracePoly,
    codec,
    combine,
    compose,
    compose_trace,
    cyclic_derivative,
    cyclic_grad,
    cyclic_gradient_poly,
    directional,
    evaluate_scalar,
    fdq,
    fdq_iter,
    finite_n_correction,
    generator,
    hash_multi,
    hash_op,
    laplacian,
    load_potential,
    rho,
    sd_residual_expr,
    tensor,
)
from onevar import semicircle_moment


def X(i: int, n: int = 1) -> NCPoly:
    return NCPoly.var(i, n)


def mono(word, n: int = 1, coeff=1) -> NCPoly:
    return NCPoly.monomial(word, n, coeff)


polys = st.dictionaries(
    st.lists(st.integers(1, 2), max_size=4).map(tuple),
    st.integers(-3, 3),
    max_size=4,
).map(lambda terms: NCPoly(terms, 2))


class TestPolyTypes:
    """Tests for NCPoly, TracePoly and TensorPoly arithmetic."""

    def test_product_concatenates_words(self):
        """Test (X1 + X2)·X1 = X1X1 + X2X1."""
        P = (X(1, 2) + X(2, 2)).mul(X(1, 2))
        assert P == mono((1, 1), 2) + mono((2, 1), 2)

    def test_zero_terms_are_dropped(self):
        """Test cancelling terms leave the zero polynomial."""
        assert (X(1) - X(1)).is_zero()

    def test_coefficients_are_exact(self):
        """Test integer and string coefficients become Fractions."""
        P = NCPoly({(1,): "3/4", (1, 1): 2}, 1)
        assert P.coefficient((1,)) == Fraction(3, 4)
        assert isinstance(P.coefficient((1, 1)), Fraction)

    def test_letter_count_mismatch(self):
        """Test adding polynomials over different alphabets fails."""
        with pytest.raises(DimensionMismatch):
            X(1, 1) + X(1, 2)

    def test_degree_bound(self):
        """Test products beyond the degree bound raise."""
        P = mono((1,) * 10)
        with pytest.raises(DegreeBoundExceeded):
            P.mul(P)

    def test_trace_factors_are_cyclic(self):
        """Test τ(X1X2) and τ(X2X1) are the same factor."""
        a = TracePoly.term((), [(1, 2)], 2)
        b = TracePoly.term((), [(2, 1)], 2)
        assert a == b

    def test_trace_of_one_is_dropped(self):
        """Test τ(1) = 1."""
        assert TracePoly.term((1,), [()], 1) == X(1)

    def test_trace_moves_base_into_factor(self):
        """Test τ(X·τ(X)) = τ(X)²."""
        P = TracePoly.term((1,), [(1,)], 1)
        assert P.trace() == TracePoly.term((), [(1,), (1,)], 1)

    def test_adjoint_reverses_words(self):
        """Test (X1X2)* = X2X1."""
        assert mono((1, 2), 2).adjoint() == mono((2, 1), 2)
        assert (mono((1, 2), 2) + mono((2, 1), 2)).is_self_adjoint()

    def test_tensor_product_merges_traces(self):
        """Test X⊗τ(X)X keeps a single shared trace multiset."""
        T = tensor(X(1), TracePoly.term((1,), [(1,)], 1))
        assert T == TensorPoly({(((1,), (1,)), ((1,),)): 1}, 1)


class TestDifferenceQuotients:
    """Tests for ∂ᵢ, iterated quotients and ρ."""

    def test_fdq_word(self):
        """Test ∂₁(X1X2X1) = 1⊗X2X1 + X1X2⊗1."""
        T = fdq(mono((1, 2, 1), 2), 1)
        expected = TensorPoly({((), (2, 1)): 1, ((1, 2), ()): 1}, 2)
        assert T == expected

    def test_fdq_constant_vanishes(self):
        """Test ∂ of a constant is zero."""
        assert fdq(NCPoly.constant(5, 1), 1).is_zero()

    def test_fdq_bad_letter(self):
        """Test ∂ with a letter outside the alphabet fails."""
        with pytest.raises(DimensionMismatch):
            fdq(X(1), 2)

    def test_fdq_iter_all_legs(self):
        """Test ∂∂X³ on every leg doubles each elementary tensor."""
        T = fdq_iter(mono((1, 1, 1)), (1, 1))
        expected = TensorPoly({((), (), (1,)): 2, ((), (1,), ()): 2, ((1,), (), ()): 2}, 1, 3)
        assert T == expected

    def test_fdq_iter_first_leg(self):
        """Test the nested quotient differentiates only the first leg."""
        T = fdq_iter(mono((1, 1, 1)), (1, 1), first_leg=True)
        expected = TensorPoly({((), (), (1,)): 1, ((), (1,), ()): 1, ((1,), (), ()): 1}, 1, 3)
        assert T == expected

    def test_rho_rotates_legs(self):
        """Test ρ(a⊗b⊗c) = c⊗a⊗b."""
        T = TensorPoly({((1,), (2,), (1, 2)): 1}, 2, 3)
        assert rho(T) == TensorPoly({((1, 2), (1,), (2,)): 1}, 2, 3)

    def test_hash_two_legs(self):
        """Test (a⊗b)#h = a·h·b."""
        T = TensorPoly({((1,), (2,)): 1}, 2)
        assert hash_op(T, mono((2, 2), 2)) == mono((1, 2, 2, 2), 2)

    def test_hash_multi_three_legs(self):
        """Test (a⊗b⊗c)#(A, B) = aAbBc."""
        T = TensorPoly({((1,), (2,), ()): 1}, 2, 3)
        assert hash_multi(T, [X(2, 2), X(1, 2)]) == mono((1, 2, 2, 1), 2)

    def test_hash_multi_wrong_count(self):
        """Test a two-leg tensor takes exactly one insert."""
        T = TensorPoly({((1,), (1,)): 1}, 1)
        with pytest.raises(LegIndexError):
            hash_multi(T, [X(1), X(1)])

    def test_hash_slot_out_of_range(self):
        """Test slot indices are checked on multi-leg tensors."""
        T = TensorPoly({((1,), (1,), (1,)): 1}, 1, 3)
        with pytest.raises(LegIndexError):
            hash_op(T, X(1), slot=3)


class TestCyclicGradients:
    """Tests for 𝒟ᵢ and its weighted form."""

    def test_cyclic_derivative_word(self):
        """Test 𝒟₁(X1X2X1) = X2X1 + X1X2."""
        D = cyclic_derivative(mono((1, 2, 1), 2), 1)
        assert D == mono((2, 1), 2) + mono((1, 2), 2)

    def test_quartic_gradient(self):
        """Test 𝒟(x⁴/4) = x³."""
        V = mono((1, 1, 1, 1), coeff=Fraction(1, 4))
        assert cyclic_gradient_poly(V, 1) == mono((1, 1, 1))

    def test_gradient_of_trace_factor(self):
        """Test 𝒟(τ(X²)) = 2X."""
        P = TracePoly.term((), [(1, 1)], 1)
        assert cyclic_grad(P, 1) == X(1).scale(2)

    def test_weighted_gradient(self):
        """Test 𝒟_{1,p}(X1X2) = X2·p."""
        p = mono((2, 2), 2)
        assert cyclic_grad(mono((1, 2), 2), 1, weight=p) == mono((2, 2, 2), 2)

    @settings(max_examples=50, deadline=None)
    @given(polys, polys, st.integers(1, 2))
    def test_flip_relation(self, P, Q, i):
        """Test ρ(∂ᵢP)#Q = 𝒟_{i,Q}(P)."""
        assert hash_op(rho(fdq(P, i)), Q) == cyclic_grad(P, i, weight=Q)

    @settings(max_examples=50, deadline=None)
    @given(polys, polys, st.integers(1, 2))
    def test_leibniz_rule(self, P, Q, i):
        """Test ∂ᵢ(PQ) = ∂ᵢP·(1⊗Q) + (P⊗1)·∂ᵢQ."""
        one = NCPoly.constant(1, 2)
        rhs = fdq(P, i).mul(tensor(one, Q)) + tensor(P, one).mul(fdq(Q, i))
        assert fdq(P.mul(Q), i) == rhs

    @settings(max_examples=50, deadline=None)
    @given(polys, st.integers(1, 2), st.integers(1, 2))
    def test_hessian_symmetry(self, V, i, j):
        """Test ρ(∂ᵢ𝒟ⱼV) = ∂ⱼ𝒟ᵢV."""
        lhs = rho(fdq(cyclic_gradient_poly(V, j), i))
        assert lhs == fdq(cyclic_gradient_poly(V, i), j)

    @settings(max_examples=50, deadline=None)
    @given(polys, st.integers(1, 2))
    def test_adjoint_compatibility(self, P, i):
        """Test 𝒟ᵢ(P*) = (𝒟ᵢP)*."""
        assert cyclic_grad(P.adjoint(), i) == cyclic_grad(P, i).adjoint()


class TestLaplacians:
    """Tests for Δ, the generator and the finite-N correction."""

    def test_laplacian_quartic(self):
        """Test Δ(X⁴) = 6X² + 4X·τ(X) + 2τ(X²)."""
        expected = TracePoly(
            {((1, 1), ()): 6, ((1,), ((1,),)): 4, ((), ((1, 1),)): 2}, 1
        )
        assert laplacian(mono((1, 1, 1, 1))) == expected

    def test_laplacian_square_is_constant(self):
        """Test Δ(X²) = 2."""
        assert laplacian(mono((1, 1))) == TracePoly.constant(2, 1)

    def test_ou_generator(self):
        """Test L(X²) = 1 − X² for V = ½X²."""
        V = mono((1, 1), coeff=Fraction(1, 2))
        assert generator(mono((1, 1)), V) == NCPoly.constant(1, 1) - mono((1, 1))

    def test_finite_n_correction_plain(self):
        """Test the covariation term vanishes on plain polynomials."""
        assert finite_n_correction(mono((1, 1, 1)), 8).is_zero()

    def test_finite_n_correction_trace(self):
        """Test the covariation of τ(X²)² at size N is 4τ(X²)/N²."""
        P = TracePoly.term((), [(1, 1), (1, 1)], 1)
        expected = TracePoly.term((), [(1, 1)], 1, Fraction(4, 16))
        assert finite_n_correction(P, 4) == expected

    def test_generator_finite_n_adds_correction(self):
        """Test generator(P, V, N) − generator(P, V) is the correction."""
        V = mono((1, 1), coeff=Fraction(1, 2))
        P = TracePoly.term((1, 1), [(1, 1)], 1)
        diff = generator(P, V, N=3) - generator(P, V)
        assert diff == finite_n_correction(P, 3)

    def test_generator_dimension_check(self):
        """Test P and V must share the alphabet."""
        with pytest.raises(DimensionMismatch):
            generator(X(1, 2), mono((1, 1)))


class TestComposition:
    """Tests for substitution, directional derivatives and SD expressions."""

    def test_compose_identity(self):
        """Test P(X1, X2) = P."""
        P = mono((1, 2, 2), 2) + X(1, 2)
        assert compose(P, [X(1, 2), X(2, 2)]) == P

    def test_compose_trace(self):
        """Test X·τ(X) at 2X is 4X·τ(X)."""
        P = TracePoly.term((1,), [(1,)], 1)
        assert compose_trace(P, [X(1).scale(2)]) == P.scale(4)

    def test_directional(self):
        """Test D_H(X²) = XH + HX with H as letter 2."""
        D = directional(mono((1, 1)))
        assert D == mono((1, 2), 2) + mono((2, 1), 2)

    def test_directional_collision(self):
        """Test direction letters may not overlap the variables."""
        with pytest.raises(LetterCollision):
            directional(mono((1, 1)), [1])

    def test_sd_expression_vanishes_at_semicircle(self):
        """Test the SD defect of X³ is zero under semicircle moments."""
        V = mono((1, 1), coeff=Fraction(1, 2))
        expr = sd_residual_expr(mono((1, 1, 1)), V, 1)
        assert evaluate_scalar(expr, lambda w: semicircle_moment(len(w))) == 0


class TestPotentialSpec:
    """Tests for potential descriptions and the JSON codec."""

    def test_quadratic_expansion(self):
        """Test the quadratic part is ½ΣAᵢⱼXᵢXⱼ."""
        V = PotentialSpec.quadratic(2, 3).expand()
        assert V == mono((1, 1), 2, Fraction(3, 2)) + mono((2, 2), 2, Fraction(3, 2))

    def test_one_variable_coefficients(self):
        """Test ½x² + ¼x⁴ in ascending coefficients."""
        spec = PotentialSpec.one_variable(quad=1, nu=(0, 0, 1), mu=1)
        assert spec.univariate_coeffs() == [0.0, 0.0, 0.5, 0.0, 0.25]

    def test_combine_stays_structured(self, gaussian_spec, quartic_spec):
        """Test V + W of structured potentials is structured."""
        total = combine(gaussian_spec, quartic_spec)
        assert total.kind == "structured"
        assert total.expand() == gaussian_spec.expand() + quartic_spec.expand()

    def test_asymmetric_A_rejected(self):
        """Test A must be symmetric."""
        with pytest.raises(ConfigError):
            PotentialSpec.from_dict({"kind": "structured", "A": [[1, 1], [0, 1]],
                                     "lambda": [[], []]})

    def test_load_potential_syntax_error(self, tmp_path):
        """Test JSON errors carry line and column."""
        path = tmp_path / "bad.json"
        path.write_text('{"kind": "generic",\n "coeffs": [0, 0, }')
        with pytest.raises(ConfigError) as exc:
            load_potential(str(path))
        assert exc.value.line == 2

    def test_generic_from_coeffs(self, tmp_path):
        """Test generic univariate potentials from coefficient lists."""
        path = tmp_path / "v.json"
        path.write_text(json.dumps({"kind": "generic", "coeffs": [0, 0, "1/2"]}))
        assert load_potential(str(path)).expand() == mono((1, 1), coeff=Fraction(1, 2))

    def test_codec_round_trip(self):
        """Test a trace polynomial survives encode/decode exactly."""
        P = TracePoly({((1, 2), ((1,),)): Fraction(3, 4), ((), ((1, 2),)): "5/2"}, 2)
        assert codec.loads(codec.dumps(P)) == P

    def test_codec_malformed(self):
        """Test malformed documents raise ArtifactError."""
        with pytest.raises(ArtifactError):
            codec.from_dict({"kind": "ncpoly", "terms": []})
