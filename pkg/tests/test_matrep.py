"""
Free Gibbs Transport - Matrix Representation Tests

Numeric evaluation, Hermitian tuples and ensembles, convexity
certificates, Hessian spectra, Schwinger–Dyson residuals and the
randomized identity suite.
"""
from fractions import Fraction

import numpy as np
import numpy.testing as npt
import pytest

from core.errors import DimensionMismatch, DivergenceError, EmptyEnsembleError, HermitianViolation
from matrep import (
    COUNTEREXAMPLE_MIN_EIG,
    IDENTITIES,
    Ensemble,
    HermCoordinates,
    HessianKernel,
    MatrixTuple,
    certify_convexity,
    check_confinement,
    check_hermitian,
    check_identity,
    eval_poly,
    eval_scalar,
    eval_tensor_apply,
    eval_trace_poly,
    hessian_min_eig,
    monomial_battery,
    old_convexity_counterexample,
    random_hermitian,
    random_tuple,
    real_inner,
    run_identity_suite,
    sd_residual,
    tau_hat,
)
from ncalg import NCPoly, PotentialSpec, TensorPoly, TracePoly


def mono(word, n: int = 1, coeff=1) -> NCPoly:
    return NCPoly.monomial(word, n, coeff)


class TestEvaluation:
    """Tests for polynomial evaluation on matrix tuples."""

    def test_product_is_homomorphic(self, random_pair):
        """Test (PQ)(X) = P(X)Q(X)."""
        P = mono((1, 2), 2) + NCPoly.var(2, 2).scale(3)
        Q = mono((2, 2, 1), 2) - NCPoly.constant(1, 2)
        npt.assert_allclose(
            eval_poly(P.mul(Q), random_pair),
            eval_poly(P, random_pair) @ eval_poly(Q, random_pair),
            atol=1e-12,
        )

    def test_trace_factor_is_scalar(self, random_pair):
        """Test X1·τ(X1X2) evaluates to τ̂(X1X2)·X1."""
        P = TracePoly.term((1,), [(1, 2)], 2)
        X1, X2 = random_pair
        npt.assert_allclose(eval_trace_poly(P, random_pair), tau_hat(X1 @ X2) * X1, atol=1e-12)

    def test_scalar_of_pure_trace(self, random_pair):
        """Test τ(X1²)τ(X2) evaluates to a scalar."""
        P = TracePoly.term((), [(1, 1), (2,)], 2)
        X1, X2 = random_pair
        npt.assert_allclose(eval_scalar(P, random_pair), tau_hat(X1 @ X1) * tau_hat(X2))

    def test_scalar_rejects_base_words(self, random_pair):
        """Test non-scalar polynomials have no scalar value."""
        with pytest.raises(ValueError):
            eval_scalar(NCPoly.var(1, 2).lift(), random_pair)

    def test_tensor_apply(self, random_pair, rng):
        """Test (X1⊗X2)#H = X1·H·X2."""
        T = TensorPoly({((1,), (2,)): 1}, 2)
        H = random_hermitian(rng, 5)
        X1, X2 = random_pair
        npt.assert_allclose(eval_tensor_apply(T, random_pair, H), X1 @ H @ X2, atol=1e-12)

    def test_batched_evaluation(self, rng):
        """Test a leading batch axis evaluates sample-wise."""
        batch = np.stack([random_tuple(rng, 1, 4).mats for _ in range(3)])
        P = mono((1, 1, 1))
        out = eval_poly(P, batch)
        for k in range(3):
            npt.assert_allclose(out[k], batch[k, 0] @ batch[k, 0] @ batch[k, 0], atol=1e-12)

    def test_too_few_letters(self, rng):
        """Test evaluating a 2-letter polynomial on a 1-tuple fails."""
        with pytest.raises(DimensionMismatch):
            eval_poly(NCPoly.var(2, 2), random_tuple(rng, 1, 3))

    def test_too_many_letters(self, random_pair):
        """Test a 1-letter polynomial does not silently read a 2-tuple."""
        with pytest.raises(DimensionMismatch):
            eval_poly(NCPoly.var(1, 1), random_pair)
        with pytest.raises(DimensionMismatch):
            eval_scalar(NCPoly.var(1, 1).lift().trace(), random_pair)
        with pytest.raises(DimensionMismatch):
            eval_tensor_apply(TensorPoly({((1,), (1,)): 1}, 1), random_pair,
                              np.eye(random_pair.shape[-1]))


class TestMatrices:
    """Tests for Hermitian tuples and ensembles."""

    def test_hermitian_check(self):
        """Test asymmetric matrices are rejected."""
        with pytest.raises(HermitianViolation):
            check_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_single_matrix_tuple(self):
        """Test a bare matrix becomes a 1-tuple."""
        X = MatrixTuple(np.eye(3))
        assert (X.n, X.N) == (1, 3)
        assert X.max_norm() == pytest.approx(1.0)

    def test_norm_cap(self):
        """Test within_cap compares the operator norm with R."""
        assert not MatrixTuple.of(np.diag([3.0, -1.0]), R=2.0).within_cap()
        assert MatrixTuple.of(np.diag([1.0, -1.0]), R=2.0).within_cap()

    def test_confinement(self):
        """Test norms beyond the radius raise DivergenceError."""
        with pytest.raises(DivergenceError) as exc:
            check_confinement(np.diag([5.0, 0.0])[None], 4.0, step=12)
        assert exc.value.step == 12

    def test_random_hermitian_scale(self):
        """Test E τ̂(X²) = 1 for the default scale."""
        gen = np.random.default_rng(5)
        values = [tau_hat(M @ M).real for M in (random_hermitian(gen, 20) for _ in range(200))]
        assert np.mean(values) == pytest.approx(1.0, abs=0.03)

    def test_ensemble_from_tuples(self, rng):
        """Test stacking tuples and pooled eigenvalues."""
        ens = Ensemble.from_tuples([random_tuple(rng, 1, 4) for _ in range(3)])
        assert (ens.count, ens.n, ens.N) == (3, 1, 4)
        assert ens.eigenvalues(1).shape == (12,)
        npt.assert_allclose(ens.moments(0), np.ones(3))

    def test_empty_ensemble(self):
        """Test building an ensemble from nothing fails."""
        with pytest.raises(EmptyEnsembleError):
            Ensemble.from_tuples([])

    def test_mixed_shapes(self, rng):
        """Test samples must agree on (n, N)."""
        with pytest.raises(DimensionMismatch):
            Ensemble.from_tuples([random_tuple(rng, 1, 3), random_tuple(rng, 1, 4)])


class TestCertificates:
    """Tests for symbolic convexity certificates."""

    def test_quartic_certified(self, quartic_spec):
        """Test ½x² + ¼x⁴ is certified with c = 1."""
        result = certify_convexity(quartic_spec)
        assert result.certified
        assert result.c == pytest.approx(1.0)
        assert result.blocks[0].ok

    def test_negative_nu4_rejected(self):
        """Test a column with ν₄ ≤ 0 is rejected as a value."""
        spec = PotentialSpec.one_variable(quad=1, nu=(0, 0, -1), mu=1)
        result = certify_convexity(spec)
        assert not result.certified
        assert "nu4" in result.reason

    def test_cubic_margin_rejected(self):
        """Test ν₃² > 8ν₂ν₄/3 is rejected."""
        spec = PotentialSpec.one_variable(quad=1, nu=(1, 2, 1), mu=1)
        result = certify_convexity(spec)
        assert not result.certified
        assert result.blocks[0].margin == Fraction(8, 3) - 4

    def test_claim_above_certificate(self, quartic_spec):
        """Test a claimed constant above λ_min(A) is rejected."""
        quartic_spec.c_claim = 2.0
        assert not certify_convexity(quartic_spec).certified

    def test_generic_not_certified(self):
        """Test generic potentials get no symbolic certificate."""
        spec = PotentialSpec(kind="generic", n=1, poly=mono((1, 1), coeff=Fraction(1, 2)))
        result = certify_convexity(spec)
        assert not result.certified
        assert "generic" in result.reason

    def test_old_convexity_counterexample(self):
        """Test the X⁴ pair has a negative eigenvalue matching the closed form."""
        S, min_eig = old_convexity_counterexample()
        npt.assert_allclose(S, S.conj().T)
        assert min_eig < 0
        assert min_eig == pytest.approx(COUNTEREXAMPLE_MIN_EIG, rel=1e-10)


class TestHessian:
    """Tests for the Hessian superoperator spectrum."""

    def test_coordinates_are_orthonormal(self, rng):
        """Test ⟨A, B⟩ = u·v in Hermitian coordinates."""
        coords = HermCoordinates(2, 3)
        u = rng.standard_normal(coords.dim)
        v = rng.standard_normal(coords.dim)
        assert real_inner(coords.to_tuple(u), coords.to_tuple(v)) == pytest.approx(u @ v)
        npt.assert_allclose(coords.to_vector(coords.to_tuple(u)), u, atol=1e-12)

    def test_quadratic_hessian_is_identity(self, random_pair):
        """Test the Hessian of ½ΣXᵢ² has minimum eigenvalue 1 everywhere."""
        V = PotentialSpec.quadratic(2, 1).expand()
        assert hessian_min_eig(V, random_pair) == pytest.approx(1.0, abs=1e-10)

    def test_quartic_hessian_bounded_below(self, quartic_spec, rng):
        """Test ½x² + ¼x⁴ keeps the minimum eigenvalue at least 1."""
        V = quartic_spec.expand()
        kernel = HessianKernel(V)
        for _ in range(3):
            X = random_tuple(rng, 1, 6, scale=2.0)
            assert hessian_min_eig(V, X, kernel=kernel) >= 1.0 - 1e-8

    def test_quartic_hessian_at_zero(self, quartic_spec):
        """Test the quartic term vanishes at X = 0."""
        V = quartic_spec.expand()
        assert hessian_min_eig(V, MatrixTuple.zeros(1, 4)) == pytest.approx(1.0, abs=1e-10)

    def test_concave_potential(self, rng):
        """Test −½x² has minimum eigenvalue −1."""
        V = mono((1, 1), coeff=Fraction(-1, 2))
        assert hessian_min_eig(V, random_tuple(rng, 1, 4)) == pytest.approx(-1.0, abs=1e-10)

    def test_letter_mismatch(self, random_pair):
        """Test V and the tuple must agree on n."""
        with pytest.raises(DimensionMismatch):
            hessian_min_eig(mono((1, 1)), random_pair)


class TestSDResiduals:
    """Tests for Schwinger–Dyson residuals on ensembles."""

    def test_battery_size(self):
        """Test monomials of degree 1..2 in two letters."""
        assert len(monomial_battery(2, 2)) == 6

    def test_gue_residuals_vanish(self, gue_samples):
        """Test exact GUE draws satisfy the SD equations for ½x²."""
        ens = Ensemble(gue_samples(200, 8, seed=4))
        V = mono((1, 1), coeff=Fraction(1, 2))
        for res in sd_residual(ens, V, monomial_battery(1, 3)):
            assert abs(res.mean) <= 5 * res.stderr + 1e-10

    def test_factorized_mode(self, gue_samples):
        """Test the product-of-means residual is small with a jackknife error."""
        ens = Ensemble(gue_samples(100, 10, seed=5))
        V = mono((1, 1), coeff=Fraction(1, 2))
        (res,) = sd_residual(ens, V, [mono((1, 1, 1))], mode="factorized")
        assert res.mode == "factorized"
        assert res.stderr > 0
        assert abs(res.mean) < 0.1

    def test_unknown_mode(self, gue_samples):
        """Test modes other than paired/factorized are rejected."""
        with pytest.raises(ValueError):
            sd_residual(Ensemble(gue_samples(2, 3)), mono((1, 1)), [NCPoly.var(1, 1)], mode="x")

    def test_empty_ensemble(self):
        """Test residuals need samples."""
        ens = Ensemble(np.zeros((0, 1, 3, 3)))
        with pytest.raises(EmptyEnsembleError):
            sd_residual(ens, mono((1, 1)), [NCPoly.var(1, 1)])


class TestIdentitySuite:
    """Tests for the randomized symbolic/numeric identity checks."""

    def test_single_identity(self):
        """Test the flip relation on random instances."""
        result = check_identity("flip", n=2, degree=3, trials=4, seed=11)
        assert result.passed
        assert result.to_dict()["passed"] is True

    def test_full_suite(self):
        """Test every identity passes on a few random instances."""
        results = run_identity_suite(n=2, degree=3, trials=2, seed=5)
        assert {r.name for r in results} == set(IDENTITIES)
        failed = [r.to_dict() for r in results if not r.passed]
        assert not failed

    def test_unknown_identity(self):
        """Test unknown names are rejected before running."""
        with pytest.raises(ValueError):
            run_identity_suite(n=1, degree=2, trials=1, names=["flip", "nonsense"])

    @pytest.mark.slow
    def test_full_suite_many_trials(self):
        """Test every identity over a larger randomized sample."""
        results = run_identity_suite(n=3, degree=4, trials=50, seed=2024, numeric_every=5)
        assert all(r.passed for r in results)
