"""
Free Gibbs Transport - Sampler Tests

Hermitian noise, Langevin/MALA moves, autocorrelation times, ensemble
sampling of μ_{V,N} and trace concentration.
"""
import logging
from fractions import Fraction

import numpy as np
import numpy.testing as npt
import pytest

from core.config import ChainConfig
from core.errors import DimensionMismatch
from core.rng import stream
from matrep import Ensemble, MatrixTuple, random_tuple, tau_hat
from ncalg import NCPoly, PotentialSpec
from sampler import (
    PotentialField,
    concentration_check,
    hermitian_noise,
    integrated_autocorr_time,
    langevin_step,
    mala_step,
    real_norm2,
    sample_ensemble,
    trace_series,
)


class TestNoise:
    """Tests for Hermitian Gaussian noise."""

    def test_noise_is_hermitian(self, rng):
        """Test every draw is conjugate-symmetric."""
        W = hermitian_noise(rng, (3, 2), 5)
        npt.assert_allclose(W, np.conj(np.swapaxes(W, -1, -2)))
        assert W.shape == (3, 2, 5, 5)

    def test_noise_variance(self, rng):
        """Test E τ̂(W²) = 1."""
        W = hermitian_noise(rng, (400,), 10)
        assert np.mean(np.real(tau_hat(W @ W))) == pytest.approx(1.0, abs=0.03)

    def test_real_norm2(self):
        """Test Σ Re Tr(Aᵢ²) on identity blocks."""
        A = np.stack([np.eye(4), 2 * np.eye(4)])
        assert real_norm2(A) == pytest.approx(4 + 16)


class TestMoves:
    """Tests for the potential field and single moves."""

    def test_quadratic_gradient(self, random_pair):
        """Test 𝒟ᵢ(½ΣXₖ²) = Xᵢ."""
        field = PotentialField(PotentialSpec.quadratic(2, 1))
        npt.assert_allclose(field.gradient(random_pair), random_pair, atol=1e-12)

    def test_energy(self, random_pair):
        """Test energy = N·Tr V(X)."""
        field = PotentialField(PotentialSpec.quadratic(2, 1))
        N = random_pair.shape[-1]
        expected = 0.5 * N * sum(np.trace(X @ X).real for X in random_pair)
        assert field.energy(random_pair) == pytest.approx(expected)

    def test_langevin_keeps_type(self, rng):
        """Test a MatrixTuple stays a MatrixTuple with its cap."""
        X = MatrixTuple(random_tuple(rng, 2, 4).mats, R=50.0)
        Y = langevin_step(X, PotentialSpec.quadratic(2, 1), 0.01, rng)
        assert isinstance(Y, MatrixTuple)
        assert Y.R == 50.0
        assert Y.n == 2

    def test_mala_rejection_keeps_state(self, rng, gaussian_spec):
        """Test a huge step is rejected and returns the same tuple."""
        X = MatrixTuple(random_tuple(rng, 1, 6).mats)
        results = [mala_step(X, gaussian_spec, 50.0, stream(1, 0, t)) for t in range(20)]
        rejected = [Y for Y, ok in results if not ok]
        assert rejected
        assert all(Y is X for Y in rejected)

    def test_mala_small_steps_accept(self, rng, gaussian_spec):
        """Test tiny steps are almost always accepted."""
        X = random_tuple(rng, 1, 6)
        accepted = 0
        for t in range(50):
            X, ok = mala_step(X, gaussian_spec, 1e-3, stream(2, 0, t))
            accepted += ok
        assert accepted >= 45


class TestAutocorrelation:
    """Tests for the integrated autocorrelation time."""

    def test_iid_series(self):
        """Test independent draws have τ_int close to 1."""
        x = np.random.default_rng(0).standard_normal(20000)
        assert 1.0 <= integrated_autocorr_time(x) < 1.2

    def test_ar1_series(self):
        """Test AR(1) with φ = 0.9 has τ_int ≈ (1+φ)/(1−φ) = 19."""
        gen = np.random.default_rng(1)
        x = np.empty(50000)
        x[0] = 0.0
        eps = gen.standard_normal(len(x))
        for t in range(1, len(x)):
            x[t] = 0.9 * x[t - 1] + eps[t]
        assert integrated_autocorr_time(x) == pytest.approx(19.0, rel=0.25)

    def test_short_series(self):
        """Test degenerate inputs give 1."""
        assert integrated_autocorr_time(np.array([1.0])) == 1.0
        assert integrated_autocorr_time(np.zeros(10)) == 1.0


class TestSampleEnsemble:
    """Tests for ensemble sampling."""

    def test_semicircle_moments(self, semicircle_ensemble):
        """Test τ̂(X²) ≈ 1 and τ̂(X⁴) ≈ 2 for V = ½x²."""
        ens = semicircle_ensemble
        assert ens.count == 40
        assert np.mean(ens.moments(2)) == pytest.approx(1.0, abs=0.1)
        assert np.mean(ens.moments(4)) == pytest.approx(2.0, abs=0.3)

    def test_meta(self, semicircle_ensemble):
        """Test provenance metadata records acceptance and IACT."""
        meta = semicircle_ensemble.meta
        assert meta["acceptance"] > 0.5
        assert meta["iact"] >= 1.0
        assert meta["certified_c"] == pytest.approx(1.0)
        assert len(meta["chains"]) == 2

    def test_thread_count_does_not_matter(self, gaussian_spec):
        """Test samples are identical for one and several threads."""
        cfg = ChainConfig(potential=gaussian_spec, N=4, step=0.1, burnin=5, thin=2,
                          count=6, chains=3, seed=9)
        a = sample_ensemble(cfg, threads=1)
        b = sample_ensemble(cfg, threads=3)
        npt.assert_array_equal(a.samples, b.samples)

    def test_unadjusted_chain(self, gaussian_spec):
        """Test the unadjusted sampler accepts every move."""
        cfg = ChainConfig(potential=gaussian_spec, N=4, step=0.05, burnin=5, thin=1,
                          count=4, mala=False)
        assert sample_ensemble(cfg).meta["acceptance"] == 1.0

    def test_dimension_mismatch(self, gaussian_spec):
        """Test config n must agree with the potential."""
        cfg = ChainConfig(potential=PotentialSpec.quadratic(2, 1), n=3, N=4, count=1)
        with pytest.raises(DimensionMismatch):
            sample_ensemble(cfg)

    def test_bad_step(self, gaussian_spec):
        """Test non-positive steps are rejected."""
        with pytest.raises(ValueError):
            sample_ensemble(ChainConfig(potential=gaussian_spec, step=0.0))

    def test_uncertified_warning(self, caplog):
        """Test generic potentials sample with a warning."""
        spec = PotentialSpec(kind="generic", n=1, poly=NCPoly.monomial((1, 1), 1, Fraction(1, 2)))
        cfg = ChainConfig(potential=spec, N=3, step=0.1, burnin=2, thin=1, count=2)
        with caplog.at_level(logging.WARNING):
            ens = sample_ensemble(cfg)
        assert ens.meta["certified_c"] is None
        assert "without a convexity certificate" in caplog.text

    @pytest.mark.slow
    def test_quartic_moments_large_n(self, quartic_spec):
        """Test the quartic ensemble at N = 48 matches the equilibrium second moment."""
        cfg = ChainConfig(potential=quartic_spec, N=48, step=0.05, burnin=1000, thin=20,
                          count=100, chains=4, seed=1)
        m2 = np.mean(sample_ensemble(cfg).moments(2))
        assert m2 == pytest.approx(0.516, abs=0.05)


class TestConcentration:
    """Tests for trace covariances."""

    def test_scaled_variance(self, gue_samples):
        """Test N²·Var τ̂(X²) ≈ 2 for GUE."""
        ens = Ensemble(gue_samples(400, 8, seed=3))
        X2 = NCPoly.monomial((1, 1), 1)
        est = concentration_check(ens, X2, X2)
        assert est.count == 400
        assert 1.3 < est.scaled < 2.8

    def test_decay_in_n(self, gue_samples):
        """Test the covariance shrinks roughly like 1/N²."""
        X2 = NCPoly.monomial((1, 1), 1)
        small = concentration_check(Ensemble(gue_samples(300, 4, seed=1)), X2, X2)
        large = concentration_check(Ensemble(gue_samples(300, 12, seed=2)), X2, X2)
        assert large.covariance < small.covariance / 4

    def test_single_sample(self, gue_samples):
        """Test one sample gives zero covariance."""
        est = concentration_check(Ensemble(gue_samples(1, 3)), NCPoly.var(1, 1), NCPoly.var(1, 1))
        assert est.covariance == 0.0

    def test_trace_series(self, gue_samples):
        """Test per-sample traces match τ̂ directly."""
        samples = gue_samples(5, 4)
        series = trace_series(Ensemble(samples), NCPoly.monomial((1, 1), 1))
        expected = [tau_hat(s[0] @ s[0]) for s in samples]
        npt.assert_allclose(series, expected, atol=1e-12)

