"""
Free Gibbs Transport - One-variable Tests

Equilibrium measures of one-cut potentials, classical Gibbs densities,
the grid generator and the classical transport map against the
quantile oracle.
"""
import numpy as np
import numpy.testing as npt
import pytest

from core.errors import (
    ConvergenceError,
    DimensionMismatch,
    EmptyEnsembleError,
    TailBoundExceeded,
    TwoCutError,
)
from matrep import Ensemble
from onevar import (
    GeneratorGrid,
    GibbsDensity,
    GridFunc,
    classical_transport_1d,
    equilibrium_measure,
    gaussian_moment,
    log_partition_derivative,
    oracle_error,
    poisson_gradient,
    principal_value_residual,
    quantile_transport,
    quartic_endpoint,
    semicircle_moment,
    spectral_ks,
    uniform_grid,
)

GAUSSIAN = [0.0, 0.0, 0.5]
QUARTIC = [0.0, 0.0, 0.0, 0.0, 0.25]


class TestEquilibriumMeasure:
    """Tests for one-cut equilibrium measures."""

    def test_semicircle(self):
        """Test ½x² gives the semicircle on [−2, 2]."""
        mu = equilibrium_measure(GAUSSIAN)
        assert mu.support == pytest.approx((-2.0, 2.0), abs=1e-10)
        npt.assert_allclose(mu.Q, [1.0], atol=1e-10)
        for k in range(7):
            assert mu.moment(k) == pytest.approx(semicircle_moment(k), abs=1e-10)

    def test_pure_quartic_endpoint(self):
        """Test x⁴/4 has right endpoint (16/3)^{1/4}."""
        mu = equilibrium_measure(QUARTIC)
        assert mu.b == pytest.approx(quartic_endpoint(1.0), rel=1e-10)
        assert mu.a == pytest.approx(-quartic_endpoint(1.0), rel=1e-10)

    def test_gaussian_plus_quartic(self):
        """Test ½x² + ¼x⁴ has m₂ = a⁴ + 4a⁶ with 3a⁴ + a² = 1."""
        mu = equilibrium_measure([0.0, 0.0, 0.5, 0.0, 0.25])
        a2 = (np.sqrt(13.0) - 1.0) / 6.0
        assert mu.moment(2) == pytest.approx(a2 ** 2 + 4 * a2 ** 3, rel=1e-9)
        assert mu.b == pytest.approx(2.0 * np.sqrt(a2), rel=1e-10)

    def test_shifted_potential(self):
        """Test V = ½(x − 1)² centers the semicircle at 1."""
        mu = equilibrium_measure([0.5, -1.0, 0.5])
        assert mu.center == pytest.approx(1.0, abs=1e-10)
        assert mu.moment(1) == pytest.approx(1.0, abs=1e-10)

    def test_residuals(self):
        """Test the SD and principal-value equations hold."""
        mu = equilibrium_measure([0.0, 0.0, 0.5, 0.0, 0.25])
        assert max(abs(r) for r in mu.sd_residuals(4)) < 1e-9
        assert principal_value_residual(mu) < 1e-6

    def test_cdf_and_quantile(self):
        """Test the cdf is 0, ½, 1 at a, 0, b and inverts."""
        mu = equilibrium_measure(QUARTIC)
        npt.assert_allclose(mu.cdf(np.array([mu.a, 0.0, mu.b])), [0.0, 0.5, 1.0], atol=1e-10)
        u = np.array([0.1, 0.3, 0.9])
        npt.assert_allclose(mu.cdf(mu.quantile(u)), u, atol=1e-10)
        with pytest.raises(ValueError):
            mu.quantile(1.5)

    def test_density_outside_support(self):
        """Test the density vanishes off [a, b]."""
        mu = equilibrium_measure(GAUSSIAN)
        npt.assert_array_equal(mu.density(np.array([-3.0, 2.5])), [0.0, 0.0])
        assert mu.density(0.0) == pytest.approx(1.0 / np.pi)

    def test_odd_degree(self):
        """Test odd-degree potentials are not confining."""
        with pytest.raises(TwoCutError):
            equilibrium_measure([0.0, 0.0, 0.5, 1.0])

    def test_degree_too_small(self):
        """Test linear potentials are rejected."""
        with pytest.raises(ValueError):
            equilibrium_measure([0.0, 1.0])

    def test_double_well(self):
        """Test a deep double well breaks the one-cut ansatz."""
        with pytest.raises((TwoCutError, ConvergenceError)):
            equilibrium_measure([0.0, 0.0, -3.0, 0.0, 0.25])

    def test_to_dict(self):
        """Test the summary carries support and moments."""
        data = equilibrium_measure(GAUSSIAN).to_dict()
        assert data["m2"] == pytest.approx(1.0)
        assert data["m4"] == pytest.approx(2.0)


class TestSpectralKS:
    """Tests for the spectral Kolmogorov–Smirnov statistic."""

    def test_semicircle_ensemble(self, semicircle_ensemble):
        """Test MALA samples of ½x² are close to the semicircle."""
        assert spectral_ks(semicircle_ensemble, equilibrium_measure(GAUSSIAN)) < 0.1

    def test_wrong_measure(self, gue_samples):
        """Test GUE spectra are far from the pure-quartic law."""
        ens = Ensemble(gue_samples(50, 16))
        assert spectral_ks(ens, equilibrium_measure(QUARTIC)) > 0.05

    def test_two_letters(self, random_pair):
        """Test the statistic needs n = 1."""
        with pytest.raises(DimensionMismatch):
            spectral_ks(Ensemble(random_pair[None]), equilibrium_measure(GAUSSIAN))

    def test_empty(self):
        """Test the statistic needs samples."""
        with pytest.raises(EmptyEnsembleError):
            spectral_ks(Ensemble(np.zeros((0, 1, 2, 2))), equilibrium_measure(GAUSSIAN))


class TestMoments:
    """Tests for closed-form moments."""

    def test_semicircle_moments(self):
        """Test Catalan numbers at even orders."""
        assert [semicircle_moment(k) for k in range(0, 9, 2)] == [1, 1, 2, 5, 14]
        assert semicircle_moment(3) == 0.0

    def test_gaussian_moments(self):
        """Test (k−1)!!·σ^k."""
        assert gaussian_moment(4, 2.0) == pytest.approx(12.0)
        assert gaussian_moment(6) == pytest.approx(15.0)
        assert gaussian_moment(0) == 1.0
        assert gaussian_moment(5) == 0.0


class TestGibbsDensity:
    """Tests for classical densities e^{−V}/Z."""

    @pytest.fixture
    def gaussian(self):
        return GibbsDensity(GAUSSIAN, -10.0, 10.0)

    def test_partition_function(self, gaussian):
        """Test Z = √(2π) for ½x²."""
        assert gaussian.Z == pytest.approx(np.sqrt(2 * np.pi), rel=1e-8)
        assert gaussian.log_Z == pytest.approx(0.5 * np.log(2 * np.pi), rel=1e-8)

    def test_moments(self, gaussian):
        """Test standard normal moments."""
        for k in (2, 4, 6):
            assert gaussian.moment(k) == pytest.approx(gaussian_moment(k), rel=1e-6)
        assert gaussian.expectation([0.0, 0.0, 1.0]) == pytest.approx(1.0, rel=1e-6)

    def test_quantile(self, gaussian):
        """Test the 97.5% quantile of 𝒩(0, 1)."""
        assert gaussian.cdf(0.0) == pytest.approx(0.5, abs=1e-10)
        assert gaussian.quantile(0.975) == pytest.approx(1.959964, abs=1e-5)
        assert gaussian.quantile(0.0) == -10.0

    def test_log_partition_derivative(self):
        """Test ∂_α log Z = −1/(2(1+α)) for V = W = ½x²."""
        value = log_partition_derivative(GAUSSIAN, GAUSSIAN, 1.0, -10.0, 10.0)
        assert value == pytest.approx(-0.25, rel=1e-6)


class TestGridFunc:
    """Tests for grid functions."""

    def test_non_uniform_grid(self):
        """Test only uniform grids are accepted."""
        with pytest.raises(ValueError):
            GridFunc(np.array([0.0, 1.0, 3.0]), np.zeros(3))

    def test_derivative(self):
        """Test the spline derivative of x² is 2x."""
        x = uniform_grid(-2.0, 2.0, 81)
        f = GridFunc(x, x ** 2)
        npt.assert_allclose(f.derivative().values, 2 * x, atol=1e-8)
        assert f(0.25) == pytest.approx(0.0625)

    def test_monotone_and_distance(self):
        """Test monotonicity and windowed sup distance."""
        x = uniform_grid(0.0, 1.0, 11)
        f = GridFunc(x, x)
        assert f.is_monotone()
        assert not GridFunc(x, -x).is_monotone()
        assert f.sup_distance(lambda t: t + 0.1, 0.2, 0.8) == pytest.approx(0.1)
        assert f.rows()[-1] == {"x": 1.0, "value": 1.0}

    def test_uniform_grid_validation(self):
        """Test bad bounds and point counts."""
        with pytest.raises(ValueError):
            uniform_grid(1.0, 0.0, 10)
        with pytest.raises(ValueError):
            uniform_grid(0.0, 1.0, 2)


class TestGeneratorGrid:
    """Tests for the finite-volume generator."""

    @pytest.fixture
    def x(self):
        return uniform_grid(-6.0, 6.0, 601)

    def test_constants_are_invariant(self, x):
        """Test L1 = 0 with zero flux."""
        gen = GeneratorGrid(x, GAUSSIAN)
        npt.assert_allclose(gen.L @ np.ones(len(x)), 0.0, atol=1e-9)

    def test_mass_is_conserved(self, x):
        """Test Σ mass·Lh = 0."""
        gen = GeneratorGrid(x, GAUSSIAN)
        h = np.sin(x) + x ** 2
        assert abs(np.dot(gen.mass, gen.L @ h)) < 1e-9

    def test_dirichlet_rows(self, x):
        """Test the far-field rows are zero."""
        gen = GeneratorGrid(x, GAUSSIAN, boundary="dirichlet")
        dense = gen.L.toarray()
        assert not np.any(dense[0]) and not np.any(dense[-1])

    def test_unknown_boundary(self, x):
        """Test boundaries other than reflecting/dirichlet are rejected."""
        with pytest.raises(ValueError):
            GeneratorGrid(x, GAUSSIAN, boundary="periodic")

    def test_eigenfunction_decay(self, x):
        """Test x decays like e^{−s} under ∂² − x∂."""
        gen = GeneratorGrid(x, GAUSSIAN)
        integral, last = gen.evolve_integral(x.copy(), 2.0, 0.01)
        inside = np.abs(x) <= 3.0
        npt.assert_allclose(last[inside], np.exp(-2.0) * x[inside], atol=1e-3)
        npt.assert_allclose(integral[inside], (1 - np.exp(-2.0)) * x[inside], atol=1e-3)

    def test_poisson_gradient(self, x):
        """Test L g = ½(x² − 1) gives g′ = −x/2."""
        dg, tail = poisson_gradient(x, GAUSSIAN, GAUSSIAN, 20.0, 0.02)
        inside = np.abs(x) <= 3.0
        npt.assert_allclose(dg.values[inside], -0.5 * x[inside], atol=1e-3)
        assert tail < 1e-8


class TestClassicalTransport:
    """Tests for the grid transport map."""

    def test_zero_perturbation(self):
        """Test W = 0 gives the identity map."""
        x = uniform_grid(-4.0, 4.0, 101)
        result = classical_transport_1d(GAUSSIAN, [0.0], x)
        npt.assert_array_equal(result.F.values, x)
        assert result.tail == 0.0

    def test_non_convex_rejected(self):
        """Test a concave source is rejected."""
        x = uniform_grid(-4.0, 4.0, 101)
        with pytest.raises(ValueError):
            classical_transport_1d([0.0, 0.0, -0.5], GAUSSIAN, x)

    def test_short_horizon_tail(self):
        """Test a truncated semigroup integral raises TailBoundExceeded."""
        x = uniform_grid(-6.0, 6.0, 201)
        with pytest.raises(TailBoundExceeded):
            classical_transport_1d(GAUSSIAN, QUARTIC, x, alpha_steps=2, s_horizon=0.2)

    def test_gaussian_scaling(self):
        """Test ½x² → x² is F(x) = x/√2."""
        x = uniform_grid(-6.0, 6.0, 1025)
        result = classical_transport_1d(GAUSSIAN, GAUSSIAN, x, alpha_steps=20)
        inside = np.abs(x) <= 4.0
        npt.assert_allclose(result.F.values[inside], x[inside] / np.sqrt(2.0), atol=1e-3)
        assert result.F.is_monotone()
        assert result.to_dict()["alpha_steps"] == 20

    def test_quantile_oracle(self):
        """Test the quantile map of ½x² → x² is x/√2."""
        mu = GibbsDensity(GAUSSIAN, -8.0, 8.0)
        nu = GibbsDensity([0.0, 0.0, 1.0], -8.0, 8.0)
        T = quantile_transport(mu, nu, uniform_grid(-3.0, 3.0, 61))
        npt.assert_allclose(T.values, T.x / np.sqrt(2.0), atol=1e-5)

    @pytest.mark.slow
    def test_quartic_against_oracle(self):
        """Test ½x² → ½x² + ¼x⁴ agrees with the quantile map within 1e-3."""
        x = uniform_grid(-6.0, 6.0, 2048)
        result = classical_transport_1d(GAUSSIAN, QUARTIC, x)
        mu = GibbsDensity(GAUSSIAN, -6.0, 6.0)
        nu = GibbsDensity(np.polynomial.polynomial.polyadd(GAUSSIAN, QUARTIC), -6.0, 6.0)
        assert oracle_error(result.F, mu, nu) <= 1e-3
        assert result.F.is_monotone()
