"""
Free Gibbs Transport - Test Fixtures

Shared pytest fixtures: potentials, families, small ensembles and
random Hermitian tuples. Full-size acceptance runs are marked ``slow``.
"""
import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from core.config import ChainConfig  # noqa: E402
from core.rng import stream  # noqa: E402
from freesde import PotentialFamily  # noqa: E402
from matrep import random_tuple  # noqa: E402
from ncalg import PotentialSpec  # noqa: E402
from sampler import sample_ensemble  # noqa: E402


@pytest.fixture
def rng():
    """Deterministic generator for test data."""
    return stream(20240601, 7)


@pytest.fixture
def gaussian_spec():
    """V = ½x²."""
    return PotentialSpec.quadratic(1, 1)


@pytest.fixture
def quartic_spec():
    """V = ½x² + ¼x⁴, certified with c = 1."""
    return PotentialSpec.one_variable(quad=1, nu=(0, 0, 1), mu=1)


@pytest.fixture
def quadratic_family():
    """V = ½x², W = ½x², so V + W = x² (c = 2)."""
    return PotentialFamily.quadratic(2.0, 1)


@pytest.fixture
def quartic_family(gaussian_spec):
    """V = ½x², W = ¼x⁴."""
    W = PotentialSpec.one_variable(quad=0, nu=(0, 0, 1), mu=1)
    return PotentialFamily(gaussian_spec, W)


@pytest.fixture
def random_pair(rng):
    """Two-letter Hermitian tuple at N = 5."""
    return random_tuple(rng, 2, 5).mats


@pytest.fixture
def semicircle_ensemble(gaussian_spec):
    """Small GUE ensemble from the MALA sampler."""
    cfg = ChainConfig(
        potential=gaussian_spec, N=16, step=0.2, burnin=100, thin=5, count=40, chains=2, seed=3
    )
    return sample_ensemble(cfg)


@pytest.fixture
def gue_samples():
    """Exact GUE draws (count, 1, N, N) with E τ̂(X²) = 1."""

    def draw(count: int, N: int, seed: int = 0) -> np.ndarray:
        gen = stream(seed, 99)
        return np.stack([random_tuple(gen, 1, N).mats for _ in range(count)])

    return draw
