"""
Pytest configuration and shared fixtures for star_secrecy tests
"""

import numpy as np
import pytest
import yaml

from star_secrecy.channel.sampler import sample_channels
from star_secrecy.conic.solver import SolverOptions
from star_secrecy.models.coefficients import StarCoefficients
from star_secrecy.models.system import (
    RadioConfig,
    RateConfig,
    SystemGeometry,
    Tolerances,
    dbm_to_watts,
)


# Configuration fixtures
@pytest.fixture
def geometry():
    """Default node placement"""
    return SystemGeometry()


@pytest.fixture
def small_radio():
    """N=4 elements, M=2 antennas at the default budgets"""
    return RadioConfig(num_bs_antennas=2, num_ris_elements=4)


@pytest.fixture
def desk_radio():
    """N=8 elements, M=4 antennas"""
    return RadioConfig(num_bs_antennas=4, num_ris_elements=8)


@pytest.fixture
def rates():
    """Default constant-rate wiretap code"""
    return RateConfig()


@pytest.fixture
def fast_tolerances():
    """Loose thresholds and small caps for quick pipeline runs"""
    return Tolerances(
        inner_tol=1e-2,
        penalty_tol=1e-2,
        alt_tol=1e-3,
        penalty_init=1.0,
        penalty_growth=10.0,
        max_inner=8,
        max_outer=4,
        max_alt=4,
    )


@pytest.fixture
def solver_options():
    return SolverOptions(max_iterations=150)


# Channel fixtures
@pytest.fixture
def small_channels(geometry, small_radio):
    """One N=4, M=2 realization"""
    return sample_channels(geometry, small_radio, 11, (0,))


@pytest.fixture
def desk_channels(geometry, desk_radio):
    """One N=8, M=4 realization"""
    return sample_channels(geometry, desk_radio, 11, (0,))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_psd(rng, size, rank=None):
    """Random Hermitian PSD matrix of the given rank (full rank by default)"""
    rank = rank or size
    factor = rng.standard_normal((size, rank)) + 1j * rng.standard_normal((size, rank))
    return factor @ factor.conj().T


def random_coefficients_uniform(rng, size):
    split = rng.uniform(0.0, 1.0, size)
    return StarCoefficients(
        beta_t=split,
        beta_r=1.0 - split,
        theta_t=rng.uniform(0.0, 2.0 * np.pi, size),
        theta_r=rng.uniform(0.0, 2.0 * np.pi, size),
    )


# File fixtures
@pytest.fixture
def config_file(tmp_path):
    """Small YAML configuration with an env-substituted element count"""
    data = {
        "radio": {
            "num_bs_antennas": 2,
            "num_ris_elements": "${TEST_STAR_ELEMENTS:4}",
            "p_max_iu_dbm": 10.0,
            "p_max_ou_dbm": 10.0,
        },
        "experiment": {"trials": 3, "seed": 5, "mc_trials": 2000},
        "logging": {"level": "WARNING", "format": "console"},
    }
    path = tmp_path / "test.yaml"
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return path


@pytest.fixture
def noise_power():
    return dbm_to_watts(-115.0)
