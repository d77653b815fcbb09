"""
Unit tests for the comparison schemes
"""

import numpy as np
import pytest

from star_secrecy.models.coefficients import StarCoefficients
from star_secrecy.models.experiment import Metric, SchemeKind
from star_secrecy.models.system import DomainError, RateConfig
from star_secrecy.services.baselines import (
    element_partition,
    evaluate_scheme,
    optimize_fixed_coefficients,
    quantize_coefficients,
    random_coefficients,
)

from ..conftest import random_coefficients_uniform

pytestmark = pytest.mark.unit


def circular_distance(a, b):
    diff = np.mod(a - b, 2.0 * np.pi)
    return np.minimum(diff, 2.0 * np.pi - diff)


class TestRandomCoefficients:
    """Test cases for randomly drawn coefficients"""

    def test_energy_split(self):
        coefficients = random_coefficients(16, seed=3, substream=(0, 1))
        np.testing.assert_allclose(coefficients.beta_t + coefficients.beta_r, 1.0)
        assert np.all((coefficients.theta_t >= 0) & (coefficients.theta_t < 2 * np.pi))

    def test_deterministic(self):
        first = random_coefficients(8, seed=3, substream=(2, 1))
        second = random_coefficients(8, seed=3, substream=(2, 1))
        np.testing.assert_array_equal(first.beta_t, second.beta_t)
        np.testing.assert_array_equal(first.theta_r, second.theta_r)

    def test_empty_surface_rejected(self):
        with pytest.raises(DomainError):
            random_coefficients(0, seed=1)


class TestQuantization:
    """Test cases for coefficient quantization"""

    @pytest.mark.parametrize("bits", [1, 2, 3, 4])
    def test_grid_and_energy(self, rng, bits):
        coefficients = random_coefficients_uniform(rng, 32)
        quantized = quantize_coefficients(coefficients, bits)
        levels = 2 ** bits
        steps = quantized.beta_t * (levels - 1)
        np.testing.assert_allclose(steps, np.round(steps), atol=1e-9)
        assert np.all(quantized.beta_t + quantized.beta_r <= 1.0 + 1e-9)
        assert np.all(circular_distance(quantized.theta_t, coefficients.theta_t) <= np.pi / levels + 1e-12)
        assert np.all(circular_distance(quantized.theta_r, coefficients.theta_r) <= np.pi / levels + 1e-12)

    def test_energy_repair(self):
        """Test that an even split pushed over budget loses a step on one side"""
        coefficients = StarCoefficients(beta_t=[0.5], beta_r=[0.5], theta_t=[0.0], theta_r=[0.0])
        quantized = quantize_coefficients(coefficients, 2)
        assert quantized.beta_t[0] == pytest.approx(1.0 / 3.0)
        assert quantized.beta_r[0] == pytest.approx(2.0 / 3.0)

    def test_phase_wraps_to_zero(self):
        coefficients = StarCoefficients(beta_t=[1.0], beta_r=[0.0], theta_t=[2 * np.pi - 0.01], theta_r=[0.0])
        assert quantize_coefficients(coefficients, 3).theta_t[0] == pytest.approx(0.0)

    def test_zero_bits_rejected(self, rng):
        with pytest.raises(DomainError):
            quantize_coefficients(random_coefficients_uniform(rng, 4), 0)


class TestElementPartition:
    """Test cases for the conventional-RIS element split"""

    @pytest.mark.parametrize("n", [2, 5, 8])
    def test_floor_and_ceil(self, n):
        mask = element_partition(n)
        assert len(mask.transmit) == n // 2
        assert len(mask.reflect) == n - n // 2
        assert not set(mask.transmit) & set(mask.reflect)

    def test_single_element_rejected(self):
        with pytest.raises(DomainError):
            element_partition(1)


class TestFixedCoefficients:
    """Test cases for beamforming and power with fixed coefficients"""

    def test_secrecy_report(self, desk_channels, desk_radio, rates, rng):
        coefficients = random_coefficients_uniform(rng, 8)
        report = optimize_fixed_coefficients(desk_channels, coefficients, desk_radio, rates)
        assert report.min_secrecy >= 0.0
        assert report.order in ("iu-first", "ou-first")
        assert report.p_iu <= desk_radio.p_max_iu * (1 + 1e-9)
        assert report.p_ou <= desk_radio.p_max_ou * (1 + 1e-9)

    def test_rate_without_eavesdropper(self, desk_channels, desk_radio, rates, rng):
        coefficients = random_coefficients_uniform(rng, 8)
        rate = optimize_fixed_coefficients(desk_channels, coefficients, desk_radio, rates,
                                           Metric.TRANSMISSION_RATE)
        assert rate.eve_snr_iu == 0.0
        assert rate.eve_snr_ou == 0.0
        assert rate.min_secrecy > 0.0

    def test_random_phase_scheme_deterministic(self, desk_channels, desk_radio, fast_tolerances):
        first = evaluate_scheme(SchemeKind.RANDOM_PHASE, desk_channels, desk_radio, RateConfig(),
                                fast_tolerances, seed=9, substream=(0,))
        second = evaluate_scheme(SchemeKind.RANDOM_PHASE, desk_channels, desk_radio, RateConfig(),
                                 fast_tolerances, seed=9, substream=(0,))
        assert first == second
