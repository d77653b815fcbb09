"""
Unit tests for the secrecy outage probability
"""

import math

import numpy as np
import pytest

from star_secrecy.channel.sampler import LargeScaleGains, channel_rng, sample_channels
from star_secrecy.models.coefficients import StarCoefficients
from star_secrecy.models.system import DomainError, RadioConfig, RateConfig, User
from star_secrecy.services.statistical_csi import (
    MIN_MC_TRIALS,
    SopParams,
    sop_closed_form,
    sop_monte_carlo,
    sop_params,
)

from ..conftest import random_coefficients_uniform

pytestmark = pytest.mark.unit

UNIT_GAINS = LargeScaleGains(1.0, 1.0, 1.0, 1.0)


@pytest.fixture
def coefficients():
    return StarCoefficients(
        beta_t=[0.2, 0.5, 0.9, 0.4],
        beta_r=[0.8, 0.5, 0.1, 0.6],
        theta_t=[0.0, 1.0, 2.0, 3.0],
        theta_r=[0.5, 1.5, 2.5, 3.5],
    )


@pytest.fixture
def user_channel():
    return np.array([0.3 + 0.4j, -1.0, 0.2j, 0.7 - 0.1j])


class TestClosedForm:
    """Test cases for the closed-form outage probability"""

    def test_exponential_formula(self):
        params = SopParams(effective_gain=2.0, large_scale_product=0.5, rate_gap=1.0, power=3.0, noise_power=1.5)
        assert sop_closed_form(params) == pytest.approx(math.exp(-1.0 * 1.5 / (3.0 * 0.5 * 2.0)))

    def test_no_redundancy_always_leaks(self):
        params = SopParams(effective_gain=2.0, large_scale_product=1.0, rate_gap=0.0, power=1.0, noise_power=1.0)
        assert sop_closed_form(params) == 1.0

    def test_silent_eavesdropper_never_leaks(self):
        params = SopParams(effective_gain=0.0, large_scale_product=1.0, rate_gap=1.0, power=1.0, noise_power=1.0)
        assert sop_closed_form(params) == 0.0

    def test_negative_input_rejected(self):
        with pytest.raises(DomainError):
            SopParams(effective_gain=1.0, large_scale_product=1.0, rate_gap=-0.1, power=1.0, noise_power=1.0)

    def test_params_from_channels(self, small_channels, coefficients):
        rates = RateConfig()
        params = sop_params(coefficients, small_channels, User.OU, rates, 0.1, 1e-12)
        expected_gain = np.sum(coefficients.beta_r * np.abs(small_channels.small_scale.h_os) ** 2)
        assert params.effective_gain == pytest.approx(expected_gain)
        assert params.large_scale_product == pytest.approx(
            small_channels.large_scale.eve * small_channels.large_scale.ou)
        assert params.rate_gap == pytest.approx(rates.rate_gap(User.OU))

    def test_decreasing_in_distance(self, geometry, small_radio, coefficients):
        """Test that a farther eavesdropper leaks less often"""
        values = []
        for distance in (5.0, 20.0, 80.0):
            channels = sample_channels(geometry.with_eve_distance(distance), small_radio, 3, (0,))
            params = sop_params(coefficients, channels, User.IU, RateConfig(), small_radio.p_max_iu,
                                small_radio.noise_power)
            values.append(sop_closed_form(params))
        assert values[0] >= values[1] >= values[2]


class TestMonteCarlo:
    """Test cases for the empirical outage estimate"""

    def test_agrees_with_closed_form(self, coefficients, user_channel):
        rates = RateConfig()
        noise = 1e-3
        gain = float(np.sum(coefficients.beta_t * np.abs(user_channel) ** 2))
        # exponent of about one puts the probability near 1/e
        power = rates.sop_threshold(User.IU) * noise / gain
        closed = sop_closed_form(SopParams(gain, 1.0, rates.rate_gap(User.IU), power, noise))
        estimate = sop_monte_carlo(coefficients, User.IU, user_channel, UNIT_GAINS, rates, power, noise,
                                   50000, seed=17, substream=(0, 2))
        assert closed == pytest.approx(math.exp(-1.0))
        assert abs(estimate.estimate - closed) <= max(0.01, 3 * estimate.stderr)
        assert estimate.trials == 50000

    @pytest.mark.slow
    @pytest.mark.parametrize("index", range(50))
    def test_random_configurations(self, geometry, index):
        """Test closed form against 10^5 eavesdropper draws over random surfaces and placements"""
        rng = channel_rng(31, 5, index)
        num_elements = (8, 16)[index % 2]
        user = (User.IU, User.OU)[(index // 2) % 2]
        radio = RadioConfig(num_bs_antennas=2, num_ris_elements=num_elements)
        placement = geometry.with_eve_distance(float(rng.uniform(5.0, 60.0)))
        channels = sample_channels(placement, radio, 31, (index,))
        coefficients = random_coefficients_uniform(rng, num_elements)
        rates = RateConfig()
        unit = sop_params(coefficients, channels, user, rates, 1.0, radio.noise_power)
        # exponent between 0.2 and 3 keeps the probability away from 0 and 1
        exponent = float(rng.uniform(0.2, 3.0))
        power = unit.threshold * radio.noise_power / (unit.large_scale_product * unit.effective_gain * exponent)

        closed = sop_closed_form(sop_params(coefficients, channels, user, rates, power, radio.noise_power))
        estimate = sop_monte_carlo(coefficients, user, channels.small_scale.user(user), channels.large_scale,
                                   rates, power, radio.noise_power, 100_000, seed=31, substream=(index, 9))
        assert closed == pytest.approx(math.exp(-exponent), rel=1e-9)
        assert abs(estimate.estimate - closed) <= max(0.01, 3 * estimate.stderr)

    def test_deterministic(self, coefficients, user_channel):
        args = (coefficients, User.OU, user_channel, UNIT_GAINS, RateConfig(), 1e-2, 1e-3, MIN_MC_TRIALS)
        first = sop_monte_carlo(*args, seed=4, substream=(1, 3))
        second = sop_monte_carlo(*args, seed=4, substream=(1, 3))
        assert first == second

    def test_too_few_trials(self, coefficients, user_channel):
        with pytest.raises(DomainError):
            sop_monte_carlo(coefficients, User.IU, user_channel, UNIT_GAINS, RateConfig(), 1.0, 1.0,
                            MIN_MC_TRIALS - 1, seed=0)
