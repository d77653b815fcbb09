"""
Unit tests for the closed-form power policies
"""

import math

import numpy as np
import pytest

from star_secrecy.channel.sampler import channel_rng
from star_secrecy.models.system import DecodingOrder, DomainError, RateConfig, User
from star_secrecy.sca.iterate import DegenerateBeamformingError
from star_secrecy.services.full_csi import optimal_power_full
from star_secrecy.services.statistical_csi import optimal_power_stat

pytestmark = pytest.mark.unit

GAINS = {User.IU: 2.0, User.OU: 1.0}
EVE_GAINS = {User.IU: 0.05, User.OU: 0.02}
NOISE = 1.0
CAP = 10.0
RANDOM_INSTANCES = 50
GRID_POINTS = 400


def min_secrecy(p, order):
    """min over users of [log2(1 + SINR) - log2(1 + eavesdropper SNR)]⁺"""
    strong, weak = order.first, order.second
    sinr = {
        strong: p[strong] * GAINS[strong] / (p[weak] * GAINS[weak] + NOISE),
        weak: p[weak] * GAINS[weak] / NOISE,
    }
    values = [max(0.0, math.log2(1 + sinr[u]) - math.log2(1 + p[u] * EVE_GAINS[u] / NOISE)) for u in User]
    return min(values)


def random_instance(index):
    """Gains, eavesdropper gains, caps and noise of one seeded instance"""
    rng = channel_rng(2024, 7, index)
    gains = {user: float(g) for user, g in zip(User, rng.uniform(0.1, 5.0, 2))}
    eve = {user: gains[user] * float(rng.uniform(0.0, 1.2)) for user in User}
    caps = {user: float(c) for user, c in zip(User, rng.uniform(0.5, 20.0, 2))}
    return gains, eve, caps, float(rng.uniform(0.5, 2.0))


def min_secrecy_grid(p_strong, p_weak, gains, eve, noise, order):
    """Vectorized min secrecy capacity over broadcastable power arrays"""
    strong, weak = order.first, order.second
    sinr_strong = p_strong * gains[strong] / (p_weak * gains[weak] + noise)
    sinr_weak = p_weak * gains[weak] / noise
    secrecy_strong = np.log2(1 + sinr_strong) - np.log2(1 + p_strong * eve[strong] / noise)
    secrecy_weak = np.log2(1 + sinr_weak) - np.log2(1 + p_weak * eve[weak] / noise)
    return np.maximum(np.minimum(secrecy_strong, secrecy_weak), 0.0)


class TestFullCsiPower:
    """Test cases for the full-CSI power policy"""

    @pytest.mark.parametrize("order", DecodingOrder.both(), ids=lambda o: o.label)
    def test_beats_grid(self, order):
        """Test the policy against a grid over both powers under the SIC condition"""
        allocation = optimal_power_full(GAINS[User.IU], GAINS[User.OU], EVE_GAINS[User.IU],
                                        EVE_GAINS[User.OU], NOISE, CAP, CAP, order)
        chosen = {u: allocation.of(u) for u in User}
        strong, weak = order.first, order.second
        assert chosen[weak] * GAINS[weak] <= chosen[strong] * GAINS[strong] * (1 + 1e-9)
        assert all(0.0 <= chosen[u] <= CAP * (1 + 1e-12) for u in User)

        best_grid = 0.0
        for p_strong in np.linspace(0.0, CAP, 41):
            for p_weak in np.linspace(0.0, CAP, 201):
                if p_weak * GAINS[weak] > p_strong * GAINS[strong]:
                    continue
                best_grid = max(best_grid, min_secrecy({strong: p_strong, weak: p_weak}, order))
        assert min_secrecy(chosen, order) >= best_grid - 1e-9

    @pytest.mark.parametrize("index", range(RANDOM_INSTANCES))
    def test_random_instance_beats_dense_grid(self, index):
        gains, eve, caps, noise = random_instance(index)
        order = tuple(DecodingOrder.both())[index % 2]
        strong, weak = order.first, order.second
        allocation = optimal_power_full(gains[User.IU], gains[User.OU], eve[User.IU], eve[User.OU],
                                        noise, caps[User.IU], caps[User.OU], order)
        chosen = {u: allocation.of(u) for u in User}
        assert chosen[weak] * gains[weak] <= chosen[strong] * gains[strong] * (1 + 1e-9)
        assert all(0.0 <= chosen[u] <= caps[u] * (1 + 1e-12) for u in User)

        p_strong = np.linspace(0.0, caps[strong], GRID_POINTS)[:, np.newaxis]
        p_weak = np.linspace(0.0, caps[weak], GRID_POINTS)[np.newaxis, :]
        grid = min_secrecy_grid(p_strong, p_weak, gains, eve, noise, order)
        grid = np.where(p_weak * gains[weak] <= p_strong * gains[strong], grid, 0.0)
        value = min_secrecy_grid(chosen[strong], chosen[weak], gains, eve, noise, order)
        assert value >= grid.max() - 1e-3

    def test_first_decoded_user_at_cap(self):
        order = DecodingOrder.iu_first()
        allocation = optimal_power_full(2.0, 1.0, 0.05, 0.02, NOISE, 7.0, CAP, order)
        assert allocation.p_iu == pytest.approx(7.0)

    def test_zero_legitimate_gain(self):
        with pytest.raises(DegenerateBeamformingError):
            optimal_power_full(0.0, 1.0, 0.1, 0.1, NOISE, CAP, CAP, DecodingOrder.iu_first())

    def test_negative_gain_rejected(self):
        with pytest.raises(DomainError):
            optimal_power_full(1.0, 1.0, -0.1, 0.1, NOISE, CAP, CAP, DecodingOrder.iu_first())


class TestStatisticalCsiPower:
    """Test cases for the statistical-CSI power policy"""

    @pytest.mark.parametrize("order", DecodingOrder.both(), ids=lambda o: o.label)
    def test_thresholds_met_with_least_power(self, order):
        rates = RateConfig()
        noise = 1e-3
        gains = {User.IU: 0.4, User.OU: 0.9}
        allocation = optimal_power_stat(gains[User.IU], gains[User.OU], noise, rates, CAP, CAP, order)
        p = {u: allocation.of(u) for u in User}
        strong, weak = order.first, order.second

        def sinrs(powers):
            return {
                strong: powers[strong] * gains[strong] / (powers[weak] * gains[weak] + noise),
                weak: powers[weak] * gains[weak] / noise,
            }

        achieved = sinrs(p)
        assert allocation.feasible
        for user in User:
            assert achieved[user] >= rates.qos_threshold(user) * (1 - 1e-9)
        assert achieved[weak] == pytest.approx(rates.qos_threshold(weak))
        assert p[strong] * gains[strong] >= p[weak] * gains[weak] * (1 - 1e-12)

        reduced = dict(p)
        reduced[weak] *= 0.99
        assert sinrs(reduced)[weak] < rates.qos_threshold(weak)
        reduced = dict(p)
        reduced[strong] *= 0.99
        violated = (sinrs(reduced)[strong] < rates.qos_threshold(strong)
                    or reduced[strong] * gains[strong] < p[weak] * gains[weak])
        assert violated

    @pytest.mark.parametrize("index", range(RANDOM_INSTANCES))
    def test_random_instance_is_minimal(self, index):
        """Test binding constraints and that a 1% cut of either power breaks feasibility"""
        rng = channel_rng(2024, 8, index)
        rates = RateConfig(qos_mode=("redundancy", "codeword")[index % 2])
        noise = float(rng.uniform(1e-4, 1e-2))
        gains = {user: float(g) for user, g in zip(User, rng.uniform(0.05, 5.0, 2))}
        order = tuple(DecodingOrder.both())[(index // 2) % 2]
        strong, weak = order.first, order.second
        allocation = optimal_power_stat(gains[User.IU], gains[User.OU], noise, rates, 1e3, 1e3, order)
        p = {u: allocation.of(u) for u in User}
        assert allocation.feasible

        def slacks(powers):
            received = {u: powers[u] * gains[u] for u in User}
            return {
                "strong": received[strong] / (received[weak] + noise) / rates.qos_threshold(strong) - 1.0,
                "weak": received[weak] / noise / rates.qos_threshold(weak) - 1.0,
                "sic": received[strong] / received[weak] - 1.0,
            }

        at_policy = slacks(p)
        assert min(at_policy.values()) >= -1e-9
        assert at_policy["weak"] == pytest.approx(0.0, abs=1e-9)
        assert min(at_policy["strong"], at_policy["sic"]) == pytest.approx(0.0, abs=1e-9)
        for user in User:
            reduced = dict(p)
            reduced[user] *= 0.99
            assert min(slacks(reduced).values()) < 0.0

    def test_cap_violation_reported(self):
        allocation = optimal_power_stat(1e-6, 1e-6, 1.0, RateConfig(), 1e-3, 1e-3, DecodingOrder.iu_first())
        assert not allocation.feasible

    def test_zero_gain(self):
        with pytest.raises(DegenerateBeamformingError):
            optimal_power_stat(0.0, 1.0, 1.0, RateConfig(), CAP, CAP, DecodingOrder.ou_first())
