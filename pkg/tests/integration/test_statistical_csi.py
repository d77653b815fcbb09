"""
Integration tests for the statistical-CSI outage pipeline
"""

import numpy as np
import pytest

from star_secrecy.channel.sampler import cascaded_forms, sample_channels
from star_secrecy.conic.solver import SolverOptions
from star_secrecy.models.experiment import Metric, SchemeKind
from star_secrecy.models.metrics import secrecy_report
from star_secrecy.models.system import DecodingOrder, RadioConfig, RateConfig, SystemGeometry, Tolerances, User
from star_secrecy.sca.iterate import ElementMask
from star_secrecy.services.baselines import evaluate_scheme
from star_secrecy.services.statistical_csi import extended_ahb, outage_pair, sop_params, two_layer_outage

pytestmark = pytest.mark.integration

RADIO = RadioConfig(num_bs_antennas=2, num_ris_elements=4)
RATES = RateConfig()
TOLERANCES = Tolerances(inner_tol=1e-2, penalty_tol=1e-2, alt_tol=1e-3, penalty_init=1.0,
                        penalty_growth=10.0, max_inner=8, max_outer=4, max_alt=4)
OPTIONS = SolverOptions(max_iterations=150)


@pytest.fixture(scope="module")
def channels():
    return sample_channels(SystemGeometry(), RADIO, 23, (0,))


@pytest.fixture(scope="module")
def outcome(channels):
    return extended_ahb(channels, RADIO, RATES, TOLERANCES, OPTIONS, seed=23, substream=(0,))


class TestExtendedAlternation:
    """Test cases for outage minimization"""

    def test_probabilities_in_range(self, outcome):
        assert all(0.0 <= p <= 1.0 for p in outcome.sop)
        assert outcome.report.max_sop == pytest.approx(outcome.max_sop)

    def test_trace_nonincreasing(self, outcome):
        trace = outcome.trace
        assert 1 <= len(trace) <= TOLERANCES.max_alt
        assert all(b <= a + 1e-6 for a, b in zip(trace, trace[1:]))
        assert trace[-1] == pytest.approx(outcome.max_sop)

    def test_qos_thresholds_met(self, outcome):
        report = outcome.report
        assert report.sinr_iu >= RATES.qos_threshold(User.IU) * (1 - 1e-6)
        assert report.sinr_ou >= RATES.qos_threshold(User.OU) * (1 - 1e-6)
        assert outcome.p_iu <= RADIO.p_max_iu * (1 + 1e-9)
        assert outcome.p_ou <= RADIO.p_max_ou * (1 + 1e-9)

    def test_outage_pair_matches(self, channels, outcome):
        sop = outage_pair(channels, outcome.coefficients, RATES, outcome.p_iu, outcome.p_ou, RADIO.noise_power)
        np.testing.assert_allclose(sop, outcome.sop)

    def test_both_orders_reported(self, outcome):
        assert set(outcome.alternatives) == {"iu-first", "ou-first"}


class TestOutageSchemes:
    """Test cases for comparison schemes under the outage metric"""

    @pytest.mark.parametrize("kind", [SchemeKind.CRIS_NOMA, SchemeKind.STAR_OMA])
    def test_scheme_reports_outage(self, channels, kind):
        report = evaluate_scheme(kind, channels, RADIO, RATES, TOLERANCES, Metric.SOP, OPTIONS,
                                 seed=23, substream=(0,))
        assert report.max_sop is not None
        assert 0.0 <= report.max_sop <= 1.0


class TestSingleElementOracle:
    """Test cases comparing the M=N=1 outage solve with an exhaustive coefficient grid"""

    def test_not_above_coefficient_grid(self):
        radio = RadioConfig(num_bs_antennas=1, num_ris_elements=1, p_max_iu=1.0, p_max_ou=1.0)
        tolerances = Tolerances(inner_tol=1e-9, penalty_tol=1e-3, max_inner=100, max_outer=2, max_alt=1)
        channels = sample_channels(SystemGeometry(), radio, 43, (0,))
        order = DecodingOrder.iu_first()
        strong, weak = order.first, order.second
        noise = radio.noise_power
        powers = {User.IU: radio.p_max_iu, User.OU: radio.p_max_ou}

        result = two_layer_outage(channels, powers[User.IU], powers[User.OU], order, radio, RATES, tolerances,
                                  OPTIONS, seed=43, substream=(0,))
        coefficients = result.iterate.coefficients(ElementMask.full(1))
        solved = max(sop_params(coefficients, channels, u, RATES, powers[u], noise).exponent_scale
                     / RATES.sop_threshold(u) for u in User)
        report = secrecy_report(channels, coefficients, result.iterate.beamformer(), powers[User.IU],
                                powers[User.OU], order, noise)
        assert report.sinr_iu >= RATES.qos_threshold(User.IU) * (1 - 1e-6)
        assert report.sinr_ou >= RATES.qos_threshold(User.OU) * (1 - 1e-6)

        cascades = cascaded_forms(channels)
        legit = {u: abs(cascades.legitimate(u)[0, 0]) ** 2 for u in User}
        large = channels.large_scale
        unit_score = {u: powers[u] * large.eve * large.user(u) * abs(channels.small_scale.user(u)[0]) ** 2
                      / (noise * RATES.sop_threshold(u)) for u in User}
        axis = np.linspace(0.0, 1.0, 1001)
        beta = {User.IU: axis[:, np.newaxis], User.OU: axis[np.newaxis, :]}
        received = {u: powers[u] * legit[u] * beta[u] for u in User}
        score = np.maximum(unit_score[User.IU] * beta[User.IU], unit_score[User.OU] * beta[User.OU])
        feasible = ((beta[User.IU] + beta[User.OU] <= 1.0 + 1e-12)
                    & (received[strong] >= received[weak])
                    & (received[strong] >= RATES.qos_threshold(strong) * (received[weak] + noise))
                    & (received[weak] >= RATES.qos_threshold(weak) * noise))

        assert feasible.any()
        assert solved <= score[feasible].min() * (1 + 1e-3)


DESK_RADIO = RadioConfig(num_bs_antennas=4, num_ris_elements=8)
DESK_TOLERANCES = Tolerances(alt_tol=1e-4, max_alt=30)
DESK_SEED = 103
DESK_RUNS = 10


@pytest.fixture(scope="module")
def desk_outcomes():
    outcomes = []
    for index in range(DESK_RUNS):
        channels = sample_channels(SystemGeometry(), DESK_RADIO, DESK_SEED, (index,))
        for order in DecodingOrder.both():
            outcomes.append(extended_ahb(channels, DESK_RADIO, RATES, DESK_TOLERANCES, seed=DESK_SEED,
                                         substream=(index,), orders=(order,)))
    return outcomes


@pytest.mark.slow
class TestDeskScaleAlternation:
    """Test cases for the outage alternation on ten N=8, M=4 realizations"""

    def test_no_alternation_rejected(self, desk_outcomes):
        for outcome in desk_outcomes:
            assert outcome.rejected == 0
            raw = outcome.raw_trace
            assert all(b <= a + 1e-6 for a, b in zip(raw, raw[1:]))
            assert raw == outcome.trace

    def test_converges_within_cap(self, desk_outcomes):
        for outcome in desk_outcomes:
            trace = outcome.trace
            assert outcome.converged
            assert 2 <= len(trace) <= DESK_TOLERANCES.max_alt
            assert abs(trace[-1] - trace[-2]) <= DESK_TOLERANCES.alt_tol
