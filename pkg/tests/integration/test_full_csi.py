"""
Integration tests for the full-CSI secrecy pipeline

These run the complete SCA loop through the interior-point backend on small surfaces.
"""

import numpy as np
import pytest

from star_secrecy.channel.sampler import cascaded_forms, sample_channels
from star_secrecy.conic.solver import SolverOptions, SolverStatus, solve
from star_secrecy.models.metrics import secrecy_report
from star_secrecy.models.system import (
    DecodingOrder,
    DomainError,
    RadioConfig,
    SystemGeometry,
    Tolerances,
    User,
)
from star_secrecy.sca.iterate import ElementMask, build_links, initial_iterate
from star_secrecy.services.baselines import transmission_rate_no_eve
from star_secrecy.services.full_csi import ahb_solve, build_secrecy_program, two_layer_solve

pytestmark = pytest.mark.integration

RADIO = RadioConfig(num_bs_antennas=2, num_ris_elements=4)
TOLERANCES = Tolerances(inner_tol=1e-2, penalty_tol=1e-2, alt_tol=1e-3, penalty_init=1.0,
                        penalty_growth=10.0, max_inner=8, max_outer=4, max_alt=4)
OPTIONS = SolverOptions(max_iterations=150)


@pytest.fixture(scope="module")
def channels():
    return sample_channels(SystemGeometry(), RADIO, 11, (0,))


@pytest.fixture(scope="module")
def outcome(channels):
    return ahb_solve(channels, RADIO, TOLERANCES, OPTIONS, seed=11, substream=(0,))


class TestAlternatingOptimization:
    """Test cases for the alternating beamforming and power loop"""

    def test_operating_point(self, outcome):
        assert outcome.objective >= 0.0
        assert np.linalg.norm(outcome.w) == pytest.approx(1.0, abs=1e-9)
        energy = outcome.coefficients.beta_t + outcome.coefficients.beta_r
        assert np.all(energy <= 1.0 + 1e-6)
        assert 0.0 <= outcome.p_iu <= RADIO.p_max_iu * (1 + 1e-9)
        assert 0.0 <= outcome.p_ou <= RADIO.p_max_ou * (1 + 1e-9)

    def test_trace_nondecreasing(self, outcome):
        """Test that every accepted alternation improves the minimum secrecy capacity"""
        trace = outcome.trace
        assert 1 <= len(trace) <= TOLERANCES.max_alt
        assert all(b >= a - 1e-6 for a, b in zip(trace, trace[1:]))
        assert trace[-1] == pytest.approx(outcome.objective)

    def test_both_orders_reported(self, outcome):
        assert set(outcome.alternatives) == {"iu-first", "ou-first"}
        finite = [v for v in outcome.alternatives.values() if v is not None]
        assert outcome.objective == pytest.approx(max(finite))

    def test_report_matches_operating_point(self, channels, outcome):
        report = secrecy_report(channels, outcome.coefficients, outcome.w, outcome.p_iu, outcome.p_ou,
                                outcome.order, RADIO.noise_power)
        assert report.min_secrecy == pytest.approx(outcome.report.min_secrecy, rel=1e-9)

    def test_rate_without_eavesdropper(self, channels):
        rate = transmission_rate_no_eve(channels, RADIO, TOLERANCES, OPTIONS, seed=11, substream=(0,))
        assert rate > 0.0


class TestTwoLayerLoop:
    """Test cases for one beamforming/coefficient round"""

    def test_rank_ratios_reported(self, channels):
        result = two_layer_solve(channels, RADIO.p_max_iu, RADIO.p_max_ou, DecodingOrder.iu_first(),
                                 RADIO, TOLERANCES, OPTIONS, seed=11, substream=(0,))
        assert result.rounds >= 1
        assert set(result.rank_ratios) == {"w", "t", "r"}
        assert all(0.0 < ratio <= 1.0 + 1e-9 for ratio in result.rank_ratios.values())

    def test_partitioned_surface(self, channels):
        mask = ElementMask.partition(RADIO.num_ris_elements)
        result = two_layer_solve(channels, RADIO.p_max_iu, RADIO.p_max_ou, DecodingOrder.ou_first(),
                                 RADIO, TOLERANCES, OPTIONS, mask, seed=11, substream=(0,))
        coefficients = result.iterate.coefficients(mask)
        assert np.all(coefficients.beta_r[: RADIO.num_ris_elements // 2] == 0.0)
        assert np.all(coefficients.beta_t[RADIO.num_ris_elements // 2:] == 0.0)


class TestSecrecyProgram:
    """Test cases for the convex restriction around a starting point"""

    def test_restriction_solves(self, channels):
        order = DecodingOrder.iu_first()
        links = build_links(channels, RADIO.p_max_iu, RADIO.p_max_ou, RADIO.noise_power)
        initial = initial_iterate(links, order, 1.0, seed=11, substream=(0,))
        program = build_secrecy_program(channels, initial, RADIO.p_max_iu, RADIO.p_max_ou, order,
                                        mu=0.0, tau=1.0, noise_power=RADIO.noise_power)
        assert program.cone_counts()["psd"] == 3
        solution = solve(program, OPTIONS)
        assert solution.status in (SolverStatus.OPTIMAL, SolverStatus.MAX_ITERATIONS)
        assert solution.x is not None

    def test_negative_ratio_rejected(self, channels):
        order = DecodingOrder.iu_first()
        links = build_links(channels, RADIO.p_max_iu, RADIO.p_max_ou, RADIO.noise_power)
        initial = initial_iterate(links, order, 1.0, seed=11, substream=(0,))
        with pytest.raises(DomainError):
            build_secrecy_program(channels, initial, RADIO.p_max_iu, RADIO.p_max_ou, order,
                                  mu=-1.0, tau=1.0, noise_power=RADIO.noise_power)


class TestSingleElementOracle:
    """Test cases comparing the M=N=1 solve with an exhaustive coefficient grid"""

    def test_not_below_coefficient_grid(self):
        radio = RadioConfig(num_bs_antennas=1, num_ris_elements=1, p_max_iu=1.0, p_max_ou=1.0)
        tolerances = Tolerances(inner_tol=1e-9, penalty_tol=1e-3, max_inner=100, max_outer=2, max_alt=1)
        channels = sample_channels(SystemGeometry(), radio, 41, (0,))
        order = DecodingOrder.iu_first()
        strong, weak = order.first, order.second
        noise = radio.noise_power
        powers = {User.IU: radio.p_max_iu, User.OU: radio.p_max_ou}

        result = two_layer_solve(channels, powers[User.IU], powers[User.OU], order, radio, tolerances,
                                 OPTIONS, seed=41, substream=(0,))
        coefficients = result.iterate.coefficients(ElementMask.full(1))
        solved = secrecy_report(channels, coefficients, result.iterate.beamformer(), powers[User.IU],
                                powers[User.OU], order, noise).min_secrecy

        # phases drop out with one antenna and one element
        cascades = cascaded_forms(channels)
        legit = {u: abs(cascades.legitimate(u)[0, 0]) ** 2 for u in User}
        eve = {u: abs(cascades.eavesdropper(u)[0]) ** 2 for u in User}
        axis = np.linspace(0.0, 1.0, 1001)
        beta = {User.IU: axis[:, np.newaxis], User.OU: axis[np.newaxis, :]}
        received = {u: powers[u] * legit[u] * beta[u] for u in User}
        leaked = {u: powers[u] * eve[u] * beta[u] / noise for u in User}
        secrecy_strong = np.log2(1 + received[strong] / (received[weak] + noise)) - np.log2(1 + leaked[strong])
        secrecy_weak = np.log2(1 + received[weak] / noise) - np.log2(1 + leaked[weak])
        grid = np.maximum(np.minimum(secrecy_strong, secrecy_weak), 0.0)
        feasible = (beta[User.IU] + beta[User.OU] <= 1.0 + 1e-12) & (received[strong] >= received[weak])

        assert grid[feasible].max() > 0.0
        assert solved >= grid[feasible].max() - 1e-3


DESK_RADIO = RadioConfig(num_bs_antennas=4, num_ris_elements=8)
DESK_TOLERANCES = Tolerances(alt_tol=1e-4, max_alt=30)
DESK_SEED = 101
DESK_RUNS = 10


@pytest.fixture(scope="module")
def desk_runs():
    """Per realization, the outcome of each decoding order run on its own"""
    runs = []
    for index in range(DESK_RUNS):
        channels = sample_channels(SystemGeometry(), DESK_RADIO, DESK_SEED, (index,))
        runs.append({
            order.label: ahb_solve(channels, DESK_RADIO, DESK_TOLERANCES, seed=DESK_SEED,
                                   substream=(index,), orders=(order,))
            for order in DecodingOrder.both()
        })
    return runs


def better_order(run):
    return max(run.values(), key=lambda outcome: outcome.objective)


@pytest.mark.slow
class TestDeskScaleAlternation:
    """Test cases for the alternating loop on ten N=8, M=4 realizations"""

    def test_no_alternation_rejected(self, desk_runs):
        for run in desk_runs:
            for outcome in run.values():
                assert outcome.rejected == 0
                raw = outcome.raw_trace
                assert all(b >= a - 1e-6 for a, b in zip(raw, raw[1:]))
                assert raw == outcome.trace

    def test_converges_within_cap(self, desk_runs):
        for run in desk_runs:
            for outcome in run.values():
                trace = outcome.trace
                assert outcome.converged
                assert 2 <= len(trace) <= DESK_TOLERANCES.max_alt
                assert abs(trace[-1] - trace[-2]) <= DESK_TOLERANCES.alt_tol

    def test_rank_one_on_most_runs(self, desk_runs):
        """Test λ1/Σλ ≥ 0.999 for W, U_t and U_r on at least 9 of 10 realizations"""
        mask = ElementMask.full(DESK_RADIO.num_ris_elements)
        outcomes = [better_order(run) for run in desk_runs]
        ratios = [min(outcome.iterate.rank_ratios(mask).values()) for outcome in outcomes]
        assert sum(ratio >= 0.999 for ratio in ratios) >= 9
        for outcome, ratio in zip(outcomes, ratios):
            if ratio < 0.999:
                assert outcome.degraded
