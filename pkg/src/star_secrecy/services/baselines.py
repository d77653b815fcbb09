"""
Comparison schemes: time-division access, conventional RIS, random coefficients, quantization
"""

import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import structlog

from ..channel.sampler import ChannelSet, channel_rng
from ..conic.solver import SolverOptions
from ..models.coefficients import StarCoefficients
from ..models.experiment import Metric, SchemeKind
from ..models.metrics import cascade_gains, secrecy_capacity, secrecy_report
from ..models.system import (
    DecodingOrder,
    DomainError,
    RadioConfig,
    RateConfig,
    SecrecyReport,
    Tolerances,
    User,
)
from ..sca.iterate import DegenerateBeamformingError, ElementMask
from ..sca.two_layer import InfeasibleError
from .full_csi import ahb_solve, optimal_power_full, two_layer_solve
from .statistical_csi import (
    extended_ahb,
    optimal_power_stat,
    outage_pair,
    sop_closed_form,
    sop_params,
    two_layer_outage,
)

logger = structlog.get_logger(__name__)

COEFFICIENT_STREAM = 1
FIXED_ALTERNATIONS = 5
TDMA_LABEL = "tdma"


def element_partition(num_elements: int) -> ElementMask:
    """⌊N/2⌋ transmit-only elements followed by ⌈N/2⌉ reflect-only elements."""
    return ElementMask.partition(num_elements)


def random_coefficients(num_elements: int, seed: int, substream: Sequence[int] = ()) -> StarCoefficients:
    """
    Uniform phases on both sides and a uniform energy split β^t = s, β^r = 1 - s.
    """
    if num_elements < 1:
        raise DomainError(f"Element count must be at least 1, got {num_elements}")
    rng = channel_rng(seed, *substream)
    split = rng.uniform(0.0, 1.0, num_elements)
    return StarCoefficients(
        beta_t=split,
        beta_r=1.0 - split,
        theta_t=rng.uniform(0.0, 2.0 * np.pi, num_elements),
        theta_r=rng.uniform(0.0, 2.0 * np.pi, num_elements),
    )


def quantize_coefficients(coefficients: StarCoefficients, bits: int) -> StarCoefficients:
    """
    Snap phases to the 2^q-point circle grid and amplitudes to {0, 1/(2^q-1), ..., 1}.

    An element pushed above the energy budget by rounding loses one amplitude step on
    its larger side.
    """
    if bits < 1:
        raise DomainError(f"Quantization needs at least 1 bit, got {bits}")
    levels = 2 ** bits
    phase_step = 2.0 * np.pi / levels
    amp_step = 1.0 / (levels - 1)

    def snap_phase(theta: np.ndarray) -> np.ndarray:
        return np.mod(np.round(theta / phase_step), levels) * phase_step

    t_idx = np.round(coefficients.beta_t / amp_step).astype(int)
    r_idx = np.round(coefficients.beta_r / amp_step).astype(int)
    over = t_idx + r_idx > levels - 1
    reduce_t = over & (t_idx >= r_idx)
    reduce_r = over & ~reduce_t
    t_idx = np.where(reduce_t, t_idx - 1, t_idx)
    r_idx = np.where(reduce_r, r_idx - 1, r_idx)
    return StarCoefficients(
        beta_t=np.minimum(t_idx * amp_step, 1.0),
        beta_r=np.minimum(r_idx * amp_step, 1.0),
        theta_t=snap_phase(coefficients.theta_t),
        theta_r=snap_phase(coefficients.theta_r),
    )


def _unit(vector: np.ndarray) -> Optional[np.ndarray]:
    norm = np.linalg.norm(vector)
    return vector / norm if norm > 0 else None


def _mmse_direction(desired: np.ndarray, interferer: np.ndarray, p_interferer: float,
                    noise_power: float) -> Optional[np.ndarray]:
    """Top generalized eigenvector of (a_s a_s^H, P_w a_w a_w^H + σ² I)."""
    m = desired.size
    signal = np.outer(desired, desired.conj())
    covariance = p_interferer * np.outer(interferer, interferer.conj()) + noise_power * np.eye(m)
    scale = max(float(np.real(np.trace(covariance))) / m, 1e-300)
    _, vectors = scipy.linalg.eigh(signal / scale, covariance / scale)
    return _unit(vectors[:, -1])


def _candidate_beamformers(a_iu: np.ndarray, a_ou: np.ndarray, p_iu: float, p_ou: float,
                           order: DecodingOrder, noise_power: float) -> List[np.ndarray]:
    vectors = {User.IU: a_iu, User.OU: a_ou}
    powers = {User.IU: p_iu, User.OU: p_ou}
    strong, weak = order.first, order.second
    raw = [
        _mmse_direction(vectors[strong], vectors[weak], powers[weak], noise_power),
        _unit(vectors[strong]),
        _unit(vectors[weak]),
        _unit(vectors[strong] / max(np.linalg.norm(vectors[strong]), 1e-300)
              + vectors[weak] / max(np.linalg.norm(vectors[weak]), 1e-300)),
    ]
    return [w for w in raw if w is not None]


def _fixed_score(channels: ChannelSet, coefficients: StarCoefficients, w: np.ndarray,
                 order: DecodingOrder, radio: RadioConfig, rates: RateConfig,
                 metric: Metric) -> Optional[Tuple[float, SecrecyReport]]:
    gains = cascade_gains(channels, coefficients, w)
    if gains.z_iu == 0 or gains.z_ou == 0:
        return None
    if metric is Metric.SOP:
        power = optimal_power_stat(gains.z_iu, gains.z_ou, radio.noise_power, rates,
                                   radio.p_max_iu, radio.p_max_ou, order)
        if not power.feasible:
            return None
        sop = outage_pair(channels, coefficients, rates, power.p_iu, power.p_ou, radio.noise_power)
        report = secrecy_report(channels, coefficients, w, power.p_iu, power.p_ou, order,
                                radio.noise_power, sop=sop)
        return -max(sop), report
    power = optimal_power_full(gains.z_iu, gains.z_ou, gains.z_eve_iu, gains.z_eve_ou,
                               radio.noise_power, radio.p_max_iu, radio.p_max_ou, order)
    report = secrecy_report(channels, coefficients, w, power.p_iu, power.p_ou, order, radio.noise_power)
    return report.min_secrecy, report


def optimize_fixed_coefficients(channels: ChannelSet, coefficients: StarCoefficients, radio: RadioConfig,
                                rates: RateConfig, metric: Metric = Metric.SECRECY_CAPACITY,
                                orders: Optional[Sequence[DecodingOrder]] = None) -> SecrecyReport:
    """
    Receive beamforming and powers for fixed STAR-RIS coefficients.

    Generalized-eigenvector and matched-filter candidates are scored with the closed-form
    power policy of the metric; the best pair seeds the next candidate set at its powers.

    Raises:
        InfeasibleError: no candidate gives positive gains (or meets the QoS caps for SOP)
    """
    if metric is Metric.TRANSMISSION_RATE:
        channels = channels.without_eavesdropper()
        metric = Metric.SECRECY_CAPACITY
    orders = tuple(orders or DecodingOrder.both())
    g_h = channels.g.conj().T
    a_iu = g_h @ (coefficients.transmission_vector() * channels.h_is)
    a_ou = g_h @ (coefficients.reflection_vector() * channels.h_os)

    best: Optional[Tuple[float, SecrecyReport]] = None
    for order in orders:
        p_iu, p_ou = radio.p_max_iu, radio.p_max_ou
        previous = -math.inf
        for _ in range(FIXED_ALTERNATIONS):
            scored = [_fixed_score(channels, coefficients, w, order, radio, rates, metric)
                      for w in _candidate_beamformers(a_iu, a_ou, p_iu, p_ou, order, radio.noise_power)]
            scored = [s for s in scored if s is not None]
            if not scored:
                break
            top = max(scored, key=lambda item: item[0])
            if best is None or top[0] > best[0]:
                best = top
            if top[0] <= previous + 1e-12:
                break
            previous = top[0]
            p_iu, p_ou = top[1].p_iu, top[1].p_ou

    if best is None:
        raise InfeasibleError("Fixed coefficients admit no usable beamformer")
    return best[1]


def _slot_masks(kind: SchemeKind, num_elements: int) -> Dict[User, ElementMask]:
    if kind.is_conventional:
        split = element_partition(num_elements)
        return {
            User.IU: ElementMask(split.transmit, (), num_elements),
            User.OU: ElementMask((), split.reflect, num_elements),
        }
    return {user: ElementMask.single(num_elements, user) for user in User}


def _oma_full(channels: ChannelSet, kind: SchemeKind, radio: RadioConfig, tolerances: Tolerances,
              options: Optional[SolverOptions], seed: int, substream: Sequence[int]) -> SecrecyReport:
    masks = _slot_masks(kind, channels.num_elements)
    slots = {}
    for user in User:
        mask = masks[user]
        result = two_layer_solve(channels, radio.p_max_iu, radio.p_max_ou, None, radio, tolerances,
                                 options, mask, seed, substream)
        w = result.iterate.beamformer()
        coefficients = result.iterate.coefficients(mask)
        gains = cascade_gains(channels, coefficients, w)
        power = radio.power_cap(user)
        sinr = power * gains.legitimate(user) / radio.noise_power
        eve = power * gains.eavesdropper(user) / radio.noise_power
        slots[user] = (sinr, eve, power)
        logger.debug("Time slot optimized", user=user.value, sinr=sinr, eve_snr=eve)

    return SecrecyReport(
        sinr_iu=slots[User.IU][0],
        sinr_ou=slots[User.OU][0],
        eve_snr_iu=slots[User.IU][1],
        eve_snr_ou=slots[User.OU][1],
        secrecy_iu=0.5 * secrecy_capacity(slots[User.IU][0], slots[User.IU][1]),
        secrecy_ou=0.5 * secrecy_capacity(slots[User.OU][0], slots[User.OU][1]),
        p_iu=slots[User.IU][2],
        p_ou=slots[User.OU][2],
        order=TDMA_LABEL,
    )


def _oma_stat(channels: ChannelSet, kind: SchemeKind, radio: RadioConfig, rates: RateConfig,
              tolerances: Tolerances, options: Optional[SolverOptions], seed: int,
              substream: Sequence[int]) -> SecrecyReport:
    """Each slot carries twice the rates over half the time."""
    slot_rates = rates.scaled(2.0)
    masks = _slot_masks(kind, channels.num_elements)
    slots = {}
    for user in User:
        mask = masks[user]
        result = two_layer_outage(channels, radio.p_max_iu, radio.p_max_ou, None, radio, slot_rates,
                                  tolerances, options, mask, seed, substream)
        w = result.iterate.beamformer()
        coefficients = result.iterate.coefficients(mask)
        gains = cascade_gains(channels, coefficients, w)
        z = gains.legitimate(user)
        if z == 0:
            raise DegenerateBeamformingError(f"Time slot of {user.value} has zero gain")
        power = radio.noise_power * slot_rates.qos_threshold(user) / z
        if power > radio.power_cap(user):
            raise InfeasibleError(f"Time slot of {user.value} needs {power:.3g} W above its cap")
        sop = sop_closed_form(sop_params(coefficients, channels, user, slot_rates, power, radio.noise_power))
        sinr = power * z / radio.noise_power
        eve = power * gains.eavesdropper(user) / radio.noise_power
        slots[user] = (sinr, eve, power, sop)

    return SecrecyReport(
        sinr_iu=slots[User.IU][0],
        sinr_ou=slots[User.OU][0],
        eve_snr_iu=slots[User.IU][1],
        eve_snr_ou=slots[User.OU][1],
        secrecy_iu=0.5 * secrecy_capacity(slots[User.IU][0], slots[User.IU][1]),
        secrecy_ou=0.5 * secrecy_capacity(slots[User.OU][0], slots[User.OU][1]),
        sop_iu=slots[User.IU][3],
        sop_ou=slots[User.OU][3],
        p_iu=slots[User.IU][2],
        p_ou=slots[User.OU][2],
        order=TDMA_LABEL,
    )


def evaluate_scheme(kind: SchemeKind, channels: ChannelSet, radio: RadioConfig, rates: RateConfig,
                    tolerances: Tolerances, metric: Metric = Metric.SECRECY_CAPACITY,
                    options: Optional[SolverOptions] = None, seed: int = 0,
                    substream: Sequence[int] = ()) -> SecrecyReport:
    """
    Operating point of one scheme on one channel realization.

    For `Metric.SOP` the report carries per-user outage probabilities; for
    `Metric.TRANSMISSION_RATE` it is computed with the eavesdropper removed, so its
    secrecy fields equal the achievable rates.
    """
    kind = SchemeKind(kind)
    if metric is Metric.TRANSMISSION_RATE:
        channels = channels.without_eavesdropper()
    statistical = metric is Metric.SOP
    n = channels.num_elements

    if kind is SchemeKind.RANDOM_PHASE:
        coefficients = random_coefficients(n, seed, (*substream, COEFFICIENT_STREAM))
        return optimize_fixed_coefficients(channels, coefficients, radio, rates,
                                           Metric.SOP if statistical else Metric.SECRECY_CAPACITY)
    if kind.is_oma:
        if statistical:
            return _oma_stat(channels, kind, radio, rates, tolerances, options, seed, substream)
        return _oma_full(channels, kind, radio, tolerances, options, seed, substream)

    mask = element_partition(n) if kind.is_conventional else ElementMask.full(n)
    if statistical:
        return extended_ahb(channels, radio, rates, tolerances, options, mask, seed, substream).report
    return ahb_solve(channels, radio, tolerances, options, mask, seed, substream).report


def transmission_rate_no_eve(channels: ChannelSet, radio: RadioConfig, tolerances: Tolerances,
                             options: Optional[SolverOptions] = None,
                             mask: Optional[ElementMask] = None,
                             seed: int = 0, substream: Sequence[int] = ()) -> float:
    """Minimum achievable user rate of the full-CSI pipeline with γ_E ≡ 0."""
    outcome = ahb_solve(channels.without_eavesdropper(), radio, tolerances, options, mask, seed, substream)
    return outcome.objective
