"""
Maximum secrecy outage probability minimization with statistical eavesdropper CSI
"""

import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import structlog

from ..channel.sampler import ChannelSet, LargeScaleGains, channel_rng, complex_normal
from ..conic.program import ConeProgram, ConeProgramError
from ..conic.solver import SolverOptions
from ..models.coefficients import StarCoefficients
from ..models.metrics import cascade_gains, secrecy_report
from ..models.system import (
    DecodingOrder,
    DomainError,
    PowerAllocation,
    RadioConfig,
    RateConfig,
    SecrecyReport,
    Tolerances,
    User,
)
from ..sca.assembly import RestrictionAssembler
from ..sca.iterate import (
    BeamformingIterate,
    DegenerateBeamformingError,
    ElementMask,
    LinkSet,
    build_links,
    initial_iterate,
)
from ..sca.two_layer import (
    ConvexRestriction,
    InfeasibleError,
    SolverFailure,
    TwoLayerResult,
    two_layer_loop,
)

logger = structlog.get_logger(__name__)

MIN_MC_TRIALS = 1000
MC_CHUNK = 65536
MONOTONE_SLACK = 1e-6


@dataclass(frozen=True)
class SopParams:
    """Inputs of the closed-form secrecy outage probability of one user"""
    effective_gain: float
    large_scale_product: float
    rate_gap: float
    power: float
    noise_power: float

    def __post_init__(self):
        for name in ("effective_gain", "large_scale_product", "rate_gap", "power", "noise_power"):
            value = getattr(self, name)
            if value < 0 or not math.isfinite(value):
                raise DomainError(f"{name} must be finite and nonnegative, got {value}")

    @property
    def threshold(self) -> float:
        return 2.0 ** self.rate_gap - 1.0

    @property
    def exponent_scale(self) -> float:
        """Mean eavesdropper SNR P·L_E·L_ρ·Σβ|h̃|²/σ²."""
        if self.noise_power == 0:
            return math.inf
        return self.power * self.large_scale_product * self.effective_gain / self.noise_power


def sop_params(coefficients: StarCoefficients, channels: ChannelSet, user: User, rates: RateConfig,
               power: float, noise_power: float) -> SopParams:
    """
    Closed-form outage inputs of one user at a fixed surface configuration.

    `large_scale_product` is L_E·L_ρ, the product of the two linear power gains of the
    cascaded eavesdropper path. The stored gains already are squared amplitudes, so this
    is the squared-amplitude factor of the outage exponent and no further squaring applies.
    """
    beta =coefficients.beta_t if user is User.IU else coefficients.beta_r
    h_small = channels.small_scale.user(user)
    large = channels.large_scale
    return SopParams(
        effective_gain=float(np.sum(beta * np.abs(h_small) ** 2)),
        large_scale_product=large.eve * large.user(user),
        rate_gap=rates.rate_gap(user),
        power=power,
        noise_power=noise_power,
    )


def sop_closed_form(params: SopParams) -> float:
    """
    P(γ_E > 2^ΔR - 1) = exp(-(2^ΔR - 1)σ² / (P·L_E·L_ρ·Σβ|h̃|²)).

    A zero numerator (no redundancy) gives 1, a zero denominator with positive
    numerator gives 0.
    """
    numerator = params.threshold * params.noise_power
    denominator = params.power * params.large_scale_product * params.effective_gain
    if numerator == 0:
        return 1.0
    if denominator == 0:
        return 0.0
    return float(math.exp(-numerator / denominator))


class MonteCarloEstimate(NamedTuple):
    estimate: float
    stderr: float
    trials: int


def sop_monte_carlo(coefficients: StarCoefficients, user: User, user_channel: np.ndarray,
                    large_scale: LargeScaleGains, rates: RateConfig, power: float, noise_power: float,
                    trials: int, seed: int, substream: Sequence[int] = ()) -> MonteCarloEstimate:
    """
    Empirical outage frequency over fresh Rayleigh eavesdropper channels.

    Args:
        coefficients: STAR-RIS coefficients
        user: Served user; selects the transmission or reflection side
        user_channel: Small-scale RIS->user channel h̃_ρ
        large_scale: Link power gains
        rates: Wiretap code rates
        power: User transmit power (W)
        noise_power: σ² (W)
        trials: Number of eavesdropper draws, at least 1000
        seed: Experiment seed
        substream: Substream key of this estimate

    Returns:
        MonteCarloEstimate with the binomial standard error
    """
    if trials < MIN_MC_TRIALS:
        raise DomainError(f"Monte-Carlo SOP needs at least {MIN_MC_TRIALS} trials, got {trials}")
    weights = coefficients.side_vector(user.side) * np.asarray(user_channel, dtype=complex).reshape(-1)
    threshold = 2.0 ** rates.rate_gap(user) - 1.0
    scale = power * large_scale.eve * large_scale.user(user) / noise_power
    rng = channel_rng(seed, *substream)

    outages = 0
    remaining = trials
    while remaining > 0:
        size = min(remaining, MC_CHUNK)
        h_eve = complex_normal(rng, (size, weights.size))
        snr = scale * np.abs(h_eve.conj() @ weights) ** 2
        outages += int(np.count_nonzero(snr > threshold))
        remaining -= size

    estimate = outages / trials
    stderr = math.sqrt(estimate * (1.0 - estimate) / trials)
    return MonteCarloEstimate(estimate, stderr, trials)


class OutageRestriction(ConvexRestriction):
    """
    Epigraph of max_ρ ς_ρ with ς_ρ = P_ρ L_E L_ρ Σ U_ρ(n,n)|h̃_ρ,n|² / ((2^ΔR_ρ - 1)σ²).

    The legitimate QoS constraints are linear in the polarization slacks.
    """

    stage = "statistical-csi"

    def __init__(self, links: LinkSet, order: Optional[DecodingOrder], channels: ChannelSet,
                 rates: RateConfig):
        super().__init__(links, order)
        if order is None and len(links.users) != 1:
            raise DomainError("A single-user restriction needs exactly one active user")
        if order is not None and set(links.users) != set(User):
            raise DomainError("A NOMA restriction needs elements on both sides")
        self.rates = rates
        self.weights: Dict[User, np.ndarray] = {}
        large = channels.large_scale
        for user, link in links.links.items():
            threshold = rates.sop_threshold(user)
            if threshold <= 0:
                raise ConeProgramError(
                    f"Rate gap of {user.value} is zero: its outage probability is identically 1"
                )
            h_small = channels.small_scale.user(user)[list(link.indices)]
            k = link.power * large.eve * large.user(user) / (threshold * links.noise_power)
            self.weights[user] = k * np.abs(h_small) ** 2

    def assemble(self, iterate: BeamformingIterate) -> Tuple[RestrictionAssembler, ConeProgram]:
        a = RestrictionAssembler(self.links, iterate)
        a.base_constraints()
        s = a.scalar("s")
        for user, weights in self.weights.items():
            a.builder.nonneg(s - a.surfaces[user].inner(np.diag(weights)))
        if self.order is None:
            user = self.users[0]
            t = a.lower_bound(user)
            a.builder.nonneg(a.received(user, t) - self.rates.qos_threshold(user))
        else:
            strong, weak = self.order.first, self.order.second
            c_strong = self.rates.qos_threshold(strong)
            c_weak = self.rates.qos_threshold(weak)
            t_strong = a.lower_bound(strong)
            t_weak = a.lower_bound(weak)
            t_weak_up = a.upper_bound(weak)
            a.sic_order(strong, weak)
            a.builder.nonneg(a.received(strong, t_strong) - a.received(weak, t_weak_up) * c_strong - c_strong)
            a.builder.nonneg(a.received(weak, t_weak) - c_weak)
        penalty = a.rank_penalties()
        a.builder.minimize(s + penalty * iterate.tau)
        return a, a.build()

    def update_parameters(self, iterate: BeamformingIterate, assembler: RestrictionAssembler,
                          x: np.ndarray) -> BeamformingIterate:
        return iterate

    def progress(self, iterate: BeamformingIterate) -> float:
        return iterate.objective

    def outage_scores(self, iterate: BeamformingIterate) -> Dict[User, float]:
        """ς_ρ at the iterate's surface matrices."""
        scores = {}
        for user, weights in self.weights.items():
            block = iterate.restricted(user, self.links[user].indices)
            scores[user] = float(np.real(np.diag(block)) @ weights)
        return scores


def build_outage_program(channels: ChannelSet, iterate: BeamformingIterate, p_iu: float, p_ou: float,
                         order: DecodingOrder, rates: RateConfig, tau: float, noise_power: float,
                         mask: Optional[ElementMask] = None) -> ConeProgram:
    """
    Convex restriction of the statistical-CSI beamforming problem around `iterate`.

    Raises:
        ConeProgramError: a rate gap is zero
    """
    if not tau > 0:
        raise DomainError(f"Penalty scale must be positive, got {tau}")
    links = build_links(channels, p_iu, p_ou, noise_power, mask)
    restriction = OutageRestriction(links, order, channels, rates)
    _, program = restriction.assemble(replace(iterate, tau=tau))
    return program


def optimal_power_stat(z_iu: float, z_ou: float, noise_power: float, rates: RateConfig,
                       p_max_iu: float, p_max_ou: float, order: DecodingOrder) -> PowerAllocation:
    """
    Smallest powers meeting both QoS thresholds and the SIC order.

    The second-decoded user is set first, at the power that meets its threshold without
    interference; the first-decoded user then meets its threshold against that interference
    and dominates it in received power.

    Returns:
        PowerAllocation whose `feasible` flag reports whether both caps hold
    """
    if z_iu < 0 or z_ou < 0:
        raise DomainError("Cascaded gains must be nonnegative")
    if z_iu == 0 or z_ou == 0:
        raise DegenerateBeamformingError("Legitimate cascaded gain is zero; power policy undefined")
    z = {User.IU: z_iu, User.OU: z_ou}
    caps = {User.IU: p_max_iu, User.OU: p_max_ou}
    strong, weak = order.first, order.second

    p_weak = noise_power * rates.qos_threshold(weak) / z[weak]
    received_weak = p_weak * z[weak]
    p_strong = max((received_weak + noise_power) * rates.qos_threshold(strong) / z[strong],
                   received_weak / z[strong])
    powers = {strong: p_strong, weak: p_weak}
    feasible = all(powers[user] <= caps[user] for user in User)
    if not feasible:
        logger.debug("Statistical power policy exceeds a cap", order=order.label,
                     p_iu=powers[User.IU], p_ou=powers[User.OU])
    return PowerAllocation(p_iu=powers[User.IU], p_ou=powers[User.OU], feasible=feasible)


def outage_pair(channels: ChannelSet, coefficients: StarCoefficients, rates: RateConfig,
                p_iu: float, p_ou: float, noise_power: float) -> Tuple[float, float]:
    return (
        sop_closed_form(sop_params(coefficients, channels, User.IU, rates, p_iu, noise_power)),
        sop_closed_form(sop_params(coefficients, channels, User.OU, rates, p_ou, noise_power)),
    )


@dataclass
class StatCsiOutcome:
    """Result of the extended alternation for one decoding order"""
    iterate: BeamformingIterate
    w: np.ndarray
    coefficients: StarCoefficients
    p_iu: float
    p_ou: float
    order: DecodingOrder
    sop: Tuple[float, float]
    trace: List[float]
    report: SecrecyReport
    degraded: bool = False
    raw_trace: List[float] = field(default_factory=list)
    rejected: int = 0
    converged: bool = False
    alternatives: Dict[str, Optional[float]] = field(default_factory=dict)

    @property
    def max_sop(self) -> float:
        return max(self.sop)


def two_layer_outage(channels: ChannelSet, p_iu: float, p_ou: float, order: Optional[DecodingOrder],
                     radio: RadioConfig, rates: RateConfig, tolerances: Tolerances,
                     options: Optional[SolverOptions] = None,
                     mask: Optional[ElementMask] = None,
                     seed: int = 0, substream: Sequence[int] = (),
                     warm: Optional[Tuple[np.ndarray, StarCoefficients]] = None) -> TwoLayerResult:
    links = build_links(channels, p_iu, p_ou, radio.noise_power, mask)
    restriction = OutageRestriction(links, order, channels, rates)
    initial = initial_iterate(links, order, tolerances.penalty_init, seed, substream, warm)
    return two_layer_loop(restriction, initial, tolerances, options)


def _alternate(channels: ChannelSet, radio: RadioConfig, rates: RateConfig, tolerances: Tolerances,
               order: DecodingOrder, options: Optional[SolverOptions], mask: ElementMask,
               seed: int, substream: Sequence[int]) -> StatCsiOutcome:
    p_iu, p_ou = radio.p_max_iu, radio.p_max_ou
    warm = None
    trace: List[float] = []
    raw_trace: List[float] = []
    rejected = 0
    converged = False
    best: Optional[StatCsiOutcome] = None

    for alternation in range(1, tolerances.max_alt + 1):
        result = two_layer_outage(channels, p_iu, p_ou, order, radio, rates, tolerances, options,
                                  mask, seed, substream, warm)
        w = result.iterate.beamformer()
        coefficients = result.iterate.coefficients(mask)
        gains = cascade_gains(channels, coefficients, w)
        power = optimal_power_stat(gains.z_iu, gains.z_ou, radio.noise_power, rates,
                                   radio.p_max_iu, radio.p_max_ou, order)
        if not power.feasible:
            logger.info("Power policy infeasible", order=order.label, alternation=alternation)
            break
        sop = outage_pair(channels, coefficients, rates, power.p_iu, power.p_ou, radio.noise_power)
        value = max(sop)
        raw_trace.append(value)
        if trace and value > trace[-1] + MONOTONE_SLACK:
            # fallback only; the accepted point stays the last improving one
            rejected += 1
            logger.warning("Alternation rejected as non-improving", order=order.label,
                           alternation=alternation, value=value, previous=trace[-1])
            break
        trace.append(value)
        report = secrecy_report(channels, coefficients, w, power.p_iu, power.p_ou, order,
                                radio.noise_power, sop=sop)
        best = StatCsiOutcome(
            iterate=result.iterate, w=w, coefficients=coefficients,
            p_iu=power.p_iu, p_ou=power.p_ou, order=order, sop=sop,
            trace=list(trace), report=report, degraded=result.degraded,
        )
        logger.info("Alternation finished", order=order.label, alternation=alternation,
                    max_sop=value, p_iu=power.p_iu, p_ou=power.p_ou)
        if len(trace) >= 2 and abs(trace[-1] - trace[-2]) <= tolerances.alt_tol:
            converged = True
            break
        warm = (w, coefficients)
        p_iu, p_ou = power.p_iu, power.p_ou

    if best is None:
        raise InfeasibleError(f"Power caps cannot meet the QoS thresholds for order {order.label}")
    best.raw_trace = raw_trace
    best.rejected = rejected
    best.converged = converged
    return best


def extended_ahb(channels: ChannelSet, radio: RadioConfig, rates: RateConfig, tolerances: Tolerances,
                 options: Optional[SolverOptions] = None,
                 mask: Optional[ElementMask] = None,
                 seed: int = 0, substream: Sequence[int] = (),
                 orders: Optional[Sequence[DecodingOrder]] = None) -> StatCsiOutcome:
    """
    Alternating beamforming and power minimization of the larger outage probability.

    Raises:
        InfeasibleError: every decoding order failed or violated a power cap
        ConeProgramError: a rate gap is zero
    """
    mask = mask or ElementMask.full(channels.num_elements)
    orders = tuple(orders or DecodingOrder.both())
    outcomes: Dict[str, StatCsiOutcome] = {}
    reasons: Dict[str, str] = {}
    for order in orders:
        try:
            outcomes[order.label] = _alternate(channels, radio, rates, tolerances, order, options,
                                               mask, seed, substream)
        except (SolverFailure, DegenerateBeamformingError, InfeasibleError) as e:
            logger.warning("Decoding order failed", order=order.label, error=str(e))
            reasons[order.label] = str(e)

    if not outcomes:
        raise InfeasibleError("Statistical-CSI optimization failed for every decoding order", reasons)
    best = min(outcomes.values(), key=lambda outcome: outcome.max_sop)
    best.alternatives = {order.label: (outcomes[order.label].max_sop if order.label in outcomes else None)
                         for order in orders}
    return best
