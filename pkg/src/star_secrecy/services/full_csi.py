"""
Minimum secrecy capacity maximization with full eavesdropper CSI
"""

import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog
from scipy.optimize import brentq

from ..channel.sampler import ChannelSet
from ..conic.program import ConeProgram, ConeProgramError
from ..conic.solver import SolverOptions
from ..models.coefficients import StarCoefficients
from ..models.metrics import cascade_gains, secrecy_report
from ..models.system import (
    DecodingOrder,
    DomainError,
    PowerAllocation,
    RadioConfig,
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
    eve_snrs,
    initial_iterate,
    tangent_varpi,
)
from ..sca.two_layer import (
    ConvexRestriction,
    InfeasibleError,
    SolverFailure,
    TwoLayerResult,
    two_layer_loop,
)

logger = structlog.get_logger(__name__)

ENERGY_SLACK = 1e-6
MONOTONE_SLACK = 1e-6


class SecrecyRatioRestriction(ConvexRestriction):
    """
    Dinkelbach form of max-min secrecy ratio (1+γ)/(1+γ_E).

    With a decoding order both users are served under SIC; without one the single
    active user is served interference-free.
    """

    stage = "full-csi"

    def __init__(self, links: LinkSet, order: Optional[DecodingOrder]):
        super().__init__(links, order)
        if order is None and len(links.users) != 1:
            raise DomainError("A single-user restriction needs exactly one active user")
        if order is not None and set(links.users) != set(User):
            raise DomainError("A NOMA restriction needs elements on both sides")

    def assemble(self, iterate: BeamformingIterate) -> Tuple[RestrictionAssembler, ConeProgram]:
        a = RestrictionAssembler(self.links, iterate)
        a.base_constraints()
        xi = a.scalar("xi")
        mu = iterate.mu
        if self.order is None:
            user = self.users[0]
            t = a.lower_bound(user)
            a.builder.nonneg(1.0 + a.received(user, t) - (1.0 + a.eve_snr(user)) * mu - xi)
        else:
            strong, weak = self.order.first, self.order.second
            a.lower_bound(strong)
            t_weak = a.lower_bound(weak)
            a.upper_bound(weak)
            phi = a.scalar("phi")
            a.sic_order(strong, weak)
            a.sinr_majorant(strong, weak, phi, iterate.varpi)
            a.builder.nonneg(1.0 + phi - (1.0 + a.eve_snr(strong)) * mu - xi)
            a.builder.nonneg(1.0 + a.received(weak, t_weak) - (1.0 + a.eve_snr(weak)) * mu - xi)
        penalty = a.rank_penalties()
        a.builder.minimize(-xi + penalty * iterate.tau)
        return a, a.build()

    def update_parameters(self, iterate: BeamformingIterate, assembler: RestrictionAssembler,
                          x: np.ndarray) -> BeamformingIterate:
        xi = max(float(assembler.handles["xi"].value(x)[0]), 0.0)
        phi, varpi = iterate.phi, iterate.varpi
        if self.order is not None:
            weak = self.order.second
            phi = max(float(assembler.handles["phi"].value(x)[0]), 0.0)
            varpi = tangent_varpi(phi, self.links[weak].gain, iterate.t_upper[weak])
        moved = replace(iterate, xi=xi, phi=phi, varpi=varpi)
        return replace(moved, mu=ratio_floor(moved, self.links, self.order))

    def progress(self, iterate: BeamformingIterate) -> float:
        return iterate.xi


def ratio_floor(iterate: BeamformingIterate, links: LinkSet, order: Optional[DecodingOrder]) -> float:
    """Smallest per-user ratio (1 + slack SINR)/(1 + γ_E) at the iterate."""
    gamma_eve = eve_snrs(links, iterate.u_t, iterate.u_r)
    if order is None:
        user = links.users[0]
        legit = links[user].gain * iterate.t_lower[user]
        return (1.0 + legit) / (1.0 + gamma_eve[user])
    strong, weak = order.first, order.second
    strong_ratio = (1.0 + iterate.phi) / (1.0 + gamma_eve[strong])
    weak_ratio = (1.0 + links[weak].gain * iterate.t_lower[weak]) / (1.0 + gamma_eve[weak])
    return min(strong_ratio, weak_ratio)


def dinkelbach_mu(iterate: BeamformingIterate, channels: ChannelSet, p_iu: float, p_ou: float,
                  order: DecodingOrder, noise_power: float, mask: Optional[ElementMask] = None) -> float:
    """
    Dinkelbach ratio update min_ρ (1 + γ_ρ)/(1 + γ_E,ρ).

    The first-decoded user's SINR is its slack φ, the second user's is P·T^lower/σ² with
    T^lower in normalized units of its link.
    """
    links = build_links(channels, p_iu, p_ou, noise_power, mask)
    return ratio_floor(iterate, links, order)


def _check_local_point(iterate: BeamformingIterate, mask: ElementMask):
    energy = np.zeros(mask.num_elements)
    for user in mask.active_users():
        energy += np.real(np.diag(iterate.surface(user)))
    if np.any(energy > 1.0 + ENERGY_SLACK):
        raise ConeProgramError(f"Local point violates the element energy budget (max {energy.max():.6g})")


def build_secrecy_program(channels: ChannelSet, iterate: BeamformingIterate, p_iu: float, p_ou: float,
                          order: DecodingOrder, mu: float, tau: float, noise_power: float,
                          mask: Optional[ElementMask] = None) -> ConeProgram:
    """
    Convex restriction of the full-CSI beamforming problem around `iterate`.

    Args:
        channels: Channel realization
        iterate: Local point with slacks and majorization parameter
        p_iu: IU transmit power (W)
        p_ou: OU transmit power (W)
        order: SIC decoding order
        mu: Dinkelbach ratio, nonnegative
        tau: Rank-penalty scale, positive
        noise_power: Noise power (W)
        mask: Element mask, all elements on both sides by default

    Returns:
        ConeProgram minimizing -ξ + τ(ρ_t + ρ_r)
    """
    if mu < 0:
        raise DomainError(f"Dinkelbach ratio must be nonnegative, got {mu}")
    if not tau > 0:
        raise DomainError(f"Penalty scale must be positive, got {tau}")
    links = build_links(channels, p_iu, p_ou, noise_power, mask)
    _check_local_point(iterate, links.mask)
    restriction = SecrecyRatioRestriction(links, order)
    _, program = restriction.assemble(replace(iterate, mu=mu, tau=tau))
    return program


def two_layer_solve(channels: ChannelSet, p_iu: float, p_ou: float, order: Optional[DecodingOrder],
                    radio: RadioConfig, tolerances: Tolerances,
                    options: Optional[SolverOptions] = None,
                    mask: Optional[ElementMask] = None,
                    seed: int = 0, substream: Sequence[int] = (),
                    warm: Optional[Tuple[np.ndarray, StarCoefficients]] = None) -> TwoLayerResult:
    """
    Beamforming at fixed powers: Dinkelbach and SCA rounds inside, penalty growth outside.

    `order=None` with a single-side mask solves the interference-free single-user problem.
    """
    links = build_links(channels, p_iu, p_ou, radio.noise_power, mask)
    initial = initial_iterate(links, order, tolerances.penalty_init, seed, substream, warm)
    restriction = SecrecyRatioRestriction(links, order)
    return two_layer_loop(restriction, initial, tolerances, options)


def _ratio(num_gain: float, den_gain: float, power: float, interference: float = 0.0) -> float:
    return (1.0 + power * num_gain / (interference + 1.0)) / (1.0 + power * den_gain)


def optimal_power_full(z_iu: float, z_ou: float, z_eve_iu: float, z_eve_ou: float, noise_power: float,
                       p_max_iu: float, p_max_ou: float, order: DecodingOrder) -> PowerAllocation:
    """
    Closed-form power policy for fixed beamforming.

    The first-decoded user transmits at its cap. The second user's power is the crossing
    of the two secrecy ratios when it lies inside [0, P̄], otherwise the better end point,
    where P̄ = min(cap, SIC limit).

    Args:
        z_iu: |w^H q_I u_t|²
        z_ou: |w^H q_O u_r|²
        z_eve_iu: |h_E^H Θ^t h_IS|²
        z_eve_ou: |h_E^H Θ^r h_OS|²
        noise_power: σ² (W)
        p_max_iu: IU power cap (W)
        p_max_ou: OU power cap (W)
        order: SIC decoding order

    Returns:
        PowerAllocation

    Raises:
        DegenerateBeamformingError: a legitimate gain is zero
    """
    values = {"z_iu": z_iu, "z_ou": z_ou, "z_eve_iu": z_eve_iu, "z_eve_ou": z_eve_ou}
    for name, value in values.items():
        if value < 0 or not math.isfinite(value):
            raise DomainError(f"{name} must be a finite nonnegative gain, got {value}")
    if z_iu == 0 or z_ou == 0:
        raise DegenerateBeamformingError("Legitimate cascaded gain is zero; power policy undefined")

    z = {User.IU: z_iu / noise_power, User.OU: z_ou / noise_power}
    z_eve = {User.IU: z_eve_iu / noise_power, User.OU: z_eve_ou / noise_power}
    caps = {User.IU: p_max_iu, User.OU: p_max_ou}
    strong, weak = order.first, order.second

    a_cap = caps[strong]
    upper = min(caps[weak], a_cap * z[strong] / z[weak])
    k = 1.0 + a_cap * z_eve[strong]
    b = 1.0 + a_cap * z[strong]

    def strong_ratio(p: float) -> float:
        return (p * z[weak] + b) / ((p * z[weak] + 1.0) * k)

    def weak_ratio(p: float) -> float:
        return _ratio(z[weak], z_eve[weak], p) if p > 0 else 1.0

    def gap(p: float) -> float:
        return strong_ratio(p) - weak_ratio(p)

    candidates = [upper]
    quad_a = z[weak] * z_eve[weak] - k * z[weak] ** 2
    quad_b = b * z_eve[weak] + z[weak] - 2.0 * k * z[weak]
    quad_c = b - k
    for root in _real_roots(quad_a, quad_b, quad_c):
        if 0.0 < root < upper:
            candidates.append(root)
    if len(candidates) == 1 and upper > 0 and gap(0.0) > 0 > gap(upper):
        candidates.append(brentq(gap, 0.0, upper, xtol=1e-15 * max(upper, 1.0)))
    candidates.append(0.0)

    scores = [min(strong_ratio(p), weak_ratio(p)) for p in candidates]
    best = candidates[int(np.argmax(scores))]
    powers = {strong: a_cap, weak: float(best)}
    logger.debug("Full-CSI power policy", order=order.label, p_strong=a_cap, p_weak=best, sic_cap=upper)
    return PowerAllocation(p_iu=powers[User.IU], p_ou=powers[User.OU])


def _real_roots(a: float, b: float, c: float) -> List[float]:
    scale = max(abs(a), abs(b), abs(c))
    if scale == 0:
        return []
    a, b, c = a / scale, b / scale, c / scale
    if abs(a) < 1e-14:
        return [] if abs(b) < 1e-14 else [-c / b]
    disc = b * b - 4.0 * a * c
    if disc < 0:
        return []
    root = math.sqrt(disc)
    q = -0.5 * (b + math.copysign(root, b))
    roots = [q / a]
    if q != 0:
        roots.append(c / q)
    return roots


@dataclass
class FullCsiOutcome:
    """Result of the alternating beamforming/power optimization for one decoding order"""
    iterate: BeamformingIterate
    w: np.ndarray
    coefficients: StarCoefficients
    p_iu: float
    p_ou: float
    order: DecodingOrder
    trace: List[float]
    report: SecrecyReport
    degraded: bool = False
    raw_trace: List[float] = field(default_factory=list)
    rejected: int = 0
    converged: bool = False
    alternatives: Dict[str, Optional[float]] = field(default_factory=dict)

    @property
    def objective(self) -> float:
        return self.report.min_secrecy


def _alternate(channels: ChannelSet, radio: RadioConfig, tolerances: Tolerances, order: DecodingOrder,
               options: Optional[SolverOptions], mask: ElementMask, seed: int,
               substream: Sequence[int]) -> FullCsiOutcome:
    p_iu, p_ou = radio.p_max_iu, radio.p_max_ou
    warm = None
    trace: List[float] = []
    raw_trace: List[float] = []
    rejected = 0
    converged = False
    best: Optional[FullCsiOutcome] = None

    for alternation in range(1, tolerances.max_alt + 1):
        result = two_layer_solve(channels, p_iu, p_ou, order, radio, tolerances, options,
                                 mask, seed, substream, warm)
        w = result.iterate.beamformer()
        coefficients = result.iterate.coefficients(mask)
        gains = cascade_gains(channels, coefficients, w)
        power = optimal_power_full(gains.z_iu, gains.z_ou, gains.z_eve_iu, gains.z_eve_ou,
                                   radio.noise_power, radio.p_max_iu, radio.p_max_ou, order)
        report = secrecy_report(channels, coefficients, w, power.p_iu, power.p_ou, order, radio.noise_power)
        value = report.min_secrecy
        raw_trace.append(value)
        if trace and value < trace[-1] - MONOTONE_SLACK:
            # fallback only; the accepted point stays the last improving one
            rejected += 1
            logger.warning("Alternation rejected as non-improving", order=order.label,
                           alternation=alternation, value=value, previous=trace[-1])
            break
        trace.append(value)
        best = FullCsiOutcome(
            iterate=result.iterate, w=w, coefficients=coefficients,
            p_iu=power.p_iu, p_ou=power.p_ou, order=order, trace=list(trace),
            report=report, degraded=result.degraded,
        )
        logger.info("Alternation finished", order=order.label, alternation=alternation,
                    min_secrecy=value, p_iu=power.p_iu, p_ou=power.p_ou)
        if len(trace) >= 2 and abs(trace[-1] - trace[-2]) <= tolerances.alt_tol:
            converged = True
            break
        warm = (w, coefficients)
        p_iu, p_ou = power.p_iu, power.p_ou

    if best is None:
        raise InfeasibleError(f"No alternation completed for order {order.label}")
    best.raw_trace = raw_trace
    best.rejected = rejected
    best.converged = converged
    return best


def ahb_solve(channels: ChannelSet, radio: RadioConfig, tolerances: Tolerances,
              options: Optional[SolverOptions] = None,
              mask: Optional[ElementMask] = None,
              seed: int = 0, substream: Sequence[int] = (),
              orders: Optional[Sequence[DecodingOrder]] = None) -> FullCsiOutcome:
    """
    Alternating beamforming and power optimization over both decoding orders.

    Returns:
        Outcome of the order with the larger minimum secrecy capacity; `alternatives`
        maps every order label to its objective (None when it failed)

    Raises:
        InfeasibleError: every decoding order failed
    """
    mask = mask or ElementMask.full(channels.num_elements)
    orders = tuple(orders or DecodingOrder.both())
    outcomes: Dict[str, FullCsiOutcome] = {}
    reasons: Dict[str, str] = {}
    for order in orders:
        try:
            outcomes[order.label] = _alternate(channels, radio, tolerances, order, options, mask, seed, substream)
        except (SolverFailure, DegenerateBeamformingError, InfeasibleError) as e:
            logger.warning("Decoding order failed", order=order.label, error=str(e))
            reasons[order.label] = str(e)

    if not outcomes:
        raise InfeasibleError("Full-CSI optimization failed for every decoding order", reasons)
    best = max(outcomes.values(), key=lambda outcome: outcome.objective)
    best.alternatives = {order.label: (outcomes[order.label].objective if order.label in outcomes else None)
                         for order in orders}
    return best
