"""
Iterate state, element masks and scaled link data for the SCA pipelines
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import structlog

from ..channel.sampler import ChannelSet, cascaded_forms, channel_rng
from ..conic.linalg import hermitian_part, psd_project
from ..models.coefficients import StarCoefficients
from ..models.system import DecodingOrder, DomainError, StarSecrecyError, User
from .bounds import majorant_tangent, rank_one_extract

logger = structlog.get_logger(__name__)

VARPI_FLOOR = 1e-9
SIC_SHARE = 0.5


class DegenerateBeamformingError(StarSecrecyError):
    """A user's cascaded gain vanished, so its SINR cannot be controlled"""
    pass


@dataclass(frozen=True)
class ElementMask:
    """Element indices allowed to transmit (IU side) and to reflect (OU side)"""
    transmit: Tuple[int, ...]
    reflect: Tuple[int, ...]
    num_elements: int

    def __post_init__(self):
        for name in ("transmit", "reflect"):
            indices = tuple(sorted(int(i) for i in getattr(self, name)))
            if any(i < 0 or i >= self.num_elements for i in indices) or len(set(indices)) != len(indices):
                raise DomainError(f"Invalid {name} element indices {indices} for N={self.num_elements}")
            object.__setattr__(self, name, indices)

    @classmethod
    def full(cls, num_elements: int) -> "ElementMask":
        every = tuple(range(num_elements))
        return cls(every, every, num_elements)

    @classmethod
    def partition(cls, num_elements: int) -> "ElementMask":
        """First ⌊N/2⌋ elements transmit only, the rest reflect only."""
        if num_elements < 2:
            raise DomainError(f"An element partition needs N >= 2, got {num_elements}")
        half = num_elements // 2
        return cls(tuple(range(half)), tuple(range(half, num_elements)), num_elements)

    @classmethod
    def single(cls, num_elements: int, user: User) -> "ElementMask":
        """Every element dedicated to one user's side."""
        every = tuple(range(num_elements))
        return cls(every, (), num_elements) if user is User.IU else cls((), every, num_elements)

    def indices(self, user: User) -> Tuple[int, ...]:
        return self.transmit if user is User.IU else self.reflect

    def shares(self, n: int) -> bool:
        return n in self.transmit and n in self.reflect

    def active_users(self) -> Tuple[User, ...]:
        return tuple(user for user in User if self.indices(user))


@dataclass(frozen=True)
class UserLink:
    """
    One user's cascaded channel restricted to its elements and normalized.

    q is divided by its spectral norm `scale`; `gain` = P·scale²/σ² turns a normalized
    trace Tr(q^H W q U) into a received SNR. `eve` is (P/σ²) q_E q_E^H so that
    Tr(eve U) is the eavesdropper SNR.
    """
    user: User
    indices: Tuple[int, ...]
    q: np.ndarray
    scale: float
    gain: float
    eve: np.ndarray
    power: float

    @property
    def size(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class LinkSet:
    """Scaled link data for every user active under a mask at fixed powers"""
    links: Dict[User, UserLink]
    mask: ElementMask
    noise_power: float
    num_antennas: int

    def __getitem__(self, user: User) -> UserLink:
        return self.links[user]

    def __contains__(self, user: User) -> bool:
        return user in self.links

    @property
    def users(self) -> Tuple[User, ...]:
        return tuple(self.links)


def build_links(channels: ChannelSet, p_iu: float, p_ou: float, noise_power: float,
                mask: Optional[ElementMask] = None) -> LinkSet:
    """
    Restrict and normalize the cascaded channels of the users active under `mask`.

    Raises:
        DegenerateBeamformingError: an active user has an all-zero cascade
    """
    mask = mask or ElementMask.full(channels.num_elements)
    if mask.num_elements != channels.num_elements:
        raise DomainError(f"Mask for N={mask.num_elements} applied to N={channels.num_elements} channels")
    cascades = cascaded_forms(channels)
    powers = {User.IU: p_iu, User.OU: p_ou}
    links: Dict[User, UserLink] = {}
    for user in mask.active_users():
        idx = list(mask.indices(user))
        q = cascades.legitimate(user)[:, idx]
        scale = float(np.linalg.norm(q, 2))
        if scale == 0.0:
            raise DegenerateBeamformingError(f"Cascaded channel of {user.value} is identically zero")
        q_eve = cascades.eavesdropper(user)[idx]
        power = float(powers[user])
        links[user] = UserLink(
            user=user,
            indices=tuple(idx),
            q=q / scale,
            scale=scale,
            gain=power * scale ** 2 / noise_power,
            eve=(power / noise_power) * np.outer(q_eve, q_eve.conj()),
            power=power,
        )
    return LinkSet(links, mask, float(noise_power), channels.num_antennas)


@dataclass(frozen=True)
class BeamformingIterate:
    """
    Local point of the SCA pipelines.

    Surface matrices are stored at full N x N size with zeros outside the mask.
    """
    w: np.ndarray
    u_t: np.ndarray
    u_r: np.ndarray
    t_lower: Dict[User, float] = field(default_factory=dict)
    t_upper: Dict[User, float] = field(default_factory=dict)
    phi: float = 0.0
    varpi: float = 1.0
    rho_t: float = 0.0
    rho_r: float = 0.0
    xi: float = 0.0
    mu: float = 0.0
    tau: float = 1e-3
    objective: float = math.nan
    degraded: bool = False

    def surface(self, user: User) -> np.ndarray:
        return self.u_t if user is User.IU else self.u_r

    def restricted(self, user: User, indices: Sequence[int]) -> np.ndarray:
        idx = list(indices)
        return self.surface(user)[np.ix_(idx, idx)]

    def lead(self, user: User, indices: Sequence[int]) -> np.ndarray:
        """Leading eigenvector of the restricted surface matrix."""
        return rank_one_extract(self.restricted(user, indices)).vector

    def rank_ratios(self, mask: ElementMask) -> Dict[str, float]:
        ratios = {"w": rank_one_extract(self.w).ratio}
        for user in mask.active_users():
            ratios[user.side] = rank_one_extract(self.restricted(user, mask.indices(user))).ratio
        return ratios

    def penalty_residual(self, mask: ElementMask) -> float:
        """Σ λ_{i≥2} over the active surface matrices."""
        total = 0.0
        for user in mask.active_users():
            factor = rank_one_extract(self.restricted(user, mask.indices(user)))
            total += float(np.real(np.trace(self.restricted(user, mask.indices(user))))) - factor.eigenvalue
        return max(total, 0.0)

    def beamformer(self) -> np.ndarray:
        return rank_one_extract(self.w).vector

    def coefficients(self, mask: ElementMask) -> StarCoefficients:
        """Rank-one coefficients √λ₁·v₁ of each surface matrix."""
        n = mask.num_elements
        vectors = {User.IU: np.zeros(n, dtype=complex), User.OU: np.zeros(n, dtype=complex)}
        for user in mask.active_users():
            idx = list(mask.indices(user))
            factor = rank_one_extract(self.restricted(user, idx))
            vectors[user][idx] = math.sqrt(max(factor.eigenvalue, 0.0)) * factor.vector
        return StarCoefficients.from_vectors(vectors[User.IU], vectors[User.OU])


def embed_surface(block: np.ndarray, indices: Sequence[int], num_elements: int) -> np.ndarray:
    out = np.zeros((num_elements, num_elements), dtype=complex)
    idx = list(indices)
    if idx:
        out[np.ix_(idx, idx)] = block
    return out


def sanitize(matrix: np.ndarray, unit_trace: bool = False) -> np.ndarray:
    """Symmetrize and PSD-project a solver output; optionally renormalize the trace."""
    matrix = psd_project(hermitian_part(np.asarray(matrix, dtype=complex)))
    if unit_trace:
        trace = float(np.real(np.trace(matrix)))
        if trace <= 0:
            raise DegenerateBeamformingError("Receive covariance collapsed to zero")
        matrix = matrix / trace
    return matrix


def normalized_traces(links: LinkSet, w: np.ndarray, u_t: np.ndarray, u_r: np.ndarray) -> Dict[User, float]:
    """Tr(q̂^H W q̂ U) per active user."""
    out = {}
    surfaces = {User.IU: u_t, User.OU: u_r}
    for user, link in links.links.items():
        idx = list(link.indices)
        block = surfaces[user][np.ix_(idx, idx)]
        out[user] = float(np.real(np.trace(link.q.conj().T @ w @ link.q @ block)))
    return out


def eve_snrs(links: LinkSet, u_t: np.ndarray, u_r: np.ndarray) -> Dict[User, float]:
    out = {}
    surfaces = {User.IU: u_t, User.OU: u_r}
    for user, link in links.links.items():
        idx = list(link.indices)
        block = surfaces[user][np.ix_(idx, idx)]
        out[user] = max(float(np.real(np.trace(link.eve @ block))), 0.0)
    return out


def tangent_varpi(phi: float, weak_gain: float, weak_trace: float) -> float:
    """Majorant tangent point in noise-normalized units, floored away from zero."""
    return max(majorant_tangent(weak_trace, phi, weak_gain, 1.0), VARPI_FLOOR)


def initial_iterate(links: LinkSet, order: Optional[DecodingOrder], tau: float, seed: int,
                    substream: Sequence[int] = (),
                    warm: Optional[Tuple[np.ndarray, StarCoefficients]] = None) -> BeamformingIterate:
    """
    Feasible starting point.

    Without a warm start the beamformer is the dominant left singular vector of the summed
    cascades and the surface vectors carry equal energy split with random phases. If the
    SIC order is violated, the second-decoded user's side is scaled down until its received
    power is half that of the first-decoded user.

    Args:
        links: Scaled link data at the current powers
        order: SIC decoding order, None for a single-user subproblem
        tau: Initial rank-penalty scale
        seed: Experiment seed for the random phases
        substream: Substream key, typically (trial, tag)
        warm: (w, coefficients) of a previous alternation
    """
    n = links.mask.num_elements
    mask = links.mask
    if warm is not None:
        w_vec = np.asarray(warm[0], dtype=complex).reshape(-1)
        w_vec = w_vec / np.linalg.norm(w_vec)
        vectors = {User.IU: warm[1].transmission_vector(), User.OU: warm[1].reflection_vector()}
    else:
        combined = np.zeros((links.num_antennas, n), dtype=complex)
        for user, link in links.links.items():
            combined[:, list(link.indices)] += link.q * link.scale
        left, _, _ = np.linalg.svd(combined)
        w_vec = left[:, 0]
        rng = channel_rng(seed, *substream)
        phases = {user: rng.uniform(0.0, 2.0 * np.pi, n) for user in User}
        vectors = {}
        for user in User:
            magnitude = np.array([math.sqrt(0.5) if mask.shares(k) else 1.0 for k in range(n)])
            vec = magnitude * np.exp(1j * phases[user])
            keep = np.zeros(n, dtype=bool)
            keep[list(mask.indices(user))] = True
            vectors[user] = np.where(keep, vec, 0.0)

    w = np.outer(w_vec, w_vec.conj())
    surfaces = {user: np.outer(vectors[user], vectors[user].conj()) for user in User}
    traces = normalized_traces(links, w, surfaces[User.IU], surfaces[User.OU])
    for user, value in traces.items():
        if value <= 0.0:
            raise DegenerateBeamformingError(f"Initial beamforming gives zero gain to {user.value}")

    if order is not None:
        strong, weak = order.first, order.second
        received_strong = links[strong].gain * traces[strong]
        received_weak = links[weak].gain * traces[weak]
        if received_strong < received_weak:
            shrink = SIC_SHARE * received_strong / received_weak
            surfaces[weak] = surfaces[weak] * shrink
            traces[weak] *= shrink
            logger.debug("Initial point rescaled for SIC order", weak=weak.value, factor=shrink)

    return iterate_from_point(links, order, w, surfaces[User.IU], surfaces[User.OU], tau)


def iterate_from_point(links: LinkSet, order: Optional[DecodingOrder], w: np.ndarray,
                       u_t: np.ndarray, u_r: np.ndarray, tau: float) -> BeamformingIterate:
    """Iterate whose slacks are exact at (W, U_t, U_r) and μ = 0."""
    traces = normalized_traces(links, w, u_t, u_r)
    phi, varpi = 0.0, 1.0
    if order is not None:
        strong, weak = order.first, order.second
        interference = links[weak].gain * traces[weak] + 1.0
        phi = links[strong].gain * traces[strong] / interference
        varpi = tangent_varpi(phi, links[weak].gain, traces[weak])
    return BeamformingIterate(
        w=w, u_t=u_t, u_r=u_r,
        t_lower=dict(traces), t_upper=dict(traces),
        phi=phi, varpi=varpi, tau=tau,
    )

