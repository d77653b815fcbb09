"""
Channel realizations for the STAR-RIS uplink
"""

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np

from ..models.metrics import path_loss
from ..models.system import RadioConfig, SystemGeometry, User

def channel_rng(seed: int, *substream: int) -> np.random.Generator:
    """
    Counter-based generator for one named substream.

    Substreams are keyed by integers (trial index, purpose tag, ...), so draws for a trial
    do not depend on how many other trials ran before it or in which worker.
    """
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(s) for s in substream))
    return np.random.Generator(np.random.Philox(sequence))


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Circularly-symmetric CN(0, 1) samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def steering_vector(size: int, angle: float) -> np.ndarray:
    """Half-wavelength uniform linear array response."""
    return np.exp(1j * np.pi * np.arange(size) * math.sin(angle))


def los_component(geometry: SystemGeometry, num_elements: int, num_antennas: int) -> np.ndarray:
    """
    Unit-modulus LoS part of the RIS->BS channel (N x M).

    Both arrays are ULAs along the x-axis; angles follow the azimuth between the nodes.
    """
    dx = geometry.bs_pos[0] - geometry.ris_pos[0]
    dy = geometry.bs_pos[1] - geometry.ris_pos[1]
    departure = math.atan2(dy, dx)
    arrival = math.atan2(-dy, -dx)
    a_ris = steering_vector(num_elements, departure)
    a_bs = steering_vector(num_antennas, arrival)
    return np.outer(a_ris, a_bs.conj())


@dataclass(frozen=True)
class LargeScaleGains:
    """Linear power gains of the four RIS links"""
    bs: float
    iu: float
    ou: float
    eve: float

    def user(self, user: User) -> float:
        return self.iu if user is User.IU else self.ou


@dataclass(frozen=True)
class SmallScaleFading:
    """Unit-variance fading components (G normalized by its large-scale gain)"""
    g: np.ndarray
    h_is: np.ndarray
    h_os: np.ndarray
    h_es: np.ndarray

    def user(self, user: User) -> np.ndarray:
        return self.h_is if user is User.IU else self.h_os


@dataclass(frozen=True)
class ChannelSet:
    """One block-fading realization of every RIS link"""
    g: np.ndarray
    h_is: np.ndarray
    h_os: np.ndarray
    h_es: np.ndarray
    large_scale: LargeScaleGains
    small_scale: SmallScaleFading

    def __post_init__(self):
        for array in (self.g, self.h_is, self.h_os, self.h_es):
            array.setflags(write=False)

    @property
    def num_elements(self) -> int:
        return int(self.g.shape[0])

    @property
    def num_antennas(self) -> int:
        return int(self.g.shape[1])

    def user_channel(self, user: User) -> np.ndarray:
        return self.h_is if user is User.IU else self.h_os

    def without_eavesdropper(self) -> "ChannelSet":
        """Copy with the eavesdropper link removed."""
        zeros = np.zeros_like(self.h_es)
        return replace(
            self,
            h_es=zeros.copy(),
            small_scale=replace(self.small_scale, h_es=zeros.copy()),
        )


class CascadedChannels(NamedTuple):
    q_iu: np.ndarray
    q_ou: np.ndarray
    q_eve_iu: np.ndarray
    q_eve_ou: np.ndarray

    def legitimate(self, user: User) -> np.ndarray:
        return self.q_iu if user is User.IU else self.q_ou

    def eavesdropper(self, user: User) -> np.ndarray:
        return self.q_eve_iu if user is User.IU else self.q_eve_ou


def large_scale_gains(geometry: SystemGeometry) -> LargeScaleGains:
    distances = geometry.link_distances()
    exponents = geometry.pathloss_exponents
    gains = {
        link: path_loss(distances[link], exponents[link], geometry.reference_loss_db)
        for link in ("bs", "iu", "ou", "eve")
    }
    return LargeScaleGains(**gains)


def sample_channels(geometry: SystemGeometry, radio: RadioConfig, rng_seed: int,
                    substream: Sequence[int] = ()) -> ChannelSet:
    """
    Draw one channel realization.

    Args:
        geometry: Node placement and path-loss parameters
        radio: Antenna/element counts and Rician factor
        rng_seed: Experiment seed
        substream: Substream key, typically (trial,)

    Returns:
        Immutable ChannelSet
    """
    n, m = radio.num_ris_elements, radio.num_bs_antennas
    rng = channel_rng(rng_seed, *substream)
    gains = large_scale_gains(geometry)

    g_nlos = complex_normal(rng, (n, m))
    h_is = complex_normal(rng, n)
    h_os = complex_normal(rng, n)
    h_es = complex_normal(rng, n)

    kappa = radio.rician_factor
    if math.isinf(kappa):
        los_weight, nlos_weight = 1.0, 0.0
    else:
        los_weight, nlos_weight = math.sqrt(kappa / (1.0 + kappa)), math.sqrt(1.0 / (1.0 + kappa))
    g_small = los_weight * los_component(geometry, n, m) + nlos_weight * g_nlos

    small = SmallScaleFading(g=g_small, h_is=h_is, h_os=h_os, h_es=h_es)
    return ChannelSet(
        g=math.sqrt(gains.bs) * g_small,
        h_is=math.sqrt(gains.iu) * h_is,
        h_os=math.sqrt(gains.ou) * h_os,
        h_es=math.sqrt(gains.eve) * h_es,
        large_scale=gains,
        small_scale=small,
    )


def cascaded_forms(channels: ChannelSet) -> CascadedChannels:
    """
    Cascaded RIS channels.

    q_ρ = G^H diag(h_ρ) (M x N) so that w^H G^H Θ h_ρ = w^H q_ρ u.
    q_{E,ρ} = h_E ⊙ conj(h_ρ) so that |h_E^H Θ h_ρ|^2 = u^H q_{E,ρ} q_{E,ρ}^H u.
    """
    g_h = channels.g.conj().T
    return CascadedChannels(
        q_iu=g_h * channels.h_is[np.newaxis, :],
        q_ou=g_h * channels.h_os[np.newaxis, :],
        q_eve_iu=channels.h_es * channels.h_is.conj(),
        q_eve_ou=channels.h_es * channels.h_os.conj(),
    )
