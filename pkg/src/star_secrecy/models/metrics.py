"""
Closed-form rate and secrecy metrics of the uplink model
"""

import math
from typing import TYPE_CHECKING, NamedTuple, Optional, Tuple

import numpy as np

from .coefficients import StarCoefficients
from .system import DecodingOrder, DomainError, SecrecyReport, User

if TYPE_CHECKING:
    from ..channel.sampler import ChannelSet

NEGATIVE_CLAMP = -1e-12
UNIT_NORM_TOLERANCE = 1e-9


def path_loss(distance: float, exponent: float, reference_loss_db: float) -> float:
    """Large-scale power gain L0 * d^-α."""
    if not distance > 0:
        raise DomainError(f"Distance must be positive, got {distance}")
    return 10.0 ** (reference_loss_db / 10.0) * distance ** (-exponent)


def _clamp(value: float) -> float:
    if value < 0.0 and value > NEGATIVE_CLAMP:
        return 0.0
    return value


def effective_gains(channels: "ChannelSet", coefficients: StarCoefficients, w: np.ndarray) -> Tuple[float, float]:
    """|w^H G^H Θ^t h_IS|^2 and |w^H G^H Θ^r h_OS|^2."""
    w = np.asarray(w, dtype=complex).reshape(-1)
    norm = np.linalg.norm(w)
    if norm == 0:
        raise DomainError("Receive beamformer has zero norm")
    if abs(norm - 1.0) > UNIT_NORM_TOLERANCE:
        raise DomainError(f"Receive beamformer must have unit norm, got {norm:.12g}")
    g_h = channels.g.conj().T
    a_iu = g_h @ (coefficients.transmission_vector() * channels.h_is)
    a_ou = g_h @ (coefficients.reflection_vector() * channels.h_os)
    return float(abs(np.vdot(w, a_iu)) ** 2), float(abs(np.vdot(w, a_ou)) ** 2)


def legitimate_sinr(channels: "ChannelSet", coefficients: StarCoefficients, w: np.ndarray,
                    p_iu: float, p_ou: float, order: DecodingOrder,
                    noise_power: float) -> Tuple[float, float]:
    """
    SINRs of the IU and OU at the BS under successive interference cancellation.

    The first-decoded user sees the second user's signal as interference; the
    second-decoded user is interference-free.

    Returns:
        (γ_I, γ_O)
    """
    a, b = effective_gains(channels, coefficients, w)
    signal_iu, signal_ou = p_iu * a, p_ou * b
    gamma_iu = signal_iu / (order.u_iu * signal_ou + noise_power)
    gamma_ou = signal_ou / (order.u_ou * signal_iu + noise_power)
    return _clamp(gamma_iu), _clamp(gamma_ou)


def eavesdropper_snr(channels: "ChannelSet", coefficients: StarCoefficients,
                     p_iu: float, p_ou: float, noise_power: float) -> Tuple[float, float]:
    """Worst-case (interference-free) eavesdropper SNRs on the IU and OU signals."""
    h_e = channels.h_es.conj()
    gain_iu = abs(np.sum(h_e * coefficients.transmission_vector() * channels.h_is)) ** 2
    gain_ou = abs(np.sum(h_e * coefficients.reflection_vector() * channels.h_os)) ** 2
    return _clamp(p_iu * gain_iu / noise_power), _clamp(p_ou * gain_ou / noise_power)


def secrecy_capacity(gamma: float, gamma_eve: float) -> float:
    """[log2(1+γ) - log2(1+γ_E)]^+"""
    if gamma < 0 or gamma_eve < 0:
        raise DomainError("SNR values must be nonnegative")
    return max(math.log2(1.0 + gamma) - math.log2(1.0 + gamma_eve), 0.0)


def user_value(pair: Tuple[float, float], user: User) -> float:
    return pair[0] if user is User.IU else pair[1]


class CascadeGains(NamedTuple):
    """|w^H q_ρ u_ρ|² and |h_E^H Θ h_ρ|² at one operating point"""
    z_iu: float
    z_ou: float
    z_eve_iu: float
    z_eve_ou: float

    def legitimate(self, user: User) -> float:
        return self.z_iu if user is User.IU else self.z_ou

    def eavesdropper(self, user: User) -> float:
        return self.z_eve_iu if user is User.IU else self.z_eve_ou


def cascade_gains(channels: "ChannelSet", coefficients: StarCoefficients, w: np.ndarray) -> CascadeGains:
    z_iu, z_ou = effective_gains(channels, coefficients, w)
    h_e = channels.h_es.conj()
    z_eve_iu = float(abs(np.sum(h_e * coefficients.transmission_vector() * channels.h_is)) ** 2)
    z_eve_ou = float(abs(np.sum(h_e * coefficients.reflection_vector() * channels.h_os)) ** 2)
    return CascadeGains(z_iu, z_ou, z_eve_iu, z_eve_ou)


def secrecy_report(channels: "ChannelSet", coefficients: StarCoefficients, w: np.ndarray,
                   p_iu: float, p_ou: float, order: DecodingOrder, noise_power: float,
                   sop: Optional[Tuple[float, float]] = None) -> SecrecyReport:
    """Exact (non-relaxed) SINRs, eavesdropper SNRs and secrecy capacities at a point."""
    gamma = legitimate_sinr(channels, coefficients, w, p_iu, p_ou, order, noise_power)
    gamma_eve = eavesdropper_snr(channels, coefficients, p_iu, p_ou, noise_power)
    return SecrecyReport(
        sinr_iu=gamma[0],
        sinr_ou=gamma[1],
        eve_snr_iu=gamma_eve[0],
        eve_snr_ou=gamma_eve[1],
        secrecy_iu=secrecy_capacity(gamma[0], gamma_eve[0]),
        secrecy_ou=secrecy_capacity(gamma[1], gamma_eve[1]),
        sop_iu=None if sop is None else sop[0],
        sop_ou=None if sop is None else sop[1],
        p_iu=p_iu,
        p_ou=p_ou,
        order=order.label,
    )
