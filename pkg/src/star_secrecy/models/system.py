"""
Domain types for the STAR-RIS assisted uplink NOMA secrecy model
"""

import math
from enum import Enum
from typing import Dict, NamedTuple, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class StarSecrecyError(Exception):
    """Base class for all simulator errors"""
    pass


class DomainError(StarSecrecyError, ValueError):
    """Input outside the mathematical domain of an operation"""
    pass


def dbm_to_watts(value_dbm: float) -> float:
    """Convert a power level in dBm to linear watts."""
    return 10.0 ** ((value_dbm - 30.0) / 10.0)


def watts_to_dbm(value_w: float) -> float:
    """Convert linear watts to dBm."""
    if value_w <= 0:
        raise DomainError(f"Power must be positive to express in dBm, got {value_w}")
    return 10.0 * math.log10(value_w) + 30.0


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


class User(str, Enum):
    """Legitimate users; the IU is served by transmission, the OU by reflection"""
    IU = "iu"
    OU = "ou"

    @property
    def side(self) -> str:
        return "t" if self is User.IU else "r"

    @property
    def other(self) -> "User":
        return User.OU if self is User.IU else User.IU


Position = Tuple[float, float, float]


class SystemGeometry(BaseModel):
    """Node placement and large-scale propagation parameters"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    bs_pos: Position = Field(default=(0.0, 5.0, 0.0), description="Base station position (m)")
    ris_pos: Position = Field(default=(50.0, 10.0, 0.0), description="STAR-RIS position (m)")
    eve_pos: Position = Field(default=(0.0, 0.0, 0.0), description="Eavesdropper position (m)")
    iu_pos: Position = Field(default=(50.0, 15.0, 0.0), description="Inside user position (m)")
    ou_pos: Position = Field(default=(50.0, -15.0, 0.0), description="Outside user position (m)")
    alpha_bs: float = Field(default=2.2, description="Path-loss exponent RIS-BS")
    alpha_iu: float = Field(default=2.5, description="Path-loss exponent RIS-IU")
    alpha_ou: float = Field(default=2.5, description="Path-loss exponent RIS-OU")
    alpha_eve: float = Field(default=2.5, description="Path-loss exponent RIS-E")
    reference_loss_db: float = Field(default=-30.0, description="Path loss at 1 m (dB)")

    @field_validator('bs_pos', 'ris_pos', 'eve_pos', 'iu_pos', 'ou_pos')
    @classmethod
    def validate_position(cls, v):
        if not all(math.isfinite(c) for c in v):
            raise ValueError(f'Position coordinates must be finite, got {v}')
        return tuple(float(c) for c in v)

    @field_validator('alpha_bs', 'alpha_iu', 'alpha_ou', 'alpha_eve')
    @classmethod
    def validate_exponent(cls, v):
        if not v > 0:
            raise ValueError('Path-loss exponents must be positive')
        return v

    @property
    def pathloss_exponents(self) -> Dict[str, float]:
        return {"bs": self.alpha_bs, "iu": self.alpha_iu, "ou": self.alpha_ou, "eve": self.alpha_eve}

    def link_distances(self) -> Dict[str, float]:
        """Euclidean distances from the STAR-RIS to every other node."""
        ris = self.ris_pos
        return {
            "bs": math.dist(ris, self.bs_pos),
            "iu": math.dist(ris, self.iu_pos),
            "ou": math.dist(ris, self.ou_pos),
            "eve": math.dist(ris, self.eve_pos),
        }

    def with_ris_x(self, x: float) -> "SystemGeometry":
        return self.model_copy(update={"ris_pos": (float(x), self.ris_pos[1], self.ris_pos[2])})

    def with_eve_distance(self, distance: float) -> "SystemGeometry":
        """Move E along the RIS->E direction so that it sits `distance` meters from the RIS."""
        if distance <= 0:
            raise DomainError(f"Eavesdropper distance must be positive, got {distance}")
        direction = [e - r for e, r in zip(self.eve_pos, self.ris_pos)]
        norm = math.hypot(*direction)
        if norm == 0:
            raise DomainError("Eavesdropper is co-located with the STAR-RIS")
        eve = tuple(r + distance * d / norm for r, d in zip(self.ris_pos, direction))
        return self.model_copy(update={"eve_pos": eve})


class RadioConfig(BaseModel):
    """Antenna counts, noise, fading and power budgets (linear units)"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    num_bs_antennas: int = Field(default=4, description="BS receive antennas M")
    num_ris_elements: int = Field(default=8, description="STAR-RIS elements N")
    noise_power: float = Field(default=dbm_to_watts(-115.0), description="Noise power (W)")
    rician_factor: float = Field(default=db_to_linear(3.0), description="Rician factor of the RIS-BS link (linear)")
    p_max_iu: float = Field(default=dbm_to_watts(15.0), description="IU power budget (W)")
    p_max_ou: float = Field(default=dbm_to_watts(15.0), description="OU power budget (W)")

    @field_validator('num_bs_antennas', 'num_ris_elements')
    @classmethod
    def validate_counts(cls, v):
        if v < 1:
            raise ValueError('Antenna and element counts must be at least 1')
        return v

    @field_validator('noise_power', 'p_max_iu', 'p_max_ou')
    @classmethod
    def validate_positive_power(cls, v):
        if not v > 0:
            raise ValueError('Noise and power limits must be positive')
        return v

    @field_validator('rician_factor')
    @classmethod
    def validate_rician_factor(cls, v):
        if v < 0:
            raise ValueError('Rician factor must be nonnegative')
        return v

    def power_cap(self, user: User) -> float:
        return self.p_max_iu if user is User.IU else self.p_max_ou

    def with_power_dbm(self, p_dbm: float) -> "RadioConfig":
        p = dbm_to_watts(p_dbm)
        return self.model_copy(update={"p_max_iu": p, "p_max_ou": p})


class RateConfig(BaseModel):
    """Constant-rate wiretap code parameters (bits/s/Hz)"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    r_c_iu: float = Field(default=2.0, description="Codeword rate of the IU")
    r_c_ou: float = Field(default=0.5, description="Codeword rate of the OU")
    r_s_iu: float = Field(default=1.9, description="Secrecy rate of the IU")
    r_s_ou: float = Field(default=0.4, description="Secrecy rate of the OU")
    qos_mode: str = Field(default="redundancy",
                          description="QoS threshold: 'redundancy' (R_c - R_s) or 'codeword' (R_c)")

    @field_validator('qos_mode')
    @classmethod
    def validate_qos_mode(cls, v):
        valid_modes = ['redundancy', 'codeword']
        if v.lower() not in valid_modes:
            raise ValueError(f'QoS mode must be one of: {valid_modes}')
        return v.lower()

    @model_validator(mode="after")
    def validate_rate_order(self):
        for user, r_c, r_s in (("iu", self.r_c_iu, self.r_s_iu), ("ou", self.r_c_ou, self.r_s_ou)):
            if not 0 <= r_s <= r_c:
                raise ValueError(f'Rates of {user} must satisfy 0 <= r_s <= r_c')
        return self

    def codeword_rate(self, user: User) -> float:
        return self.r_c_iu if user is User.IU else self.r_c_ou

    def rate_gap(self, user: User) -> float:
        if user is User.IU:
            return self.r_c_iu - self.r_s_iu
        return self.r_c_ou - self.r_s_ou

    def sop_threshold(self, user: User) -> float:
        """Eavesdropper SNR above which the wiretap code leaks (2^ΔR - 1)."""
        return 2.0 ** self.rate_gap(user) - 1.0

    def qos_threshold(self, user: User) -> float:
        """Minimum legitimate SINR demanded by the reliability constraint."""
        rate = self.rate_gap(user) if self.qos_mode == "redundancy" else self.codeword_rate(user)
        return 2.0 ** rate - 1.0

    def scaled(self, factor: float) -> "RateConfig":
        """Rates multiplied by `factor`; used by time-division slots."""
        return self.model_copy(update={
            "r_c_iu": self.r_c_iu * factor, "r_c_ou": self.r_c_ou * factor,
            "r_s_iu": self.r_s_iu * factor, "r_s_ou": self.r_s_ou * factor,
        })


class DecodingOrder(BaseModel):
    """SIC decoding order; u_iu = 1 means the IU is decoded first"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    u_iu: int = Field(..., description="1 when the IU is decoded first")
    u_ou: int = Field(..., description="1 when the OU is decoded first")

    @model_validator(mode="after")
    def validate_indicators(self):
        if self.u_iu not in (0, 1) or self.u_ou not in (0, 1) or self.u_iu + self.u_ou != 1:
            raise ValueError('Decoding order indicators must be binary and sum to 1')
        return self

    @classmethod
    def iu_first(cls) -> "DecodingOrder":
        return cls(u_iu=1, u_ou=0)

    @classmethod
    def ou_first(cls) -> "DecodingOrder":
        return cls(u_iu=0, u_ou=1)

    @classmethod
    def both(cls) -> Tuple["DecodingOrder", "DecodingOrder"]:
        return cls.iu_first(), cls.ou_first()

    @property
    def first(self) -> User:
        """User decoded first; its SINR carries the other user's interference."""
        return User.IU if self.u_iu == 1 else User.OU

    @property
    def second(self) -> User:
        return self.first.other

    @property
    def label(self) -> str:
        return f"{self.first.value}-first"


class Tolerances(BaseModel):
    """Convergence thresholds and iteration caps of the iterative algorithms"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    inner_tol: float = Field(default=1e-3, description="Inner-loop threshold on the gap slack")
    penalty_tol: float = Field(default=1e-3, description="Outer-loop threshold on the rank penalties")
    alt_tol: float = Field(default=1e-4, description="Alternation threshold on the objective")
    penalty_init: float = Field(default=1e-3, description="Initial rank-penalty scale")
    penalty_growth: float = Field(default=5.0, description="Rank-penalty growth factor")
    max_inner: int = Field(default=30, description="Inner iteration cap")
    max_outer: int = Field(default=12, description="Outer iteration cap")
    max_alt: int = Field(default=30, description="Alternation cap")

    @field_validator('inner_tol', 'penalty_tol', 'alt_tol', 'penalty_init')
    @classmethod
    def validate_positive(cls, v):
        if not v > 0:
            raise ValueError('Tolerances must be positive')
        return v

    @field_validator('penalty_growth')
    @classmethod
    def validate_growth(cls, v):
        if not v > 1:
            raise ValueError('Penalty growth factor must exceed 1')
        return v

    @field_validator('max_inner', 'max_outer', 'max_alt')
    @classmethod
    def validate_caps(cls, v):
        if v < 1:
            raise ValueError('Iteration caps must be at least 1')
        return v


class SecrecyReport(BaseModel):
    """Per-user link quality and secrecy figures at one operating point"""
    model_config = ConfigDict(extra="forbid")

    sinr_iu: float = Field(..., description="Legitimate SINR of the IU")
    sinr_ou: float = Field(..., description="Legitimate SINR of the OU")
    eve_snr_iu: float = Field(..., description="Eavesdropper SNR on the IU signal")
    eve_snr_ou: float = Field(..., description="Eavesdropper SNR on the OU signal")
    secrecy_iu: float = Field(..., description="Secrecy capacity of the IU (bits/s/Hz)")
    secrecy_ou: float = Field(..., description="Secrecy capacity of the OU (bits/s/Hz)")
    sop_iu: Optional[float] = Field(default=None, description="Secrecy outage probability of the IU")
    sop_ou: Optional[float] = Field(default=None, description="Secrecy outage probability of the OU")
    p_iu: Optional[float] = Field(default=None, description="IU transmit power (W)")
    p_ou: Optional[float] = Field(default=None, description="OU transmit power (W)")
    order: str = Field(..., description="Decoding order used")

    @field_validator('secrecy_iu', 'secrecy_ou')
    @classmethod
    def validate_secrecy(cls, v):
        if v < 0:
            raise ValueError('Secrecy capacity is clamped at zero')
        return v

    @field_validator('sop_iu', 'sop_ou')
    @classmethod
    def validate_sop(cls, v):
        if v is not None and not 0.0 <= v <= 1.0:
            raise ValueError('Secrecy outage probability must lie in [0, 1]')
        return v

    @property
    def min_secrecy(self) -> float:
        return min(self.secrecy_iu, self.secrecy_ou)

    @property
    def max_sop(self) -> Optional[float]:
        if self.sop_iu is None or self.sop_ou is None:
            return None
        return max(self.sop_iu, self.sop_ou)


class PowerAllocation(NamedTuple):
    """Transmit powers chosen by a power policy (W)"""
    p_iu: float
    p_ou: float
    feasible: bool = True

    def of(self, user: User) -> float:
        return self.p_iu if user is User.IU else self.p_ou
