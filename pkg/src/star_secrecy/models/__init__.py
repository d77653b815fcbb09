"""
Domain models for the STAR-RIS secrecy simulator
"""

from .coefficients import StarCoefficients
from .metrics import (
    CascadeGains,
    cascade_gains,
    eavesdropper_snr,
    effective_gains,
    legitimate_sinr,
    path_loss,
    secrecy_capacity,
    secrecy_report,
)
from .system import (
    DecodingOrder,
    DomainError,
    PowerAllocation,
    RadioConfig,
    RateConfig,
    SecrecyReport,
    StarSecrecyError,
    SystemGeometry,
    Tolerances,
    User,
    dbm_to_watts,
    watts_to_dbm,
)

__all__ = [
    "CascadeGains",
    "cascade_gains",
    "secrecy_report",
    "PowerAllocation",
    "StarCoefficients",
    "eavesdropper_snr",
    "effective_gains",
    "legitimate_sinr",
    "path_loss",
    "secrecy_capacity",
    "DecodingOrder",
    "DomainError",
    "RadioConfig",
    "RateConfig",
    "SecrecyReport",
    "StarSecrecyError",
    "SystemGeometry",
    "Tolerances",
    "User",
    "dbm_to_watts",
    "watts_to_dbm",
]
