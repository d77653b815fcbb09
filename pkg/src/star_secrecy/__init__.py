"""
STAR-RIS Secrecy Simulator
Secrecy beamforming and outage minimization for STAR-RIS assisted uplink NOMA
"""

__version__ = "0.3.0"
__author__ = "STAR Secrecy Development Team"

from .channel.sampler import ChannelSet, sample_channels
from .models.coefficients import StarCoefficients
from .models.experiment import ExperimentKind, ExperimentRecord, ExperimentSpec, Metric, SchemeKind
from .models.system import (
    DecodingOrder,
    RadioConfig,
    RateConfig,
    SecrecyReport,
    StarSecrecyError,
    SystemGeometry,
    Tolerances,
    User,
)
from .services.experiment_service import run_experiment, solve_one
from .services.full_csi import ahb_solve
from .services.statistical_csi import extended_ahb

__all__ = [
    "ChannelSet",
    "sample_channels",
    "StarCoefficients",
    "ExperimentKind",
    "ExperimentRecord",
    "ExperimentSpec",
    "Metric",
    "SchemeKind",
    "DecodingOrder",
    "RadioConfig",
    "RateConfig",
    "SecrecyReport",
    "StarSecrecyError",
    "SystemGeometry",
    "Tolerances",
    "User",
    "run_experiment",
    "solve_one",
    "ahb_solve",
    "extended_ahb",
]
