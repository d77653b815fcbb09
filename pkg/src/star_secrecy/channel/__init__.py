"""
Channel synthesis and fixtures
"""

from .fixtures import ChannelFormatError, dump_channels, load_channels
from .sampler import (
    CascadedChannels,
    ChannelSet,
    LargeScaleGains,
    SmallScaleFading,
    cascaded_forms,
    channel_rng,
    complex_normal,
    large_scale_gains,
    los_component,
    sample_channels,
)

__all__ = [
    "ChannelFormatError",
    "dump_channels",
    "load_channels",
    "CascadedChannels",
    "ChannelSet",
    "LargeScaleGains",
    "SmallScaleFading",
    "cascaded_forms",
    "channel_rng",
    "complex_normal",
    "large_scale_gains",
    "los_component",
    "sample_channels",
]
