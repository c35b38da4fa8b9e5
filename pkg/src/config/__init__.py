"""
Configuration modules.

This package contains the constants and
configuration dataclasses for hmamba.
- HMambaConfig
- TrainConfig, LossConfig
- RunConfig
"""

from .constants import *
from .chart_config import *
from .model_config import BLOCK_TYPES, HMambaConfig
from .train_config import LossConfig, TrainConfig
from .run_config import RunConfig


__all__ = [
    "APP_NAME",
    "APP_VERSION",
    "APP_TITLE",
    "FORMAT_VERSION",
    "SILENCE",
    "DELETION",
    "UNKNOWN",
    "CMU_PHONES",
    "L2_PHONES",
    "RELATIVE_TOKENS",
    "GRANULARITIES",
    "DEFAULT_SCORE_RANGES",
    "FEATURE_PROVIDERS",
    "CHART_COLORS",
    "LINE_WIDTH",
    "ASTERICK_SIZE",
    "CURVE_PANELS",
    "BLOCK_TYPES",
    "HMambaConfig",
    "TrainConfig",
    "LossConfig",
    "RunConfig",
]
