"""Shared infrastructure: errors, configuration and seeding"""

from .config import ExperimentConfig, load_config, save_config
from .errors import (
    AcceptanceFailure,
    AgnosticRLError,
    ConfigError,
    FormatError,
    GuardExceeded,
    ValidationError,
)
from .seeding import derive_rng

__all__ = [
    "AcceptanceFailure",
    "AgnosticRLError",
    "ConfigError",
    "ExperimentConfig",
    "FormatError",
    "GuardExceeded",
    "ValidationError",
    "derive_rng",
    "load_config",
    "save_config",
]
