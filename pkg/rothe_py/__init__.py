"""Rothe time discretization of bidomain problems with dynamic transmission conditions."""

__version__ = "0.1.0"

from .api import run_config, run_path, validate_path  # noqa: E402
from .errors import (  # noqa: E402
    CoercivityError,
    ConfigError,
    ConvergenceError,
    GeometryError,
    IneligibleFunctionalError,
    ModeError,
    NumericError,
    RotheError,
)

__all__ = [
    "__version__",
    "run_config",
    "run_path",
    "validate_path",
    "CoercivityError",
    "ConfigError",
    "ConvergenceError",
    "GeometryError",
    "IneligibleFunctionalError",
    "ModeError",
    "NumericError",
    "RotheError",
]
