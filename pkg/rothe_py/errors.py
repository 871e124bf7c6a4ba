"""Exception hierarchy shared by every ``rothe_py`` subpackage."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple


class RotheError(Exception):
    """Base class for all errors raised by ``rothe_py``."""


@dataclass(frozen=True)
class ConfigIssue:
    """A single problem found while validating a configuration."""

    line: int
    section: str
    key: str
    message: str

    def __str__(self) -> str:
        location = f"line {self.line}" if self.line > 0 else "line ?"
        target = f"[{self.section}] {self.key}" if self.key else f"[{self.section}]"
        return f"{location}: {target}: {self.message}"


class ConfigError(RotheError, ValueError):
    """Raised with every issue found in a configuration, not just the first."""

    def __init__(self, issues: Sequence[ConfigIssue]) -> None:
        self.issues: Tuple[ConfigIssue, ...] = tuple(issues)
        super().__init__("\n".join(str(issue) for issue in self.issues))


class GeometryError(RotheError, ValueError):
    """Mesh or thin-layer band cannot be built as requested."""


class ModeError(RotheError, ValueError):
    """Operation called with a DOF map of the wrong interface mode."""


class CoercivityError(RotheError, ValueError):
    """Signorini step size exceeds the coercivity threshold ``alpha/sigma``."""

    def __init__(self, message: str, minimal_m: int) -> None:
        self.minimal_m = minimal_m
        super().__init__(message)


class IneligibleFunctionalError(RotheError, ValueError):
    """Interface functional violates the quadratic growth bound."""


class UnsupportedSizeError(RotheError, ValueError):
    """Brute-force oracle asked to search too many unknowns."""


class TimeRangeError(RotheError, ValueError):
    """Time-dependent data evaluated outside ``[0, T]``."""


class ConvergenceError(RotheError, RuntimeError):
    """Iterative solver ran out of sweeps."""

    def __init__(self, message: str, energy_trace: Sequence[float]) -> None:
        self.energy_trace: Tuple[float, ...] = tuple(energy_trace)
        super().__init__(message)


class NumericError(RotheError, ArithmeticError):
    """Loss of definiteness or a failed factorization/eigen iteration."""

    def __init__(self, message: str, trace: Optional[Sequence[float]] = None) -> None:
        self.trace: Tuple[float, ...] = tuple(trace or ())
        super().__init__(message)


__all__ = [
    "RotheError",
    "ConfigIssue",
    "ConfigError",
    "GeometryError",
    "ModeError",
    "CoercivityError",
    "IneligibleFunctionalError",
    "UnsupportedSizeError",
    "TimeRangeError",
    "ConvergenceError",
    "NumericError",
]
