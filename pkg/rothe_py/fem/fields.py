"""Time-dependent data given as piecewise-linear samples, and the profiles that generate them."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, ClassVar, Dict, Sequence, Tuple

import numpy as np

from ..errors import TimeRangeError
from ..mesh import BidomainMesh

_TIME_SLACK = 1e-12


@dataclass(frozen=True)
class SampledField:
    """Values at fixed points, linear in time between sample instants.

    ``values[s]`` holds the field at ``times[s]``.  Evaluation outside
    ``[times[0], times[-1]]`` raises :class:`TimeRangeError`.
    """

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        times = np.array(self.times, dtype=float, copy=True).ravel()
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim == 1:
            values = values[:, None]
        if len(times) < 1 or values.shape[0] != len(times):
            raise ValueError("'values' must have one row per sample time.")
        if np.any(np.diff(times) <= 0):
            raise ValueError("Sample times must be strictly increasing.")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, values: Sequence[float], T: float) -> "SampledField":
        row = np.asarray(values, dtype=float)
        return cls(times=np.array([0.0, T]), values=np.vstack([row, row]))

    @property
    def n_points(self) -> int:
        return int(self.values.shape[1])

    @property
    def lipschitz(self) -> float:
        """Largest difference quotient between consecutive samples (sup over points)."""

        if len(self.times) < 2:
            return 0.0
        slopes = np.abs(np.diff(self.values, axis=0)) / np.diff(self.times)[:, None]
        return float(slopes.max(initial=0.0))

    def interpolation(self, t: float) -> Tuple[int, float]:
        """Index ``s`` and weight ``theta`` with ``value(t) = (1-theta) v[s] + theta v[s+1]``."""

        start, end = float(self.times[0]), float(self.times[-1])
        if t < start - _TIME_SLACK or t > end + _TIME_SLACK:
            raise TimeRangeError(f"t={t!r} outside the sampled range [{start}, {end}].")
        if len(self.times) == 1:
            return 0, 0.0
        t = min(max(t, start), end)
        s = int(np.searchsorted(self.times, t, side="right")) - 1
        s = min(max(s, 0), len(self.times) - 2)
        theta = (t - self.times[s]) / (self.times[s + 1] - self.times[s])
        return s, float(theta)

    def blend(self, samples: np.ndarray, t: float) -> np.ndarray:
        """Interpolate any per-sample array (e.g. precomputed load vectors) at ``t``."""

        s, theta = self.interpolation(t)
        if theta == 0.0:
            return np.array(samples[s], dtype=float)
        return (1.0 - theta) * samples[s] + theta * samples[s + 1]

    def at(self, t: float) -> np.ndarray:
        return self.blend(self.values, t)


def _zero(points: np.ndarray, t: float, amplitude: float) -> np.ndarray:
    return np.zeros(len(points))


def _constant(points: np.ndarray, t: float, amplitude: float) -> np.ndarray:
    return np.full(len(points), amplitude)


def _linear_t(points: np.ndarray, t: float, amplitude: float) -> np.ndarray:
    return np.full(len(points), amplitude * t)


def _sinxy(points: np.ndarray, t: float, amplitude: float) -> np.ndarray:
    x, y = points[:, 0], points[:, 1]
    return amplitude * np.sin(np.pi * x) * np.sin(np.pi * y) * (1.0 + t)


@dataclass(frozen=True)
class FieldSpec:
    """Analytic source profile sampled onto points at ``samples`` equispaced instants.

    Every profile is affine in time, so two samples reproduce it exactly.
    """

    kind: str = "zero"
    amplitude: float = 0.0
    samples: int = 2

    PROFILES: ClassVar[Dict[str, Callable[[np.ndarray, float, float], np.ndarray]]] = {
        "zero": _zero,
        "constant": _constant,
        "linear_t": _linear_t,
        "sinxy": _sinxy,
    }

    def __post_init__(self) -> None:
        if self.kind not in self.PROFILES:
            raise ValueError(f"Unknown field kind {self.kind!r}; expected one of {sorted(self.PROFILES)}.")
        if self.samples < 2:
            raise ValueError("'samples' must be at least 2.")

    def evaluate(self, points: np.ndarray, t: float) -> np.ndarray:
        return self.PROFILES[self.kind](np.asarray(points, dtype=float).reshape(-1, 2), t, self.amplitude)

    def sample(self, points: np.ndarray, T: float) -> SampledField:
        times = np.linspace(0.0, T, self.samples)
        return SampledField(times=times, values=np.vstack([self.evaluate(points, t) for t in times]))


@dataclass(frozen=True)
class InitialSpec:
    """Interface datum ``S`` at ``t = 0``.

    ``sin_profile`` is ``A sin(pi s / |Gamma|)`` on an open interface and
    ``A sin(2 pi s / |Gamma|)`` on a closed one, ``s`` being arclength.
    ``stationary`` defers to the stationary problem at ``t = 0``.
    """

    kind: str = "zero"
    amplitude: float = 0.0

    KINDS: ClassVar[Tuple[str, ...]] = ("zero", "constant", "sin_profile", "stationary")

    def __post_init__(self) -> None:
        if self.kind not in self.KINDS:
            raise ValueError(f"Unknown initial datum kind {self.kind!r}; expected one of {list(self.KINDS)}.")

    def profile(self, mesh: BidomainMesh) -> np.ndarray:
        count = len(mesh.interface_nodes)
        if self.kind == "constant":
            return np.full(count, self.amplitude)
        if self.kind == "sin_profile":
            s = mesh.interface_arclength()
            frequency = 2.0 if mesh.interface_closed else 1.0
            return self.amplitude * np.sin(frequency * np.pi * s / mesh.interface_length)
        return np.zeros(count)


__all__ = ["SampledField", "FieldSpec", "InitialSpec"]
