"""Catalog of convex, lower-semicontinuous interface functionals ``j``.

Every functional satisfies ``j >= 0`` and ``j(0) = 0``.  Besides its value,
each one exposes the proximal map

    prox_w(x) = argmin_v  1/2 (v - x)^2 + w j(v)

and its subdifferential as a closed interval, which the solver and the KKT
checks rely on.  All methods accept scalars or numpy arrays.
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass
from typing import Any, ClassVar, Dict, Optional, Tuple, Type, Union

import numpy as np

ArrayLike = Union[float, np.ndarray]


class JSpec(ABC):
    """Base class for interface functionals."""

    kind: ClassVar[str]
    #: ``j(d) <= C (d^2 + 1)`` for all ``d``.
    has_quadratic_growth: ClassVar[bool] = True

    @abstractmethod
    def value(self, x: ArrayLike) -> ArrayLike:
        """Evaluate ``j``; ``+inf`` outside the effective domain."""

    @abstractmethod
    def prox(self, x: ArrayLike, w: ArrayLike) -> ArrayLike:
        """Proximal map with weight ``w > 0``."""

    @abstractmethod
    def subdifferential(self, x: ArrayLike, atol: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
        """Lower/upper ends of ``dj(x)``; points within ``atol`` of a kink count as the kink."""

    def prox_scalar(self, x: float, w: float) -> float:
        """Scalar fast path used inside coordinate sweeps."""

        return float(self.prox(x, w))

    @property
    def quadratic_coefficient(self) -> Optional[float]:
        """``c`` when ``j(x) = c x^2`` (smooth quadratic), else ``None``."""

        return None

    def parameters(self) -> Dict[str, float]:
        return asdict(self) if hasattr(self, "__dataclass_fields__") else {}

    def total(self, x: ArrayLike, weights: ArrayLike) -> float:
        """``sum_k weights_k j(x_k)`` with ``0 * inf`` treated as ``inf``."""

        values = np.asarray(self.value(x), dtype=float)
        if np.any(np.isinf(values)):
            return float("inf")
        return float(np.dot(np.asarray(weights, dtype=float).ravel(), values.ravel()))

    def subgradient_distance(self, x: ArrayLike, y: ArrayLike, atol: float = 1e-10) -> np.ndarray:
        """Distance from ``y`` to ``dj(x)`` (0 when the inclusion holds)."""

        lo, hi = self.subdifferential(x, atol=atol)
        y = np.asarray(y, dtype=float)
        below = np.where(y < lo, lo - y, 0.0)
        above = np.where(y > hi, y - hi, 0.0)
        empty = lo > hi
        return np.where(empty, np.inf, np.maximum(below, above))


@dataclass(frozen=True)
class ZeroFunctional(JSpec):
    kind: ClassVar[str] = "zero"

    def value(self, x: ArrayLike) -> ArrayLike:
        return np.zeros_like(np.asarray(x, dtype=float)) if np.ndim(x) else 0.0

    def prox(self, x: ArrayLike, w: ArrayLike) -> ArrayLike:
        return np.asarray(x, dtype=float) if np.ndim(x) else float(x)

    def subdifferential(self, x: ArrayLike, atol: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
        zeros = np.zeros_like(np.asarray(x, dtype=float))
        return zeros, zeros.copy()

    @property
    def quadratic_coefficient(self) -> Optional[float]:
        return 0.0


@dataclass(frozen=True)
class AbsoluteValue(JSpec):
    """``j(x) = lam |x|``."""

    lam: float
    kind: ClassVar[str] = "absval"

    def __post_init__(self) -> None:
        if not self.lam > 0:
            raise ValueError("'lam' must be positive for the absolute value functional.")

    def value(self, x: ArrayLike) -> ArrayLike:
        return self.lam * np.abs(x)

    def prox(self, x: ArrayLike, w: ArrayLike) -> ArrayLike:
        x = np.asarray(x, dtype=float)
        result = np.sign(x) * np.maximum(np.abs(x) - np.asarray(w) * self.lam, 0.0)
        return result if result.ndim else float(result)

    def prox_scalar(self, x: float, w: float) -> float:
        shift = w * self.lam
        if x > shift:
            return x - shift
        if x < -shift:
            return x + shift
        return 0.0

    def subdifferential(self, x: ArrayLike, atol: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        kink = np.abs(x) <= atol
        slope = self.lam * np.sign(x)
        return np.where(kink, -self.lam, slope), np.where(kink, self.lam, slope)


@dataclass(frozen=True)
class PositivePart(JSpec):
    """``j(x) = lam max(x, 0)``; its subdifferential is a scaled Heaviside graph."""

    lam: float
    kind: ClassVar[str] = "positive_part"

    def __post_init__(self) -> None:
        if not self.lam > 0:
            raise ValueError("'lam' must be positive for the positive part functional.")

    def value(self, x: ArrayLike) -> ArrayLike:
        return self.lam * np.maximum(x, 0.0)

    def prox(self, x: ArrayLike, w: ArrayLike) -> ArrayLike:
        x = np.asarray(x, dtype=float)
        shift = np.asarray(w) * self.lam
        result = np.where(x > shift, x - shift, np.where(x < 0.0, x, 0.0))
        return result if result.ndim else float(result)

    def prox_scalar(self, x: float, w: float) -> float:
        shift = w * self.lam
        if x > shift:
            return x - shift
        if x < 0.0:
            return x
        return 0.0

    def subdifferential(self, x: ArrayLike, atol: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        kink = np.abs(x) <= atol
        slope = np.where(x > 0.0, self.lam, 0.0)
        return np.where(kink, 0.0, slope), np.where(kink, self.lam, slope)


@dataclass(frozen=True)
class QuadraticFunctional(JSpec):
    """``j(x) = c x^2``."""

    c: float
    kind: ClassVar[str] = "quadratic"

    def __post_init__(self) -> None:
        if not self.c > 0:
            raise ValueError("'c' must be positive for the quadratic functional.")

    def value(self, x: ArrayLike) -> ArrayLike:
        return self.c * np.square(x)

    def prox(self, x: ArrayLike, w: ArrayLike) -> ArrayLike:
        result = np.asarray(x, dtype=float) / (1.0 + 2.0 * np.asarray(w) * self.c)
        return result if result.ndim else float(result)

    def subdifferential(self, x: ArrayLike, atol: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
        slope = 2.0 * self.c * np.asarray(x, dtype=float)
        return slope, slope.copy()

    @property
    def quadratic_coefficient(self) -> Optional[float]:
        return self.c


@dataclass(frozen=True)
class IntervalIndicator(JSpec):
    """Indicator of ``[a, b]`` with ``a <= 0 <= b``."""

    a: float
    b: float
    kind: ClassVar[str] = "interval"
    has_quadratic_growth: ClassVar[bool] = False

    def __post_init__(self) -> None:
        if not (self.a <= 0.0 <= self.b):
            raise ValueError("Interval indicator requires a <= 0 <= b.")

    def value(self, x: ArrayLike) -> ArrayLike:
        x = np.asarray(x, dtype=float)
        result = np.where((x >= self.a) & (x <= self.b), 0.0, np.inf)
        return result if result.ndim else float(result)

    def prox(self, x: ArrayLike, w: ArrayLike) -> ArrayLike:
        result = np.clip(np.asarray(x, dtype=float), self.a, self.b)
        return result if result.ndim else float(result)

    def prox_scalar(self, x: float, w: float) -> float:
        return min(max(x, self.a), self.b)

    def subdifferential(self, x: ArrayLike, atol: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        at_a = np.abs(x - self.a) <= atol
        at_b = np.abs(x - self.b) <= atol
        inside = (x > self.a) & (x < self.b)
        lo = np.where(at_a, -np.inf, np.where(inside | at_b, 0.0, np.inf))
        hi = np.where(at_b, np.inf, np.where(inside | at_a, 0.0, -np.inf))
        return lo, hi


JSPECS: Dict[str, Type[JSpec]] = {
    "zero": ZeroFunctional,
    "absval": AbsoluteValue,
    "positive_part": PositivePart,
    "quadratic": QuadraticFunctional,
    "interval": IntervalIndicator,
}


def make_jspec(kind: str, **params: Any) -> JSpec:
    """Instantiate a functional by its catalog identifier.

    Unused parameters are ignored so that a full ``[j]`` config section can be
    passed through unchanged.
    """

    if kind not in JSPECS:
        raise KeyError(f"Unknown interface functional: {kind!r}")
    spec_type = JSPECS[kind]
    accepted = getattr(spec_type, "__dataclass_fields__", {})
    return spec_type(**{name: value for name, value in params.items() if name in accepted})


def j_value(spec: JSpec, x: ArrayLike) -> ArrayLike:
    return spec.value(x)


def j_prox(spec: JSpec, x: ArrayLike, w: ArrayLike) -> ArrayLike:
    if np.any(np.asarray(w) <= 0):
        raise ValueError("Proximal weight must be positive.")
    return spec.prox(x, w)


__all__ = [
    "JSpec",
    "ZeroFunctional",
    "AbsoluteValue",
    "PositivePart",
    "QuadraticFunctional",
    "IntervalIndicator",
    "JSPECS",
    "make_jspec",
    "j_value",
    "j_prox",
]
