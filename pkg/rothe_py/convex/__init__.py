"""Interface functionals and the variational-inequality solver."""

from .functionals import (
    JSPECS,
    AbsoluteValue,
    IntervalIndicator,
    JSpec,
    PositivePart,
    QuadraticFunctional,
    ZeroFunctional,
    j_prox,
    j_value,
    make_jspec,
)
from .solver import (
    ProximalGaussSeidel,
    SolverSettings,
    VISolution,
    brute_force_vi,
    solve_vi,
    vi_energy,
)

__all__ = [
    "JSPECS",
    "AbsoluteValue",
    "IntervalIndicator",
    "JSpec",
    "PositivePart",
    "QuadraticFunctional",
    "ZeroFunctional",
    "j_prox",
    "j_value",
    "make_jspec",
    "ProximalGaussSeidel",
    "SolverSettings",
    "VISolution",
    "brute_force_vi",
    "solve_vi",
    "vi_energy",
]
