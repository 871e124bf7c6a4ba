"""Assembly of the per-step bilinear forms, loads and problem data."""

from .assembly import (
    InterfaceMass,
    SparseSpdSystem,
    assemble_energy_gram,
    assemble_interface_load,
    assemble_interface_mass,
    assemble_load,
    assemble_mass,
    assemble_stiffness,
    assemble_tangential_stiffness,
    element_gradients,
    interface_selector,
    lumped_volumes,
)
from .data import (
    ProblemData,
    build_problem,
    initial_state,
    pinned_extension,
    smooth_operator,
    stationary_solution,
)
from .fields import FieldSpec, InitialSpec, SampledField
from .poincare import PoincareEstimate, poincare_constant, poincare_estimate

__all__ = [
    "InterfaceMass",
    "SparseSpdSystem",
    "assemble_energy_gram",
    "assemble_interface_load",
    "assemble_interface_mass",
    "assemble_load",
    "assemble_mass",
    "assemble_stiffness",
    "assemble_tangential_stiffness",
    "element_gradients",
    "interface_selector",
    "lumped_volumes",
    "ProblemData",
    "build_problem",
    "initial_state",
    "pinned_extension",
    "smooth_operator",
    "stationary_solution",
    "FieldSpec",
    "InitialSpec",
    "SampledField",
    "PoincareEstimate",
    "poincare_constant",
    "poincare_estimate",
]
