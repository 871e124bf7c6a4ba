"""Rothe time stepping, a priori estimates and regularity diagnostics."""

from .drivers import (
    RotheScheme,
    SignoriniScheme,
    WentzellScheme,
    interface_kkt_residual,
    run_problem,
    run_signorini,
    run_wentzell,
    signorini_step,
    wentzell_step,
)
from .estimates import (
    EstimateRecord,
    EstimateReport,
    EstimateSweep,
    check_estimates,
    estimate_sweep,
    sup_interface_derivative,
)
from .regularity import RegularityReport, compatibility_residual, regularity_diagnostics, stationary_state
from .trajectory import RotheTrajectory

__all__ = [
    "RotheScheme",
    "SignoriniScheme",
    "WentzellScheme",
    "interface_kkt_residual",
    "run_problem",
    "run_signorini",
    "run_wentzell",
    "signorini_step",
    "wentzell_step",
    "EstimateRecord",
    "EstimateReport",
    "EstimateSweep",
    "check_estimates",
    "estimate_sweep",
    "sup_interface_derivative",
    "RegularityReport",
    "compatibility_residual",
    "regularity_diagnostics",
    "stationary_state",
    "RotheTrajectory",
]
