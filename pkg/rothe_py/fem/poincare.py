"""Discrete generalized Poincare constant of the bilateral space."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.sparse.linalg import splu

from ..errors import ModeError, NumericError
from ..mesh import BidomainMesh, DofMap, InterfaceMode, Subdomain
from .assembly import assemble_energy_gram, assemble_mass

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class PoincareEstimate:
    """``constant = 1 / eigenvalue`` with the Rayleigh quotients of every iteration."""

    constant: float
    eigenvalue: float
    iterations: int
    trace: Tuple[float, ...]


def poincare_estimate(
    mesh: BidomainMesh,
    dofmap: DofMap,
    *,
    rtol: float = 1e-8,
    max_iter: int = 1000,
) -> PoincareEstimate:
    """Smallest ``C`` with ``int_Omega1 v1^2 <= C (int |grad v|^2 + int_Gamma [v]^2)``.

    Inverse power iteration on the pencil ``G x = lambda M1 x`` where ``G`` is
    the bilateral energy Gram matrix and ``M1`` the consistent mass of
    ``Omega1``; converged when successive Rayleigh quotients agree to ``rtol``.
    """

    if dofmap.mode is not InterfaceMode.BILATERAL:
        raise ModeError("The generalized Poincare constant is defined on the bilateral space.")
    gram = assemble_energy_gram(mesh, dofmap).tocsc()
    mass = assemble_mass(mesh, dofmap, (Subdomain.OMEGA1,))
    try:
        factor = splu(gram)
    except RuntimeError as exc:
        raise NumericError(f"Energy Gram matrix is singular: {exc}") from exc

    x = factor.solve(mass @ np.ones(dofmap.n_dofs))
    trace = []
    previous = np.inf
    for iteration in range(1, max_iter + 1):
        norm = float(np.sqrt(x @ (mass @ x)))
        if not norm > 0:
            raise NumericError("Iterate lost its Omega1 component.", trace)
        x = x / norm
        quotient = float(x @ (gram @ x))
        trace.append(quotient)
        if abs(quotient - previous) <= rtol * quotient:
            _LOGGER.debug("Poincare iteration converged after %d steps: lambda=%.12g", iteration, quotient)
            return PoincareEstimate(1.0 / quotient, quotient, iteration, tuple(trace))
        previous = quotient
        x = factor.solve(mass @ x)
    raise NumericError(f"Inverse iteration did not converge within {max_iter} steps.", trace)


def poincare_constant(mesh: BidomainMesh, dofmap: DofMap, **kwargs) -> float:
    return poincare_estimate(mesh, dofmap, **kwargs).constant


__all__ = ["PoincareEstimate", "poincare_estimate", "poincare_constant"]
