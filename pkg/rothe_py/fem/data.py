"""Problem data of the bidomain evolution problems and its assembled operators."""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from ..convex import JSpec, ProximalGaussSeidel, SolverSettings, ZeroFunctional
from ..errors import NumericError
from ..mesh import BidomainMesh, DofMap, InterfaceMode, Subdomain, build_dof_map
from .assembly import (
    InterfaceMass,
    assemble_interface_load,
    assemble_interface_mass,
    assemble_load,
    assemble_stiffness,
    assemble_tangential_stiffness,
    interface_selector,
)
from .fields import FieldSpec, InitialSpec, SampledField

_LOGGER = logging.getLogger(__name__)

_TRACE_TOLERANCE = 1e-12


def smooth_operator(
    mesh: BidomainMesh, dofmap: DofMap, sigma1: float, sigma2: float, beta: float = 0.0
) -> sp.csr_matrix:
    """``K_sigma + beta P^T K_Gamma P``: the stationary bilinear form without the ``alpha`` term."""

    stiffness = assemble_stiffness(mesh, dofmap, sigma1, sigma2)
    if dofmap.mode is InterfaceMode.BILATERAL or beta == 0.0:
        return stiffness
    selector = interface_selector(dofmap)
    tangential = assemble_tangential_stiffness(mesh, dofmap, beta)
    return (stiffness + selector.T @ tangential @ selector).tocsr()


def _omega1_anchored(mesh: BidomainMesh, dofmap: DofMap) -> bool:
    if dofmap.mode is InterfaceMode.CONTINUOUS:
        return True
    omega1_nodes = np.unique(mesh.elements[mesh.subdomain == Subdomain.OMEGA1])
    return bool(np.isin(omega1_nodes, mesh.dirichlet_nodes).any())


def _solve_reduced(operator: sp.spmatrix, rhs: np.ndarray, basis: sp.spmatrix, offset: np.ndarray) -> np.ndarray:
    if basis.shape[1] == 0:
        return offset
    reduced = (basis.T @ operator @ basis).tocsc()
    try:
        y = splu(reduced).solve(basis.T @ (rhs - operator @ offset))
    except RuntimeError as exc:
        raise NumericError(f"Stationary extension is singular: {exc}") from exc
    return basis @ y + offset


def pinned_extension(
    operator: sp.spmatrix,
    fixed: Sequence[int],
    values: Sequence[float],
    rhs: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Minimize ``1/2 u^T A u - rhs^T u`` with ``u[fixed] = values``."""

    n = operator.shape[0]
    fixed = np.asarray(fixed, dtype=np.int64)
    offset = np.zeros(n)
    offset[fixed] = np.asarray(values, dtype=float)
    free = np.setdiff1d(np.arange(n), fixed)
    basis = sp.csr_matrix((np.ones(len(free)), (free, np.arange(len(free)))), shape=(n, len(free)))
    rhs = np.zeros(n) if rhs is None else np.asarray(rhs, dtype=float)
    return _solve_reduced(operator, rhs, basis, offset)


def initial_state(
    mesh: BidomainMesh,
    dofmap: DofMap,
    S: Sequence[float],
    operator: sp.spmatrix,
    rhs: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Stationary extension of the interface datum ``S``.

    Minimizes ``1/2 u^T A u - rhs^T u`` over DOF vectors whose trace
    (continuous) or jump (bilateral) equals ``S``.  The constraint is
    eliminated: traces are fixed outright, and in bilateral mode the side-2
    DOF is tied to the side-1 DOF plus ``S``.
    """

    S = np.asarray(S, dtype=float)
    pairs = dofmap.interface_array()
    if S.shape != (len(pairs),):
        raise ValueError("'S' must have one value per interface node.")
    if dofmap.mode is InterfaceMode.CONTINUOUS:
        return pinned_extension(operator, pairs[:, 0], S, rhs)

    n = dofmap.n_dofs
    rhs = np.zeros(n) if rhs is None else np.asarray(rhs, dtype=float)
    offset = np.zeros(n)
    offset[pairs[:, 1]] = S
    free = np.setdiff1d(np.arange(n), pairs[:, 1])
    column = {int(dof): k for k, dof in enumerate(free)}
    rows = list(free) + [int(d2) for d2 in pairs[:, 1]]
    cols = list(range(len(free))) + [column[int(d1)] for d1 in pairs[:, 0]]
    basis = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, len(free)))
    return _solve_reduced(operator, rhs, basis, offset)


def stationary_solution(
    mesh: BidomainMesh,
    dofmap: DofMap,
    operator: sp.spmatrix,
    rhs: np.ndarray,
    jspec: JSpec,
    settings: Optional[SolverSettings] = None,
) -> np.ndarray:
    """Minimizer of ``1/2 u^T A u - rhs^T u + sum_k l_k j((P u)_k)``."""

    if not _omega1_anchored(mesh, dofmap):
        raise NumericError(
            "Stationary problem is singular: Omega1 has no Dirichlet boundary in the bilateral formulation."
        )
    lengths = mesh.lumped_interface_lengths()
    solver = ProximalGaussSeidel(operator, lengths, interface_selector(dofmap), jspec, settings)
    return solver.solve(rhs).values


@dataclass(frozen=True)
class ProblemData:
    """Coefficients, data and discretization of one evolution problem.

    The interface mode of ``dofmap`` selects the problem: continuous for the
    Wentzell transmission, bilateral for the Signorini one.  ``f`` is sampled
    at mesh nodes, ``g`` at interface nodes (bilateral only).  Assembled
    operators are computed lazily and cached.
    """

    mesh: BidomainMesh
    dofmap: DofMap
    sigma1: float
    sigma2: float
    alpha: float
    beta: float
    jspec: JSpec
    f: SampledField
    g: Optional[SampledField]
    S: np.ndarray
    u0: np.ndarray
    T: float
    m: int
    f_spec: Optional[FieldSpec] = None
    g_spec: Optional[FieldSpec] = None
    S_spec: Optional[InitialSpec] = None

    def __post_init__(self) -> None:
        if not (self.sigma1 > 0 and self.sigma2 > 0):
            raise ValueError("Conductivities 'sigma1' and 'sigma2' must be positive.")
        if not self.alpha > 0:
            raise ValueError("'alpha' must be positive.")
        if self.beta < 0:
            raise ValueError("'beta' must be non-negative.")
        if self.beta > 0 and self.dofmap.mode is InterfaceMode.BILATERAL:
            raise ValueError("'beta' applies only to the continuous (Wentzell) interface.")
        if not self.T > 0:
            raise ValueError("'T' must be positive.")
        if not isinstance(self.m, (int, np.integer)) or self.m < 1:
            raise ValueError("'m' must be a positive integer.")
        if self.f.n_points != self.mesh.n_nodes:
            raise ValueError("'f' must be sampled at every mesh node.")
        if self.f.times[0] > 1e-12 or self.f.times[-1] < self.T - 1e-12:
            raise ValueError("'f' samples must cover [0, T].")
        if self.g is not None:
            if self.g.n_points != self.dofmap.n_interface:
                raise ValueError("'g' must be sampled at every interface node.")
            if self.g.times[0] > 1e-12 or self.g.times[-1] < self.T - 1e-12:
                raise ValueError("'g' samples must cover [0, T].")

        S = np.array(self.S, dtype=float, copy=True).ravel()
        u0 = np.array(self.u0, dtype=float, copy=True).ravel()
        if S.shape != (self.dofmap.n_interface,):
            raise ValueError("'S' must have one value per interface node.")
        if u0.shape != (self.dofmap.n_dofs,):
            raise ValueError("'u0' must have one value per DOF.")
        scale = max(1.0, float(np.max(np.abs(u0), initial=0.0)))
        mismatch = float(np.max(np.abs(interface_selector(self.dofmap) @ u0 - S), initial=0.0))
        if mismatch > _TRACE_TOLERANCE * scale:
            raise ValueError(f"Trace/jump of 'u0' differs from 'S' by {mismatch!r}.")
        S.setflags(write=False)
        u0.setflags(write=False)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "u0", u0)

    # ------------------------------------------------------------------
    # Scalars
    # ------------------------------------------------------------------
    @property
    def mode(self) -> InterfaceMode:
        return self.dofmap.mode

    @property
    def h(self) -> float:
        return self.T / self.m

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.m + 1) * self.h

    @property
    def sigma_min(self) -> float:
        return min(self.sigma1, self.sigma2)

    @property
    def sigma_max(self) -> float:
        return max(self.sigma1, self.sigma2)

    @property
    def alpha_min(self) -> float:
        return self.alpha

    @property
    def alpha_max(self) -> float:
        return self.alpha

    @property
    def minimal_signorini_steps(self) -> int:
        """Smallest ``m`` with ``T/m <= alpha_min/sigma_min``."""

        return max(1, int(np.ceil(self.sigma_min * self.T / self.alpha_min - 1e-12)))

    # ------------------------------------------------------------------
    # Operators
    # ------------------------------------------------------------------
    @cached_property
    def interface_mass(self) -> InterfaceMass:
        return assemble_interface_mass(self.mesh, self.dofmap, self.alpha)

    @property
    def lengths(self) -> np.ndarray:
        return self.interface_mass.lengths

    @property
    def interface_weights(self) -> np.ndarray:
        return self.interface_mass.weights

    @property
    def selector(self) -> sp.csr_matrix:
        return self.interface_mass.selector

    @cached_property
    def stiffness(self) -> sp.csr_matrix:
        return assemble_stiffness(self.mesh, self.dofmap, self.sigma1, self.sigma2)

    @cached_property
    def tangential(self) -> sp.csr_matrix:
        """``beta P^T K_Gamma P`` on DOFs; empty in bilateral mode."""

        if self.mode is InterfaceMode.BILATERAL or self.beta == 0.0:
            return sp.csr_matrix((self.dofmap.n_dofs, self.dofmap.n_dofs))
        K_gamma = assemble_tangential_stiffness(self.mesh, self.dofmap, self.beta)
        return (self.selector.T @ K_gamma @ self.selector).tocsr()

    @cached_property
    def smooth_operator(self) -> sp.csr_matrix:
        return (self.stiffness + self.tangential).tocsr()

    @cached_property
    def _load_samples(self) -> np.ndarray:
        return np.vstack([assemble_load(self.mesh, self.dofmap, values) for values in self.f.values])

    @cached_property
    def _flux_samples(self) -> Optional[np.ndarray]:
        if self.g is None or self.mode is not InterfaceMode.BILATERAL:
            return None
        return np.vstack([assemble_interface_load(self.mesh, self.dofmap, values) for values in self.g.values])

    def load(self, t: float) -> np.ndarray:
        """``F(t)``: the volumetric load vector."""

        return self.f.blend(self._load_samples, t)

    def flux_load(self, t: float) -> np.ndarray:
        """``G(t)``: the interface flux load on side-1 traces (zero without ``g``)."""

        if self._flux_samples is None:
            return np.zeros(self.dofmap.n_dofs)
        return self.g.blend(self._flux_samples, t)

    def rhs(self, t: float) -> np.ndarray:
        return self.load(t) - self.flux_load(t)

    # ------------------------------------------------------------------
    # Derived problems
    # ------------------------------------------------------------------
    def with_steps(self, m: int) -> "ProblemData":
        return dataclasses.replace(self, m=m)

    def permuted(self, permutation: Sequence[int]) -> "ProblemData":
        """Same problem with DOF ``d`` renumbered to ``permutation[d]``."""

        perm = np.asarray(permutation, dtype=np.int64)
        u0 = np.empty_like(self.u0)
        u0[perm] = self.u0
        return dataclasses.replace(self, dofmap=self.dofmap.permuted(perm), u0=u0)


def build_problem(
    mesh: BidomainMesh,
    mode: Union[InterfaceMode, str],
    *,
    sigma1: float = 1.0,
    sigma2: float = 1.0,
    alpha: float = 1.0,
    beta: float = 0.0,
    jspec: Optional[JSpec] = None,
    f: Optional[FieldSpec] = None,
    g: Optional[FieldSpec] = None,
    S: Optional[InitialSpec] = None,
    T: float = 1.0,
    m: int = 10,
    settings: Optional[SolverSettings] = None,
) -> ProblemData:
    """Sample the analytic profiles on ``mesh`` and build a consistent :class:`ProblemData`.

    ``u0`` is the stationary extension of ``S``; with ``S.kind ==
    "stationary"`` it is the full stationary solution at ``t = 0`` (the
    compatible initial state) and ``S`` is read off its trace/jump.
    """

    mode = InterfaceMode.coerce(mode)
    jspec = jspec or ZeroFunctional()
    f = f or FieldSpec()
    S = S or InitialSpec()
    if not T > 0:
        raise ValueError("'T' must be positive.")
    dofmap = build_dof_map(mesh, mode)

    f_field = f.sample(mesh.nodes, T)
    g_field = None
    if mode is InterfaceMode.BILATERAL:
        g = g or FieldSpec()
        g_field = g.sample(mesh.nodes[mesh.interface_nodes], T)

    operator = smooth_operator(mesh, dofmap, sigma1, sigma2, beta if mode is InterfaceMode.CONTINUOUS else 0.0)
    rhs0 = assemble_load(mesh, dofmap, f_field, 0.0)
    if g_field is not None:
        rhs0 = rhs0 - assemble_interface_load(mesh, dofmap, g_field, 0.0)

    selector = interface_selector(dofmap)
    if S.kind == "stationary":
        u0 = stationary_solution(mesh, dofmap, operator, rhs0, jspec, settings)
        S_values = selector @ u0
    else:
        S_values = S.profile(mesh)
        u0 = initial_state(mesh, dofmap, S_values, operator, rhs0)
    _LOGGER.debug("Built %s problem: %d DOFs, m=%d, T=%g", mode.value, dofmap.n_dofs, m, T)

    return ProblemData(
        mesh=mesh,
        dofmap=dofmap,
        sigma1=sigma1,
        sigma2=sigma2,
        alpha=alpha,
        beta=beta,
        jspec=jspec,
        f=f_field,
        g=g_field,
        S=S_values,
        u0=u0,
        T=T,
        m=m,
        f_spec=f,
        g_spec=g,
        S_spec=S,
    )


__all__ = [
    "ProblemData",
    "build_problem",
    "initial_state",
    "pinned_extension",
    "smooth_operator",
    "stationary_solution",
]
