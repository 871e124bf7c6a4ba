"""The thin-layer problem and its convergence to the dynamic interface condition.

The dynamics live in the band ``S_eps`` instead of on ``Gamma``: the step
problem carries ``int_{S_eps} alpha / (eps gamma h) (u - u^i) v dx`` and
``int_{S_eps} j(u) / (eps gamma) dx``, both lumped on the band nodes with
weights ``w_k``.  The band has unit conductivity and no source.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import scipy.sparse as sp

from ..convex import SolverSettings
from ..errors import GeometryError, IneligibleFunctionalError
from ..fem import ProblemData, assemble_load, assemble_stiffness, build_problem, pinned_extension
from ..mesh import Geometry, InterfaceMode, build_dof_map, build_inclusion_mesh
from ..metrics import series_l2_sigma
from ..rothe import RotheScheme, RotheTrajectory, run_wentzell
from .layer import GammaLike, LayerMesh, build_layer_mesh, layer_average_matrix

_LOGGER = logging.getLogger(__name__)

_CONTRACTION_SLACK = 1e-12


def _check_eligible(data: ProblemData) -> None:
    if not data.jspec.has_quadratic_growth:
        raise IneligibleFunctionalError(
            f"Functional {data.jspec.kind!r} does not satisfy j(d) <= C (d^2 + 1); the thin-layer problem needs it."
        )
    if data.beta != 0.0:
        raise ValueError("The thin-layer limit holds only for beta = 0.")


class LayerScheme(RotheScheme):
    """Rothe stepping with the dynamic terms spread over the band nodes."""

    mode = InterfaceMode.CONTINUOUS

    def __init__(self, layer: LayerMesh, settings: Optional[SolverSettings] = None) -> None:
        super().__init__(settings)
        self.layer = layer
        nodes, weights = layer.node_weights()
        self._nodes = nodes
        self._weights = weights
        self._selector: Optional[sp.csr_matrix] = None

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    def layer_dofs(self, data: ProblemData) -> np.ndarray:
        return data.dofmap.node_dofs[self._nodes, 0]

    def _bind(self, data: ProblemData) -> None:
        if data.mesh is not self.layer.mesh:
            raise ValueError("Problem data does not live on this layer mesh.")
        if self._data is not data:
            self._selector = None
        super()._bind(data)

    def dynamic_selector(self, data: ProblemData) -> sp.csr_matrix:
        if self._selector is None:
            dofs = self.layer_dofs(data)
            self._selector = sp.csr_matrix(
                (np.ones(len(dofs)), (np.arange(len(dofs)), dofs)), shape=(len(dofs), data.dofmap.n_dofs)
            )
        return self._selector

    def mass_weights(self, data: ProblemData) -> np.ndarray:
        return data.alpha * self._weights

    def j_weights(self, data: ProblemData) -> np.ndarray:
        return self._weights

    def check_step(self, data: ProblemData, h: float) -> None:
        return None

    def check_steps(self, data: ProblemData) -> None:
        _check_eligible(data)

    def layer_norms(self, traj: RotheTrajectory, data: ProblemData, *, weighted: bool = True) -> np.ndarray:
        """``(sum_k c_k w_k u_k^2)^{1/2}`` per step, ``c = alpha`` when weighted."""

        values = traj.steps[:, self.layer_dofs(data)]
        scale = data.alpha if weighted else 1.0
        return np.sqrt(scale * (np.square(values) @ self._weights))


def _same_grid(data: ProblemData, layer: LayerMesh) -> bool:
    return data.mesh.nodes.shape == layer.mesh.nodes.shape and np.array_equal(data.mesh.nodes, layer.mesh.nodes)


def _same_interface(data: ProblemData, layer: LayerMesh) -> bool:
    ours = data.mesh.nodes[data.mesh.interface_nodes]
    theirs = layer.mesh.nodes[layer.mesh.interface_nodes]
    return ours.shape == theirs.shape and np.allclose(ours, theirs, rtol=0.0, atol=1e-12)


def _projected_interface_values(layer: LayerMesh, S: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    """``S`` at the closest point of ``Gamma`` for every band node."""

    n = layer.n
    grid = np.rint(layer.mesh.nodes * n).astype(np.int64)
    position: Dict[Tuple[int, int], int] = {
        (int(grid[node, 0]), int(grid[node, 1])): k for k, node in enumerate(layer.mesh.interface_nodes)
    }
    lo, hi = n // 4, 3 * n // 4
    projected = np.clip(grid[nodes], lo, hi)
    return np.asarray([S[position[(int(i), int(j))]] for i, j in projected], dtype=float)


def layer_problem(data: ProblemData, layer: LayerMesh) -> ProblemData:
    """Map continuous problem data onto ``layer``.

    ``u0`` is ``S`` extended constantly across the band (each band node takes
    the value at its closest point on ``Gamma``) and the stationary extension
    of those values elsewhere.
    """

    if data.mode is not InterfaceMode.CONTINUOUS:
        raise ValueError("The thin-layer problem perturbs the continuous (Wentzell) interface.")
    _check_eligible(data)

    if _same_grid(data, layer):
        f_field = data.f
    elif data.f_spec is not None:
        f_field = data.f_spec.sample(layer.mesh.nodes, data.T)
    else:
        raise ValueError("Resampling 'f' on a different grid needs its FieldSpec.")

    if _same_interface(data, layer):
        S_values = np.asarray(data.S, dtype=float)
    elif data.S_spec is not None and data.S_spec.kind != "stationary":
        S_values = data.S_spec.profile(layer.mesh)
    else:
        raise ValueError("Resampling 'S' on a different grid needs a non-stationary InitialSpec.")

    dofmap = build_dof_map(layer.mesh, InterfaceMode.CONTINUOUS)
    nodes = layer.layer_nodes
    operator = assemble_stiffness(layer.mesh, dofmap, data.sigma1, data.sigma2)
    rhs0 = assemble_load(layer.mesh, dofmap, f_field, 0.0)
    u0 = pinned_extension(
        operator, dofmap.node_dofs[nodes, 0], _projected_interface_values(layer, S_values, nodes), rhs0
    )
    return ProblemData(
        mesh=layer.mesh,
        dofmap=dofmap,
        sigma1=data.sigma1,
        sigma2=data.sigma2,
        alpha=data.alpha,
        beta=0.0,
        jspec=data.jspec,
        f=f_field,
        g=None,
        S=S_values,
        u0=u0,
        T=data.T,
        m=data.m,
        f_spec=data.f_spec,
        S_spec=data.S_spec,
    )


def run_perturbed(
    data: ProblemData, layer: LayerMesh, m: Optional[int] = None, settings: Optional[SolverSettings] = None
) -> RotheTrajectory:
    """Solve the thin-layer problem for the data of a continuous problem."""

    perturbed = layer_problem(data, layer)
    if m is not None:
        perturbed = perturbed.with_steps(m)
    return LayerScheme(layer, settings).process(perturbed)


def layer_contraction_violations(scheme: LayerScheme, traj: RotheTrajectory, data: ProblemData) -> np.ndarray:
    """Per-step increase of the ``alpha``-weighted band norm beyond round-off (zero when contracting)."""

    norms = scheme.layer_norms(traj, data)
    growth = norms[1:] - norms[:-1] * (1.0 + _CONTRACTION_SLACK) - _CONTRACTION_SLACK
    return np.maximum(growth, 0.0)


@dataclass(frozen=True)
class ThinLayerRun:
    epsilon: float
    band_cells: Tuple[int, int, int, int]
    thickness: Tuple[float, float, float, float]
    distance: float
    layer_norm_bound: float

    @property
    def band_width_cells(self) -> int:
        return max(self.band_cells)


@dataclass(frozen=True)
class ThinLayerStudy:
    """Distances between band averages and the interface trace, one row per ``eps``."""

    n: int
    m: int
    runs: Tuple[ThinLayerRun, ...]

    @property
    def epsilons(self) -> np.ndarray:
        return np.asarray([run.epsilon for run in self.runs])

    @property
    def distances(self) -> np.ndarray:
        return np.asarray([run.distance for run in self.runs])

    @property
    def strictly_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.distances) < 0))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "epsilon": self.epsilons,
                "band_width_cells": [run.band_width_cells for run in self.runs],
                "effective_thickness": [max(run.thickness) for run in self.runs],
                "distance_L2SigmaGamma": self.distances,
                "layer_norm_bound": [run.layer_norm_bound for run in self.runs],
            },
            columns=["epsilon", "band_width_cells", "effective_thickness", "distance_L2SigmaGamma", "layer_norm_bound"],
        )


def _grid_size(data: ProblemData) -> int:
    if data.mesh.geometry is not Geometry.INCLUSION:
        raise GeometryError("The thin-layer study runs on the inclusion geometry.")
    return math.isqrt(data.mesh.n_nodes) - 1


def _reference_data(data: ProblemData, n: int, settings: Optional[SolverSettings]) -> ProblemData:
    if data.f_spec is None or data.S_spec is None:
        raise ValueError("Changing the grid of the reference problem needs the FieldSpec/InitialSpec of its data.")
    return build_problem(
        build_inclusion_mesh(n),
        InterfaceMode.CONTINUOUS,
        sigma1=data.sigma1,
        sigma2=data.sigma2,
        alpha=data.alpha,
        beta=0.0,
        jspec=data.jspec,
        f=data.f_spec,
        S=data.S_spec,
        T=data.T,
        m=data.m,
        settings=settings,
    )


def convergence_study(
    data: ProblemData,
    eps_list: Sequence[float],
    n: Optional[int] = None,
    m: Optional[int] = None,
    *,
    gamma: GammaLike = 1.0,
    settings: Optional[SolverSettings] = None,
    max_workers: int = 0,
) -> ThinLayerStudy:
    """Compare thin-layer runs with the ``beta = 0`` Wentzell solution of ``data``.

    For each ``eps`` the band averages of ``u_eps`` are compared with the
    interface trace of the reference run in the discrete ``L^2(0, T; L^2(Gamma))``
    norm.  ``n``/``m`` resample ``data`` on another inclusion grid or time grid.
    """

    eps = [float(value) for value in eps_list]
    if not eps:
        raise ValueError("'eps_list' must not be empty.")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("'eps_list' must be strictly decreasing.")
    if data.mode is not InterfaceMode.CONTINUOUS:
        raise ValueError("The thin-layer study needs continuous (Wentzell) data.")
    _check_eligible(data)

    grid_size = _grid_size(data)
    if n is not None and n != grid_size:
        data = _reference_data(data, n, settings)
        grid_size = n
    if m is not None and m != data.m:
        data = data.with_steps(m)

    _LOGGER.info("Thin-layer study: n=%d m=%d eps=%s", grid_size, data.m, eps)
    reference = run_wentzell(data, settings)
    layers = [build_layer_mesh(grid_size, value, gamma) for value in eps]

    def member(layer: LayerMesh) -> ThinLayerRun:
        perturbed = layer_problem(data, layer)
        scheme = LayerScheme(layer, settings)
        traj = scheme.process(perturbed)
        averages = (layer_average_matrix(layer, perturbed.dofmap) @ traj.steps.T).T
        distance = series_l2_sigma(averages - reference.interface_series, reference.lengths, reference.h)
        bound = float(scheme.layer_norms(traj, perturbed, weighted=False).max(initial=0.0))
        _LOGGER.debug("eps=%g (%s cells): distance=%.6e", layer.epsilon, layer.band_cells, distance)
        return ThinLayerRun(
            epsilon=layer.epsilon,
            band_cells=layer.band_cells,
            thickness=layer.thickness,
            distance=distance,
            layer_norm_bound=bound,
        )

    if max_workers > 0:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            runs: List[ThinLayerRun] = list(pool.map(member, layers))
    else:
        runs = [member(layer) for layer in layers]
    return ThinLayerStudy(n=grid_size, m=data.m, runs=tuple(runs))


__all__ = [
    "LayerScheme",
    "ThinLayerRun",
    "ThinLayerStudy",
    "convergence_study",
    "layer_contraction_violations",
    "layer_problem",
    "run_perturbed",
]
