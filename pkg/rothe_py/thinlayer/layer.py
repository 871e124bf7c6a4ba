"""Inclusion meshes with a thin band ``S_eps`` of thickness ``eps * gamma`` around ``Omega1``.

The band is the axis-aligned offset of the inner square, completed at the
four corners by rectangular corner blocks, so it is tiled by whole grid
cells.  Thicknesses are snapped to integer cell counts per side.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from ..errors import GeometryError
from ..mesh import BidomainMesh, DofMap, Geometry, Subdomain, build_tagged_grid_mesh
from ..mesh.geometry import _unit_grid, band_cell_count, inclusion_cell_tags, max_band_cells

_LOGGER = logging.getLogger(__name__)

#: Side order of per-side thickness profiles.
SIDES = ("left", "bottom", "right", "top")

GammaLike = Union[float, Sequence[float]]


def _gamma_tuple(gamma: GammaLike) -> Tuple[float, float, float, float]:
    values = (float(gamma),) * 4 if np.isscalar(gamma) else tuple(float(g) for g in gamma)
    if len(values) != 4:
        raise ValueError("'gamma' must be a scalar or one value per side (left, bottom, right, top).")
    if any(not g > 0 for g in values):
        raise ValueError("'gamma' must be positive on every side.")
    return values  # type: ignore[return-value]


@dataclass(frozen=True)
class LayerMesh:
    """Inclusion mesh whose band cells carry the ``LAYER`` tag."""

    mesh: BidomainMesh
    n: int
    epsilon: float
    gamma: Tuple[float, float, float, float]
    band_cells: Tuple[int, int, int, int]

    @property
    def thickness(self) -> Tuple[float, float, float, float]:
        """Effective ``eps * gamma`` per side after snapping."""

        return tuple(cells / self.n for cells in self.band_cells)  # type: ignore[return-value]

    @property
    def band_width_cells(self) -> int:
        return max(self.band_cells)

    @property
    def layer_elements(self) -> np.ndarray:
        return np.flatnonzero(self.mesh.subdomain == Subdomain.LAYER)

    @property
    def layer_area(self) -> float:
        return float(self.mesh.signed_areas[self.layer_elements].sum())

    @property
    def layer_nodes(self) -> np.ndarray:
        """Vertices of band elements, including those on ``Gamma`` and ``Gamma_eps``."""

        return np.unique(self.mesh.elements[self.layer_elements])

    def element_thickness(self) -> np.ndarray:
        """``eps * gamma`` per element; corner blocks use the mean of the two adjacent sides."""

        thickness = np.full(self.mesh.n_elements, np.nan)
        lo, hi = self.n // 4, 3 * self.n // 4
        left, bottom, right, top = self.thickness
        for e in self.layer_elements:
            cell = e // 2
            j, i = divmod(cell, self.n)
            horizontal = left if i < lo else right if i >= hi else None
            vertical = bottom if j < lo else top if j >= hi else None
            sides = [value for value in (horizontal, vertical) if value is not None]
            thickness[e] = sum(sides) / len(sides)
        return thickness

    def node_weights(self) -> Tuple[np.ndarray, np.ndarray]:
        """Layer nodes and their lumped ``int_{S_eps} phi_k / (eps gamma) dx``."""

        areas = np.where(self.mesh.subdomain == Subdomain.LAYER, self.mesh.signed_areas, 0.0)
        thickness = self.element_thickness()
        shares = np.zeros(self.mesh.n_elements)
        layer = self.layer_elements
        shares[layer] = areas[layer] / (3.0 * thickness[layer])
        weights = np.bincount(
            self.mesh.elements.ravel(), weights=np.repeat(shares, 3), minlength=self.mesh.n_nodes
        )
        nodes = self.layer_nodes
        return nodes, weights[nodes]


def build_layer_mesh(n: int, epsilon: float, gamma: GammaLike = 1.0) -> LayerMesh:
    """Tag a band of ``round(eps * gamma * n)`` cells per side around ``Omega1``.

    Raises :class:`GeometryError` when a side gets no cell or the band would
    leave no ``Omega2`` cell between it and the outer boundary.
    """

    if not isinstance(n, (int, np.integer)) or n < 4 or n % 4 != 0:
        raise ValueError(f"'n' must be a positive multiple of 4, got {n!r}.")
    if not epsilon > 0:
        raise ValueError("'epsilon' must be positive.")
    gamma = _gamma_tuple(gamma)

    cells = []
    for side, g in zip(SIDES, gamma):
        requested = epsilon * g * n
        count = band_cell_count(n, epsilon, g)
        if count < 1:
            raise GeometryError(
                f"Band on the {side} side ({epsilon * g!r}) is thinner than half a cell at n={n}."
            )
        if count > max_band_cells(n):
            raise GeometryError(
                f"Band on the {side} side ({count} cells) reaches the outer boundary at n={n}."
            )
        if abs(requested - count) > 1e-9:
            _LOGGER.warning(
                "Band thickness on the %s side snapped from %.6g to %d cells (%.6g).", side, epsilon * g, count, count / n
            )
        cells.append(count)
    left, bottom, right, top = cells

    tags = inclusion_cell_tags(n)
    lo, hi = n // 4, 3 * n // 4
    band = np.zeros((n, n), dtype=bool)
    band[lo - bottom : hi + top, lo - left : hi + right] = True
    tags[band & (tags != int(Subdomain.OMEGA1))] = int(Subdomain.LAYER)

    grid = _unit_grid(n)
    mesh = build_tagged_grid_mesh(grid, grid, tags, Geometry.INCLUSION, lambda p, q: True)
    _LOGGER.debug("Built layer mesh n=%d eps=%g with band cells %s", n, epsilon, cells)
    return LayerMesh(mesh=mesh, n=n, epsilon=float(epsilon), gamma=gamma, band_cells=tuple(cells))


def _grid_node(layer: LayerMesh, i: int, j: int) -> int:
    return j * (layer.n + 1) + i


def layer_average_matrix(layer: LayerMesh, dofmap: DofMap) -> sp.csr_matrix:
    """Sparse map from DOFs to transverse band averages at the interface nodes.

    Each interface node averages the nodal values along the outward grid
    line across the band with trapezoid weights ``[1/2, 1, .., 1, 1/2] / c``;
    corner nodes take the mean over their two outward lines.
    """

    n = layer.n
    lo, hi = n // 4, 3 * n // 4
    left, bottom, right, top = layer.band_cells
    rows, cols, values = [], [], []
    for k, node in enumerate(layer.mesh.interface_nodes):
        i = int(round(layer.mesh.nodes[node, 0] * n))
        j = int(round(layer.mesh.nodes[node, 1] * n))
        lines = []
        if i == lo:
            lines.append((-1, 0, left))
        if i == hi:
            lines.append((1, 0, right))
        if j == lo:
            lines.append((0, -1, bottom))
        if j == hi:
            lines.append((0, 1, top))
        for di, dj, count in lines:
            trapezoid = np.ones(count + 1)
            trapezoid[[0, -1]] = 0.5
            trapezoid /= count * len(lines)
            for step, weight in enumerate(trapezoid):
                dof = dofmap.node_dofs[_grid_node(layer, i + di * step, j + dj * step), 0]
                rows.append(k)
                cols.append(int(dof))
                values.append(weight)
    shape = (len(layer.mesh.interface_nodes), dofmap.n_dofs)
    return sp.coo_matrix((values, (rows, cols)), shape=shape).tocsr()


def layer_average(layer: LayerMesh, dofmap: DofMap, u: np.ndarray) -> np.ndarray:
    """Transverse band average of ``u`` at every interface node."""

    return layer_average_matrix(layer, dofmap) @ np.asarray(u, dtype=float)


def layer_quadrature_error(layer: LayerMesh, w) -> float:
    """``|lumped int_{S_eps} w / (eps gamma) dx - lumped int_Gamma w ds|`` for a callable ``w(x, y)``."""

    nodes, weights = layer.node_weights()
    points = layer.mesh.nodes
    band = float(weights @ np.asarray(w(points[nodes, 0], points[nodes, 1]), dtype=float))
    interface_points = points[layer.mesh.interface_nodes]
    boundary = float(
        layer.mesh.lumped_interface_lengths() @ np.asarray(w(interface_points[:, 0], interface_points[:, 1]), dtype=float)
    )
    return abs(band - boundary)


__all__ = [
    "SIDES",
    "LayerMesh",
    "build_layer_mesh",
    "layer_average",
    "layer_average_matrix",
    "layer_quadrature_error",
]
