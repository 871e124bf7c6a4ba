"""Structured bidomain triangulations for the strip and inclusion geometries.

Both geometries are built on tensor-product grids whose cells are split into
two counter-clockwise right triangles along the lower-left/upper-right
diagonal.  Subdomains are assigned per cell, and every edge is then classified
as boundary (Dirichlet or Neumann) or interface (``Omega1`` against anything
else).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Callable, Dict, List, Tuple

import numpy as np

_LOGGER = logging.getLogger(__name__)


class Subdomain(IntEnum):
    """Per-element subdomain tag."""

    OMEGA1 = 1
    OMEGA2 = 2
    LAYER = 3


class Geometry(str, Enum):
    """Supported domain layouts."""

    STRIP = "strip"
    INCLUSION = "inclusion"


def _frozen(array: np.ndarray, dtype) -> np.ndarray:
    result = np.array(array, dtype=dtype, copy=True)
    result.setflags(write=False)
    return result


@dataclass(frozen=True)
class BidomainMesh:
    """Conforming P1 triangulation of ``Omega`` split along the interface.

    ``interface_edges`` are oriented counter-clockwise with respect to
    ``Omega1`` so that ``interface_normals`` (outward from ``Omega1``) is the
    right-hand normal of each directed edge.  ``interface_nodes`` lists the
    interface vertices in chain order; for the inclusion the chain is a
    closed loop and the first node is not repeated.
    """

    nodes: np.ndarray
    elements: np.ndarray
    subdomain: np.ndarray
    interface_edges: np.ndarray
    interface_normals: np.ndarray
    dirichlet_edges: np.ndarray
    neumann_edges: np.ndarray
    geometry: Geometry
    interface_nodes: np.ndarray
    interface_closed: bool

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", _frozen(self.nodes, float))
        object.__setattr__(self, "elements", _frozen(self.elements, np.int64))
        object.__setattr__(self, "subdomain", _frozen(self.subdomain, np.int64))
        for name in ("interface_edges", "dirichlet_edges", "neumann_edges"):
            edges = np.asarray(getattr(self, name), dtype=np.int64).reshape(-1, 2)
            object.__setattr__(self, name, _frozen(edges, np.int64))
        normals = np.asarray(self.interface_normals, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "interface_normals", _frozen(normals, float))
        object.__setattr__(self, "interface_nodes", _frozen(self.interface_nodes, np.int64))
        if self.elements.ndim != 2 or self.elements.shape[1] != 3:
            raise ValueError("'elements' must be an (E, 3) array of node indices.")
        if self.subdomain.shape != (self.elements.shape[0],):
            raise ValueError("'subdomain' must carry one tag per element.")

    @property
    def n_nodes(self) -> int:
        return int(self.nodes.shape[0])

    @property
    def n_elements(self) -> int:
        return int(self.elements.shape[0])

    @property
    def signed_areas(self) -> np.ndarray:
        p0 = self.nodes[self.elements[:, 0]]
        p1 = self.nodes[self.elements[:, 1]]
        p2 = self.nodes[self.elements[:, 2]]
        d1 = p1 - p0
        d2 = p2 - p0
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    @property
    def total_area(self) -> float:
        return float(self.signed_areas.sum())

    @property
    def interface_edge_lengths(self) -> np.ndarray:
        return _edge_lengths(self.nodes, self.interface_edges)

    @property
    def interface_length(self) -> float:
        return float(self.interface_edge_lengths.sum())

    @property
    def dirichlet_length(self) -> float:
        return float(_edge_lengths(self.nodes, self.dirichlet_edges).sum())

    @property
    def dirichlet_nodes(self) -> np.ndarray:
        return np.unique(self.dirichlet_edges.ravel())

    def lumped_interface_lengths(self) -> np.ndarray:
        """Half-sum of adjacent interface edge lengths, in ``interface_nodes`` order."""

        position = {int(node): k for k, node in enumerate(self.interface_nodes)}
        lumped = np.zeros(len(self.interface_nodes))
        for (a, b), length in zip(self.interface_edges, self.interface_edge_lengths):
            lumped[position[int(a)]] += 0.5 * length
            lumped[position[int(b)]] += 0.5 * length
        return lumped

    def interface_arclength(self) -> np.ndarray:
        """Arclength coordinate of each interface node along the chain."""

        points = self.nodes[self.interface_nodes]
        steps = np.linalg.norm(np.diff(points, axis=0), axis=1)
        return np.concatenate([[0.0], np.cumsum(steps)])


def _edge_lengths(nodes: np.ndarray, edges: np.ndarray) -> np.ndarray:
    if len(edges) == 0:
        return np.zeros(0)
    return np.linalg.norm(nodes[edges[:, 1]] - nodes[edges[:, 0]], axis=1)


# ----------------------------------------------------------------------
# Grid construction
# ----------------------------------------------------------------------
def _grid_triangles(xs: np.ndarray, ys: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    nx, ny = len(xs) - 1, len(ys) - 1
    grid_x, grid_y = np.meshgrid(xs, ys, indexing="xy")
    nodes = np.column_stack([grid_x.ravel(), grid_y.ravel()])

    i, j = np.meshgrid(np.arange(nx), np.arange(ny), indexing="xy")
    n00 = (j * (nx + 1) + i).ravel()
    n10 = n00 + 1
    n01 = n00 + nx + 1
    n11 = n01 + 1

    elements = np.empty((2 * n00.size, 3), dtype=np.int64)
    elements[0::2] = np.column_stack([n00, n10, n11])
    elements[1::2] = np.column_stack([n00, n11, n01])
    return nodes, elements


def _edge_owners(elements: np.ndarray) -> Dict[Tuple[int, int], List[Tuple[int, int, int]]]:
    owners: Dict[Tuple[int, int], List[Tuple[int, int, int]]] = {}
    for e, (p, q, r) in enumerate(elements):
        for a, b in ((p, q), (q, r), (r, p)):
            key = (int(min(a, b)), int(max(a, b)))
            owners.setdefault(key, []).append((e, int(a), int(b)))
    return owners


def _chain_interface(edges: np.ndarray) -> Tuple[np.ndarray, bool]:
    if len(edges) == 0:
        return np.zeros(0, dtype=np.int64), False
    successor = {int(a): int(b) for a, b in edges}
    heads = set(successor)
    tails = set(successor.values())
    open_starts = sorted(heads - tails)
    closed = not open_starts
    start = open_starts[0] if open_starts else min(heads)
    chain = [start]
    node = start
    while node in successor:
        node = successor[node]
        if node == start:
            break
        chain.append(node)
    return np.asarray(chain, dtype=np.int64), closed


def build_tagged_grid_mesh(
    xs: np.ndarray,
    ys: np.ndarray,
    cell_tags: np.ndarray,
    geometry: Geometry,
    is_dirichlet: Callable[[np.ndarray, np.ndarray], bool],
) -> BidomainMesh:
    """Triangulate a tagged tensor grid and classify every edge.

    ``cell_tags`` has shape ``(len(ys) - 1, len(xs) - 1)``; both triangles of a
    cell inherit its tag.  ``is_dirichlet`` receives the two endpoint
    coordinates of a boundary edge.
    """

    nodes, elements = _grid_triangles(np.asarray(xs, float), np.asarray(ys, float))
    subdomain = np.repeat(np.asarray(cell_tags, dtype=np.int64).ravel(), 2)

    interface: List[Tuple[int, int]] = []
    normals: List[Tuple[float, float]] = []
    dirichlet: List[Tuple[int, int]] = []
    neumann: List[Tuple[int, int]] = []

    for owners in _edge_owners(elements).values():
        if len(owners) == 1:
            _, a, b = owners[0]
            target = dirichlet if is_dirichlet(nodes[a], nodes[b]) else neumann
            target.append((a, b))
            continue
        (e1, a1, b1), (e2, a2, b2) = owners[0], owners[1]
        t1, t2 = subdomain[e1], subdomain[e2]
        if t1 == t2 or Subdomain.OMEGA1 not in (t1, t2):
            continue
        a, b = (a1, b1) if t1 == Subdomain.OMEGA1 else (a2, b2)
        tangent = nodes[b] - nodes[a]
        normal = np.array([tangent[1], -tangent[0]]) / np.linalg.norm(tangent)
        interface.append((a, b))
        normals.append((float(normal[0]), float(normal[1])))

    interface_edges = np.asarray(interface, dtype=np.int64).reshape(-1, 2)
    order = np.lexsort((interface_edges[:, 1], interface_edges[:, 0])) if len(interface) else []
    interface_edges = interface_edges[order]
    interface_normals = np.asarray(normals, dtype=float).reshape(-1, 2)[order]
    chain, closed = _chain_interface(interface_edges)

    mesh = BidomainMesh(
        nodes=nodes,
        elements=elements,
        subdomain=subdomain,
        interface_edges=interface_edges,
        interface_normals=interface_normals,
        dirichlet_edges=np.asarray(sorted(dirichlet), dtype=np.int64),
        neumann_edges=np.asarray(sorted(neumann), dtype=np.int64),
        geometry=geometry,
        interface_nodes=chain,
        interface_closed=closed,
    )
    _LOGGER.debug(
        "Built %s mesh: %d nodes, %d elements, %d interface edges",
        geometry.value,
        mesh.n_nodes,
        mesh.n_elements,
        len(interface_edges),
    )
    return mesh


def _unit_grid(count: int) -> np.ndarray:
    return np.arange(count + 1) / count


def build_strip_mesh(nx1: int, nx2: int, ny: int) -> BidomainMesh:
    """Mesh ``[0, 2] x [0, 1]`` with ``Omega1 = [0, 1] x [0, 1]``.

    Dirichlet edges are the left edge of ``Omega1`` and the right edge of
    ``Omega2``; top and bottom are Neumann.  The interface is ``{1} x (0, 1)``.
    """

    for name, value in (("nx1", nx1), ("nx2", nx2), ("ny", ny)):
        if not isinstance(value, (int, np.integer)) or value < 1:
            raise ValueError(f"'{name}' must be a positive integer, got {value!r}.")

    xs = np.concatenate([_unit_grid(nx1), 1.0 + _unit_grid(nx2)[1:]])
    ys = _unit_grid(ny)
    tags = np.full((ny, nx1 + nx2), int(Subdomain.OMEGA2), dtype=np.int64)
    tags[:, :nx1] = int(Subdomain.OMEGA1)

    def is_dirichlet(p: np.ndarray, q: np.ndarray) -> bool:
        return (p[0] == 0.0 and q[0] == 0.0) or (p[0] == 2.0 and q[0] == 2.0)

    return build_tagged_grid_mesh(xs, ys, tags, Geometry.STRIP, is_dirichlet)


def inclusion_cell_tags(n: int) -> np.ndarray:
    """Cell tags of the inclusion grid: ``Omega1`` is ``[0.25, 0.75]^2``."""

    tags = np.full((n, n), int(Subdomain.OMEGA2), dtype=np.int64)
    lo, hi = n // 4, 3 * n // 4
    tags[lo:hi, lo:hi] = int(Subdomain.OMEGA1)
    return tags


def band_cell_count(n: int, epsilon: float, gamma: float = 1.0) -> int:
    """Cells on one side of a band of thickness ``eps * gamma`` around the inclusion, rounded half up."""

    return int(math.floor(epsilon * gamma * n + 0.5))


def max_band_cells(n: int) -> int:
    """Widest band per side that still leaves an ``Omega2`` cell before the boundary."""

    return n // 4 - 1



def build_inclusion_mesh(n: int) -> BidomainMesh:
    """Mesh ``[0, 1]^2`` with the inner square ``[0.25, 0.75]^2`` as ``Omega1``.

    The whole outer boundary is Dirichlet.  ``n`` counts elements per unit
    length and must be a positive multiple of 4 so the inner square is
    grid-aligned.
    """

    if not isinstance(n, (int, np.integer)) or n < 4 or n % 4 != 0:
        raise ValueError(f"'n' must be a positive multiple of 4, got {n!r}.")

    grid = _unit_grid(n)
    return build_tagged_grid_mesh(
        grid, grid, inclusion_cell_tags(n), Geometry.INCLUSION, lambda p, q: True
    )


__all__ = [
    "Subdomain",
    "Geometry",
    "BidomainMesh",
    "build_tagged_grid_mesh",
    "build_strip_mesh",
    "build_inclusion_mesh",
    "inclusion_cell_tags",
    "band_cell_count",
    "max_band_cells",
]
