"""Structural audit of bidomain meshes."""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Set, Tuple

import numpy as np

from .geometry import BidomainMesh, Geometry, Subdomain, _edge_owners

_ANALYTIC_AREA = {Geometry.STRIP: 2.0, Geometry.INCLUSION: 1.0}


@dataclass(frozen=True)
class MeshAudit:
    """Outcome of :func:`audit_mesh`."""

    problems: Tuple[str, ...]
    interface_edges_checked: int
    boundary_edges_checked: int

    @property
    def holds(self) -> bool:
        return not self.problems


def _key(a: int, b: int) -> Tuple[int, int]:
    return (min(int(a), int(b)), max(int(a), int(b)))


def audit_mesh(mesh: BidomainMesh, *, area_tolerance: float = 1e-12) -> MeshAudit:
    """Re-derive the adjacency of ``mesh`` and report every inconsistency.

    Checks conformity, element orientation, interface and boundary edge
    ownership, the Dirichlet measure, the analytic domain area and the
    geometry-specific layout of ``Gamma``.
    """

    problems: List[str] = []
    owners = _edge_owners(mesh.elements)
    tags = mesh.subdomain

    areas = mesh.signed_areas
    if np.any(areas <= 0.0):
        problems.append(f"{int(np.sum(areas <= 0.0))} element(s) with non-positive area")

    expected_area = _ANALYTIC_AREA[mesh.geometry]
    if abs(areas.sum() - expected_area) > area_tolerance:
        problems.append(f"element areas sum to {areas.sum()!r}, expected {expected_area}")

    boundary: Set[Tuple[int, int]] = set()
    for key, edge_owners in owners.items():
        if len(edge_owners) > 2:
            problems.append(f"edge {key} shared by {len(edge_owners)} elements")
        elif len(edge_owners) == 1:
            boundary.add(key)

    tagged_boundary = {_key(a, b) for a, b in mesh.dirichlet_edges}
    tagged_boundary |= {_key(a, b) for a, b in mesh.neumann_edges}
    if tagged_boundary != boundary:
        problems.append("boundary edge tags do not match single-owner edges")

    for a, b in mesh.interface_edges:
        edge_owners = owners.get(_key(a, b), [])
        edge_tags = sorted(int(tags[e]) for e, _, _ in edge_owners)
        if len(edge_tags) != 2 or edge_tags[0] != Subdomain.OMEGA1 or edge_tags[1] == Subdomain.OMEGA1:
            problems.append(f"interface edge {(int(a), int(b))} has owner tags {edge_tags}")

    if mesh.dirichlet_length <= 0.0:
        problems.append("Dirichlet boundary has zero measure")

    omega1_boundary = [
        key for key in boundary if tags[owners[key][0][0]] == Subdomain.OMEGA1
    ]
    dirichlet = {_key(a, b) for a, b in mesh.dirichlet_edges}
    if mesh.geometry is Geometry.STRIP:
        if not any(key in dirichlet for key in omega1_boundary):
            problems.append("strip geometry requires a Dirichlet part on the boundary of Omega1")
    else:
        if not mesh.interface_closed:
            problems.append("inclusion interface is not a closed loop")
        degree = np.bincount(mesh.interface_edges.ravel(), minlength=mesh.n_nodes)
        if np.any(degree[mesh.interface_nodes] != 2):
            problems.append("inclusion interface nodes must each bound two interface edges")
        if omega1_boundary:
            problems.append("Omega1 touches the outer boundary in the inclusion geometry")

    return MeshAudit(
        problems=tuple(problems),
        interface_edges_checked=len(mesh.interface_edges),
        boundary_edges_checked=len(boundary),
    )


__all__ = ["MeshAudit", "audit_mesh"]
