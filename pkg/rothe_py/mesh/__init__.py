"""Bidomain triangulations and DOF numbering."""

from .audit import MeshAudit, audit_mesh
from .dofs import DofMap, InterfaceDof, InterfaceMode, build_dof_map
from .geometry import (
    BidomainMesh,
    Geometry,
    Subdomain,
    band_cell_count,
    build_inclusion_mesh,
    build_strip_mesh,
    build_tagged_grid_mesh,
    max_band_cells,
)

__all__ = [
    "MeshAudit",
    "audit_mesh",
    "DofMap",
    "InterfaceDof",
    "InterfaceMode",
    "build_dof_map",
    "BidomainMesh",
    "Geometry",
    "Subdomain",
    "band_cell_count",
    "build_inclusion_mesh",
    "build_strip_mesh",
    "build_tagged_grid_mesh",
    "max_band_cells",
]
