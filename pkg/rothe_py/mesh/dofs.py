"""Degree-of-freedom numbering for continuous and bilateral interfaces."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import List, Sequence, Tuple, Union

import numpy as np

from .geometry import BidomainMesh, Subdomain


class InterfaceMode(str, Enum):
    """How the interface trace is discretized.

    ``CONTINUOUS`` keeps one trace per interface node (``u1 = u2`` on Gamma);
    ``BILATERAL`` duplicates interface nodes so the jump ``u2 - u1`` is free.
    """

    CONTINUOUS = "continuous"
    BILATERAL = "bilateral"

    @classmethod
    def coerce(cls, value: Union["InterfaceMode", str]) -> "InterfaceMode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"Unknown interface mode: {value!r}") from None


@dataclass(frozen=True)
class InterfaceDof:
    """DOFs attached to one interface node (``dof1 == dof2`` when continuous)."""

    node: int
    dof1: int
    dof2: int


@dataclass(frozen=True)
class DofMap:
    """Map mesh nodes to unknowns.

    ``node_dofs[k, 0]`` is the DOF seen from ``Omega1`` and ``node_dofs[k, 1]``
    the one seen from ``Omega2``/``Layer``; both are ``-1`` on Dirichlet nodes
    and coincide everywhere except at bilateral interface nodes.
    """

    mode: InterfaceMode
    node_dofs: np.ndarray
    n_dofs: int
    interface_dofs: Tuple[InterfaceDof, ...]

    def __post_init__(self) -> None:
        table = np.array(self.node_dofs, dtype=np.int64, copy=True)
        table.setflags(write=False)
        object.__setattr__(self, "node_dofs", table)
        object.__setattr__(self, "mode", InterfaceMode.coerce(self.mode))

    @property
    def n_interface(self) -> int:
        return len(self.interface_dofs)

    def interface_array(self) -> np.ndarray:
        """``(K, 2)`` array of ``(dof1, dof2)`` in interface order."""

        return np.array([[rec.dof1, rec.dof2] for rec in self.interface_dofs], dtype=np.int64).reshape(-1, 2)

    def element_dofs(self, mesh: BidomainMesh) -> np.ndarray:
        """Per-element DOF triples; ``-1`` marks eliminated Dirichlet vertices."""

        side = np.where(mesh.subdomain == Subdomain.OMEGA1, 0, 1)
        return self.node_dofs[mesh.elements, side[:, None]]

    def dof_owners(self) -> List[Tuple[int, int]]:
        """``(node, side)`` for every DOF: side 0 = shared, 1/2 = bilateral traces."""

        owners: List[Tuple[int, int]] = [(-1, -1)] * self.n_dofs
        for node, (d1, d2) in enumerate(self.node_dofs):
            if d1 < 0:
                continue
            if d1 == d2:
                owners[d1] = (node, 0)
            else:
                owners[d1] = (node, 1)
                owners[d2] = (node, 2)
        return owners

    def nodal_values(self, values: np.ndarray, side: int = 2) -> np.ndarray:
        """Scatter a DOF vector to nodes, reading trace ``side`` at bilateral nodes."""

        if side not in (1, 2):
            raise ValueError("'side' must be 1 or 2.")
        column = self.node_dofs[:, side - 1]
        nodal = np.zeros(len(column))
        active = column >= 0
        nodal[active] = np.asarray(values, dtype=float)[column[active]]
        return nodal

    def permuted(self, permutation: Sequence[int]) -> "DofMap":
        """Renumber DOFs: old DOF ``d`` becomes ``permutation[d]``."""

        perm = np.asarray(permutation, dtype=np.int64)
        if sorted(perm.tolist()) != list(range(self.n_dofs)):
            raise ValueError("'permutation' must be a permutation of range(n_dofs).")
        table = np.where(self.node_dofs >= 0, perm[np.maximum(self.node_dofs, 0)], -1)
        records = tuple(
            InterfaceDof(node=rec.node, dof1=int(perm[rec.dof1]), dof2=int(perm[rec.dof2]))
            for rec in self.interface_dofs
        )
        return DofMap(mode=self.mode, node_dofs=table, n_dofs=self.n_dofs, interface_dofs=records)


def build_dof_map(mesh: BidomainMesh, mode: Union[InterfaceMode, str]) -> DofMap:
    """Number non-Dirichlet nodes in ascending order.

    Bilateral interface nodes receive two consecutive DOFs (side 1, side 2).
    """

    mode = InterfaceMode.coerce(mode)
    dirichlet = np.zeros(mesh.n_nodes, dtype=bool)
    dirichlet[mesh.dirichlet_nodes] = True
    on_interface = np.zeros(mesh.n_nodes, dtype=bool)
    on_interface[mesh.interface_nodes] = True
    if np.any(dirichlet & on_interface):
        raise ValueError("Interface nodes must not carry Dirichlet conditions.")

    table = np.full((mesh.n_nodes, 2), -1, dtype=np.int64)
    count = 0
    for node in range(mesh.n_nodes):
        if dirichlet[node]:
            continue
        table[node] = count
        count += 1
        if mode is InterfaceMode.BILATERAL and on_interface[node]:
            table[node, 1] = count
            count += 1

    records = tuple(
        InterfaceDof(node=int(node), dof1=int(table[node, 0]), dof2=int(table[node, 1]))
        for node in mesh.interface_nodes
    )
    return DofMap(mode=mode, node_dofs=table, n_dofs=count, interface_dofs=records)


__all__ = ["InterfaceMode", "InterfaceDof", "DofMap", "build_dof_map"]
