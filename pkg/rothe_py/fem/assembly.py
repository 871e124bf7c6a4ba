"""P1 assembly of the bilinear forms and loads of the per-step problems.

All routines accept ``dofmap=None`` to assemble on raw node indices before
Dirichlet elimination; otherwise rows and columns follow the DOF map and
Dirichlet vertices are dropped.  Interface integrals are mass-lumped: node
``k`` of the interface carries the half-sum ``l_k`` of its adjacent edge
lengths.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from ..errors import ModeError
from ..mesh import BidomainMesh, DofMap, InterfaceMode, Subdomain

_DOMAIN = (Subdomain.OMEGA1, Subdomain.OMEGA2)
_LOCAL_MASS = (np.ones((3, 3)) + np.eye(3)) / 12.0


@dataclass(frozen=True)
class InterfaceMass:
    """Lumped interface quadrature and the trace/jump selector.

    ``weights = alpha * lengths``; ``selector @ u`` gives the trace
    (continuous) or the jump ``u2 - u1`` (bilateral) at each interface node.
    """

    weights: np.ndarray
    lengths: np.ndarray
    selector: sp.csr_matrix

    def gram(self, scale: float = 1.0) -> sp.csr_matrix:
        """``scale * P^T diag(weights) P``."""

        P = self.selector
        return (P.T @ sp.diags(scale * self.weights) @ P).tocsr()


@dataclass(frozen=True)
class SparseSpdSystem:
    """One per-step variational inequality ``min 1/2 u^T A u - b^T u + sum l_k j((P u)_k)``."""

    A: sp.csr_matrix
    b: np.ndarray
    interface_weights: np.ndarray
    selector: sp.csr_matrix
    j_weights: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if self.j_weights is None:
            object.__setattr__(self, "j_weights", np.asarray(self.interface_weights, dtype=float))

    def residual(self, u: np.ndarray) -> np.ndarray:
        return self.b - self.A @ u


def _element_indices(mesh: BidomainMesh, dofmap: Optional[DofMap]) -> np.ndarray:
    return mesh.elements if dofmap is None else dofmap.element_dofs(mesh)


def _size(mesh: BidomainMesh, dofmap: Optional[DofMap]) -> int:
    return mesh.n_nodes if dofmap is None else dofmap.n_dofs


def _scatter_matrix(local: np.ndarray, indices: np.ndarray, size: int) -> sp.csr_matrix:
    rows = np.repeat(indices, 3, axis=1).ravel()
    cols = np.tile(indices, (1, 3)).ravel()
    values = local.ravel()
    keep = (rows >= 0) & (cols >= 0)
    return sp.coo_matrix((values[keep], (rows[keep], cols[keep])), shape=(size, size)).tocsr()


def _scatter_vector(local: np.ndarray, indices: np.ndarray, size: int) -> np.ndarray:
    flat = indices.ravel()
    keep = flat >= 0
    return np.bincount(flat[keep], weights=local.ravel()[keep], minlength=size)


def element_gradients(mesh: BidomainMesh) -> np.ndarray:
    """Constant gradients of the three barycentric basis functions, shape ``(E, 3, 2)``."""

    p = mesh.nodes[mesh.elements]
    twice_area = 2.0 * mesh.signed_areas
    x, y = p[:, :, 0], p[:, :, 1]
    gradients = np.empty((mesh.n_elements, 3, 2))
    for a in range(3):
        b, c = (a + 1) % 3, (a + 2) % 3
        gradients[:, a, 0] = (y[:, b] - y[:, c]) / twice_area
        gradients[:, a, 1] = (x[:, c] - x[:, b]) / twice_area
    return gradients


def element_conductivity(mesh: BidomainMesh, sigma1: float, sigma2: float, layer_sigma: float = 1.0) -> np.ndarray:
    tags = mesh.subdomain
    return np.where(
        tags == Subdomain.OMEGA1, sigma1, np.where(tags == Subdomain.OMEGA2, sigma2, layer_sigma)
    ).astype(float)


def assemble_stiffness(
    mesh: BidomainMesh,
    dofmap: Optional[DofMap],
    sigma1: float,
    sigma2: float,
    *,
    layer_sigma: float = 1.0,
) -> sp.csr_matrix:
    """``int_Omega sigma grad u . grad v`` with piecewise-constant ``sigma``."""

    if not (sigma1 > 0 and sigma2 > 0 and layer_sigma > 0):
        raise ValueError("Conductivities must be positive.")
    gradients = element_gradients(mesh)
    scale = element_conductivity(mesh, sigma1, sigma2, layer_sigma) * mesh.signed_areas
    local = scale[:, None, None] * np.einsum("eak,ebk->eab", gradients, gradients)
    return _scatter_matrix(local, _element_indices(mesh, dofmap), _size(mesh, dofmap))


def _element_mask(mesh: BidomainMesh, subdomains: Iterable[Subdomain]) -> np.ndarray:
    return np.isin(mesh.subdomain, [int(tag) for tag in subdomains])


def assemble_mass(
    mesh: BidomainMesh,
    dofmap: Optional[DofMap],
    subdomains: Iterable[Subdomain] = tuple(Subdomain),
) -> sp.csr_matrix:
    """Consistent P1 mass restricted to elements tagged with ``subdomains``."""

    mask = _element_mask(mesh, subdomains)
    local = (mesh.signed_areas * mask)[:, None, None] * _LOCAL_MASS[None, :, :]
    return _scatter_matrix(local, _element_indices(mesh, dofmap), _size(mesh, dofmap))


def lumped_volumes(mesh: BidomainMesh, subdomains: Iterable[Subdomain]) -> np.ndarray:
    """Nodal row sums of the mass restricted to ``subdomains`` (one third of each element area)."""

    mask = _element_mask(mesh, subdomains)
    shares = np.repeat((mesh.signed_areas * mask / 3.0)[:, None], 3, axis=1)
    return np.bincount(mesh.elements.ravel(), weights=shares.ravel(), minlength=mesh.n_nodes)


def interface_selector(dofmap: DofMap) -> sp.csr_matrix:
    """Trace (continuous) or jump ``u2 - u1`` (bilateral) at every interface node."""

    pairs = dofmap.interface_array()
    count = len(pairs)
    rows = np.arange(count)
    if dofmap.mode is InterfaceMode.CONTINUOUS:
        return sp.csr_matrix((np.ones(count), (rows, pairs[:, 0])), shape=(count, dofmap.n_dofs))
    data = np.concatenate([-np.ones(count), np.ones(count)])
    return sp.csr_matrix(
        (data, (np.concatenate([rows, rows]), np.concatenate([pairs[:, 0], pairs[:, 1]]))),
        shape=(count, dofmap.n_dofs),
    )


def assemble_interface_mass(mesh: BidomainMesh, dofmap: DofMap, alpha: float) -> InterfaceMass:
    if not alpha > 0:
        raise ValueError("'alpha' must be positive.")
    lengths = mesh.lumped_interface_lengths()
    return InterfaceMass(weights=alpha * lengths, lengths=lengths, selector=interface_selector(dofmap))


def assemble_tangential_stiffness(mesh: BidomainMesh, dofmap: DofMap, beta: float) -> sp.csr_matrix:
    """``beta`` times the 1D P1 stiffness along the interface polyline, on interface nodes.

    Rows and columns follow ``mesh.interface_nodes``; compose with the trace
    selector to act on DOFs.
    """

    if dofmap.mode is not InterfaceMode.CONTINUOUS:
        raise ModeError("The tangential stiffness exists only for a continuous interface.")
    if beta < 0:
        raise ValueError("'beta' must be non-negative.")
    count = len(mesh.interface_nodes)
    position = {int(node): k for k, node in enumerate(mesh.interface_nodes)}
    rows, cols, values = [], [], []
    for (a, b), length in zip(mesh.interface_edges, mesh.interface_edge_lengths):
        i, j = position[int(a)], position[int(b)]
        coefficient = beta / length
        rows += [i, j, i, j]
        cols += [i, j, j, i]
        values += [coefficient, coefficient, -coefficient, -coefficient]
    return sp.coo_matrix((values, (rows, cols)), shape=(count, count)).tocsr()


def assemble_load(
    mesh: BidomainMesh,
    dofmap: Optional[DofMap],
    source,
    t: Optional[float] = None,
    *,
    subdomains: Sequence[Subdomain] = _DOMAIN,
) -> np.ndarray:
    """Consistent P1 load ``int f v dx`` for nodal ``f``.

    ``source`` is a nodal array or a :class:`~rothe_py.fem.fields.SampledField`
    evaluated at ``t``.  Elements outside ``subdomains`` carry no source.
    """

    if hasattr(source, "at"):
        if t is None:
            raise ValueError("A time-dependent source needs 't'.")
        nodal = source.at(t)
    else:
        nodal = np.asarray(source, dtype=float)
    if nodal.shape != (mesh.n_nodes,):
        raise ValueError("Source must provide one value per mesh node.")
    mask = _element_mask(mesh, subdomains)
    local = (mesh.signed_areas * mask)[:, None] * (nodal[mesh.elements] @ _LOCAL_MASS)
    return _scatter_vector(local, _element_indices(mesh, dofmap), _size(mesh, dofmap))


def assemble_interface_load(mesh: BidomainMesh, dofmap: DofMap, source, t: Optional[float] = None) -> np.ndarray:
    """Lumped ``int_Gamma g v_1 ds`` on the side-1 traces.

    Enters the per-step right-hand side with a minus sign.
    """

    if dofmap.mode is not InterfaceMode.BILATERAL:
        raise ModeError("The interface flux load exists only for a bilateral interface.")
    if hasattr(source, "at"):
        if t is None:
            raise ValueError("A time-dependent flux needs 't'.")
        nodal = source.at(t)
    else:
        nodal = np.asarray(source, dtype=float)
    lengths = mesh.lumped_interface_lengths()
    if nodal.shape != lengths.shape:
        raise ValueError("Flux must provide one value per interface node.")
    load = np.zeros(dofmap.n_dofs)
    np.add.at(load, dofmap.interface_array()[:, 0], lengths * nodal)
    return load


def assemble_energy_gram(mesh: BidomainMesh, dofmap: DofMap, beta: float = 0.0) -> sp.csr_matrix:
    """Gram matrix of the energy inner product used for dual norms.

    Continuous: ``int grad u . grad v + beta int_Gamma u' v'``.  Bilateral:
    ``int grad u . grad v + int_Gamma [u][v]`` (lumped).
    """

    stiffness = assemble_stiffness(mesh, dofmap, 1.0, 1.0)
    selector = interface_selector(dofmap)
    if dofmap.mode is InterfaceMode.CONTINUOUS:
        if beta == 0.0:
            return stiffness
        tangential = assemble_tangential_stiffness(mesh, dofmap, beta)
        return (stiffness + selector.T @ tangential @ selector).tocsr()
    lengths = mesh.lumped_interface_lengths()
    return (stiffness + selector.T @ sp.diags(lengths) @ selector).tocsr()


__all__ = [
    "InterfaceMass",
    "SparseSpdSystem",
    "element_gradients",
    "element_conductivity",
    "assemble_stiffness",
    "assemble_mass",
    "lumped_volumes",
    "interface_selector",
    "assemble_interface_mass",
    "assemble_tangential_stiffness",
    "assemble_load",
    "assemble_interface_load",
    "assemble_energy_gram",
]
