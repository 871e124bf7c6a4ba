"""Proximal Gauss-Seidel solver for separable convex variational inequalities.

Minimizes

    E(v) = 1/2 v^T A v - b^T v + sum_k w_k j((P v)_k)

for symmetric positive definite ``A`` and a selector ``P`` whose rows carry
either one ``+1`` entry (trace) or a ``+1``/``-1`` pair (jump), every column
belonging to at most one row.

Jump rows are first rewritten in the jump itself, so every row of ``P``
reads exactly one coordinate.  Columns untouched by ``P`` then enter ``E``
quadratically and are eliminated exactly with a sparse LU factorization
(block Gauss-Seidel with an exact smooth block).  The remaining coordinates
are swept in ascending DOF order, each update being an exact one-dimensional
minimization written as a proximal step.  Quadratic functionals skip the sweeps and are folded into the
reduced matrix.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from ..errors import ConvergenceError, NumericError, UnsupportedSizeError
from .functionals import JSpec

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverSettings:
    """Stopping rule of :class:`ProximalGaussSeidel`.

    A run stops after the first full sweep whose energy change is below
    ``tol * (1 + |E|)`` and whose largest coordinate update is below
    ``tol * (1 + max|v|)``.  ``max_sweeps`` defaults to ``50 * n_dofs``.
    """

    tol: float = 1e-10
    max_sweeps: Optional[int] = None
    debug: bool = False

    def __post_init__(self) -> None:
        if not self.tol > 0:
            raise ValueError("'tol' must be positive.")
        if self.max_sweeps is not None and self.max_sweeps < 1:
            raise ValueError("'max_sweeps' must be at least 1 when provided.")


@dataclass(frozen=True)
class VISolution:
    """Minimizer returned by :meth:`ProximalGaussSeidel.solve`."""

    values: np.ndarray
    energy: float
    sweeps: int
    energy_trace: Tuple[float, ...]


def vi_energy(
    A: sp.spmatrix,
    b: np.ndarray,
    weights: np.ndarray,
    selector: sp.spmatrix,
    spec: JSpec,
    v: np.ndarray,
) -> float:
    """Evaluate ``E(v)``."""

    v = np.asarray(v, dtype=float)
    quadratic = 0.5 * float(v @ (A @ v)) - float(np.asarray(b, dtype=float) @ v)
    return quadratic + spec.total(selector @ v, weights)


class ProximalGaussSeidel:
    """Reusable solver for a fixed matrix, selector and functional.

    Construction factorizes the smooth block and forms the dense Schur
    complement on selector coordinates; :meth:`solve` can then be called for
    any number of right-hand sides, as the Rothe drivers do once per step.
    """

    def __init__(
        self,
        A,
        weights: Sequence[float],
        selector,
        spec: JSpec,
        settings: Optional[SolverSettings] = None,
    ) -> None:
        self.settings = settings or SolverSettings()
        self.spec = spec
        self.A = sp.csr_matrix(A, dtype=float)
        n = self.A.shape[0]
        if self.A.shape != (n, n):
            raise ValueError("'A' must be square.")
        self.n_dofs = n

        self.selector = sp.csr_matrix(selector, dtype=float)
        if self.selector.shape[1] != n:
            raise ValueError("'selector' must have one column per DOF.")
        self.weights = np.asarray(weights, dtype=float).ravel()
        if self.weights.shape != (self.selector.shape[0],):
            raise ValueError("'weights' must have one entry per selector row.")
        if np.any(self.weights <= 0):
            raise ValueError("'weights' must be positive.")

        scale = max(float(abs(self.A).max()) if self.A.nnz else 0.0, 1.0)
        asymmetry = abs(self.A - self.A.T)
        if asymmetry.nnz and float(asymmetry.max()) > 1e-10 * scale:
            raise ValueError("'A' must be symmetric.")
        if np.any(self.A.diagonal() <= 0.0):
            raise NumericError("Matrix has a non-positive diagonal pivot; it is not positive definite.")

        self._build_coordinate_map()
        self._reduce()

    # ------------------------------------------------------------------
    # Setup
    # ------------------------------------------------------------------
    def _build_coordinate_map(self) -> None:
        """Change variables so every selector row reads a single coordinate.

        For a row ``c_q v_q + c_p v_p`` the primary column ``q`` (the ``+1``
        entry when present) is replaced by the row value itself, so
        ``v = B y`` with ``y_q = (P v)_k`` and ``y_p = v_p``.  Column ``p``
        then leaves the nonsmooth part, which keeps the sweeps exact for
        jump rows.
        """

        n = self.n_dofs
        if np.any(np.diff(self.selector.tocsc().indptr) > 1):
            raise ValueError("Each DOF may appear in at most one selector row.")
        rows = self.selector
        if np.any(np.abs(np.abs(rows.data) - 1.0) > 0):
            raise ValueError("Selector entries must be +1 or -1.")

        primary = np.empty(rows.shape[0], dtype=np.int64)
        diagonal = np.ones(n)
        extra_rows, extra_cols, extra_data = [], [], []
        for k in range(rows.shape[0]):
            start, end = rows.indptr[k], rows.indptr[k + 1]
            columns, coefficients = rows.indices[start:end], rows.data[start:end]
            if not 1 <= len(columns) <= 2:
                raise ValueError("Selector rows must carry one (trace) or two (jump) entries.")
            first = int(np.argmax(coefficients))
            q, c_q = int(columns[first]), float(coefficients[first])
            primary[k] = q
            diagonal[q] = c_q
            for p, c_p in zip(columns, coefficients):
                if int(p) != q:
                    extra_rows.append(q)
                    extra_cols.append(int(p))
                    extra_data.append(-c_q * float(c_p))
        index = np.arange(n)
        self._basis = sp.csr_matrix(
            (
                np.concatenate([diagonal, extra_data]),
                (
                    np.concatenate([index, np.asarray(extra_rows, dtype=np.int64)]),
                    np.concatenate([index, np.asarray(extra_cols, dtype=np.int64)]),
                ),
            ),
            shape=(n, n),
        )
        order = np.argsort(primary, kind="stable")
        self._nonsmooth = primary[order]
        self._row = order
        self._smooth = np.setdiff1d(index, primary)

    def _reduce(self) -> None:
        smooth, nonsmooth = self._smooth, self._nonsmooth
        A = (self._basis.T @ self.A @ self._basis).tocsr()
        A_nn = A[nonsmooth][:, nonsmooth].toarray()
        self._lu = None
        self._coupling = np.zeros((len(smooth), len(nonsmooth)))
        if len(smooth):
            try:
                self._lu = splu(A[smooth][:, smooth].tocsc())
            except RuntimeError as exc:
                raise NumericError(f"Factorization of the smooth block failed: {exc}") from exc
            if len(nonsmooth):
                A_sn = A[smooth][:, nonsmooth].toarray()
                self._coupling = self._lu.solve(A_sn)
                A_nn = A_nn - A_sn.T @ self._coupling
        self._schur = 0.5 * (A_nn + A_nn.T)
        self._diag = np.diag(self._schur).copy()
        if np.any(self._diag <= 0.0):
            raise NumericError("Reduced matrix has a non-positive diagonal pivot; 'A' is not positive definite.")
        self._row_weights = self.weights[self._row]

        self._direct = None
        c = self.spec.quadratic_coefficient
        if c is not None and len(nonsmooth):
            matrix = self._schur + np.diag(2.0 * c * self._row_weights)
            try:
                self._direct = sla.cho_factor(matrix)
            except sla.LinAlgError as exc:
                raise NumericError(f"Cholesky factorization failed: {exc}") from exc

    # ------------------------------------------------------------------
    # Solve
    # ------------------------------------------------------------------
    def energy(self, b: np.ndarray, v: np.ndarray) -> float:
        return vi_energy(self.A, b, self.weights, self.selector, self.spec, v)

    def solve(self, b: Sequence[float], x0: Optional[Sequence[float]] = None) -> VISolution:
        """Minimize ``E`` for right-hand side ``b``, optionally warm-started at ``x0``."""

        b = np.asarray(b, dtype=float).ravel()
        if b.shape != (self.n_dofs,):
            raise ValueError("'b' must have one entry per DOF.")
        smooth, nonsmooth = self._smooth, self._nonsmooth
        b_local = self._basis.T @ b

        b_smooth = b_local[smooth]
        smooth_solution = self._lu.solve(b_smooth) if self._lu is not None else np.zeros(0)
        reduced_b = b_local[nonsmooth] - self._coupling.T @ b_smooth
        offset = -0.5 * float(b_smooth @ smooth_solution)

        if not len(nonsmooth):
            x_n = np.zeros(0)
            trace: Tuple[float, ...] = ()
            sweeps = 0
        elif self._direct is not None:
            x_n = sla.cho_solve(self._direct, reduced_b)
            trace = ()
            sweeps = 1
        else:
            if x0 is None:
                start = np.zeros(len(nonsmooth))
            else:
                start = (self.selector @ np.asarray(x0, dtype=float))[self._row]
            x_n, trace = self._sweep(reduced_b, start.copy(), offset)
            sweeps = len(trace)

        local = np.empty(self.n_dofs)
        local[nonsmooth] = x_n
        local[smooth] = smooth_solution - self._coupling @ x_n
        values = self._basis @ local
        energy = self.energy(b, values)
        return VISolution(values=values, energy=energy, sweeps=sweeps, energy_trace=trace or (energy,))

    def _sweep(self, reduced_b: np.ndarray, x: np.ndarray, offset: float) -> Tuple[np.ndarray, Tuple[float, ...]]:
        S, diag = self._schur, self._diag
        weights = self._row_weights
        prox = self.spec.prox_scalar
        value = self.spec.value
        tol = self.settings.tol
        max_sweeps = self.settings.max_sweeps or 50 * self.n_dofs
        debug = self.settings.debug

        previous = self._reduced_energy(reduced_b, x, offset)
        trace = []
        for _ in range(max_sweeps):
            residual = reduced_b - S @ x
            largest_step = 0.0
            for p in range(len(x)):
                pivot = diag[p]
                current = x[p]
                update = prox(current + residual[p] / pivot, weights[p] / pivot)
                delta = update - current
                if delta == 0.0:
                    continue
                if debug:
                    change = (
                        -residual[p] * delta
                        + 0.5 * pivot * delta * delta
                        + weights[p] * (value(update) - value(current))
                    )
                    assert change <= 1e-12 * (1.0 + abs(previous) if math.isfinite(previous) else 1.0), (
                        f"coordinate {p} increased the energy by {change!r}"
                    )
                x[p] = update
                residual -= S[p] * delta
                largest_step = max(largest_step, abs(delta))

            energy = self._reduced_energy(reduced_b, x, offset)
            trace.append(energy)
            _LOGGER.debug("sweep %d: energy=%.17g step=%.3e", len(trace), energy, largest_step)
            if math.isfinite(previous):
                if energy > previous + 1e-9 * (1.0 + abs(previous)):
                    raise NumericError("Energy increased during a sweep; 'A' is not positive definite.", trace)
                stalled = abs(previous - energy) <= tol * (1.0 + abs(energy))
                settled = largest_step <= tol * (1.0 + float(np.max(np.abs(x), initial=0.0)))
                if stalled and settled:
                    return x, tuple(trace)
            previous = energy
        raise ConvergenceError(f"No convergence within {max_sweeps} sweeps.", trace)

    def _reduced_energy(self, reduced_b: np.ndarray, x: np.ndarray, offset: float) -> float:
        quadratic = 0.5 * float(x @ (self._schur @ x)) - float(reduced_b @ x)
        return quadratic + self.spec.total(x, self._row_weights) + offset


def solve_vi(
    A,
    b: Sequence[float],
    weights: Sequence[float],
    selector,
    spec: JSpec,
    tol: float = 1e-10,
    max_iter: Optional[int] = None,
    *,
    x0: Optional[Sequence[float]] = None,
    debug: bool = False,
) -> np.ndarray:
    """One-shot convenience wrapper around :class:`ProximalGaussSeidel`."""

    solver = ProximalGaussSeidel(A, weights, selector, spec, SolverSettings(tol=tol, max_sweeps=max_iter, debug=debug))
    return solver.solve(b, x0).values


def brute_force_vi(
    A,
    b: Sequence[float],
    weights: Sequence[float],
    selector,
    spec: JSpec,
    grid_range: Tuple[float, float] = (-5.0, 5.0),
    grid_step: float = 1e-3,
    *,
    window: int = 4,
    refinement: int = 8,
) -> np.ndarray:
    """Grid-search oracle for systems with at most three unknowns.

    The search starts on a coarse tensor grid over ``grid_range`` and
    repeatedly re-grids a window of ``window`` coarse steps around the best
    point, each time ``refinement`` times finer, until the spacing reaches
    ``grid_step``.
    """

    A = np.asarray(sp.csr_matrix(A).toarray(), dtype=float)
    b = np.asarray(b, dtype=float).ravel()
    n = len(b)
    if n > 3:
        raise UnsupportedSizeError(f"Brute-force search supports at most 3 unknowns, got {n}.")
    if not grid_step > 0:
        raise ValueError("'grid_step' must be positive.")
    P = np.asarray(sp.csr_matrix(selector).toarray(), dtype=float)
    weights = np.asarray(weights, dtype=float)
    lo, hi = grid_range

    def energies(points: np.ndarray) -> np.ndarray:
        quadratic = 0.5 * np.einsum("ij,jk,ik->i", points, A, points) - points @ b
        penalties = np.asarray(spec.value(points @ P.T), dtype=float).reshape(len(points), -1)
        with np.errstate(invalid="ignore"):
            return quadratic + penalties @ weights

    step = max((hi - lo) / 40.0, grid_step)
    axes = [np.arange(lo, hi + 0.5 * step, step)] * n
    while True:
        points = np.array(list(itertools.product(*axes)), dtype=float).reshape(-1, n)
        best = points[int(np.argmin(energies(points)))]
        if step <= grid_step:
            return best
        finer = max(step / refinement, grid_step)
        half = int(math.ceil(window * step / finer))
        offsets = np.arange(-half, half + 1) * finer
        axes = [np.clip(best[d] + offsets, lo, hi) for d in range(n)]
        step = finer


__all__ = [
    "SolverSettings",
    "VISolution",
    "ProximalGaussSeidel",
    "vi_energy",
    "solve_vi",
    "brute_force_vi",
]
