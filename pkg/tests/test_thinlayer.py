from __future__ import annotations

import logging

import numpy as np
import pytest

from rothe_py.convex import AbsoluteValue, IntervalIndicator, PositivePart, SolverSettings, ZeroFunctional
from rothe_py.errors import GeometryError, IneligibleFunctionalError
from rothe_py.fem import FieldSpec, InitialSpec, build_problem
from rothe_py.mesh import InterfaceMode, Subdomain, audit_mesh, build_dof_map, build_inclusion_mesh, build_strip_mesh
from rothe_py.metrics import observed_orders
from rothe_py.thinlayer import (
    LayerScheme,
    build_layer_mesh,
    convergence_study,
    layer_average,
    layer_contraction_violations,
    layer_problem,
    layer_quadrature_error,
    run_perturbed,
)

TIGHT = SolverSettings(tol=1e-13)


def test_band_around_the_inclusion() -> None:
    layer = build_layer_mesh(8, 0.125)
    assert layer.band_cells == (1, 1, 1, 1)
    assert layer.layer_area == pytest.approx(0.3125)
    assert layer.thickness == pytest.approx((0.125,) * 4)
    mesh = layer.mesh
    assert mesh.interface_length == pytest.approx(2.0)
    assert audit_mesh(mesh).holds
    assert np.sum(mesh.subdomain == Subdomain.OMEGA1) == 32


def test_band_keeps_the_grid_of_the_inclusion_mesh() -> None:
    layer = build_layer_mesh(16, 0.125)
    plain = build_inclusion_mesh(16)
    np.testing.assert_array_equal(layer.mesh.nodes, plain.nodes)
    np.testing.assert_array_equal(layer.mesh.interface_nodes, plain.interface_nodes)


@pytest.mark.parametrize("n, epsilon", [(8, 0.01), (8, 0.25), (16, 0.5)])
def test_band_must_fit_between_interface_and_boundary(n: int, epsilon: float) -> None:
    with pytest.raises(GeometryError):
        build_layer_mesh(n, epsilon)


def test_band_rejects_invalid_parameters() -> None:
    with pytest.raises(ValueError):
        build_layer_mesh(10, 0.1)
    with pytest.raises(ValueError):
        build_layer_mesh(8, -0.1)
    with pytest.raises(ValueError):
        build_layer_mesh(8, 0.125, gamma=(1.0, 1.0))


def test_snapped_thickness_is_logged(caplog: pytest.LogCaptureFixture) -> None:
    with caplog.at_level(logging.WARNING, logger="rothe_py.thinlayer.layer"):
        layer = build_layer_mesh(32, 0.1)
    assert layer.band_cells == (3, 3, 3, 3)
    assert any("snapped" in record.getMessage() for record in caplog.records)


def test_thickness_profile_per_side() -> None:
    layer = build_layer_mesh(32, 0.125, gamma=(1.0, 0.5, 1.5, 1.0))
    assert layer.band_cells == (4, 2, 6, 4)
    assert layer.band_width_cells == 6
    thickness = layer.element_thickness()
    layer_thickness = thickness[layer.layer_elements]
    assert np.all(np.isfinite(layer_thickness))
    assert set(np.round(layer_thickness * 32, 12)) == {4.0, 2.0, 6.0, 3.0, 4.0, 5.0}


def test_scaling_gamma_and_epsilon_together_gives_the_same_band() -> None:
    a = build_layer_mesh(32, 0.125, gamma=1.0)
    b = build_layer_mesh(32, 0.25, gamma=0.5)
    assert a.band_cells == b.band_cells
    np.testing.assert_array_equal(a.mesh.subdomain, b.mesh.subdomain)
    np.testing.assert_allclose(a.node_weights()[1], b.node_weights()[1])


def test_constant_weight_quadrature_error_is_the_corner_area() -> None:
    for cells in (1, 2, 3):
        layer = build_layer_mesh(16, cells / 16)
        assert layer_quadrature_error(layer, lambda x, y: np.ones_like(x)) == pytest.approx(4.0 * cells / 16)


@pytest.mark.parametrize(
    "weight",
    [lambda x, y: np.ones_like(x), lambda x, y: x, lambda x, y: x**2 + y],
    ids=["one", "x", "x2_plus_y"],
)
def test_band_quadrature_converges_to_the_interface_integral(weight) -> None:
    cells = [8, 4, 2, 1]
    errors = [layer_quadrature_error(build_layer_mesh(64, c / 64), weight) for c in cells]
    thickness = [64 // c for c in cells]
    assert np.all(observed_orders(thickness, errors) >= 0.9)


def test_band_average_of_a_constant() -> None:
    layer = build_layer_mesh(16, 0.125)
    dofmap = build_dof_map(layer.mesh, InterfaceMode.CONTINUOUS)
    averages = layer_average(layer, dofmap, np.full(dofmap.n_dofs, 3.0))
    np.testing.assert_allclose(averages, 3.0)


def test_band_average_of_a_profile_decaying_across_the_band() -> None:
    layer = build_layer_mesh(32, 0.125)
    t = layer.thickness[0]
    dofmap = build_dof_map(layer.mesh, InterfaceMode.CONTINUOUS)
    x, y = layer.mesh.nodes[:, 0], layer.mesh.nodes[:, 1]
    outside = np.maximum(
        np.maximum(np.maximum(0.25 - x, x - 0.75), 0.0), np.maximum(np.maximum(0.25 - y, y - 0.75), 0.0)
    )
    profile = 1.0 - outside / t
    u = np.zeros(dofmap.n_dofs)
    active = dofmap.node_dofs[:, 0] >= 0
    u[dofmap.node_dofs[active, 0]] = profile[active]
    np.testing.assert_allclose(layer_average(layer, dofmap, u), 0.5, atol=1e-12)


def test_zero_data_gives_a_zero_trajectory() -> None:
    data = build_problem(build_inclusion_mesh(8), "continuous", m=4)
    traj = run_perturbed(data, build_layer_mesh(8, 0.125))
    np.testing.assert_array_equal(traj.steps, 0.0)


def test_layer_scheme_matches_dense_backward_euler() -> None:
    layer = build_layer_mesh(8, 0.125)
    data = build_problem(
        build_inclusion_mesh(8),
        "continuous",
        alpha=2.0,
        f=FieldSpec("sinxy", 1.0),
        S=InitialSpec("sin_profile", 0.5),
        m=4,
    )
    perturbed = layer_problem(data, layer)
    scheme = LayerScheme(layer)
    traj = scheme.process(perturbed)

    dofs = scheme.layer_dofs(perturbed)
    gram = np.zeros((perturbed.dofmap.n_dofs,) * 2)
    gram[dofs, dofs] = perturbed.alpha * scheme.weights / perturbed.h
    matrix = perturbed.smooth_operator.toarray() + gram
    expected = [np.array(perturbed.u0)]
    for t in perturbed.times[1:]:
        expected.append(np.linalg.solve(matrix, perturbed.rhs(t) + gram @ expected[-1]))
    np.testing.assert_allclose(traj.steps, np.vstack(expected), atol=1e-9)


def test_layer_source_excludes_the_band() -> None:
    layer = build_layer_mesh(16, 0.125)
    data = build_problem(build_inclusion_mesh(16), "continuous", f=FieldSpec("constant", 1.0))
    perturbed = layer_problem(data, layer)
    rhs = perturbed.rhs(0.0)
    # node (3, 8) sits mid-band on the left side; node (8, 8) is the centre of Omega1
    mid_band = perturbed.dofmap.node_dofs[8 * 17 + 3, 0]
    centre = perturbed.dofmap.node_dofs[8 * 17 + 8, 0]
    assert rhs[mid_band] == 0.0
    assert rhs[centre] == pytest.approx(1.0 / 256.0)


def test_initial_state_is_constant_across_the_band() -> None:
    layer = build_layer_mesh(16, 0.125)
    data = build_problem(build_inclusion_mesh(16), "continuous", S=InitialSpec("constant", 0.7))
    perturbed = layer_problem(data, layer)
    dofs = perturbed.dofmap.node_dofs[layer.layer_nodes, 0]
    np.testing.assert_allclose(perturbed.u0[dofs], 0.7)


def test_ineligible_functionals_and_beta_are_rejected() -> None:
    layer = build_layer_mesh(8, 0.125)
    mesh = build_inclusion_mesh(8)
    with pytest.raises(IneligibleFunctionalError):
        layer_problem(build_problem(mesh, "continuous", jspec=IntervalIndicator(-1.0, 1.0)), layer)
    with pytest.raises(ValueError):
        layer_problem(build_problem(mesh, "continuous", beta=0.5), layer)
    with pytest.raises(ValueError):
        layer_problem(build_problem(mesh, "bilateral"), layer)


def test_layer_scheme_rejects_data_from_another_mesh() -> None:
    data = build_problem(build_inclusion_mesh(8), "continuous")
    with pytest.raises(ValueError):
        LayerScheme(build_layer_mesh(8, 0.125)).process(data)


@pytest.mark.parametrize("jspec", [ZeroFunctional(), AbsoluteValue(0.5), PositivePart(0.5)], ids=lambda s: s.kind)
def test_band_norm_contracts_without_source(jspec) -> None:
    layer = build_layer_mesh(16, 0.125)
    data = build_problem(build_inclusion_mesh(16), "continuous", jspec=jspec, S=InitialSpec("sin_profile", 1.0), m=6)
    perturbed = layer_problem(data, layer)
    scheme = LayerScheme(layer, TIGHT)
    traj = scheme.process(perturbed)
    assert np.all(layer_contraction_violations(scheme, traj, perturbed) == 0.0)


@pytest.mark.parametrize("jspec", [ZeroFunctional(), AbsoluteValue(0.5), PositivePart(0.5)], ids=lambda s: s.kind)
def test_band_averages_approach_the_interface_trace(jspec) -> None:
    data = build_problem(
        build_inclusion_mesh(32),
        "continuous",
        jspec=jspec,
        f=FieldSpec("sinxy", 1.0),
        S=InitialSpec("sin_profile", 1.0),
        T=0.5,
        m=4,
    )
    study = convergence_study(data, [0.25, 0.125, 0.0625], gamma=0.5, settings=TIGHT)
    assert [run.band_width_cells for run in study.runs] == [4, 2, 1]
    assert study.strictly_decreasing, study.distances
    frame = study.to_frame()
    assert list(frame.columns) == [
        "epsilon",
        "band_width_cells",
        "effective_thickness",
        "distance_L2SigmaGamma",
        "layer_norm_bound",
    ]
    assert np.all(frame["layer_norm_bound"] > 0.0)


def test_study_validates_its_inputs() -> None:
    data = build_problem(build_inclusion_mesh(16), "continuous")
    with pytest.raises(ValueError):
        convergence_study(data, [0.0625, 0.125])
    with pytest.raises(ValueError):
        convergence_study(data, [])
    with pytest.raises(GeometryError):
        convergence_study(build_problem(build_strip_mesh(2, 2, 2), "continuous"), [0.125])
    with pytest.raises(IneligibleFunctionalError):
        convergence_study(build_problem(build_inclusion_mesh(16), "continuous", jspec=IntervalIndicator(-1, 1)), [0.125])


def test_study_on_a_refined_reference_grid() -> None:
    data = build_problem(build_inclusion_mesh(8), "continuous", f=FieldSpec("constant", 1.0), S=InitialSpec("constant", 0.5), m=2)
    study = convergence_study(data, [0.125], n=16, m=3, max_workers=2)
    assert study.n == 16
    assert study.m == 3
    assert len(study.runs) == 1
