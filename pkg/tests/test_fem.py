from __future__ import annotations

import numpy as np
import pytest

from rothe_py.convex import AbsoluteValue, QuadraticFunctional, ZeroFunctional
from rothe_py.errors import ModeError, TimeRangeError
from rothe_py.fem import (
    FieldSpec,
    InitialSpec,
    SampledField,
    assemble_energy_gram,
    assemble_interface_load,
    assemble_interface_mass,
    assemble_load,
    assemble_mass,
    assemble_stiffness,
    assemble_tangential_stiffness,
    build_problem,
    interface_selector,
    poincare_constant,
    poincare_estimate,
)
from rothe_py.mesh import InterfaceMode, Subdomain, build_dof_map, build_inclusion_mesh, build_strip_mesh


def test_stiffness_annihilates_constants_before_elimination() -> None:
    mesh = build_inclusion_mesh(8)
    K = assemble_stiffness(mesh, None, 2.0, 0.5)
    np.testing.assert_allclose(K @ np.ones(mesh.n_nodes), 0.0, atol=1e-12)
    np.testing.assert_allclose((K - K.T).toarray(), 0.0, atol=1e-14)


def test_stiffness_reproduces_the_energy_of_a_linear_field() -> None:
    mesh = build_strip_mesh(2, 3, 2)
    K = assemble_stiffness(mesh, None, 3.0, 1.0)
    x = mesh.nodes[:, 0]
    # |grad x|^2 = 1 weighted by sigma over areas 1 and 1
    assert float(x @ K @ x) == pytest.approx(4.0)


def test_stiffness_rejects_non_positive_conductivity() -> None:
    mesh = build_strip_mesh(1, 1, 1)
    with pytest.raises(ValueError):
        assemble_stiffness(mesh, None, 0.0, 1.0)


@pytest.mark.parametrize(
    "mesh, area",
    [(build_inclusion_mesh(4), 1.0), (build_strip_mesh(2, 2, 2), 2.0)],
)
def test_mass_integrates_the_domain_area(mesh, area: float) -> None:
    M = assemble_mass(mesh, None)
    ones = np.ones(mesh.n_nodes)
    assert float(ones @ M @ ones) == pytest.approx(area)


def test_mass_restricted_to_the_inclusion() -> None:
    mesh = build_inclusion_mesh(8)
    M1 = assemble_mass(mesh, None, (Subdomain.OMEGA1,))
    ones = np.ones(mesh.n_nodes)
    assert float(ones @ M1 @ ones) == pytest.approx(0.25)


def test_load_of_a_unit_source_sums_to_the_area() -> None:
    mesh = build_strip_mesh(2, 2, 3)
    load = assemble_load(mesh, None, np.ones(mesh.n_nodes))
    assert load.sum() == pytest.approx(2.0)
    omega1 = assemble_load(mesh, None, np.ones(mesh.n_nodes), subdomains=(Subdomain.OMEGA1,))
    assert omega1.sum() == pytest.approx(1.0)


def test_load_needs_a_time_for_sampled_sources() -> None:
    mesh = build_strip_mesh(1, 1, 1)
    field = FieldSpec("constant", 1.0).sample(mesh.nodes, 1.0)
    with pytest.raises(ValueError):
        assemble_load(mesh, None, field)
    with pytest.raises(ValueError):
        assemble_load(mesh, None, np.ones(3))


def test_tangential_stiffness_on_the_strip_interface() -> None:
    mesh = build_strip_mesh(2, 2, 2)
    dofmap = build_dof_map(mesh, InterfaceMode.CONTINUOUS)
    K_gamma = assemble_tangential_stiffness(mesh, dofmap, 1.0).toarray()
    np.testing.assert_allclose(K_gamma, [[2.0, -2.0, 0.0], [-2.0, 4.0, -2.0], [0.0, -2.0, 2.0]])


def test_tangential_stiffness_requires_the_continuous_mode() -> None:
    mesh = build_strip_mesh(2, 2, 2)
    with pytest.raises(ModeError):
        assemble_tangential_stiffness(mesh, build_dof_map(mesh, InterfaceMode.BILATERAL), 1.0)
    with pytest.raises(ModeError):
        assemble_interface_load(mesh, build_dof_map(mesh, InterfaceMode.CONTINUOUS), np.ones(3))


def test_selector_reads_the_jump_in_bilateral_mode() -> None:
    mesh = build_strip_mesh(2, 2, 2)
    dofmap = build_dof_map(mesh, InterfaceMode.BILATERAL)
    pairs = dofmap.interface_array()
    u = np.zeros(dofmap.n_dofs)
    u[pairs[:, 0]] = 1.0
    u[pairs[:, 1]] = 3.0
    np.testing.assert_allclose(interface_selector(dofmap) @ u, 2.0)


def test_interface_load_integrates_along_the_interface() -> None:
    mesh = build_inclusion_mesh(8)
    dofmap = build_dof_map(mesh, InterfaceMode.BILATERAL)
    load = assemble_interface_load(mesh, dofmap, np.ones(len(mesh.interface_nodes)))
    assert load.sum() == pytest.approx(2.0)
    assert np.all(load[dofmap.interface_array()[:, 1]] == 0.0)


def test_energy_gram_is_positive_definite_in_both_modes() -> None:
    mesh = build_inclusion_mesh(4)
    for mode in InterfaceMode:
        gram = assemble_energy_gram(mesh, build_dof_map(mesh, mode)).toarray()
        assert np.linalg.eigvalsh(gram).min() > 0.0


def test_sampled_field_interpolates_linearly() -> None:
    field = SampledField(times=[0.0, 1.0], values=[[0.0, 2.0], [1.0, 4.0]])
    np.testing.assert_allclose(field.at(0.25), [0.25, 2.5])
    assert field.lipschitz == pytest.approx(2.0)
    with pytest.raises(TimeRangeError):
        field.at(1.5)


def test_field_profiles_are_affine_in_time() -> None:
    points = np.array([[0.5, 0.5], [0.25, 0.75]])
    field = FieldSpec("sinxy", 2.0).sample(points, 2.0)
    exact = FieldSpec("sinxy", 2.0).evaluate(points, 0.7)
    np.testing.assert_allclose(field.at(0.7), exact)
    with pytest.raises(ValueError):
        FieldSpec("cosxy", 1.0)


def test_sin_profile_vanishes_at_the_start_of_the_interface() -> None:
    mesh = build_inclusion_mesh(8)
    S = InitialSpec("sin_profile", 1.0).profile(mesh)
    assert S[0] == pytest.approx(0.0)
    assert S.max() == pytest.approx(1.0)


@pytest.mark.parametrize("mode", list(InterfaceMode))
def test_initial_state_matches_the_interface_datum(mode: InterfaceMode) -> None:
    mesh = build_inclusion_mesh(8)
    data = build_problem(mesh, mode, S=InitialSpec("sin_profile", 0.5), f=FieldSpec("constant", 1.0))
    np.testing.assert_allclose(data.selector @ data.u0, data.S, atol=1e-12)


@pytest.mark.parametrize("jspec", [ZeroFunctional(), QuadraticFunctional(0.5), AbsoluteValue(0.1)])
def test_stationary_initial_state_is_a_stationary_point(jspec) -> None:
    mesh = build_inclusion_mesh(8)
    data = build_problem(mesh, "continuous", jspec=jspec, f=FieldSpec("sinxy", 1.0), S=InitialSpec("stationary"))
    residual = data.rhs(0.0) - data.smooth_operator @ data.u0
    if isinstance(jspec, ZeroFunctional):
        np.testing.assert_allclose(residual, 0.0, atol=1e-10)
    else:
        interior = np.setdiff1d(np.arange(data.dofmap.n_dofs), data.dofmap.interface_array()[:, 0])
        np.testing.assert_allclose(residual[interior], 0.0, atol=1e-9)


def test_problem_data_rejects_beta_on_the_bilateral_interface() -> None:
    mesh = build_strip_mesh(2, 2, 2)
    with pytest.raises(ValueError):
        build_problem(mesh, InterfaceMode.BILATERAL, beta=1.0)


def test_minimal_signorini_steps() -> None:
    mesh = build_strip_mesh(1, 1, 1)
    data = build_problem(mesh, InterfaceMode.BILATERAL, sigma1=2.0, sigma2=1.0, alpha=1.0, T=1.0, m=2)
    assert data.minimal_signorini_steps == 1
    data = build_problem(mesh, InterfaceMode.BILATERAL, sigma1=1.0, sigma2=1.0, alpha=0.1, T=1.0, m=10)
    assert data.minimal_signorini_steps == 10


def test_permuted_problem_permutes_the_load() -> None:
    mesh = build_strip_mesh(2, 2, 2)
    data = build_problem(mesh, InterfaceMode.BILATERAL, f=FieldSpec("linear_t", 1.0), g=FieldSpec("constant", 0.5))
    perm = np.random.default_rng(3).permutation(data.dofmap.n_dofs)
    permuted = data.permuted(perm)
    np.testing.assert_allclose(permuted.rhs(0.5)[perm], data.rhs(0.5))
    np.testing.assert_allclose(permuted.u0[perm], data.u0)


def test_poincare_estimate_on_the_inclusion() -> None:
    mesh = build_inclusion_mesh(8)
    estimate = poincare_estimate(mesh, build_dof_map(mesh, InterfaceMode.BILATERAL))
    assert estimate.constant > 0.0
    assert estimate.constant * estimate.eigenvalue == pytest.approx(1.0)
    assert all(later <= earlier + 1e-12 for earlier, later in zip(estimate.trace, estimate.trace[1:]))
    with pytest.raises(ModeError):
        poincare_estimate(mesh, build_dof_map(mesh, InterfaceMode.CONTINUOUS))


def test_interface_weights_are_lumped_edge_halves() -> None:
    mesh = build_strip_mesh(2, 2, 2)
    mass = assemble_interface_mass(mesh, build_dof_map(mesh, InterfaceMode.CONTINUOUS), 1.0)
    np.testing.assert_allclose(mass.weights, [0.25, 0.5, 0.25])
    doubled = assemble_interface_mass(mesh, build_dof_map(mesh, InterfaceMode.CONTINUOUS), 2.0)
    np.testing.assert_allclose(doubled.weights, 2.0 * mass.weights)
    with pytest.raises(ValueError):
        assemble_interface_mass(mesh, build_dof_map(mesh, InterfaceMode.CONTINUOUS), 0.0)


@pytest.mark.parametrize("mode", list(InterfaceMode))
def test_interface_weights_integrate_alpha_over_the_interface(mode: InterfaceMode) -> None:
    mesh = build_inclusion_mesh(8)
    mass = assemble_interface_mass(mesh, build_dof_map(mesh, mode), 0.3)
    assert mass.weights.sum() == pytest.approx(0.3 * 2.0)
    assert mass.selector.shape == (len(mesh.interface_nodes), build_dof_map(mesh, mode).n_dofs)


def test_poincare_constant_settles_under_refinement() -> None:
    constants = []
    for n in (8, 16, 32):
        mesh = build_inclusion_mesh(n)
        constants.append(poincare_constant(mesh, build_dof_map(mesh, InterfaceMode.BILATERAL)))
    assert all(c > 0.0 for c in constants)
    for coarse, fine in zip(constants, constants[1:]):
        assert fine == pytest.approx(coarse, rel=0.25)
