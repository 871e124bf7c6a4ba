from __future__ import annotations

import numpy as np
import pytest
import scipy.sparse as sp

from rothe_py.convex import (
    AbsoluteValue,
    IntervalIndicator,
    PositivePart,
    QuadraticFunctional,
    SolverSettings,
    ZeroFunctional,
)
from rothe_py.errors import CoercivityError, ModeError
from rothe_py.fem import FieldSpec, InitialSpec, build_problem
from rothe_py.mesh import InterfaceMode, build_inclusion_mesh, build_strip_mesh
from rothe_py.metrics import observed_orders, trajectory_distance
from rothe_py.rothe import (
    SignoriniScheme,
    WentzellScheme,
    check_estimates,
    compatibility_residual,
    estimate_sweep,
    interface_kkt_residual,
    regularity_diagnostics,
    run_problem,
    run_signorini,
    run_wentzell,
    signorini_step,
    wentzell_step,
)
from rothe_py.rothe.estimates import (
    BOUNDED_DRIFT,
    CUMULATIVE_BOUND,
    DERIVATIVE_BOUND,
    ENERGY_BALANCE,
    INTERFACE_BOUND,
    INTERFACE_CONTRACTION,
    SUP_DERIVATIVE,
    SUP_ENERGY_BOUND,
    EstimateSweep,
)

TIGHT = SolverSettings(tol=1e-13)


def dense_backward_euler(data, quadratic: float = 0.0) -> np.ndarray:
    """Reference trajectory for smooth functionals ``j(x) = c x^2``."""

    P = data.selector.toarray()
    h = data.h
    gram = P.T @ np.diag(data.interface_weights / h) @ P
    penalty = P.T @ np.diag(2.0 * quadratic * data.lengths) @ P
    matrix = data.smooth_operator.toarray() + gram + penalty
    steps = [np.array(data.u0)]
    for t in data.times[1:]:
        steps.append(np.linalg.solve(matrix, data.rhs(t) + gram @ steps[-1]))
    return np.vstack(steps)


def test_wentzell_matches_dense_backward_euler() -> None:
    data = build_problem(
        build_inclusion_mesh(4),
        InterfaceMode.CONTINUOUS,
        sigma1=2.0,
        sigma2=0.5,
        alpha=1.5,
        beta=0.3,
        f=FieldSpec("sinxy", 1.0),
        S=InitialSpec("sin_profile", 0.5),
        T=1.0,
        m=6,
    )
    traj = run_wentzell(data)
    np.testing.assert_allclose(traj.steps, dense_backward_euler(data), atol=1e-9)
    assert traj.m == 6
    assert traj.h == pytest.approx(1.0 / 6.0)


def test_signorini_matches_dense_backward_euler() -> None:
    data = build_problem(
        build_strip_mesh(2, 2, 2),
        InterfaceMode.BILATERAL,
        alpha=1.0,
        f=FieldSpec("linear_t", 2.0),
        g=FieldSpec("constant", 0.5),
        S=InitialSpec("constant", 0.2),
        T=1.0,
        m=4,
    )
    traj = run_signorini(data)
    np.testing.assert_allclose(traj.steps, dense_backward_euler(data), atol=1e-9)


def test_quadratic_functional_matches_dense_backward_euler() -> None:
    data = build_problem(
        build_inclusion_mesh(4),
        "continuous",
        jspec=QuadraticFunctional(0.75),
        f=FieldSpec("constant", 1.0),
        S=InitialSpec("constant", 0.3),
        m=5,
    )
    traj = run_problem(data)
    np.testing.assert_allclose(traj.steps, dense_backward_euler(data, quadratic=0.75), atol=1e-9)


def test_single_step_matches_the_first_step_of_a_run() -> None:
    data = build_problem(build_inclusion_mesh(4), "continuous", jspec=AbsoluteValue(0.2), f=FieldSpec("sinxy", 1.0), m=3)
    traj = run_wentzell(data, TIGHT)
    first = wentzell_step(data.u0, data, data.h, data.times[1], TIGHT)
    np.testing.assert_allclose(first, traj.steps[1], atol=1e-10)


def test_single_signorini_step_matches_the_first_step_of_a_run() -> None:
    data = build_problem(
        build_strip_mesh(2, 2, 2),
        "bilateral",
        jspec=PositivePart(0.3),
        f=FieldSpec("sinxy", 1.0),
        g=FieldSpec("constant", 0.5),
        S=InitialSpec("sin_profile", 0.5),
        m=2,
    )
    traj = run_signorini(data, TIGHT)
    first = signorini_step(data.u0, data, data.h, data.times[1], TIGHT)
    np.testing.assert_allclose(first, traj.steps[1], atol=1e-10)
    assert np.all(np.isfinite(data.selector @ first))


def test_signorini_step_without_data_stays_at_rest() -> None:
    data = build_problem(build_strip_mesh(1, 1, 1), "bilateral", m=2)
    np.testing.assert_array_equal(signorini_step(np.zeros(data.dofmap.n_dofs), data, data.h, data.times[1]), 0.0)


def test_signorini_rejects_steps_above_the_coercivity_threshold() -> None:
    mesh = build_strip_mesh(2, 2, 2)
    data = build_problem(mesh, InterfaceMode.BILATERAL, sigma1=2.0, sigma2=2.0, alpha=1.0, T=1.0, m=1)
    with pytest.raises(CoercivityError) as info:
        run_signorini(data)
    assert info.value.minimal_m == 2
    assert run_signorini(data.with_steps(2)).m == 2


def test_coercivity_error_names_the_minimal_step_count() -> None:
    mesh = build_strip_mesh(1, 1, 1)
    data = build_problem(mesh, InterfaceMode.BILATERAL, alpha=0.1, T=1.0, m=5)
    with pytest.raises(CoercivityError, match="minimal admissible m is 10"):
        run_signorini(data)
    with pytest.raises(CoercivityError):
        signorini_step(data.u0, data, 0.2, 0.2)


def test_schemes_check_the_interface_mode() -> None:
    mesh = build_strip_mesh(1, 1, 1)
    with pytest.raises(ModeError):
        run_signorini(build_problem(mesh, "continuous"))
    with pytest.raises(ModeError):
        run_wentzell(build_problem(mesh, "bilateral"))


@pytest.mark.parametrize("mode", list(InterfaceMode))
def test_every_step_satisfies_the_interface_inclusion(mode: InterfaceMode) -> None:
    mesh = build_strip_mesh(2, 2, 3) if mode is InterfaceMode.BILATERAL else build_inclusion_mesh(8)
    data = build_problem(
        mesh,
        mode,
        jspec=PositivePart(0.5),
        f=FieldSpec("sinxy", 2.0),
        S=InitialSpec("sin_profile", 0.5),
        T=0.5,
        m=5,
    )
    scheme = SignoriniScheme(SolverSettings(tol=1e-12)) if mode is InterfaceMode.BILATERAL else WentzellScheme(
        SolverSettings(tol=1e-12)
    )
    traj = scheme.process(data)
    for i in range(data.m):
        system = scheme.system(data, traj.steps[i], data.h, data.times[i + 1])
        violation = interface_kkt_residual(system, traj.steps[i + 1], data.jspec, atol=1e-9)
        assert violation.max() <= 1e-8


@pytest.mark.parametrize(
    "jspec",
    [ZeroFunctional(), AbsoluteValue(0.3), PositivePart(0.3), QuadraticFunctional(0.5), IntervalIndicator(-1.0, 1.0)],
    ids=lambda spec: spec.kind,
)
@pytest.mark.parametrize("mode", list(InterfaceMode))
def test_interface_norm_contracts_without_data(jspec, mode: InterfaceMode) -> None:
    mesh = build_inclusion_mesh(8) if mode is InterfaceMode.CONTINUOUS else build_strip_mesh(2, 2, 2)
    data = build_problem(mesh, mode, jspec=jspec, S=InitialSpec("sin_profile", 0.5), T=0.5, m=8)
    traj = run_problem(data, TIGHT)
    norms = traj.interface_norms()
    assert np.all(np.diff(norms) <= 1e-12 * (1.0 + norms[:-1]))
    report = check_estimates(traj, data)
    assert report.records_for(INTERFACE_CONTRACTION)
    assert report.passes, report.failed()


@pytest.mark.parametrize(
    "jspec",
    [ZeroFunctional(), AbsoluteValue(0.3), PositivePart(0.3), QuadraticFunctional(0.5), IntervalIndicator(-1.0, 1.0)],
    ids=lambda spec: spec.kind,
)
@pytest.mark.parametrize("seed", range(5))
def test_weighted_interface_norm_stays_below_the_initial_datum(jspec, seed: int) -> None:
    rng = np.random.default_rng(seed)
    data = build_problem(
        build_inclusion_mesh(8),
        InterfaceMode.CONTINUOUS,
        sigma1=float(rng.uniform(0.5, 3.0)),
        sigma2=float(rng.uniform(0.5, 3.0)),
        alpha=float(rng.uniform(0.2, 2.0)),
        beta=float(rng.uniform(0.0, 1.0)),
        jspec=jspec,
        S=InitialSpec("sin_profile", float(rng.uniform(0.1, 1.0))),
        T=0.5,
        m=8,
    )
    traj = run_wentzell(data, TIGHT)
    norms = traj.interface_norms(weighted=True)
    assert np.all(norms[1:] <= norms[0] + 1e-12 * (1.0 + norms[0]))
    report = check_estimates(traj, data)
    assert len(report.records_for(INTERFACE_CONTRACTION)) == data.m
    assert report.passes, report.failed()


@pytest.mark.parametrize("jspec", [ZeroFunctional(), AbsoluteValue(0.2), QuadraticFunctional(1.0)], ids=lambda s: s.kind)
def test_explicit_estimates_hold_on_the_inclusion(jspec) -> None:
    data = build_problem(
        build_inclusion_mesh(8),
        "continuous",
        sigma1=2.0,
        alpha=0.5,
        jspec=jspec,
        f=FieldSpec("linear_t", 1.0),
        S=InitialSpec("sin_profile", 0.3),
        m=8,
    )
    report = check_estimates(run_wentzell(data, TIGHT), data)
    assert report.passes, report.failed()
    assert len(report.records_for(ENERGY_BALANCE)) == 8
    assert not report.records_for(INTERFACE_CONTRACTION)


def test_estimate_report_rejects_foreign_trajectories() -> None:
    data = build_problem(build_inclusion_mesh(4), "continuous", m=4)
    traj = run_wentzell(data)
    with pytest.raises(ValueError):
        check_estimates(traj, data.with_steps(8))


@pytest.mark.parametrize(
    "mesh, mode, jspec",
    [
        (build_inclusion_mesh(8), InterfaceMode.CONTINUOUS, ZeroFunctional()),
        (build_inclusion_mesh(8), InterfaceMode.CONTINUOUS, QuadraticFunctional(0.5)),
        (build_strip_mesh(2, 2, 2), InterfaceMode.BILATERAL, ZeroFunctional()),
    ],
)
def test_generic_constant_ratios_drift_less_than_ten_percent(mesh, mode, jspec) -> None:
    data = build_problem(mesh, mode, jspec=jspec, f=FieldSpec("sinxy", 1.0), S=InitialSpec("stationary"), T=1.0)
    sweep = estimate_sweep(data, [8, 16, 32, 64], TIGHT)
    assert sweep.explicit_pass
    keys = [DERIVATIVE_BOUND, SUP_DERIVATIVE, SUP_ENERGY_BOUND]
    if mode is InterfaceMode.BILATERAL:
        keys += [CUMULATIVE_BOUND, INTERFACE_BOUND]
        assert {CUMULATIVE_BOUND, SUP_ENERGY_BOUND} <= set(sweep.reports[0].inequality_ids())
    for key in keys:
        assert sweep.drift(key) <= BOUNDED_DRIFT, (key, sweep.values[key])
        assert sweep.bounded(key)
    frame = sweep.summary_frame()
    assert list(frame.columns) == ["quantity", "growth", "drift", "bounded"]


def test_boundedness_is_judged_by_drift() -> None:
    data = build_problem(build_inclusion_mesh(4), "continuous", m=4)
    report = check_estimates(run_wentzell(data), data)
    values = {"rising": (1.0, 1.05, 1.09), "falling": (1.0, 0.95, 0.89)}
    sweep = EstimateSweep(step_counts=(4, 8, 16), reports=(report,) * 3, values=values)
    assert sweep.bounded("rising")
    assert not sweep.bounded("falling")
    assert sweep.growth("falling") == pytest.approx(1.0)


def test_estimate_sweep_is_order_independent_under_threads() -> None:
    data = build_problem(build_inclusion_mesh(4), "continuous", f=FieldSpec("constant", 1.0), S=InitialSpec("stationary"))
    sequential = estimate_sweep(data, [4, 8], TIGHT)
    threaded = estimate_sweep(data, [4, 8], TIGHT, max_workers=2)
    assert sequential.values == threaded.values


def test_backward_euler_converges_at_first_order() -> None:
    data = build_problem(
        build_inclusion_mesh(8),
        "continuous",
        f=FieldSpec("sinxy", 1.0),
        S=InitialSpec("stationary"),
        T=1.0,
        m=8,
    )
    reference = run_wentzell(data.with_steps(256))
    counts = [8, 16, 32]
    errors = [trajectory_distance(run_wentzell(data.with_steps(m)), reference).l2_sigma for m in counts]
    assert np.all(observed_orders(counts, errors) >= 0.9)


def test_signorini_converges_at_first_order() -> None:
    data = build_problem(
        build_strip_mesh(2, 2, 2),
        InterfaceMode.BILATERAL,
        f=FieldSpec("sinxy", 1.0),
        S=InitialSpec("stationary"),
        T=1.0,
        m=8,
    )
    reference = run_signorini(data.with_steps(256), TIGHT)
    counts = [8, 16, 32]
    errors = [trajectory_distance(run_signorini(data.with_steps(m), TIGHT), reference).l2_sigma for m in counts]
    assert all(error > 0 for error in errors)
    assert np.all(observed_orders(counts, errors) >= 0.9)


def test_trajectories_are_invariant_under_dof_renumbering() -> None:
    data = build_problem(
        build_strip_mesh(2, 2, 3),
        InterfaceMode.BILATERAL,
        jspec=AbsoluteValue(0.2),
        f=FieldSpec("sinxy", 1.0),
        g=FieldSpec("constant", 0.3),
        S=InitialSpec("sin_profile", 0.4),
        m=4,
    )
    perm = np.random.default_rng(7).permutation(data.dofmap.n_dofs)
    original = run_signorini(data, TIGHT)
    permuted = run_signorini(data.permuted(perm), TIGHT)
    np.testing.assert_allclose(permuted.steps[:, perm], original.steps, atol=1e-8)
    np.testing.assert_allclose(permuted.interface_series, original.interface_series, atol=1e-8)


@pytest.mark.parametrize("jspec", [ZeroFunctional(), QuadraticFunctional(0.5)], ids=lambda s: s.kind)
def test_stationary_initial_state_is_compatible(jspec) -> None:
    data = build_problem(build_inclusion_mesh(8), "continuous", jspec=jspec, f=FieldSpec("sinxy", 1.0), S=InitialSpec("stationary"))
    residual = compatibility_residual(data)
    assert residual <= 1e-9
    report = regularity_diagnostics(run_wentzell(data), data, residual=residual)
    assert report.compatible and report.guaranteed
    assert list(report.to_frame().columns) == ["step", "t", "interface_norm", "energy_norm"]


def test_constant_interface_datum_without_source_is_incompatible() -> None:
    data = build_problem(build_inclusion_mesh(8), "continuous", S=InitialSpec("constant", 1.0))
    residual = compatibility_residual(data)
    assert residual > 1e-9
    report = regularity_diagnostics(run_wentzell(data), data, residual=residual)
    assert not report.guaranteed


def test_interval_indicator_is_flagged_in_regularity_diagnostics() -> None:
    data = build_problem(build_inclusion_mesh(4), "continuous", jspec=IntervalIndicator(-1.0, 1.0), S=InitialSpec("stationary"))
    report = regularity_diagnostics(run_wentzell(data), data)
    assert report.compatible
    assert not report.guaranteed


def test_trajectory_interpolants() -> None:
    data = build_problem(build_inclusion_mesh(4), "continuous", f=FieldSpec("constant", 1.0), m=4)
    traj = run_wentzell(data)
    np.testing.assert_allclose(traj.interpolate(0.5), traj.steps[2])
    np.testing.assert_allclose(traj.interpolate(0.125), 0.5 * (traj.steps[0] + traj.steps[1]))
    np.testing.assert_allclose(traj.step_function(0.0), traj.steps[1])
    np.testing.assert_allclose(traj.step_function(0.1), traj.steps[1])
    np.testing.assert_allclose(traj.step_function(0.25), traj.steps[1])
    assert traj.derivatives.shape == (4, data.dofmap.n_dofs)
    with pytest.raises(ValueError):
        traj.interpolate(1.5)


def test_dynamic_gram_scales_with_the_step() -> None:
    data = build_problem(build_strip_mesh(2, 2, 2), "continuous", alpha=2.0)
    gram = WentzellScheme().dynamic_gram(data, 0.5)
    expected = data.selector.T @ sp.diags(2.0 * data.lengths / 0.5) @ data.selector
    np.testing.assert_allclose(gram.toarray(), expected.toarray())
