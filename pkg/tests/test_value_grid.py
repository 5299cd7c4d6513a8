from __future__ import annotations

import math

import numpy as np
import pytest

from hjbolza.errors import DimensionError, DomainError, ResolutionError
from hjbolza.limits import LimitSchedule
from hjbolza.problems import catalog_entry, get_problem
from hjbolza.value_grid import (
    GridSpec,
    hopf_lax,
    initial_layer_check,
    interpolate,
    interpolate_many,
    local_lipschitz_estimate,
    solve_semilagrangian,
)


@pytest.mark.parametrize(
    "args,error",
    [
        ((0.0, 4, [(-1, 1)], [5]), ValueError),
        ((1.0, 0, [(-1, 1)], [5]), ValueError),
        ((1.0, 4, [(1, -1)], [5]), ValueError),
        ((1.0, 4, [(-1, 1)], [1]), ValueError),
        ((1.0, 4, [(-1, 1)], [5, 5]), DimensionError),
    ],
)
def test_gridspec_validation(args, error):
    with pytest.raises(error):
        GridSpec(*args)


def test_gridspec_geometry_and_refinement():
    spec = GridSpec(1.0, 8, [(-2.0, 2.0)], [9])
    assert spec.dt == 0.125
    assert spec.dx[0] == 0.5
    fine = spec.refined(2)
    assert fine.time_steps == 16 and fine.space_steps[0] == 17
    np.testing.assert_allclose(fine.axes()[0][::2], spec.axes()[0])


def test_zero_terminal_cost_grid_is_identically_zero():
    grid = solve_semilagrangian(get_problem("quadratic"), GridSpec(1.0, 16, [(-2.0, 2.0)], [33]))
    assert np.max(np.abs(grid.values)) <= 1e-12


def test_quadratic_terminal_grid_matches_hopf_lax(small_x2_grid):
    spec = small_x2_grid.spec
    xs = spec.axes()[0][8:-8]
    expected = np.array([hopf_lax(get_problem("quadratic_x2"), 1.0, [x]) for x in xs])
    assert np.max(np.abs(small_x2_grid.values[-1][8:-8] - expected)) <= 0.02


def test_grid_error_shrinks_under_refinement():
    problem = get_problem("quadratic_x2")
    closed = catalog_entry("quadratic_x2").known_value_function
    errors = []
    for spec in (GridSpec(1.0, 16, [(-2.0, 2.0)], [33]), GridSpec(1.0, 64, [(-2.0, 2.0)], [129])):
        grid = solve_semilagrangian(problem, spec)
        xs = spec.axes()[0]
        inner = np.abs(xs) <= 1.0
        errors.append(np.max(np.abs(grid.values[-1][inner] - closed(1.0, xs[inner, None]))))
    assert errors[1] < 0.5 * errors[0]


def test_step_grid_stays_above_zero_and_below_closed_form(small_step_grid):
    closed = catalog_entry("step").known_value_function
    spec = small_step_grid.spec
    xs = spec.axes()[0]
    inner = np.abs(xs) <= 1.0
    err = np.abs(small_step_grid.values[-1][inner] - closed(1.0, xs[inner, None]))
    assert np.all(small_step_grid.values >= -1e-12)
    assert np.max(err) <= 0.01


def test_target_indicator_grid_keeps_infinite_cells_and_lipschitz_reports_them():
    grid = solve_semilagrangian(get_problem("lagrange_ball"), GridSpec(0.5, 16, [(-1.0, 1.0)], [41]))
    assert np.isinf(grid.values[0]).any()
    assert np.isfinite(grid.values[-1]).all()
    closed = catalog_entry("lagrange_ball").known_value_function
    xs = grid.spec.axes()[0]
    assert np.max(np.abs(grid.values[-1] - closed(0.5, xs[:, None]))) <= 0.05
    est = local_lipschitz_estimate(grid, (0.5, 0.5), [(-0.5, 0.5)])
    assert math.isfinite(float(est))


def test_velocity_cap_raises_resolution_error():
    with pytest.raises(ResolutionError, match="cell"):
        solve_semilagrangian(get_problem("quadratic_x2"), GridSpec(1.0, 4, [(-2.0, 2.0)], [9]), velocity_cap=0.1)


def test_grid_dimension_must_match_problem():
    with pytest.raises(DimensionError):
        solve_semilagrangian(get_problem("quadratic"), GridSpec(1.0, 4, [(-1, 1), (-1, 1)], [5, 5]))


def test_two_dimensional_grid_runs():
    problem = get_problem("quadratic_x2", dimension=2)
    grid = solve_semilagrangian(problem, GridSpec(0.5, 4, [(-1.0, 1.0), (-1.0, 1.0)], [9, 9]))
    closed = catalog_entry("quadratic_x2", dimension=2).known_value_function
    assert abs(interpolate(grid, 0.5, [0.25, -0.25]) - float(closed(0.5, np.array([0.25, -0.25])))) <= 0.05


def test_interpolation_at_nodes_is_exact(small_x2_grid):
    spec = small_x2_grid.spec
    for n, j in ((0, 5), (10, 64), (64, 128)):
        assert interpolate(small_x2_grid, spec.times[n], [spec.axes()[0][j]]) == small_x2_grid.values[n, j]


def test_interpolation_between_equal_nodes():
    grid = solve_semilagrangian(get_problem("quadratic"), GridSpec(1.0, 4, [(-1.0, 1.0)], [5]))
    assert interpolate(grid, 0.3, [0.1]) == 0.0


def test_interpolation_midpoint_close_to_hopf_lax(small_x2_grid):
    v = interpolate(small_x2_grid, 0.7, [0.3])
    assert v == pytest.approx(hopf_lax(get_problem("quadratic_x2"), 0.7, [0.3]), abs=0.02)


def test_interpolation_outside_hull_is_a_domain_error(small_x2_grid):
    with pytest.raises(DomainError):
        interpolate(small_x2_grid, 0.5, [3.0])
    with pytest.raises(DomainError):
        interpolate(small_x2_grid, 1.5, [0.0])


def test_interpolate_many_matches_scalar_calls(small_x2_grid):
    ts = np.array([0.2, 0.55, 0.9])
    xs = np.array([[-0.4], [0.0], [1.1]])
    many = interpolate_many(small_x2_grid, ts, xs)
    np.testing.assert_allclose(many, [interpolate(small_x2_grid, t, x) for t, x in zip(ts, xs)])


def test_lipschitz_of_constant_grid_is_zero():
    grid = solve_semilagrangian(get_problem("quadratic"), GridSpec(1.0, 8, [(-1.0, 1.0)], [9]))
    assert float(local_lipschitz_estimate(grid, (0.5, 1.0), [(-1.0, 1.0)])) == 0.0


def test_lipschitz_of_quadratic_terminal_grid(small_x2_grid):
    est = float(local_lipschitz_estimate(small_x2_grid, (0.5, 1.0), [(0.0, 1.0)]))
    assert est == pytest.approx(1.0, abs=0.05)


def test_lipschitz_region_validation(small_x2_grid):
    with pytest.raises(DomainError):
        local_lipschitz_estimate(small_x2_grid, (0.0, 1.0), [(0.0, 1.0)])
    with pytest.raises(DomainError):
        local_lipschitz_estimate(small_x2_grid, (0.5, 1.0), [(0.0, 5.0)])


@pytest.mark.parametrize(
    "name,t,x,expected",
    [("quadratic", 1.0, 0.7, 0.0), ("quadratic_x2", 1.0, 1.0, 1 / 3), ("quadratic_x2", 1e-8, 0.5, 0.25)],
)
def test_hopf_lax_examples(name, t, x, expected):
    assert hopf_lax(get_problem(name), t, [x]) == pytest.approx(expected, abs=1e-7)


def test_hopf_lax_matches_dense_scan():
    ys = np.linspace(-3, 3, 600001)
    for t, x in ((0.4, -1.3), (2.0, 0.9)):
        scan = float(np.min((ys - x) ** 2 / (2 * t) + ys**2))
        assert hopf_lax(get_problem("quadratic_x2"), t, [x]) == pytest.approx(scan, abs=1e-8)


def test_hopf_lax_rejects_state_dependent_lagrangian():
    with pytest.raises(ValueError):
        hopf_lax(get_problem("step"), 1.0, [0.0])


@pytest.mark.parametrize("name", ["quadratic_x2", "step"])
@pytest.mark.parametrize("lam", [0.0, 1.0, 4.0])
def test_initial_layer_passes_on_catalog(name, lam):
    report = initial_layer_check(get_problem(name), [0.0], lam, LimitSchedule.geometric(0.1, 0.5, 5))
    assert report.passed
    assert len(report.diagnostics["per_h"]) == 5


def test_initial_layer_deviations_shrink_linearly_in_h():
    report = initial_layer_check(get_problem("quadratic_x2"), [1.0], 1.0, LimitSchedule.geometric(0.1, 0.5, 5))
    devs = [r["max_deviation"] for r in report.diagnostics["per_h"]]
    assert all(b < a for a, b in zip(devs, devs[1:]))
    # closed form over the cone |y - 1| <= h is attained at an end of the cone
    for rec in report.diagnostics["per_h"]:
        h = rec["h"]
        exact = max(abs(y * y / (1 + 2 * h) - 1.0) for y in (1 - h, 1 + h))
        assert rec["max_deviation"] == pytest.approx(exact, abs=1e-6)


def test_initial_layer_needs_finite_terminal_cost():
    with pytest.raises(DomainError):
        initial_layer_check(get_problem("lagrange_ball"), [2.0], 1.0, LimitSchedule.geometric(0.1, 0.5, 3))
