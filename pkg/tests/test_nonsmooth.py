from __future__ import annotations

import math

import numpy as np
import pytest

from hjbolza.errors import DimensionError, DomainError
from hjbolza.limits import LimitSchedule
from hjbolza.nonsmooth import (
    DerivativeKind,
    ae_equality_check,
    default_probe_directions,
    lower_contingent_derivative,
    lplus,
    subdifferential_test,
    superdifferential_test,
    upper_contingent_derivative,
)
from hjbolza.problems import catalog_entry, eval_lagrangian, get_problem
from hjbolza.trajectory import MinimizationOptions, Trajectory

SCHED = LimitSchedule()
V_X2 = catalog_entry("quadratic_x2").known_value_function


def _abs(t, x):
    return abs(float(np.atleast_1d(x)[0]))


def _smooth(t, x):
    x = float(np.atleast_1d(x)[0])
    return t * t + math.sin(x)


def test_lower_derivative_of_abs():
    est = lower_contingent_derivative(_abs, (0.0, [0.0]), [0.0, 1.0], SCHED)
    assert est.kind is DerivativeKind.LOWER
    assert est.value == pytest.approx(1.0, abs=1e-3)
    assert est.per_h_record.shape == (12, 2)


@pytest.mark.parametrize("sign", [1.0, -1.0])
def test_upper_derivative_of_signed_abs(sign):
    est = upper_contingent_derivative(lambda t, x: sign * _abs(t, x), (0.0, [0.0]), [0.0, 1.0], SCHED)
    assert est.kind is DerivativeKind.UPPER
    assert est.value == pytest.approx(sign, abs=1e-3)


def test_cone_takes_the_worst_nearby_direction():
    # along (0,1) the kink of |x| is seen only through the cone; lower <= upper always
    f = lambda t, x: abs(float(np.atleast_1d(x)[0]) - 0.0) + t
    lo = lower_contingent_derivative(f, (0.5, [0.0]), [1.0, 0.0], SCHED)
    hi = upper_contingent_derivative(f, (0.5, [0.0]), [1.0, 0.0], SCHED)
    assert lo.value <= hi.value
    assert lo.value == pytest.approx(1.0, abs=1e-3)


def test_lower_derivative_of_value_along_minimizer():
    est = lower_contingent_derivative(V_X2, (1.0, [1.0]), [-1.0, -2 / 3], SCHED)
    assert est.value <= -eval_lagrangian(get_problem("quadratic_x2"), [1.0], [-2 / 3]) + 1e-2


def test_derivative_errors():
    with pytest.raises(DomainError):
        lower_contingent_derivative(lambda t, x: math.inf, (0.0, [0.0]), [0.0, 1.0], SCHED)
    with pytest.raises(DimensionError):
        lower_contingent_derivative(_abs, (0.0, [0.0]), [0.0, 1.0, 2.0], SCHED)


def test_probe_directions_are_unit_and_cover_axes():
    d = default_probe_directions(2)
    np.testing.assert_allclose(np.linalg.norm(d, axis=1), 1.0)
    for axis in np.eye(2):
        assert np.any(np.all(np.isclose(d, axis), axis=1))
        assert np.any(np.all(np.isclose(d, -axis), axis=1))


def test_smooth_gradient_is_in_both_semidifferentials():
    point, grad = (0.3, [0.2]), (0.6, math.cos(0.2))
    assert subdifferential_test(_smooth, point, grad, SCHED).passed
    assert superdifferential_test(_smooth, point, grad, SCHED).passed


def test_shifted_gradient_is_rejected():
    point, grad = (0.3, [0.2]), (0.6 + 0.5, math.cos(0.2))
    assert not subdifferential_test(_smooth, point, grad, SCHED).passed
    assert not superdifferential_test(_smooth, point, grad, SCHED).passed


def test_value_gradient_at_one_one():
    report = subdifferential_test(V_X2, (1.0, [1.0]), (-2 / 9, 2 / 3), SCHED)
    assert report.passed
    assert superdifferential_test(V_X2, (1.0, [1.0]), (-2 / 9, 2 / 3), SCHED).passed


def test_kink_semidifferentials():
    # |x| at 0: subdifferential [-1,1] in p_x, superdifferential empty
    assert subdifferential_test(_abs, (0.5, [0.0]), (0.0, 0.3), SCHED).passed
    assert not subdifferential_test(_abs, (0.5, [0.0]), (0.0, 1.4), SCHED).passed
    assert not superdifferential_test(_abs, (0.5, [0.0]), (0.0, 0.0), SCHED).passed


def test_candidate_dimension_checked():
    with pytest.raises(DimensionError):
        subdifferential_test(_abs, (0.5, [0.0]), (0.0,), SCHED)


@pytest.mark.parametrize("name", ["quadratic", "quadratic_x2", "harmonic"])
def test_lplus_equals_lagrangian_when_continuous(name):
    problem = get_problem(name)
    for x, u in ((0.3, -1.2), (-1.0, 0.8), (0.5, 0.0)):
        est = lplus(problem, [x], [u])
        assert est.value == pytest.approx(eval_lagrangian(problem, [x], [u]), abs=1e-3)
        assert est.settled(1e-3)


def test_lplus_at_rest_is_zero():
    assert lplus(get_problem("quadratic"), [0.4], [0.0]).value == pytest.approx(0.0, abs=1e-12)


def test_lplus_step_gap_from_the_high_side():
    # arriving at 0 from x>0: best two-phase path costs sqrt(2)*h*|u| (dash across, rest at 0)
    step = get_problem("step")
    est = lplus(step, [0.0], [-1.0])
    assert est.value >= eval_lagrangian(step, [0.0], [-1.0])
    assert est.value == pytest.approx(math.sqrt(2.0), abs=1e-3)


def test_lplus_step_away_from_jump():
    step = get_problem("step")
    assert lplus(step, [0.3], [-1.0]).value == pytest.approx(1.5, abs=1e-6)
    assert lplus(step, [-0.3], [1.0]).value == pytest.approx(0.5, abs=1e-6)


def test_lplus_shift_robustness():
    step = get_problem("step")
    base = lplus(step, [0.0], [-1.0]).value
    shifted = lplus(step, [0.0], [-1.0], shift=lambda h: np.array([-1.0 - h]))
    assert shifted.value == pytest.approx(base, abs=1e-3)


def test_lplus_dimension_check():
    with pytest.raises(DimensionError):
        lplus(get_problem("step"), [0.0], [1.0, 0.0])


def test_ae_equality_on_constant_trajectory():
    traj = Trajectory(np.linspace(0, 1, 5), np.full((5, 1), -0.4), 0.0, 0.0)
    report = ae_equality_check(get_problem("step"), traj, [0.1, 0.3, 0.6, 0.9], LimitSchedule.geometric(0.1, 0.5, 6))
    assert report.passed
    assert report.diagnostics["agreement"] == 1.0


def test_ae_equality_skips_knot_times():
    traj = Trajectory(np.linspace(0, 1, 5), np.full((5, 1), 0.4), 0.0, 0.0)
    report = ae_equality_check(get_problem("quadratic"), traj, [0.25, 0.3], LimitSchedule.geometric(0.1, 0.5, 6),
                               MinimizationOptions(knot_count=5, restarts=1))
    assert report.passed
    assert any("knot" in note for note in report.notes)
