from __future__ import annotations

import math

import numpy as np
import pytest

from hjbolza.errors import DimensionError
from hjbolza.problems import (
    ContinuityClass,
    approximate_continuous,
    catalog_entry,
    catalog_names,
    coercivity_radius,
    eval_lagrangian,
    eval_terminal,
    get_problem,
)


def test_catalog_lists_every_entry():
    assert {"quadratic", "quadratic_x2", "quartic", "step", "step_cross", "harmonic", "lagrange_ball"} <= set(
        catalog_names()
    )


@pytest.mark.parametrize(
    "name,x,u,expected",
    [
        ("quadratic", 3.0, 2.0, 2.0),
        ("quadratic", -7.0, 0.0, 0.0),
        ("step", 1.0, 0.0, 1.0),
        ("step", 0.0, 0.0, 0.0),
        ("step", -0.5, 1.0, 0.5),
        ("quartic", 0.3, 1.0, 1.0),
    ],
)
def test_lagrangian_values(name, x, u, expected):
    assert eval_lagrangian(get_problem(name), [x], [u]) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize(
    "name,x,expected",
    [
        ("quadratic", 12.0, 0.0),
        ("quadratic_x2", 2.0, 4.0),
        ("lagrange_ball", 0.0, 0.0),
        ("lagrange_ball", 5.0, math.inf),
    ],
)
def test_terminal_values(name, x, expected):
    assert eval_terminal(get_problem(name), [x]) == expected


def test_dimension_mismatch_is_an_argument_error():
    with pytest.raises(DimensionError):
        eval_lagrangian(get_problem("quadratic"), [1.0, 2.0], [0.0])
    with pytest.raises(DimensionError):
        eval_terminal(get_problem("quadratic"), [1.0, 2.0])


@pytest.mark.parametrize("name,slope,expected", [("quadratic", 3.0, 6.0), ("quadratic", 0.0, 0.0), ("quartic", 1.0, 1.0)])
def test_coercivity_radius_canonical(name, slope, expected):
    problem = get_problem(name)
    r = coercivity_radius(problem, slope)
    assert r == pytest.approx(expected, rel=1e-6, abs=1e-9)
    # scan oracle: beyond R the witness dominates the slope
    us = np.linspace(r * 1.0001 + 1e-9, r + 50, 2001)
    assert np.all(problem.coercivity(us[:, None]) >= slope * us - 1e-9)


def test_regularization_is_identity_for_continuous_lagrangian():
    problem = get_problem("quadratic_x2")
    approx = approximate_continuous(problem, 4)
    rng = np.random.default_rng(0)
    for x, u in rng.uniform(-2, 2, (20, 2)):
        assert eval_lagrangian(approx, [x], [u]) == pytest.approx(eval_lagrangian(problem, [x], [u]), abs=1e-12)


def test_regularization_increases_to_step_potential():
    step = get_problem("step")
    xs = np.linspace(-1, 1, 41)
    prev = np.full(xs.size, -1.0)
    for k in (1, 2, 8, 32):
        cur = np.array([eval_lagrangian(approximate_continuous(step, k), [x], [0.0]) for x in xs])
        raw = np.array([eval_lagrangian(step, [x], [0.0]) for x in xs])
        assert np.all(cur >= prev - 1e-12)
        assert np.all(cur <= raw + 1e-12)
        prev = cur
    assert approximate_continuous(step, 2).continuity_class is ContinuityClass.CONTINUOUS


def test_known_value_functions_match_initial_data():
    for name in ("quadratic_x2", "step", "harmonic"):
        entry = catalog_entry(name)
        for x in (-1.0, 0.0, 0.7):
            assert entry.known_value_function(1e-12, np.array([x])) == pytest.approx(
                eval_terminal(entry.problem, [x]), abs=1e-5
            )
