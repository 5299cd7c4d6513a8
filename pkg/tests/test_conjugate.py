from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hjbolza.conjugate import ConjugateQuery, conjugate_table_1d, hamiltonian
from hjbolza.errors import DimensionError
from hjbolza.problems import eval_lagrangian, get_problem


@pytest.mark.parametrize(
    "name,p,expected",
    [("quadratic", 3.0, 4.5), ("quadratic", 0.0, 0.0), ("quartic", 4.0, 3.0), ("quartic", 0.0, 0.0)],
)
def test_hamiltonian_closed_forms(name, p, expected):
    result = hamiltonian(get_problem(name), ConjugateQuery([0.4], [p]))
    assert result.value == pytest.approx(expected, abs=1e-8)


def test_hamiltonian_argmax_is_the_maximizer():
    result = hamiltonian(get_problem("quartic"), ConjugateQuery([0.0], [4.0]))
    assert result.argmax[0] == pytest.approx(1.0, abs=1e-5)


def test_dense_scan_oracle_for_step_problem():
    problem = get_problem("step")
    us = np.linspace(-6, 6, 12001)
    for x, p in ((0.5, 1.3), (-0.5, -2.0)):
        scan = max(p * u - eval_lagrangian(problem, [x], [u]) for u in us)
        exact = hamiltonian(problem, ConjugateQuery([x], [p])).value
        assert scan - 1e-12 <= exact <= scan + 1e-5
        assert exact == pytest.approx(0.5 * p * p - (1.0 if x > 0 else 0.0), abs=1e-8)


def test_query_validates_shapes():
    with pytest.raises(DimensionError):
        ConjugateQuery([0.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        ConjugateQuery([0.0], [1.0], tolerance=0.0)


@pytest.mark.parametrize(
    "name,grid,expected",
    [("quadratic", [-1.0, 0.0, 1.0], [0.5, 0.0, 0.5]), ("quadratic", [0.0], [0.0]), ("quartic", [0.0, 4.0], [0.0, 3.0])],
)
def test_table_examples(name, grid, expected):
    values = conjugate_table_1d(get_problem(name), [0.0], np.array(grid))
    np.testing.assert_allclose(values, expected, atol=1e-8)


def test_table_agrees_with_pointwise_hamiltonian():
    problem = get_problem("harmonic")
    grid = np.linspace(-3, 3, 61)
    table = conjugate_table_1d(problem, [0.7], grid)
    point = [hamiltonian(problem, ConjugateQuery([0.7], [p])).value for p in grid]
    np.testing.assert_allclose(table, point, atol=1e-8)


@settings(max_examples=40, deadline=None)
@given(
    st.floats(-5, 5),
    st.floats(-5, 5),
    st.floats(0, 1),
    st.floats(-2, 2),
)
def test_hamiltonian_is_convex_in_p(p1, p2, theta, x):
    problem = get_problem("quartic")
    h = lambda p: hamiltonian(problem, ConjugateQuery([x], [p])).value
    mid = theta * p1 + (1 - theta) * p2
    assert h(mid) <= theta * h(p1) + (1 - theta) * h(p2) + 1e-7


@settings(max_examples=40, deadline=None)
@given(st.floats(-4, 4), st.floats(-3, 3), st.floats(-2, 2))
def test_fenchel_young_inequality(p, u, x):
    problem = get_problem("step")
    h = hamiltonian(problem, ConjugateQuery([x], [p])).value
    assert h + eval_lagrangian(problem, [x], [u]) >= p * u - 1e-8
