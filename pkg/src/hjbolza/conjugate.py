"""Hamiltonian ``H(x, p) = sup_u <p, u> - L(x, u)`` by certified search.

For ``|u| >= R = coercivity_radius(|p| + 1)`` the coercivity witness gives
``<p, u> - L(x, u) <= |p||u| - Theta(u) <= -|u| < -L(x, 0)`` whenever
``|u| > L(x, 0)``, so the supremum is attained in the ball of radius
``max(R, L(x, 0)) + 1``.  Inside it the objective is concave (``L(x, .)`` is
convex) and golden-section / coordinate refinement converges.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._golden import golden_max
from .errors import AccuracyError, DimensionError
from .problems import Problem, coercivity_radius


@dataclass(frozen=True)
class ConjugateQuery:
    x: np.ndarray
    p: np.ndarray
    tolerance: float = 1e-9

    def __post_init__(self):
        object.__setattr__(self, "x", np.atleast_1d(np.asarray(self.x, dtype=float)))
        object.__setattr__(self, "p", np.atleast_1d(np.asarray(self.p, dtype=float)))
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.x.shape != self.p.shape:
            raise DimensionError("x and p must have the same length")


@dataclass(frozen=True)
class ConjugateResult:
    value: float
    argmax: np.ndarray
    search_radius: float
    grid_step: float


def search_radius(problem: Problem, x, pnorm) -> np.ndarray:
    l0 = problem.lagrangian(np.asarray(x, dtype=float), np.zeros(problem.dimension))
    r = np.vectorize(lambda s: coercivity_radius(problem, s))(np.asarray(pnorm, dtype=float) + 1.0)
    return np.maximum(r, l0) + 1.0


def _objective_lipschitz(problem: Problem, pnorm: float, radius: float) -> float:
    k = problem.kinetic
    return pnorm + k.coef * k.power * radius ** (k.power - 1.0)


def hamiltonian(problem: Problem, query: ConjugateQuery, max_depth: int = 400) -> ConjugateResult:
    n = problem.dimension
    if query.x.shape != (n,):
        raise DimensionError(f"query has dimension {query.x.shape[0]}, problem has {n}")
    x, p, tol = query.x, query.p, query.tolerance
    pnorm = float(np.linalg.norm(p))
    radius = float(search_radius(problem, x, pnorm))
    lip = _objective_lipschitz(problem, pnorm, radius)
    target_width = 1e-3 * tol / lip

    def g(u):
        return u @ p - problem.lagrangian(x, u)

    if n == 1:
        iters = int(np.ceil(np.log(target_width / (2 * radius)) / np.log(0.618034))) + 2
        if iters > max_depth:
            u, v, width = golden_max(lambda s: g(s[..., None]), -radius, radius, max_depth)
            raise AccuracyError("tolerance not reachable at maximum refinement depth", best=float(v))
        u, v, width = golden_max(lambda s: g(s[..., None]), -radius, radius, max(iters, 1))
        u = np.atleast_1d(u).astype(float)
        value, step = float(v), float(width)
    else:
        u = np.zeros(n)
        value = float(g(u))
        step = 2 * radius
        for sweep in range(max_depth):
            before = value
            for i in range(n):
                # along one axis the feasible chord of the ball
                rest = radius**2 - (np.sum(u**2) - u[i] ** 2)
                half = np.sqrt(max(rest, 0.0))

                def along(s, i=i):
                    w = np.broadcast_to(u, s.shape + (n,)).copy()
                    w[..., i] = s
                    return g(w)

                ui, vi, width = golden_max(along, -half, half, 60)
                if float(vi) >= value:
                    u[i] = float(ui)
                    value = float(vi)
                step = float(width)
            if value - before <= 1e-3 * tol:
                break
        else:
            raise AccuracyError("coordinate refinement did not settle", best=value)
    # ties toward the smallest |u|
    zero_val = float(g(np.zeros(n)))
    if zero_val >= value:
        u, value = np.zeros(n), zero_val
    return ConjugateResult(value=value, argmax=u, search_radius=radius, grid_step=step)


def conjugate_table_1d(problem: Problem, x, p_grid, tolerance: float = 1e-9, return_argmax: bool = False):
    """Batched ``H(x, p)`` over an ascending 1-d costate grid.

    All entries are refined at once; the argmax of a convex conjugate is
    nondecreasing in ``p``, which is enforced on the returned sequence.
    """
    if problem.dimension != 1:
        raise DimensionError("conjugate_table_1d requires a one-dimensional problem")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    p = np.asarray(p_grid, dtype=float).ravel()
    if p.size and np.any(np.diff(p) < 0):
        raise ValueError("p_grid must be sorted ascending")
    if p.size == 0:
        return (np.empty(0), np.empty(0)) if return_argmax else np.empty(0)
    radius = search_radius(problem, x, np.abs(p))
    lip = np.max(np.abs(p)) + problem.kinetic.coef * problem.kinetic.power * np.max(radius) ** (
        problem.kinetic.power - 1.0)
    target = 1e-3 * tolerance / lip
    iters = int(np.ceil(np.log(target / (2 * np.max(radius))) / np.log(0.618034))) + 2

    def g(s):
        return p * s - problem.lagrangian(x, s[..., None])

    u, _, _ = golden_max(g, -radius, radius, max(iters, 1))
    u = np.maximum.accumulate(np.where(np.abs(u) < 1e-15, 0.0, u))
    values = g(u)
    zero = -problem.lagrangian(x, np.zeros(1))
    take_zero = zero >= values
    u = np.where(take_zero, 0.0, u)
    values = np.where(take_zero, zero, values)
    return (values, u) if return_argmax else values
