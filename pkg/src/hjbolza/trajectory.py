"""Direct minimization of the Bolza functional over piecewise-linear arcs.

Arcs have uniformly spaced knots on ``[0, t]``.  Each segment is charged
its exact cost (kinetic term at the segment velocity plus the exact or
Gauss-Legendre average of the potential), so the value of any returned arc
is a true upper bound on ``V(t, x)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize

from .errors import DimensionError
from .limits import LimitSchedule
from .problems import INF, BallIndicator, Problem

logger = logging.getLogger(__name__)

_BIG = 1e300


@dataclass(frozen=True)
class MinimizationOptions:
    knot_count: int = 17
    restarts: int = 4
    velocity_bound: float = 4.0
    refinement_tolerance: float = 1e-6
    seed: int = 0
    max_evaluations: int = 20000

    def __post_init__(self):
        if self.knot_count < 2:
            raise ValueError("knot_count must be at least 2")
        if self.restarts < 1 or self.velocity_bound <= 0 or self.refinement_tolerance <= 0:
            raise ValueError("restarts, velocity_bound and refinement_tolerance must be positive")


@dataclass
class Trajectory:
    knot_times: np.ndarray
    knot_states: np.ndarray
    running_cost: float
    total_cost: float
    notes: str = ""

    @property
    def final_time(self) -> float:
        return float(self.knot_times[-1])

    @property
    def velocities(self) -> np.ndarray:
        return np.diff(self.knot_states, axis=0) / np.diff(self.knot_times)[:, None]

    def state_at(self, s: float) -> np.ndarray:
        return np.array([np.interp(s, self.knot_times, col) for col in self.knot_states.T])

    def velocity_at(self, s: float) -> Optional[np.ndarray]:
        """Segment velocity at ``s``; None when ``s`` is a knot."""
        if np.any(np.isclose(s, self.knot_times, rtol=0, atol=1e-12 * max(1.0, self.final_time))):
            return None
        i = int(np.clip(np.searchsorted(self.knot_times, s) - 1, 0, len(self.knot_times) - 2))
        return self.velocities[i]

    def cost_until(self, problem: Problem, h: float) -> float:
        """Running cost of the arc restricted to ``[0, h]``."""
        times, states = self.knot_times, self.knot_states
        j = int(np.searchsorted(times, h, side="right"))
        ts = np.concatenate([times[:j], [h]]) if times[j - 1] < h else times[:j]
        ys = np.vstack([states[:j], self.state_at(h)]) if times[j - 1] < h else states[:j]
        return arc_running_cost(problem, ts, ys)


def arc_running_cost(problem: Problem, times: np.ndarray, states: np.ndarray) -> float:
    if len(times) < 2:
        return 0.0
    ds = np.diff(times)
    a, b = states[:-1], states[1:]
    return float(np.sum(ds * (problem.kinetic((b - a) / ds[:, None]) + problem.potential.segment_mean(a, b))))


def _endpoint_map(problem: Problem):
    """Map an unconstrained vector onto dom(phi); identity unless phi is an indicator."""
    term = problem.terminal
    if isinstance(term, BallIndicator):
        def project(w):
            d = w - term.center
            r = float(np.linalg.norm(d))
            return w if r <= term.radius else term.center + d * (term.radius / r)
        return project
    return None


class _ArcObjective:
    def __init__(self, problem: Problem, t: float, x: np.ndarray, knots: int,
                 endpoint: Optional[np.ndarray], scale: float):
        self.problem = problem
        self.x = x
        self.n = problem.dimension
        self.knots = knots
        self.endpoint = endpoint
        self.scale = scale
        self.ds = t / (knots - 1)
        self.free = knots - 2 if endpoint is not None else knots - 1
        self.project = None if endpoint is not None else _endpoint_map(problem)

    def states(self, z: np.ndarray) -> np.ndarray:
        body = self.x + self.scale * z.reshape(self.free, self.n)
        if self.endpoint is not None:
            return np.vstack([self.x, body, self.endpoint])
        if self.project is not None:
            body[-1] = self.project(body[-1])
        return np.vstack([self.x, body])

    def encode(self, states: np.ndarray) -> np.ndarray:
        body = states[1:-1] if self.endpoint is not None else states[1:]
        return ((body - self.x) / self.scale).ravel()

    def running(self, y: np.ndarray) -> float:
        a, b = y[:-1], y[1:]
        p = self.problem
        return float(self.ds * np.sum(p.kinetic((b - a) / self.ds) + p.potential.segment_mean(a, b)))

    def total(self, y: np.ndarray) -> tuple[float, float]:
        run = self.running(y)
        if self.endpoint is not None:
            return run, run
        return run, run + float(self.problem.terminal(y[-1]))

    def __call__(self, z: np.ndarray) -> float:
        _, tot = self.total(self.states(z))
        return tot if math.isfinite(tot) else _BIG

    @property
    def differentiable(self) -> bool:
        """Gradient available (almost everywhere for jump potentials)."""
        if self.problem.potential.segment_mean_grad(np.zeros((1, self.n)), np.zeros((1, self.n))) is None:
            return False
        return self.endpoint is not None or (self.project is None and self.problem.terminal.grad(self.x) is not None)

    def value_and_grad(self, z: np.ndarray) -> tuple[float, np.ndarray]:
        y = self.states(z)
        p = self.problem
        a, b = y[:-1], y[1:]
        v = (b - a) / self.ds
        gk = p.kinetic.grad(v)
        ga, gb = p.potential.segment_mean_grad(a, b)
        gy = np.zeros_like(y)
        gy[:-1] += -gk + self.ds * ga
        gy[1:] += gk + self.ds * gb
        _, tot = self.total(y)
        if self.endpoint is None:
            gy[-1] += p.terminal.grad(y[-1])
            free = gy[1:]
        else:
            free = gy[1:-1]
        return tot, self.scale * free.ravel()


def _candidate_endpoints(problem: Problem, t: float, x: np.ndarray, opts: MinimizationOptions) -> list[np.ndarray]:
    n = problem.dimension
    reach = opts.velocity_bound * t
    if n == 1:
        pts = [x + np.array([d]) for d in np.linspace(-reach, reach, 41)]
    elif n == 2:
        g = np.linspace(-reach, reach, 11)
        pts = [x + np.array([a, b]) for a in g for b in g if a * a + b * b <= reach * reach * (1 + 1e-12)]
    else:
        rng = np.random.default_rng(opts.seed)
        w = rng.normal(size=(64, n))
        w *= (rng.uniform(size=(64, 1)) ** (1.0 / n)) * reach / np.linalg.norm(w, axis=1, keepdims=True)
        pts = [x + row for row in w]
    pts.append(x.copy())
    pts.extend(problem.terminal.seeds(x))
    return pts


def _seed_arcs(problem, t, x, opts, endpoint) -> list[np.ndarray]:
    k = opts.knot_count
    s = np.linspace(0.0, 1.0, k)[:, None]
    arcs = []
    ends = [endpoint] if endpoint is not None else _candidate_endpoints(problem, t, x, opts)
    for e in ends:
        arcs.append(x + s * (e - x))
    # bent arcs: reach a jump hyperplane of the potential at knot j, then rest there
    for axis, level in problem.potential.breakpoints():
        q = x.copy()
        q[axis] = level
        for j in range(1, k):
            arc = np.empty((k, problem.dimension))
            arc[: j + 1] = x + np.linspace(0.0, 1.0, j + 1)[:, None] * (q - x)
            arc[j + 1:] = q
            if endpoint is not None:
                if j == k - 1:
                    continue
                tail = np.linspace(0.0, 1.0, k - j)[:, None]
                arc[j:] = q + tail * (endpoint - q)
            arcs.append(arc)
    return arcs


def _touches_jump(obj: _ArcObjective, z: np.ndarray) -> bool:
    y = obj.states(z)
    for axis, level in obj.problem.potential.breakpoints():
        side = np.sign(y[:, axis] - level)
        if np.any(side <= 0) and np.any(side >= 0):
            return True
    return False


def _snap(obj: _ArcObjective, z: np.ndarray, value: float) -> tuple[np.ndarray, float, bool]:
    """Try moving single knot coordinates onto jump hyperplanes of the potential."""
    improved = False
    brk = obj.problem.potential.breakpoints()
    if not brk:
        return z, value, improved
    zz = z.reshape(obj.free, obj.n).copy()
    for i in range(obj.free):
        for axis, level in brk:
            old = zz[i, axis]
            zz[i, axis] = (level - obj.x[axis]) / obj.scale
            v = obj(zz.ravel())
            if v < value - 1e-15 * max(1.0, abs(value)):
                value, improved = v, True
            else:
                zz[i, axis] = old
    return zz.ravel(), value, improved


def _local(obj: _ArcObjective, z0: np.ndarray, opts: MinimizationOptions) -> tuple[np.ndarray, float]:
    z, val = z0, obj(z0)
    if obj.differentiable:
        res = minimize(obj.value_and_grad, z, jac=True, method="L-BFGS-B",
                       options={"ftol": 1e-16, "gtol": 1e-12, "maxiter": opts.max_evaluations})
        if res.fun <= val:
            z, val = res.x, float(res.fun)
        if obj.problem.potential.smooth or not _touches_jump(obj, z):
            return z, val
    # nonsmooth: snap knots onto jump hyperplanes, then a capped derivative-free polish
    for _ in range(3):
        z, val, improved = _snap(obj, z, val)
        if obj.differentiable and improved:
            res = minimize(obj.value_and_grad, z, jac=True, method="L-BFGS-B",
                           options={"ftol": 1e-16, "gtol": 1e-12, "maxiter": opts.max_evaluations})
            if res.fun < val:
                z, val = res.x, float(res.fun)
                continue
        if not improved:
            break
    res = minimize(obj, z, method="Powell",
                   options={"xtol": 1e-9, "ftol": 1e-14, "maxfev": min(opts.max_evaluations, 150 * len(z))})
    if res.fun < val:
        z, val = res.x, float(res.fun)
        z, val, _ = _snap(obj, z, val)
    return z, val


def minimize_bolza(
    problem: Problem,
    t: float,
    x,
    options: Optional[MinimizationOptions] = None,
    *,
    endpoint=None,
    warm_start: Optional[Trajectory] = None,
) -> tuple[float, Trajectory]:
    """Upper bound on ``V(t, x)`` together with the arc attaining it.

    With ``endpoint`` given the terminal cost is replaced by the constraint
    ``y(t) = endpoint`` (two-point problem).  An infeasible problem (every
    restart ends at ``+inf``) is reported through ``value = inf`` and the
    trajectory notes, not by raising.
    """
    opts = options or MinimizationOptions()
    if not t > 0:
        raise ValueError("horizon t must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (problem.dimension,):
        raise DimensionError(f"x has length {x.shape[0]}, problem has dimension {problem.dimension}")
    if endpoint is not None:
        endpoint = np.atleast_1d(np.asarray(endpoint, dtype=float))
        if endpoint.shape != x.shape:
            raise DimensionError("endpoint dimension mismatch")

    k = opts.knot_count
    times = np.linspace(0.0, t, k)
    scale = opts.velocity_bound * t
    if endpoint is not None:
        scale = max(scale, float(np.linalg.norm(endpoint - x)))
    scale = max(scale, 1e-300)

    if k == 2 and endpoint is not None:
        y = np.vstack([x, endpoint])
        run = arc_running_cost(problem, times, y)
        return run, Trajectory(times, y, run, run)

    obj = _ArcObjective(problem, t, x, k, endpoint, scale)
    seeds = _seed_arcs(problem, t, x, opts, endpoint)
    if warm_start is not None:
        ws = np.column_stack([np.interp(times, warm_start.knot_times, c) for c in warm_start.knot_states.T])
        seeds.append(ws)
    scored = []
    for arc in seeds:
        z = obj.encode(arc)
        scored.append((obj(z), tuple(np.round(z, 12)), z))
    scored.sort(key=lambda r: (r[0], r[1]))
    starts, seen = [], set()
    for val, key, z in scored:
        if key in seen:
            continue
        seen.add(key)
        starts.append(z)
        if len(starts) >= opts.restarts:
            break
    if warm_start is not None:
        starts.append(obj.encode(seeds[-1]))

    results = []
    for z0 in starts:
        z, val = _local(obj, z0, opts)
        y = obj.states(z)
        results.append((val, tuple(y.ravel()), y))
    results.sort(key=lambda r: (r[0], r[1]))
    best = results[0][2]
    run, tot = obj.total(best)
    notes = ""
    if not math.isfinite(tot):
        notes = f"infeasible at this resolution: no restart reached dom(phi) within |y(t)-x| <= {scale:g}"
        logger.info(notes)
    return tot, Trajectory(times, best, run, tot, notes)


def dpp_residual(problem: Problem, value_at: Callable, trajectory: Trajectory, h: float) -> float:
    """``|V(t,x) - V(t-h, y(h)) - cost on [0,h]|`` along ``trajectory``."""
    t = trajectory.final_time
    if not 0 < h <= t * (1 + 1e-12):
        raise ValueError("h must lie in (0, t]")
    h = min(h, t)
    v0 = float(value_at(t, trajectory.knot_states[0]))
    v1 = float(value_at(t - h, trajectory.state_at(h)))
    if not (math.isfinite(v0) and math.isfinite(v1)):
        return INF
    return abs(v0 - v1 - trajectory.cost_until(problem, h))


def difference_quotients(trajectory: Trajectory, schedule: LimitSchedule) -> np.ndarray:
    """Rows ``(h, |y(h) - y(0)| / h)`` for every scheduled ``h`` within the horizon."""
    y0 = trajectory.knot_states[0]
    rows = [
        (h, float(np.linalg.norm(trajectory.state_at(h) - y0)) / h)
        for h in schedule.h_values
        if h <= trajectory.final_time * (1 + 1e-12)
    ]
    return np.array(rows, dtype=float).reshape(-1, 2)
