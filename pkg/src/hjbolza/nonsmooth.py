"""Numerical contingent derivatives, sub/superdifferential membership and ``L+``.

Functions of ``(t, x)`` are treated as functions of the stacked vector
``z = (t, x)``; directions are stacked the same way.  Every liminf / limsup
is estimated from the last three per-``h`` records of a decreasing schedule
(min or max of the tail), with their spread reported as the extrapolation
gap.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DimensionError, DomainError
from .limits import LimitSchedule
from .problems import Problem, eval_lagrangian
from .reports import PointRecord, VerificationReport, le_record
from .trajectory import MinimizationOptions, Trajectory, minimize_bolza

__all__ = [
    "LimitSchedule",
    "DerivativeKind",
    "DerivativeEstimate",
    "LPlusEstimate",
    "lower_contingent_derivative",
    "upper_contingent_derivative",
    "subdifferential_test",
    "superdifferential_test",
    "default_probe_directions",
    "lplus",
    "ae_equality_check",
]

TAIL = 3


class DerivativeKind(str, enum.Enum):
    LOWER = "LowerContingent"
    UPPER = "UpperContingent"


@dataclass(frozen=True)
class DerivativeEstimate:
    kind: DerivativeKind
    value: float
    per_h_record: np.ndarray
    extrapolation_gap: float


@dataclass(frozen=True)
class LPlusEstimate:
    value: float
    per_h_record: np.ndarray
    inner_options: MinimizationOptions
    extrapolation_gap: float = 0.0

    def settled(self, gate: float) -> bool:
        return self.extrapolation_gap <= gate


def _stack(point) -> np.ndarray:
    t, x = point
    return np.concatenate([[float(t)], np.atleast_1d(np.asarray(x, dtype=float))])


def _call(f: Callable, z: np.ndarray) -> float:
    return float(f(z[0], z[1:]))


def _tail_spread(values: np.ndarray) -> float:
    tail = values[-TAIL:]
    if np.all(np.isfinite(tail)):
        return float(tail.max() - tail.min())
    if np.all(tail == tail[0]):
        return 0.0
    return math.inf


def _perturbations(dim: int, count: int) -> np.ndarray:
    """Unit offsets for the ``v -> u`` cone; the first row is zero (nominal direction)."""
    if count <= 1:
        return np.zeros((1, dim))
    m = count - 1
    if dim == 1:
        offs = np.linspace(-1.0, 1.0, m)[:, None]
    elif dim == 2:
        ang = 2 * np.pi * np.arange(m) / m
        offs = np.column_stack([np.cos(ang), np.sin(ang)])
    else:
        g = np.random.default_rng(12345).normal(size=(m, dim))
        offs = g / np.linalg.norm(g, axis=1, keepdims=True)
    return np.vstack([np.zeros((1, dim)), offs])


def _quotients(f, point, direction, schedule: LimitSchedule, reduce) -> tuple[float, np.ndarray]:
    z = _stack(point)
    d = np.asarray(direction, dtype=float).ravel()
    if d.shape != z.shape:
        raise DimensionError(f"direction has length {d.size}, point has {z.size} coordinates")
    f0 = _call(f, z)
    if not math.isfinite(f0):
        raise DomainError("contingent derivative needs a finite value at the base point")
    offs = _perturbations(z.size, schedule.direction_samples)
    dnorm = float(np.linalg.norm(d))
    rec = []
    for h in schedule.h_values:
        v = d + schedule.cone_radius(h, dnorm) * offs
        q = np.array([(_call(f, z + h * vi) - f0) / h for vi in v])
        rec.append((h, float(reduce(q))))
    return f0, np.array(rec)


def lower_contingent_derivative(f: Callable, point, direction, schedule: Optional[LimitSchedule] = None) -> DerivativeEstimate:
    """``liminf_{h -> 0+, v -> d} (f(z + h v) - f(z)) / h``."""
    schedule = schedule or LimitSchedule()
    _, rec = _quotients(f, point, direction, schedule, np.min)
    tail = rec[-TAIL:, 1]
    return DerivativeEstimate(DerivativeKind.LOWER, float(tail.min()), rec, _tail_spread(rec[:, 1]))


def upper_contingent_derivative(f: Callable, point, direction, schedule: Optional[LimitSchedule] = None) -> DerivativeEstimate:
    """``limsup_{h -> 0+, v -> d} (f(z + h v) - f(z)) / h``."""
    schedule = schedule or LimitSchedule()
    _, rec = _quotients(f, point, direction, schedule, np.max)
    tail = rec[-TAIL:, 1]
    return DerivativeEstimate(DerivativeKind.UPPER, float(tail.max()), rec, _tail_spread(rec[:, 1]))


def default_probe_directions(dim: int, count: int = 32) -> np.ndarray:
    """``count`` unit directions in ``(t, x)`` space plus the positive and negative axes."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        ang = 2 * np.pi * (np.arange(count) + 0.5) / count
        sphere = np.column_stack([np.cos(ang), np.sin(ang)])
    else:
        g = np.random.default_rng(2024).normal(size=(count, dim))
        sphere = g / np.linalg.norm(g, axis=1, keepdims=True)
    axes = np.vstack([np.eye(dim), -np.eye(dim)])
    return np.vstack([sphere, axes])


def _membership(f, point, candidate, schedule, probe_directions, tolerance, lower: bool) -> VerificationReport:
    schedule = schedule or LimitSchedule()
    z = _stack(point)
    p = np.asarray(candidate, dtype=float).ravel()
    if p.shape != z.shape:
        raise DimensionError("candidate must have one entry per (t, x) coordinate")
    dirs = default_probe_directions(z.size) if probe_directions is None else np.atleast_2d(probe_directions)
    points = []
    for d in dirs:
        pd = float(p @ d)
        if lower:
            est = lower_contingent_derivative(f, point, d, schedule)
            points.append(le_record(tuple(z) + tuple(d), pd, est.value, tolerance, "<p,d> <= lower derivative"))
        else:
            est = upper_contingent_derivative(f, point, d, schedule)
            points.append(le_record(tuple(z) + tuple(d), est.value, pd, tolerance, "upper derivative <= <p,d>"))
    name = "subdifferential" if lower else "superdifferential"
    notes = [f"membership certified on {len(dirs)} probe directions only"]
    return VerificationReport.from_points(name, points, tolerance, notes)


def subdifferential_test(f: Callable, point, candidate, schedule: Optional[LimitSchedule] = None,
                         probe_directions=None, tolerance: float = 1e-3) -> VerificationReport:
    """Check ``<p, d> <= D_lower f(z)(d)`` over the probe directions."""
    return _membership(f, point, candidate, schedule, probe_directions, tolerance, lower=True)


def superdifferential_test(f: Callable, point, candidate, schedule: Optional[LimitSchedule] = None,
                           probe_directions=None, tolerance: float = 1e-3) -> VerificationReport:
    """Check ``D_upper f(z)(d) <= <p, d>`` over the probe directions."""
    return _membership(f, point, candidate, schedule, probe_directions, tolerance, lower=False)


# ---------------------------------------------------------------------------
# L+


_LPLUS_CACHE: dict = {}


def _inner_value(problem: Problem, start: np.ndarray, x: np.ndarray, h: float, opts: MinimizationOptions) -> float:
    key = (id(problem), problem.name, tuple(start), tuple(x), h, opts)
    hit = _LPLUS_CACHE.get(key)
    if hit is not None and hit[0] is problem:
        return hit[1]
    # the arc from x - h u to x over a window of length h, run forward in time
    v, _ = minimize_bolza(problem, h, start, opts, endpoint=x)
    if not math.isfinite(v):
        raise RuntimeError("pinned inner problem returned +inf; the straight line is always feasible")
    if len(_LPLUS_CACHE) > 50000:
        _LPLUS_CACHE.clear()
    _LPLUS_CACHE[key] = (problem, v)
    return v


def lplus(
    problem: Problem,
    x,
    u,
    schedule: Optional[LimitSchedule] = None,
    inner_options: Optional[MinimizationOptions] = None,
    *,
    shift: Optional[Callable[[float], np.ndarray]] = None,
) -> LPlusEstimate:
    """``limsup_{h -> 0+} (1/h) inf { cost of arcs from x - h u to x in time h }``.

    ``shift(h)`` optionally replaces ``u`` in the starting point by a
    velocity ``v_h`` (which should tend to ``u``).
    """
    schedule = schedule or LimitSchedule()
    opts = inner_options or MinimizationOptions(knot_count=8, restarts=3)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if x.shape != (problem.dimension,) or u.shape != x.shape:
        raise DimensionError("x and u must have the problem dimension")
    rec = []
    for h in schedule.h_values:
        v = u if shift is None else np.atleast_1d(np.asarray(shift(float(h)), dtype=float))
        start = x - h * v
        rec.append((float(h), _inner_value(problem, start, x, float(h), opts) / h))
    rec = np.array(rec)
    tail = rec[-TAIL:, 1]
    return LPlusEstimate(float(tail.max()), rec, opts, _tail_spread(rec[:, 1]))


def ae_equality_check(
    problem: Problem,
    trajectory: Trajectory,
    sample_times: Sequence[float],
    schedule: Optional[LimitSchedule] = None,
    inner_options: Optional[MinimizationOptions] = None,
    *,
    tolerance: float = 1e-2,
    measure_budget: float = 0.05,
) -> VerificationReport:
    """Compare ``L`` and ``L+`` along an arc at the sampled times.

    The report has a single aggregate point: the fraction of disagreeing
    samples against ``measure_budget``.  Per-sample values are kept in the
    diagnostics.
    """
    schedule = schedule or LimitSchedule()
    knots = trajectory.knot_times
    span = trajectory.final_time
    per_sample, notes = [], []
    for s in sample_times:
        s = float(s)
        if not 0 < s < span:
            notes.append(f"sample {s:g} outside (0, T); skipped")
            continue
        if np.min(np.abs(knots - s)) <= 1e-12 * span:
            notes.append(f"sample {s:g} sits on a knot (velocity undefined); skipped")
            continue
        y = trajectory.state_at(s)
        v = trajectory.velocity_at(s)
        lval = eval_lagrangian(problem, y, v)
        lp = lplus(problem, y, v, schedule, inner_options)
        per_sample.append({"time": s, "state": y.tolist(), "velocity": v.tolist(), "L": lval,
                           "L_plus": lp.value, "agree": bool(abs(lp.value - lval) <= tolerance)})
    if not per_sample:
        return VerificationReport.from_points("ae_equality", [], tolerance, notes)
    bad = sum(not r["agree"] for r in per_sample) / len(per_sample)
    point = PointRecord((span,), bad, measure_budget, measure_budget - bad, bool(bad <= measure_budget),
                        "fraction of samples with |L+ - L| > tolerance")
    return VerificationReport.from_points("ae_equality", [point], tolerance, notes,
                                          {"samples": per_sample, "agreement": 1.0 - bad})
