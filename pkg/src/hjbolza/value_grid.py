"""Space-time lattice values of ``V`` by semi-Lagrangian dynamic programming.

One step of the dynamic programming principle reads

    V(t, x) = min_u  dt * L(x, u) + V(t - dt, x + dt * u),

with ``V(t - dt, .)`` replaced by its multilinear interpolant.  In one
dimension the interpolant is affine on each cell, so the minimization over
velocities landing in a cell is a convex one-variable problem solved exactly
by the argmax of the kinetic conjugate at the cell slope, clamped to the
cell.  In two dimensions a velocity lattice followed by pattern refinement
is used.  Hopf-Lax minimization over endpoints gives an independent oracle
for x-independent Lagrangians.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .conjugate import conjugate_table_1d
from .errors import AccuracyError, DimensionError, DomainError, ResolutionError
from .limits import LimitSchedule
from .problems import INF, Problem, coercivity_radius
from .reports import PointRecord, VerificationReport
from .trajectory import MinimizationOptions, minimize_bolza


@dataclass(frozen=True)
class GridSpec:
    """Uniform lattice on ``[0, t_max] x box``.

    ``time_steps`` counts time intervals; ``space_steps`` counts nodes per axis.
    """

    t_max: float
    time_steps: int
    space_box: tuple
    space_steps: tuple

    def __post_init__(self):
        box = tuple((float(lo), float(hi)) for lo, hi in self.space_box)
        steps = tuple(int(s) for s in np.atleast_1d(self.space_steps))
        if not self.t_max > 0:
            raise ValueError("t_max must be positive")
        if int(self.time_steps) < 1:
            raise ValueError("time_steps must be a positive integer")
        if len(box) != len(steps) or not box:
            raise DimensionError("space_box and space_steps must have the same positive length")
        for lo, hi in box:
            if not lo < hi:
                raise ValueError(f"empty axis ({lo}, {hi})")
        if min(steps) < 2:
            raise ValueError("each axis needs at least 2 nodes")
        object.__setattr__(self, "space_box", box)
        object.__setattr__(self, "space_steps", steps)
        object.__setattr__(self, "time_steps", int(self.time_steps))
        object.__setattr__(self, "t_max", float(self.t_max))

    @property
    def dimension(self) -> int:
        return len(self.space_box)

    @property
    def dt(self) -> float:
        return self.t_max / self.time_steps

    @property
    def dx(self) -> np.ndarray:
        return np.array([(hi - lo) / (m - 1) for (lo, hi), m in zip(self.space_box, self.space_steps)])

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.time_steps + 1)

    def axes(self) -> list[np.ndarray]:
        return [np.linspace(lo, hi, m) for (lo, hi), m in zip(self.space_box, self.space_steps)]

    def nodes(self) -> np.ndarray:
        """Node coordinates, shape ``(*space_steps, n)``."""
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1)

    def refined(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.t_max, self.time_steps * factor, self.space_box,
                        tuple((m - 1) * factor + 1 for m in self.space_steps))

    def to_dict(self) -> dict:
        return {"t_max": self.t_max, "time_steps": self.time_steps,
                "space_box": [list(b) for b in self.space_box], "space_steps": list(self.space_steps)}


@dataclass
class ValueGrid:
    spec: GridSpec
    values: np.ndarray
    problem_name: str
    constants: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values.setflags(write=False)

    def __call__(self, t, x) -> float:
        return interpolate(self, t, x)

    def slice_at(self, n: int) -> np.ndarray:
        return self.values[n]


# ---------------------------------------------------------------------------
# solver


def _slice_stats(w: np.ndarray, dx: np.ndarray) -> tuple[float, float]:
    """Range of finite values and the largest slope between finite neighbours."""
    finite = np.isfinite(w)
    if not finite.any():
        return 0.0, 0.0
    spread = float(w[finite].max() - w[finite].min())
    lip = 0.0
    for ax in range(w.ndim):
        a = np.moveaxis(w, ax, 0)
        with np.errstate(invalid="ignore"):
            d = np.abs(np.diff(a, axis=0))
        d = d[np.isfinite(d)]
        if d.size:
            lip = max(lip, float(d.max()) / dx[ax])
    return spread, lip


def _velocity_radius(problem: Problem, spread: float, lip: float, dt: float, cap: float, w: np.ndarray) -> float:
    r = coercivity_radius(problem, spread / dt + 1.0)
    if np.isfinite(w).all():
        # beyond radius(lip) the kinetic cost outgrows any gain lip*|u| over staying put
        r = min(r, coercivity_radius(problem, lip) * (1 + 1e-9) + 1e-12)
    if r > cap:
        cell = np.unravel_index(int(np.nanargmax(np.where(np.isfinite(w), w, -np.inf))), w.shape)
        raise ResolutionError(
            f"velocity ball radius {r:.3g} exceeds cap {cap:.3g}; largest value at cell {tuple(int(c) for c in cell)}"
        )
    return r


def _step_1d(problem: Problem, xs: np.ndarray, w: np.ndarray, pot: np.ndarray, dt: float, cap: float) -> tuple[np.ndarray, dict]:
    dx = xs[1] - xs[0]
    spread, lip = _slice_stats(w, np.array([dx]))
    radius = _velocity_radius(problem, spread, lip, dt, cap, w)
    if np.isinf(w).any():
        radius = max(radius, (xs[-1] - xs[0]) / dt)
    reach = radius * dt
    # one ghost node on each side carries the one-sided penalty
    xe = np.concatenate([[xs[0] - reach], xs, [xs[-1] + reach]]) if reach > 0 else xs
    we = np.concatenate([[w[0] + lip * reach], w, [w[-1] + lip * reach]]) if reach > 0 else w
    a, b = xe[:-1], xe[1:]
    wa, wb = we[:-1], we[1:]
    finite_cell = np.isfinite(wa) & np.isfinite(wb)
    with np.errstate(invalid="ignore"):
        slope = np.where(finite_cell, (wb - wa) / (b - a), 0.0)

    # unconstrained minimizer of dt*K(u) + slope*dt*u is the conjugate argmax at p = -slope
    costate = -slope
    order = np.argsort(costate, kind="stable")
    _, arg_sorted = conjugate_table_1d(problem, xs[:1], costate[order], return_argmax=True)
    ustar = np.empty_like(costate)
    ustar[order] = arg_sorted

    # only cells within reach of node i can be hit; node i sits between cells i and i + 1
    cells = a.size
    band = int(math.ceil(reach / dx)) + 2
    if 2 * band + 2 >= cells:
        cols = np.broadcast_to(np.arange(cells), (xs.size, cells))
    else:
        cols = np.clip(np.arange(xs.size)[:, None] + np.arange(-band, band + 2)[None, :], 0, cells - 1)
    ca, cb, cw, cs, cu = a[cols], b[cols], wa[cols], slope[cols], ustar[cols]
    lo = np.maximum((ca - xs[:, None]) / dt, -radius)
    hi = np.minimum((cb - xs[:, None]) / dt, radius)
    ok = (lo <= hi) & finite_cell[cols]
    u = np.clip(cu, lo, np.maximum(lo, hi))
    land = xs[:, None] + dt * u
    with np.errstate(invalid="ignore"):
        cand = dt * problem.kinetic(u[..., None]) + cw + cs * (land - ca)
    cand = np.where(ok, cand, INF)
    best = cand.min(axis=1)

    # exact landings on finite nodes cover isolated finite nodes next to +inf cells
    fin = np.isfinite(w)
    if fin.any() and not finite_cell.all():
        un = (xs[None, fin] - xs[:, None]) / dt
        node = dt * problem.kinetic(un[..., None]) + w[None, fin]
        node = np.where(np.abs(un) <= radius * (1 + 1e-12), node, INF)
        best = np.minimum(best, node.min(axis=1))

    best = best + dt * pot
    return best, {"radius": radius, "penalty_slope": lip}


def _extended_interp_2d(axes, w, lip, pts):
    """Bilinear interpolant, clamped to the box with a penalty ``lip * dist``."""
    lo = np.array([ax[0] for ax in axes])
    hi = np.array([ax[-1] for ax in axes])
    cl = np.clip(pts, lo, hi)
    dist = np.linalg.norm(pts - cl, axis=-1)
    return _multilinear(axes, w, cl) + lip * dist


def _step_2d(problem: Problem, axes, w: np.ndarray, pot: np.ndarray, dt: float, cap: float,
             lattice: int = 17, rounds: int = 30) -> tuple[np.ndarray, dict]:
    dx = np.array([ax[1] - ax[0] for ax in axes])
    spread, lip = _slice_stats(w, dx)
    radius = _velocity_radius(problem, spread, lip, dt, cap, w)
    if np.isinf(w).any():
        diam = math.hypot(*(ax[-1] - ax[0] for ax in axes))
        radius = max(radius, diam / dt)
    xs = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 2)

    def objective(u):
        return dt * problem.kinetic(u) + _extended_interp_2d(axes, w, lip, xs[:, None, :] + dt * u)

    g = np.linspace(-radius, radius, lattice)
    lat = np.stack(np.meshgrid(g, g, indexing="ij"), axis=-1).reshape(-1, 2)
    lat = np.vstack([np.zeros((1, 2)), lat])
    vals = objective(np.broadcast_to(lat, (xs.shape[0],) + lat.shape))
    k = np.argmin(vals, axis=1)
    u = lat[k].copy()
    best = vals[np.arange(xs.shape[0]), k]
    step = np.full(xs.shape[0], 2 * radius / (lattice - 1))
    stencil = np.array([d for d in itertools.product((-1, 0, 1), repeat=2) if d != (0, 0)], dtype=float)
    for _ in range(rounds):
        trial = u[:, None, :] + step[:, None, None] * stencil[None, :, :]
        tv = objective(trial)
        j = np.argmin(tv, axis=1)
        tbest = tv[np.arange(xs.shape[0]), j]
        better = tbest < best
        u[better] = trial[better, j[better]]
        best = np.where(better, tbest, best)
        step = np.where(better, step, 0.5 * step)
    best = best + dt * pot.ravel()
    return best.reshape(w.shape), {"radius": radius, "penalty_slope": lip}


def solve_semilagrangian(problem: Problem, spec: GridSpec, velocity_cap: float = 1e6) -> ValueGrid:
    """Fill the lattice slice by slice from ``V(0, .) = phi``."""
    if spec.dimension != problem.dimension:
        raise DimensionError(f"grid has dimension {spec.dimension}, problem has {problem.dimension}")
    if spec.dimension > 2:
        raise DimensionError("grids are supported for n = 1 and n = 2 only")
    axes = spec.axes()
    nodes = spec.nodes()
    values = np.empty((spec.time_steps + 1,) + tuple(spec.space_steps))
    values[0] = problem.terminal_cost(nodes)
    pot = problem.potential(nodes)
    dt = spec.dt
    radii, penalties = [], []
    for n in range(1, spec.time_steps + 1):
        if spec.dimension == 1:
            values[n], info = _step_1d(problem, axes[0], values[n - 1], pot, dt, velocity_cap)
        else:
            values[n], info = _step_2d(problem, axes, values[n - 1], pot, dt, velocity_cap)
        radii.append(info["radius"])
        penalties.append(info["penalty_slope"])
    constants = {
        "dt": dt,
        "dx": spec.dx.tolist(),
        "max_velocity_radius": max(radii),
        "max_penalty_slope": max(penalties),
        "boundary_note": "off-box landings clamped to the boundary value plus penalty slope times distance",
    }
    return ValueGrid(spec, values, problem.name, constants)


# ---------------------------------------------------------------------------
# interpolation


def _locate(axis: np.ndarray, q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    step = axis[1] - axis[0]
    s = (q - axis[0]) / step
    i = np.clip(np.floor(s).astype(int), 0, axis.size - 2)
    return i, np.clip(s - i, 0.0, 1.0)


def _multilinear(axes: Sequence[np.ndarray], w: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of ``w`` at ``pts`` (shape ``(..., n)``) with +inf saturation."""
    n = len(axes)
    idx, frac = zip(*(_locate(axes[d], pts[..., d]) for d in range(n)))
    out = np.zeros(pts.shape[:-1])
    hit_inf = np.zeros(pts.shape[:-1], dtype=bool)
    for corner in itertools.product((0, 1), repeat=n):
        weight = np.ones(pts.shape[:-1])
        for d, c in enumerate(corner):
            weight = weight * (frac[d] if c else 1.0 - frac[d])
        val = w[tuple(idx[d] + c for d, c in enumerate(corner))]
        inf = np.isinf(val) & (weight > 0)
        hit_inf |= inf
        out = out + np.where(inf | (weight == 0), 0.0, weight * np.where(np.isinf(val), 0.0, val))
    return np.where(hit_inf, INF, out)


def interpolate_many(grid: ValueGrid, t, x) -> np.ndarray:
    """Vectorized :func:`interpolate`; ``t`` has shape ``(m,)`` and ``x`` shape ``(m, n)``."""
    spec = grid.spec
    t = np.atleast_1d(np.asarray(t, dtype=float))
    x = np.asarray(x, dtype=float).reshape(t.shape[0], -1)
    if x.shape[1] != spec.dimension:
        raise DimensionError(f"state has length {x.shape[1]}, grid has dimension {spec.dimension}")
    eps = 1e-12
    lo = np.array([b[0] for b in spec.space_box])
    hi = np.array([b[1] for b in spec.space_box])
    span = hi - lo
    bad = (t < -eps * spec.t_max) | (t > spec.t_max * (1 + eps))
    bad |= np.any((x < lo - eps * span) | (x > hi + eps * span), axis=1)
    if bad.any():
        j = int(np.argmax(bad))
        raise DomainError(f"query (t={t[j]:g}, x={x[j].tolist()}) lies outside the grid hull")
    s = np.clip(t / spec.dt, 0.0, spec.time_steps)
    k = np.clip(np.floor(s).astype(int), 0, spec.time_steps - 1)
    a = s - k
    axes = spec.axes()
    x = np.clip(x, lo, hi)
    out = np.empty(t.shape[0])
    for kk in np.unique(k):
        sel = k == kk
        v0 = _multilinear(axes, grid.values[kk], x[sel])
        v1 = _multilinear(axes, grid.values[kk + 1], x[sel])
        aa = a[sel]
        lo_inf = np.isinf(v0) & (aa < 1)
        hi_inf = np.isinf(v1) & (aa > 0)
        with np.errstate(invalid="ignore"):
            mix = np.where(aa == 0, v0, np.where(aa == 1, v1, (1 - aa) * v0 + aa * v1))
        out[sel] = np.where(lo_inf | hi_inf, INF, mix)
    return out


def interpolate(grid: ValueGrid, t: float, x) -> float:
    """Value at ``(t, x)``: multilinear in space, linear in time, exact at nodes."""
    return float(interpolate_many(grid, [t], np.atleast_1d(np.asarray(x, dtype=float))[None, :])[0])


# ---------------------------------------------------------------------------
# Lipschitz estimate


@dataclass(frozen=True)
class LipschitzEstimate:
    value: float
    infinite_cells: list = field(default_factory=list)

    def __float__(self) -> float:
        return float(self.value)


def local_lipschitz_estimate(grid: ValueGrid, t_range: tuple[float, float], box: Sequence[tuple[float, float]]) -> LipschitzEstimate:
    """Largest difference quotient between adjacent nodes of the sub-box.

    ``t_range[0]`` must be positive; quotients are taken along time and
    along each space axis.
    """
    spec = grid.spec
    t0, t1 = t_range
    if not 0 < t0 <= t1 <= spec.t_max * (1 + 1e-12):
        raise DomainError("time range must satisfy 0 < t_min <= t_max <= grid horizon")
    if len(box) != spec.dimension:
        raise DimensionError("region box has the wrong dimension")
    tol = 1e-9
    tsel = np.nonzero((spec.times >= t0 - tol) & (spec.times <= t1 + tol))[0]
    sels = []
    for (lo, hi), ax, (blo, bhi) in zip(box, spec.axes(), spec.space_box):
        if lo < blo - tol or hi > bhi + tol:
            raise DomainError("region leaves the grid hull")
        sels.append(np.nonzero((ax >= lo - tol) & (ax <= hi + tol))[0])
    sub = grid.values[np.ix_(tsel, *sels)]
    if np.isinf(sub).any():
        cells = [tuple(int(c) for c in idx) for idx in np.argwhere(np.isinf(sub))]
        return LipschitzEstimate(INF, cells)
    steps = [spec.dt] + list(spec.dx)
    lip = 0.0
    for ax, h in enumerate(steps):
        if sub.shape[ax] > 1:
            lip = max(lip, float(np.max(np.abs(np.diff(sub, axis=ax)))) / h)
    return LipschitzEstimate(lip, [])


# ---------------------------------------------------------------------------
# Hopf-Lax oracle


def hopf_lax(problem: Problem, t: float, x, tolerance: float = 1e-8, max_rounds: int = 80) -> float:
    """``min_y t * K((y - x) / t) + phi(y)`` by nested grid refinement.

    Straight lines are optimal for x-independent convex Lagrangians, so this
    reduces the value to a minimization over endpoints.  The search ball is
    bounded by the cost of the best seed endpoint.
    """
    if not problem.x_independent:
        raise ValueError("hopf_lax requires an x-independent Lagrangian")
    if not t > 0 or not tolerance > 0:
        raise ValueError("t and tolerance must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = problem.dimension
    if x.shape != (n,):
        raise DimensionError(f"x has length {x.shape[0]}, problem has dimension {n}")

    def cost(y):
        return t * problem.kinetic((y - x) / t) + problem.terminal_cost(y)

    seeds = [x] + list(problem.terminal.seeds(x))
    seed_vals = [float(cost(s[None, :])[0]) for s in seeds]
    ub = min(seed_vals)
    if not math.isfinite(ub):
        return INF
    best_y = seeds[int(np.argmin(seed_vals))]
    reach = t * problem.kinetic.level_radius(ub / t) * (1 + 1e-9) + 1e-12
    if reach <= 1e-300:
        return ub

    per_axis = max(5, int(round(4e4 ** (1.0 / n))))
    refine = max(5, int(round(4e3 ** (1.0 / n))))
    half = np.full(n, reach)
    center = x.copy()
    best = ub
    m = per_axis
    stalls = 0
    for _ in range(max_rounds):
        grids = [np.linspace(c - h, c + h, m) for c, h in zip(center, half)]
        pts = np.stack(np.meshgrid(*grids, indexing="ij"), axis=-1).reshape(-1, n)
        vals = cost(pts)
        j = int(np.argmin(vals))
        gain = best - float(vals[j])
        if vals[j] < best:
            best, best_y = float(vals[j]), pts[j]
        spacing = 2 * half / (m - 1)
        center = best_y.copy()
        half = 2 * spacing
        m = refine
        stalls = stalls + 1 if gain <= 1e-3 * tolerance else 0
        if stalls >= 3 or float(np.max(spacing)) < 1e-13 * (1 + float(np.max(np.abs(center)))):
            return best
    raise AccuracyError("endpoint refinement did not settle", best=best)


# ---------------------------------------------------------------------------
# initial layer


def _cone_offsets(n: int, samples: int) -> np.ndarray:
    if n == 1:
        return np.linspace(-1.0, 1.0, max(samples, 1))[:, None]
    dirs = [np.zeros(n)]
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        dirs += [e, -e]
    diag = np.ones(n) / math.sqrt(n)
    dirs += [diag, -diag]
    return np.array(dirs)


def initial_layer_check(
    problem: Problem,
    x,
    lam: float,
    schedule: LimitSchedule,
    *,
    tolerance: float = 1e-3,
    samples: int = 5,
    options: Optional[MinimizationOptions] = None,
) -> VerificationReport:
    """Sample ``V(h, y)`` on the cone ``|y - x| <= lam * h`` as ``h`` decreases.

    The per-``h`` maximum deviation from ``phi(x)`` is extrapolated to
    ``h = 0`` by the quadratic through the last three records, which cancels
    both the first- and second-order terms of a smooth deviation; the check
    passes when the absolute value of that limit is within ``tolerance``.
    A negative intercept is kept as its magnitude rather than clipped, so an
    erratic tail cannot pass by overshooting below zero.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (problem.dimension,):
        raise DimensionError("x has the wrong dimension")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    phi = float(problem.terminal_cost(x))
    if not math.isfinite(phi):
        raise DomainError("initial layer check needs phi(x) finite")
    opts = options or MinimizationOptions(knot_count=5, restarts=2)
    offsets = _cone_offsets(problem.dimension, samples if lam > 0 else 1)
    if lam == 0:
        offsets = np.zeros((1, problem.dimension))
    records = []
    for h in schedule.h_values:
        devs = []
        for off in offsets:
            v, _ = minimize_bolza(problem, float(h), x + lam * h * off, opts)
            devs.append(abs(v - phi))
        records.append((float(h), float(max(devs))))
    hs = np.array([r[0] for r in records])
    ds = np.array([r[1] for r in records])
    notes = []
    if not np.all(np.isfinite(ds[-3:])):
        limit = INF
        notes.append("infinite deviation among the smallest steps")
    elif len(records) >= 3:
        limit = abs(float(np.polyfit(hs[-3:], ds[-3:], 2)[-1]))
    else:
        limit = float(ds[-1])
        notes.append("fewer than three steps; limit taken as the last record")
    point = PointRecord((0.0,) + tuple(x), limit, tolerance, tolerance - limit, bool(limit <= tolerance), "extrapolated")
    return VerificationReport.from_points(
        "initial_layer", [point], tolerance, notes,
        {"per_h": [{"h": h, "max_deviation": d} for h, d in records], "phi_x": phi, "lambda": lam},
    )
