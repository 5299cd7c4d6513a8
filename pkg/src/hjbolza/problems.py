"""Problem catalog for autonomous Bolza problems.

A problem is a Lagrangian ``L(x, u) = K(u) + P(x)`` made of a convex,
superlinear kinetic term ``K(u) = c |u|^p`` (which doubles as the
coercivity witness) and a nonnegative potential ``P``, together with a
terminal cost ``phi`` that may take the value ``+inf``.

All callables are vectorized: states and velocities are arrays whose last
axis has length ``dimension`` and the leading axes broadcast.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import DimensionError

INF = math.inf

# Gauss-Legendre rule on [0, 1] for segment averages of generic potentials.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
_GL_NODES = 0.5 * (_GL_NODES + 1.0)
_GL_WEIGHTS = 0.5 * _GL_WEIGHTS


class ContinuityClass(str, enum.Enum):
    CONTINUOUS = "Continuous"
    LSC_LOCALLY_BOUNDED = "LowerSemicontinuousLocallyBounded"
    LSC = "LowerSemicontinuous"


def _norm(v: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(np.square(v), axis=-1))


# ---------------------------------------------------------------------------
# kinetic term / coercivity witness


@dataclass(frozen=True)
class Kinetic:
    """``K(u) = coef * |u|**power`` with ``power > 1``."""

    power: float = 2.0
    coef: float = 0.5

    def __post_init__(self):
        if not self.power > 1.0:
            raise ValueError("kinetic power must exceed 1 (superlinear growth)")
        if not self.coef > 0.0:
            raise ValueError("kinetic coefficient must be positive")

    def __call__(self, u) -> np.ndarray:
        return self.coef * _norm(np.asarray(u, dtype=float)) ** self.power

    def grad(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        r = _norm(u)[..., None]
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(r > 0, r ** (self.power - 2.0), 0.0)
        return self.coef * self.power * w * u

    def radius(self, slope: float) -> float:
        """Smallest ``R`` with ``K(u) >= slope * |u|`` for every ``|u| >= R``."""
        if slope <= 0.0:
            return 0.0
        return (slope / self.coef) ** (1.0 / (self.power - 1.0))

    def level_radius(self, level: float) -> float:
        """Smallest ``R`` with ``K(u) >= level`` for every ``|u| >= R``."""
        if level <= 0.0:
            return 0.0
        return (level / self.coef) ** (1.0 / self.power)


# ---------------------------------------------------------------------------
# potentials


class Potential:
    """Nonnegative lower semicontinuous function of the state."""

    #: True when segment averages are continuously differentiable.
    smooth: bool = True

    #: Lipschitz constant, or None when the potential is discontinuous.
    lipschitz: Optional[float] = 0.0
    #: Global upper bound, or None when unbounded.
    bound: Optional[float] = 0.0
    #: Point the lattice of the inf-regularization is aligned with.
    anchor: float = 0.0

    def __call__(self, x) -> np.ndarray:
        raise NotImplementedError

    def segment_mean(self, a, b) -> np.ndarray:
        """Average of the potential along the straight segments ``a -> b``."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        pts = a[..., None, :] + _GL_NODES[:, None] * (b - a)[..., None, :]
        return np.tensordot(self(pts), _GL_WEIGHTS, axes=([-1], [0]))

    def breakpoints(self) -> list[tuple[int, float]]:
        """Hyperplanes ``x[axis] == value`` where the potential jumps."""
        return []

    def segment_mean_grad(self, a, b):
        """Gradients of :meth:`segment_mean` in ``a`` and ``b``; None if nonsmooth."""
        return None


@dataclass(frozen=True)
class ZeroPotential(Potential):
    lipschitz: Optional[float] = 0.0
    bound: Optional[float] = 0.0

    def __call__(self, x) -> np.ndarray:
        return np.zeros(np.shape(x)[:-1])

    def segment_mean(self, a, b) -> np.ndarray:
        return np.zeros(np.broadcast_shapes(np.shape(a), np.shape(b))[:-1])

    def segment_mean_grad(self, a, b):
        return np.zeros_like(a, dtype=float), np.zeros_like(b, dtype=float)


@dataclass(frozen=True)
class StepPotential(Potential):
    """``height`` where ``x[axis] > threshold`` and 0 elsewhere (lsc)."""

    height: float = 1.0
    threshold: float = 0.0
    axis: int = 0
    lipschitz: Optional[float] = None
    smooth: bool = False

    @property
    def bound(self) -> float:  # type: ignore[override]
        return self.height

    @property
    def anchor(self) -> float:  # type: ignore[override]
        return self.threshold

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.where(x[..., self.axis] > self.threshold, self.height, 0.0)

    def segment_mean(self, a, b) -> np.ndarray:
        # exact: fraction of the segment lying strictly above the threshold
        a = np.asarray(a, dtype=float)[..., self.axis] - self.threshold
        b = np.asarray(b, dtype=float)[..., self.axis] - self.threshold
        up = (a > 0) & (b > 0)
        cross = (a > 0) != (b > 0)
        d = np.where(cross, a - b, 1.0)
        # a > 0 >= b: fraction a/(a-b); b > 0 >= a: fraction b/(b-a)
        frac = np.where(cross, np.where(a > 0, a, -b) / d, up * 1.0)
        return self.height * frac

    def segment_mean_grad(self, a, b):
        """Gradient valid off the threshold (the mean is piecewise smooth)."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        ac = a[..., self.axis] - self.threshold
        bc = b[..., self.axis] - self.threshold
        cross = (ac > 0) != (bc > 0)
        d2 = np.where(cross, (ac - bc) ** 2, 1.0)
        ga = np.zeros_like(a)
        gb = np.zeros_like(b)
        ga[..., self.axis] = np.where(cross, -bc / d2, 0.0) * self.height
        gb[..., self.axis] = np.where(cross, ac / d2, 0.0) * self.height
        return ga, gb

    def breakpoints(self) -> list[tuple[int, float]]:
        return [(self.axis, self.threshold)]


@dataclass(frozen=True)
class QuadraticPotential(Potential):
    """``coef * |x|**2``; locally Lipschitz, continuous."""

    coef: float = 0.5
    lipschitz: Optional[float] = None
    bound: Optional[float] = None

    def __call__(self, x) -> np.ndarray:
        return self.coef * np.sum(np.square(np.asarray(x, dtype=float)), axis=-1)

    def segment_mean(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        return self.coef * (np.sum(a * a, -1) + np.sum(a * b, -1) + np.sum(b * b, -1)) / 3.0

    def segment_mean_grad(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        return self.coef * (2 * a + b) / 3.0, self.coef * (a + 2 * b) / 3.0


@dataclass(frozen=True)
class RegularizedPotential(Potential):
    """``inf_z { P(z) + k |x - z| }`` over ``{x}`` and a lattice around ``x``.

    The lattice is ``anchor + spacing * Z^n``, fixed across ``k``, and only
    points with ``|x - z| <= 2 P(x) / k`` are scanned (beyond that radius the
    penalty alone exceeds ``P(x)``).  Nested lattices make the result
    nondecreasing in ``k``; including ``z = x`` keeps it below ``P``.
    """

    base: Potential = field(default_factory=ZeroPotential)
    k: float = 1.0
    spacing: float = 1e-3
    dimension: int = 1
    chunk: int = 4096

    @property
    def lipschitz(self) -> float:  # type: ignore[override]
        return self.k

    @property
    def bound(self) -> Optional[float]:  # type: ignore[override]
        return self.base.bound

    @property
    def anchor(self) -> float:  # type: ignore[override]
        return self.base.anchor

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dimension:
            raise DimensionError(f"expected states of length {self.dimension}")
        flat = x.reshape(-1, self.dimension)
        out = np.empty(len(flat))
        for start in range(0, len(flat), self.chunk):
            out[start:start + self.chunk] = self._eval(flat[start:start + self.chunk])
        return out.reshape(x.shape[:-1])

    def _eval(self, x: np.ndarray) -> np.ndarray:
        own = self.base(x)
        radius = 2.0 * own / self.k
        rmax = float(np.max(radius, initial=0.0))
        if rmax <= 0.0:
            return own
        half = int(math.ceil(rmax / self.spacing)) + 1
        steps = np.arange(-half, half + 1, dtype=float)
        grids = np.meshgrid(*([steps] * self.dimension), indexing="ij")
        offsets = np.stack([g.ravel() for g in grids], axis=-1)
        centre = np.round((x - self.anchor) / self.spacing)
        z = self.anchor + self.spacing * (centre[:, None, :] + offsets[None, :, :])
        dist = _norm(z - x[:, None, :])
        cand = self.base(z) + self.k * dist
        cand = np.where(dist <= radius[:, None] + self.spacing, cand, INF)
        return np.minimum(own, cand.min(axis=1))


# ---------------------------------------------------------------------------
# terminal costs


class Terminal:
    continuous: bool = True

    def __call__(self, x) -> np.ndarray:
        raise NotImplementedError

    def finite_point(self, dimension: int) -> np.ndarray:
        return np.zeros(dimension)

    def seeds(self, x: np.ndarray) -> list[np.ndarray]:
        """Endpoints worth trying first when minimizing from ``x``."""
        return []

    def grad(self, x):
        """Gradient, or None when the terminal cost is not differentiable."""
        return None


@dataclass(frozen=True)
class ZeroTerminal(Terminal):
    def __call__(self, x) -> np.ndarray:
        return np.zeros(np.shape(x)[:-1])

    def grad(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class QuadraticTerminal(Terminal):
    """``coef * |x - center|**2`` with a scalar center broadcast to all axes."""

    coef: float = 1.0
    center: float = 0.0

    def __call__(self, x) -> np.ndarray:
        d = np.asarray(x, dtype=float) - self.center
        return self.coef * np.sum(d * d, axis=-1)

    def finite_point(self, dimension: int) -> np.ndarray:
        return np.full(dimension, self.center)

    def seeds(self, x: np.ndarray) -> list[np.ndarray]:
        return [np.full_like(x, self.center)]

    def grad(self, x):
        return 2.0 * self.coef * (np.asarray(x, dtype=float) - self.center)


@dataclass(frozen=True)
class BallIndicator(Terminal):
    """0 on the closed ball ``B(center, radius)`` and ``+inf`` elsewhere."""

    center: float = 0.0
    radius: float = 0.1
    continuous: bool = False

    def __call__(self, x) -> np.ndarray:
        d = _norm(np.asarray(x, dtype=float) - self.center)
        return np.where(d <= self.radius * (1 + 1e-12), 0.0, INF)

    def finite_point(self, dimension: int) -> np.ndarray:
        return np.full(dimension, self.center)

    def seeds(self, x: np.ndarray) -> list[np.ndarray]:
        c = np.full_like(x, self.center)
        d = float(_norm(x - c))
        if d <= self.radius:
            return [x.copy()]
        return [c + (x - c) * (self.radius / d), c]


# ---------------------------------------------------------------------------
# problem


@dataclass(frozen=True)
class Problem:
    name: str
    dimension: int
    kinetic: Kinetic = field(default_factory=Kinetic)
    potential: Potential = field(default_factory=ZeroPotential)
    terminal: Terminal = field(default_factory=ZeroTerminal)
    continuity_class: ContinuityClass = ContinuityClass.CONTINUOUS

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be a positive integer")

    @property
    def x_independent(self) -> bool:
        return isinstance(self.potential, ZeroPotential)

    def lagrangian(self, x, u) -> np.ndarray:
        return self.kinetic(u) + self.potential(x)

    def terminal_cost(self, x) -> np.ndarray:
        return self.terminal(x)

    def coercivity(self, u) -> np.ndarray:
        return self.kinetic(u)

    def segment_cost(self, a, b, ds: float) -> np.ndarray:
        """Exact integral of ``L`` along the straight segments ``a -> b`` of duration ``ds``."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        return ds * (self.kinetic((b - a) / ds) + self.potential.segment_mean(a, b))


def _check(problem: Problem, v, what: str) -> np.ndarray:
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.shape[-1] != problem.dimension:
        raise DimensionError(
            f"{what} has length {v.shape[-1]}, problem {problem.name!r} has dimension {problem.dimension}"
        )
    return v


def eval_lagrangian(problem: Problem, x, u) -> float:
    x = _check(problem, x, "state")
    u = _check(problem, u, "velocity")
    return float(problem.lagrangian(x, u))


def eval_terminal(problem: Problem, x) -> float:
    return float(problem.terminal_cost(_check(problem, x, "state")))


def coercivity_radius(problem: Problem, slope: float) -> float:
    """Radius beyond which the coercivity witness dominates ``slope * |u|``."""
    if slope < 0:
        raise ValueError("slope must be nonnegative")
    return problem.kinetic.radius(slope)


def approximate_continuous(problem: Problem, k: int, spacing: Optional[float] = None) -> Problem:
    """Continuous minorant ``L_k`` obtained by inf-regularizing the potential.

    Since ``L(z, u) = K(u) + P(z)``, the infimum over ``z`` of
    ``L(z, u) + k |x - z|`` only acts on the potential.
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    pot = problem.potential
    if isinstance(pot, ZeroPotential):
        return replace(problem, name=f"{problem.name}~k{k}")
    if spacing is None:
        spacing = 1e-3 if problem.dimension == 1 else 2e-2
    reg = RegularizedPotential(base=pot, k=float(k), spacing=spacing, dimension=problem.dimension)
    return replace(
        problem,
        name=f"{problem.name}~k{k}",
        potential=reg,
        continuity_class=ContinuityClass.CONTINUOUS,
    )


# ---------------------------------------------------------------------------
# catalog


@dataclass(frozen=True)
class CatalogEntry:
    problem: Problem
    known_value_function: Optional[Callable] = None
    value_provenance: str = ""
    known_hamiltonian: Optional[Callable] = None
    hamiltonian_provenance: str = ""


def _x_of(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=float))


def _quadratic(n: int) -> CatalogEntry:
    return CatalogEntry(
        Problem("quadratic", n),
        known_value_function=lambda t, x: 0.0 * np.sum(_x_of(x), -1),
        value_provenance="closed form: phi = 0 and L(x, 0) = 0",
        known_hamiltonian=lambda x, p: 0.5 * np.sum(np.square(_x_of(p)), -1),
        hamiltonian_provenance="conjugate of |u|^2/2",
    )


def _quadratic_x2(n: int) -> CatalogEntry:
    return CatalogEntry(
        Problem("quadratic_x2", n, terminal=QuadraticTerminal(1.0, 0.0)),
        known_value_function=lambda t, x: np.sum(np.square(_x_of(x)), -1) / (1.0 + 2.0 * np.asarray(t)),
        value_provenance="Hopf-Lax: min_y |y-x|^2/(2t) + |y|^2",
        known_hamiltonian=lambda x, p: 0.5 * np.sum(np.square(_x_of(p)), -1),
        hamiltonian_provenance="conjugate of |u|^2/2",
    )


def _quartic(n: int) -> CatalogEntry:
    return CatalogEntry(
        Problem("quartic", n, kinetic=Kinetic(4.0, 1.0)),
        known_value_function=lambda t, x: 0.0 * np.sum(_x_of(x), -1),
        value_provenance="closed form: phi = 0 and L(x, 0) = 0",
        known_hamiltonian=lambda x, p: 3.0 * (np.sqrt(np.sum(np.square(_x_of(p)), -1)) / 4.0) ** (4.0 / 3.0),
        hamiltonian_provenance="stationarity 4u^3 = p",
    )


def _step(n: int) -> CatalogEntry:
    def value(t, x):
        x1 = _x_of(x)[..., 0]
        return np.where(x1 > 0, np.minimum(math.sqrt(2.0) * x1, t), 0.0)

    return CatalogEntry(
        Problem(
            "step",
            n,
            potential=StepPotential(1.0, 0.0, 0),
            continuity_class=ContinuityClass.LSC_LOCALLY_BOUNDED,
        ),
        known_value_function=value,
        value_provenance="reach x1 = 0 at speed sqrt(2) and rest, or stay and pay t",
        known_hamiltonian=lambda x, p: 0.5 * np.sum(np.square(_x_of(p)), -1)
        - np.where(_x_of(x)[..., 0] > 0, 1.0, 0.0),
        hamiltonian_provenance="conjugate of |u|^2/2 shifted by the potential",
    )


def _step_cross(n: int) -> CatalogEntry:
    return CatalogEntry(
        Problem(
            "step_cross",
            n,
            potential=StepPotential(1.0, 0.0, 0),
            terminal=QuadraticTerminal(1.0, -1.0),
            continuity_class=ContinuityClass.LSC_LOCALLY_BOUNDED,
        ),
        known_hamiltonian=lambda x, p: 0.5 * np.sum(np.square(_x_of(p)), -1)
        - np.where(_x_of(x)[..., 0] > 0, 1.0, 0.0),
        hamiltonian_provenance="conjugate of |u|^2/2 shifted by the potential",
    )


def _harmonic(n: int) -> CatalogEntry:
    return CatalogEntry(
        Problem("harmonic", n, potential=QuadraticPotential(0.5)),
        known_value_function=lambda t, x: 0.5 * np.tanh(np.asarray(t)) * np.sum(np.square(_x_of(x)), -1),
        value_provenance="Riccati equation P' = 1 - P^2, P(0) = 0",
        known_hamiltonian=lambda x, p: 0.5 * np.sum(np.square(_x_of(p)), -1)
        - 0.5 * np.sum(np.square(_x_of(x)), -1),
        hamiltonian_provenance="conjugate of |u|^2/2 shifted by the potential",
    )


def _lagrange_ball(n: int) -> CatalogEntry:
    def value(t, x):
        d = np.sqrt(np.sum(np.square(_x_of(x)), -1))
        gap = np.maximum(d - 0.1, 0.0)
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = gap**2 / (2.0 * t)
        # t = 0 is the terminal layer: the target indicator
        return np.where(t > 0, v, np.where(gap > 0, INF, 0.0))

    return CatalogEntry(
        Problem("lagrange_ball", n, terminal=BallIndicator(0.0, 0.1)),
        known_value_function=value,
        value_provenance="straight line to the nearest point of the target ball",
        known_hamiltonian=lambda x, p: 0.5 * np.sum(np.square(_x_of(p)), -1),
        hamiltonian_provenance="conjugate of |u|^2/2",
    )


_CATALOG = {
    "quadratic": _quadratic,
    "quadratic_x2": _quadratic_x2,
    "quartic": _quartic,
    "step": _step,
    "step_cross": _step_cross,
    "harmonic": _harmonic,
    "lagrange_ball": _lagrange_ball,
}


def catalog_names() -> list[str]:
    return sorted(_CATALOG)


def catalog_entry(name: str, dimension: int = 1) -> CatalogEntry:
    try:
        factory = _CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown catalog problem {name!r}; known: {', '.join(catalog_names())}") from None
    return factory(dimension)


def get_problem(name: str, dimension: int = 1) -> Problem:
    return catalog_entry(name, dimension).problem
