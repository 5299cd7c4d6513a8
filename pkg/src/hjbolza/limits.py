"""Step-size schedules for liminf / limsup estimation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def geometric(h0: float = 0.1, ratio: float = 0.5, terms: int = 12) -> np.ndarray:
    return h0 * ratio ** np.arange(terms)


@dataclass(frozen=True)
class LimitSchedule:
    """Decreasing step sizes ``h`` plus the perturbation cone for ``v -> u``.

    ``cone_width`` is relative to the direction norm and shrinks linearly
    with ``h`` (it equals ``cone_width * |d|`` at the first step).
    """

    h_values: np.ndarray = field(default_factory=geometric)
    direction_samples: int = 9
    cone_width: float = 0.25

    def __post_init__(self):
        h = np.asarray(self.h_values, dtype=float).ravel()
        if h.size == 0 or np.any(h <= 0) or np.any(np.diff(h) >= 0):
            raise ValueError("h_values must be positive and strictly decreasing")
        if self.direction_samples < 1:
            raise ValueError("direction_samples must be positive")
        if self.cone_width < 0:
            raise ValueError("cone_width must be nonnegative")
        object.__setattr__(self, "h_values", h)

    @classmethod
    def geometric(cls, h0: float = 0.1, ratio: float = 0.5, terms: int = 12, **kw) -> "LimitSchedule":
        return cls(geometric(h0, ratio, terms), **kw)

    def cone_radius(self, h: float, direction_norm: float) -> float:
        return self.cone_width * direction_norm * h / self.h_values[0]
