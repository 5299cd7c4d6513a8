"""Vectorized golden-section search for unimodal objectives."""

from __future__ import annotations

import numpy as np

_R = (np.sqrt(5.0) - 1.0) / 2.0


def golden_max(f, lo, hi, iters: int = 80):
    """Maximize ``f`` on each bracket ``[lo, hi]`` (elementwise, unimodal).

    ``f`` maps an array of abscissae to values of the same shape.  Returns
    ``(argmax, value, final_width)``.  Bracket endpoints are compared at the
    end so maxima sitting on the boundary are not lost.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    a, b = lo.copy(), hi.copy()
    c = b - _R * (b - a)
    d = a + _R * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        left = fc >= fd
        a_new = np.where(left, a, c)
        b_new = np.where(left, d, b)
        c_new = np.where(left, b_new - _R * (b_new - a_new), d)
        d_new = np.where(left, c, a_new + _R * (b_new - a_new))
        fp = f(np.where(left, c_new, d_new))
        fc, fd = np.where(left, fp, fd), np.where(left, fc, fp)
        a, b, c, d = a_new, b_new, c_new, d_new
    cands = np.stack(np.broadcast_arrays(lo, 0.5 * (a + b), hi))
    vals = np.stack([f(cands[0]), f(cands[1]), f(cands[2])])
    best = np.argmax(vals, axis=0)
    x = np.take_along_axis(cands, best[None], 0)[0]
    v = np.take_along_axis(vals, best[None], 0)[0]
    return x, v, b - a
