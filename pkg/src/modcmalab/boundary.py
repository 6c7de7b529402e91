"""Coordinate-wise repair of candidates that leave the search box.

Six strategies: none, uniform resample (ur), mirror about the nearest bound
(mcs), one-sided normal re-placement at the violated bound (cotn),
saturation (scs) and toroidal wrapping (tcs).  Feasible coordinates are
never modified by any strategy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

STRATEGIES = ("none", "ur", "mcs", "cotn", "scs", "tcs")

# one-sided normal scale for cotn, as a fraction of the box width
COTN_SCALE = 1.0 / 3.0
COTN_MAX_RESAMPLES = 100


@dataclass(frozen=True)
class Box:
    """Axis-aligned search box with strictly positive widths."""

    lb: np.ndarray
    ub: np.ndarray

    def __post_init__(self):
        lb = np.atleast_1d(np.asarray(self.lb, dtype=float))
        ub = np.atleast_1d(np.asarray(self.ub, dtype=float))
        object.__setattr__(self, "lb", lb)
        object.__setattr__(self, "ub", ub)
        if lb.shape != ub.shape:
            raise ValueError("lb and ub must have the same shape")
        if not (np.isfinite(lb).all() and np.isfinite(ub).all()):
            raise ValueError("bounds must be finite")
        if not (ub > lb).all():
            raise ValueError("ub must exceed lb in every coordinate")

    @property
    def width(self) -> np.ndarray:
        return self.ub - self.lb

    @property
    def diameter(self) -> float:
        """Euclidean length of the box diagonal."""
        return float(np.linalg.norm(self.width))

    def contains(self, x: np.ndarray) -> bool:
        x = np.asarray(x, dtype=float)
        return bool((x >= self.lb).all() and (x <= self.ub).all())

    @classmethod
    def cube(cls, d: int, lo: float = -5.0, hi: float = 5.0) -> "Box":
        return cls(np.full(d, lo), np.full(d, hi))


def _cotn_coord(bound: float, inward: float, width: float,
                rng: np.random.Generator) -> float:
    scale = width * COTN_SCALE
    for _ in range(COTN_MAX_RESAMPLES):
        step = abs(rng.standard_normal()) * scale
        if step <= width:
            return bound + inward * step
    return bound + inward * width  # saturate at the far bound


def correct(x, box: Box, strategy: str, rng: np.random.Generator | None = None):
    """Return a repaired copy of ``x``; feasible coordinates pass through.

    mcs folds with period 2*width (triangular reflection) and tcs wraps with
    period width, so violations of any magnitude stay defined.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown boundary strategy {strategy!r}")
    x = np.array(x, dtype=float)
    if strategy == "none":
        return x
    lb, ub, width = box.lb, box.ub, box.width
    low = x < lb
    high = x > ub
    violated = low | high
    if not violated.any():
        return x
    if strategy == "scs":
        x[low] = lb[low]
        x[high] = ub[high]
    elif strategy == "ur":
        if rng is None:
            raise ValueError("ur correction needs an rng")
        idx = np.flatnonzero(violated)
        x[idx] = lb[idx] + rng.random(idx.size) * width[idx]
    elif strategy == "mcs":
        idx = np.flatnonzero(violated)
        t = np.mod(x[idx] - lb[idx], 2.0 * width[idx])
        x[idx] = lb[idx] + np.where(t <= width[idx], t, 2.0 * width[idx] - t)
    elif strategy == "tcs":
        idx = np.flatnonzero(violated)
        x[idx] = lb[idx] + np.mod(x[idx] - lb[idx], width[idx])
    elif strategy == "cotn":
        if rng is None:
            raise ValueError("cotn correction needs an rng")
        for i in np.flatnonzero(violated):
            if high[i]:
                x[i] = _cotn_coord(ub[i], -1.0, width[i], rng)
            else:
                x[i] = _cotn_coord(lb[i], 1.0, width[i], rng)
    return x
