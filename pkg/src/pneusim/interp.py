"""Piecewise-linear table lookup with strict range checking.

np.interp clamps silently outside the table, which would amount to
extrapolation past the characterized envelope; lookups here raise instead.
Node hits return the stored anchor value exactly (no arithmetic on them).
"""

from __future__ import annotations

from bisect import bisect_right
from typing import Sequence

from .errors import OutOfRangeError


class PiecewiseLinear:
    """1-D piecewise-linear interpolant over strictly increasing x nodes."""

    __slots__ = ("xs", "ys")

    def __init__(self, xs: Sequence[float], ys: Sequence[float]):
        if len(xs) != len(ys):
            raise ValueError("xs and ys must have equal length")
        if len(xs) < 1:
            raise ValueError("need at least one node")
        for a, b in zip(xs, xs[1:]):
            if not (b > a):
                raise ValueError(f"x nodes must be strictly increasing (got {a} then {b})")
        self.xs = tuple(float(x) for x in xs)
        self.ys = tuple(float(y) for y in ys)

    @property
    def x_min(self) -> float:
        return self.xs[0]

    @property
    def x_max(self) -> float:
        return self.xs[-1]

    def __call__(self, x: float) -> float:
        xs = self.xs
        if x < xs[0] or x > xs[-1]:
            raise OutOfRangeError(
                f"input {x} outside characterized range [{xs[0]}, {xs[-1]}]"
            )
        i = bisect_right(xs, x) - 1
        if i == len(xs) - 1:
            return self.ys[-1]
        if xs[i] == x:
            return self.ys[i]
        x0, x1 = xs[i], xs[i + 1]
        y0, y1 = self.ys[i], self.ys[i + 1]
        t = (x - x0) / (x1 - x0)
        return y0 + t * (y1 - y0)
