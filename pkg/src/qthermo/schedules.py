"""Piecewise-polynomial time schedules for rates and frequencies.

Each segment covers ``[t_start, t_end)`` and carries polynomial coefficients
in ascending powers of the absolute time ``t``.  The last segment may be open
ended (``t_end = inf``).  Antiderivatives are exact.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as P


@dataclass(frozen=True)
class Segment:
    t_start: float
    t_end: float
    coeffs: tuple[float, ...]

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise ValueError(f"empty segment [{self.t_start}, {self.t_end})")
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs) or (0.0,))


class PiecewisePolynomial:
    """Callable schedule ``f(t)`` assembled from contiguous polynomial segments.

    Times before the first segment evaluate the first segment's polynomial, so
    a schedule starting at ``t = 0`` is well defined for tiny negative
    arguments produced by finite differences.
    """

    def __init__(self, segments: Sequence[Segment]):
        segs = sorted(segments, key=lambda s: s.t_start)
        if not segs:
            raise ValueError("a schedule needs at least one segment")
        for a, b in zip(segs, segs[1:]):
            if not math.isclose(a.t_end, b.t_start, abs_tol=1e-15):
                raise ValueError("segments must be contiguous")
        self.segments = tuple(segs)
        self._starts = np.array([s.t_start for s in segs])
        self._start_list = [s.t_start for s in segs]
        # cumulative integral from segments[0].t_start to each segment start
        self._antider = [P.polyint(np.array(s.coeffs)) for s in segs]
        acc = [0.0]
        for s, a in zip(segs[:-1], self._antider[:-1]):
            acc.append(acc[-1] + P.polyval(s.t_end, a) - P.polyval(s.t_start, a))
        self._offsets = np.array(acc)

    @classmethod
    def constant(cls, value: float, t_start: float = 0.0) -> "PiecewisePolynomial":
        return cls([Segment(t_start, math.inf, (value,))])

    @classmethod
    def from_breakpoints(cls, breakpoints: Sequence[float], coeffs: Sequence[Sequence[float]]):
        """Build from ``len(coeffs) + 1`` breakpoints; the last may be ``inf``."""
        if len(breakpoints) != len(coeffs) + 1:
            raise ValueError("need one more breakpoint than coefficient sets")
        return cls([Segment(a, b, tuple(c)) for a, b, c in zip(breakpoints, breakpoints[1:], coeffs)])

    @classmethod
    def linear_interpolant(cls, times: Sequence[float], values: Sequence[float]):
        """Continuous piecewise-linear schedule through ``(times, values)``, constant afterwards."""
        times = [float(x) for x in times]
        values = [float(x) for x in values]
        segs = []
        for t0, t1, y0, y1 in zip(times, times[1:], values, values[1:]):
            slope = (y1 - y0) / (t1 - t0)
            segs.append(Segment(t0, t1, (y0 - slope * t0, slope)))
        segs.append(Segment(times[-1], math.inf, (values[-1],)))
        return cls(segs)

    @property
    def breakpoints(self) -> list[float]:
        return [s.t_start for s in self.segments] + [self.segments[-1].t_end]

    def _index(self, t):
        return np.clip(np.searchsorted(self._starts, t, side="right") - 1, 0, len(self.segments) - 1)

    def __call__(self, t):
        if isinstance(t, (float, int, np.floating)):
            k = min(max(bisect.bisect_right(self._start_list, t) - 1, 0), len(self.segments) - 1)
            acc = 0.0
            for c in reversed(self.segments[k].coeffs):
                acc = acc * t + c
            return float(acc)
        t_arr = np.asarray(t, dtype=float)
        idx = self._index(t_arr)
        if t_arr.ndim == 0:
            return float(P.polyval(float(t_arr), self.segments[int(idx)].coeffs))
        out = np.empty_like(t_arr)
        for k in np.unique(idx):
            mask = idx == k
            out[mask] = P.polyval(t_arr[mask], self.segments[k].coeffs)
        return out

    def integral(self, t, t0: float = 0.0):
        """Exact ``int_{t0}^{t} f(s) ds``."""
        return self._cumulative(t) - self._cumulative(t0)

    def _cumulative(self, t):
        t_arr = np.asarray(t, dtype=float)
        idx = self._index(t_arr)
        if t_arr.ndim == 0:
            k = int(idx)
            a = self._antider[k]
            return float(self._offsets[k] + P.polyval(float(t_arr), a) - P.polyval(self.segments[k].t_start, a))
        out = np.empty_like(t_arr)
        for k in np.unique(idx):
            mask = idx == k
            a = self._antider[k]
            out[mask] = self._offsets[k] + P.polyval(t_arr[mask], a) - P.polyval(self.segments[k].t_start, a)
        return out

    def to_dict(self) -> dict:
        return {
            "segments": [
                {
                    "t_start": s.t_start,
                    "t_end": None if math.isinf(s.t_end) else s.t_end,
                    "poly_coeffs": list(s.coeffs),
                }
                for s in self.segments
            ]
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PiecewisePolynomial":
        if "constant" in data:
            return cls.constant(float(data["constant"]))
        segs = [
            Segment(
                float(s["t_start"]),
                math.inf if s.get("t_end") is None else float(s["t_end"]),
                tuple(s["poly_coeffs"]),
            )
            for s in data["segments"]
        ]
        return cls(segs)

    def __eq__(self, other):
        return isinstance(other, PiecewisePolynomial) and self.segments == other.segments

    def __hash__(self):
        return hash(self.segments)

    def __repr__(self):
        return f"PiecewisePolynomial({list(self.segments)!r})"


def as_schedule(f) -> "PiecewisePolynomial | callable":
    """Promote numbers to constant schedules; leave callables untouched."""
    if isinstance(f, (int, float, np.floating, np.integer)):
        return PiecewisePolynomial.constant(float(f))
    if not callable(f):
        raise TypeError(f"schedule must be a number or callable, got {type(f).__name__}")
    return f
