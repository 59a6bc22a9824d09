"""Scalar control schedules with analytic derivatives where available.

Four kinds: constant, polynomial5 (smooth quintic ramp with vanishing first
and second endpoint derivatives), tabulated (piecewise linear from samples),
and callable (user function, optional user derivative, else central
differences). Values outside [0, t_f] clamp to the endpoint values for the
constant/polynomial5/tabulated kinds, with zero derivative there.
"""

from __future__ import annotations

import csv
from typing import Callable, Sequence

import numpy as np

from .errors import ValidationError


def quintic_shape(s):
    """Monotone ramp 10 s^3 - 15 s^4 + 6 s^5 on [0, 1]."""
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s))


def quintic_shape_rate(s):
    return s * s * (30.0 + s * (-60.0 + 30.0 * s))


class Schedule:
    """Time-dependent scalar a(t) on [0, t_f] with a derivative method."""

    def __init__(self, kind: str, value_fn: Callable[[float], float],
                 deriv_fn: Callable[[float], float], a0: float, af: float,
                 t_f: float):
        self.kind = kind
        self._value = value_fn
        self._deriv = deriv_fn
        self.a0 = float(a0)
        self.af = float(af)
        self.t_f = float(t_f)

    def __call__(self, t: float) -> float:
        return self._value(t)

    def derivative(self, t: float) -> float:
        return self._deriv(t)

    def __repr__(self) -> str:
        return (f"Schedule({self.kind}, a0={self.a0:g}, af={self.af:g}, "
                f"t_f={self.t_f:g})")

    @staticmethod
    def constant(value: float, t_f: float = np.inf) -> "Schedule":
        return Schedule("constant", lambda t: float(value), lambda t: 0.0,
                        value, value, t_f)

    @staticmethod
    def polynomial5(a0: float, af: float, t_f: float) -> "Schedule":
        if not t_f > 0:
            raise ValidationError("polynomial5 needs t_f > 0")
        span = af - a0

        def value(t: float) -> float:
            s = min(max(t / t_f, 0.0), 1.0)
            return a0 + span * quintic_shape(s)

        def deriv(t: float) -> float:
            if t <= 0.0 or t >= t_f:
                return 0.0
            return span * quintic_shape_rate(t / t_f) / t_f

        return Schedule("polynomial5", value, deriv, a0, af, t_f)

    @staticmethod
    def tabulated(times: Sequence[float], values: Sequence[float]) -> "Schedule":
        ts = np.asarray(times, dtype=float)
        vs = np.asarray(values, dtype=float)
        if ts.ndim != 1 or ts.shape != vs.shape or ts.size < 2:
            raise ValidationError("tabulated schedule needs matching 1-d samples")
        if not np.all(np.diff(ts) > 0):
            raise ValidationError("tabulated times must be strictly increasing")
        slopes = np.diff(vs) / np.diff(ts)

        def value(t: float) -> float:
            return float(np.interp(t, ts, vs))

        def deriv(t: float) -> float:
            if t <= ts[0] or t >= ts[-1]:
                return 0.0
            # slope of the containing segment, right-continuous at samples
            k = int(np.searchsorted(ts, t, side="right") - 1)
            return float(slopes[min(k, slopes.size - 1)])

        return Schedule("tabulated", value, deriv, vs[0], vs[-1],
                        float(ts[-1] - ts[0]))

    @staticmethod
    def from_csv(path: str) -> "Schedule":
        """Two-column CSV (t, value); header row optional."""
        times, values = [], []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row:
                    continue
                try:
                    t, v = float(row[0]), float(row[1])
                except (ValueError, IndexError):
                    if not times:
                        continue  # tolerate a single header line
                    raise ValidationError(f"bad schedule row {row!r} in {path}")
                times.append(t)
                values.append(v)
        if len(times) < 2:
            raise ValidationError(f"schedule file {path} has fewer than 2 samples")
        return Schedule.tabulated(times, values)

    @staticmethod
    def from_callable(fn: Callable[[float], float], t_f: float,
                      derivative: Callable[[float], float] | None = None,
                      h: float | None = None) -> "Schedule":
        if h is None:
            h = 1e-6 * max(abs(t_f), 1.0)

        if derivative is None:
            def deriv(t: float) -> float:
                return (fn(t + h) - fn(t - h)) / (2.0 * h)
        else:
            deriv = derivative

        return Schedule("callable", lambda t: float(fn(t)), deriv,
                        fn(0.0), fn(t_f) if np.isfinite(t_f) else fn(0.0), t_f)
