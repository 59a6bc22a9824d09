import csv

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sta_open.schedules import Schedule, quintic_shape, quintic_shape_rate


def test_quintic_endpoints():
    assert quintic_shape(0.0) == 0.0
    assert quintic_shape(1.0) == 1.0
    assert quintic_shape_rate(0.0) == 0.0
    assert quintic_shape_rate(1.0) == 0.0
    assert abs(quintic_shape(0.5) - 0.5) < 1e-15


@given(s=st.floats(0.0, 1.0))
def test_quintic_symmetry(s):
    assert abs(quintic_shape(1.0 - s) - (1.0 - quintic_shape(s))) < 1e-12


@given(s=st.floats(0.0, 1.0))
def test_quintic_monotone(s):
    assert quintic_shape_rate(s) >= -1e-15


def test_polynomial5_schedule():
    sch = Schedule.polynomial5(2.0, -1.0, 4.0)
    assert sch(0.0) == 2.0
    assert sch(4.0) == -1.0
    assert sch.derivative(0.0) == 0.0
    assert sch.derivative(4.0) == 0.0
    # clamped outside the window
    assert sch(-1.0) == 2.0
    assert sch(9.0) == -1.0
    assert sch.derivative(9.0) == 0.0
    # derivative consistent with finite differences inside
    for t in (0.7, 2.0, 3.1):
        h = 1e-6
        fd = (sch(t + h) - sch(t - h)) / (2 * h)
        assert abs(fd - sch.derivative(t)) < 1e-8


def test_constant_schedule():
    sch = Schedule.constant(0.7)
    assert sch(12.3) == 0.7
    assert sch.derivative(-4.0) == 0.0


def test_tabulated_interpolation():
    ts = np.array([0.0, 1.0, 2.0])
    vs = np.array([0.0, 2.0, 1.0])
    sch = Schedule.tabulated(ts, vs)
    assert abs(sch(0.5) - 1.0) < 1e-14
    assert abs(sch(1.5) - 1.5) < 1e-14
    assert abs(sch.derivative(0.5) - 2.0) < 1e-12
    assert abs(sch.derivative(1.5) + 1.0) < 1e-12


def test_from_csv(tmp_path):
    path = tmp_path / "sched.csv"
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        for t, v in [(0.0, 1.0), (0.5, 0.8), (1.0, 0.2)]:
            w.writerow([t, v])
    sch = Schedule.from_csv(str(path))
    assert abs(sch(0.25) - 0.9) < 1e-14
    assert abs(sch(1.0) - 0.2) < 1e-14


def test_from_callable_fd_derivative():
    sch = Schedule.from_callable(np.cos, 10.0)
    for t in (0.3, 2.0, 7.7):
        assert abs(sch.derivative(t) + np.sin(t)) < 1e-7
