import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hitchinflow.ode import Inadmissible, dopri5


def test_exponential_forward_and_dense_output():
    sol = dopri5(lambda t, y: y, 0.0, np.array([1.0]), 2.0)
    assert sol.status == "window-exhausted"
    assert sol.t[-1] == pytest.approx(2.0)
    assert abs(sol.y[-1][0] - np.exp(2.0)) < 1e-8 * np.exp(2.0)
    for s in sol.segments[::5]:
        tm = s.t0 + 0.37 * s.h
        assert abs(s(tm)[0] - np.exp(tm)) < 1e-7 * np.exp(tm)
        assert abs(s.derivative(tm)[0] - np.exp(tm)) < 1e-5 * np.exp(tm)


def test_backward_direction():
    sol = dopri5(lambda t, y: -y, 0.0, np.array([1.0]), -1.5)
    assert sol.t[-1] == pytest.approx(-1.5)
    assert all(b < a for a, b in zip(sol.t, sol.t[1:]))
    assert abs(sol.y[-1][0] - np.exp(1.5)) < 1e-8 * np.exp(1.5)
    assert sol.segment_at(-0.7)(-0.7)[0] == pytest.approx(np.exp(0.7), rel=1e-7)


@given(st.floats(-2, 2), st.floats(-2, 2))
def test_oscillator_energy(x0, v0):
    sol = dopri5(lambda t, y: np.array([y[1], -y[0]]), 0.0, np.array([x0, v0]), 6.0)
    x, v = sol.y[-1]
    assert abs(x - (x0 * np.cos(6) + v0 * np.sin(6))) < 1e-8
    assert abs((x * x + v * v) - (x0 * x0 + v0 * v0)) < 1e-8


def sqrt_rhs(t, y):
    # y = sqrt(1 - t): leaves its domain at t = 1
    if y[0] <= 0:
        raise Inadmissible("y <= 0")
    return np.array([-0.5 / y[0]])


def test_degeneration_bracketed():
    sol = dopri5(sqrt_rhs, 0.0, np.array([1.0]), 3.0, event_tol=1e-9)
    assert sol.status == "degeneration"
    lo, hi = sol.bracket
    assert hi - lo <= 1e-9 + 1e-14
    assert abs(0.5 * (lo + hi) - 1.0) < 1e-6
    # states stay on the exact solution up to the end (compared through the
    # implied time 1 - y^2, since y itself is infinitely steep at t = 1)
    for t, y in zip(sol.t, sol.y):
        assert abs((1 - y[0] ** 2) - t) < 1e-8


def test_monitor_final_stops():
    calls = []

    def monitor(t, y):
        calls.append(t)
        return ("too big", True) if y[0] > 10 else None

    sol = dopri5(lambda t, y: y, 0.0, np.array([1.0]), 10.0, monitor=monitor)
    assert sol.status == "degeneration" and sol.reason == "too big"
    assert sol.y[-1][0] > 10 and sol.y[-2][0] <= 10
    assert sol.bracket[0] < np.log(10) <= sol.bracket[1] + 1e-9


def test_projection_applied():
    # circle flow projected back onto the unit circle
    def proj(t, y):
        return y / np.linalg.norm(y)

    sol = dopri5(lambda t, y: np.array([-y[1], y[0]]), 0.0, np.array([1.0, 0.0]), 10.0, project=proj)
    assert all(abs(np.linalg.norm(y) - 1) < 1e-15 for y in sol.y)


def test_zero_length_window():
    sol = dopri5(lambda t, y: y, 1.0, np.array([2.0]), 1.0)
    assert sol.t == [1.0] and sol.status == "window-exhausted"
