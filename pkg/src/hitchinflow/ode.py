"""Dormand-Prince 5(4) integrator with dense output and boundary bracketing.

The right-hand side may raise :class:`Inadmissible` when a trial state leaves
the domain where the flow is defined (for instance a stable form losing
stability).  Such a step is rejected and retried with half the step size.
Once the solution comes close to the boundary of the domain (a ``monitor``
reports proximity, or trial stages start failing), the integrator keeps
advancing with shrinking steps until the last admissible time and the first
failing trial time are closer than ``event_tol``.  In that regime steps are
never shorter than ``event_tol``; error control asking for shorter steps is
itself taken as a sign of an approaching singularity.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Inadmissible", "Segment", "Solution", "dopri5"]


class Inadmissible(ArithmeticError):
    """Raised by a right-hand side evaluated outside its domain."""


_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# dense output (Shampine's 4th-order interpolant for the Dormand-Prince pair)
_P = np.array(
    [
        [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0, 0, 0, 0],
        [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)


@dataclass
class Segment:
    """One accepted step with its interpolant."""

    t0: float
    h: float
    y0: np.ndarray
    K: np.ndarray  # stage derivatives, shape (7, n)

    @property
    def t1(self):
        return self.t0 + self.h

    def __call__(self, t):
        theta = (t - self.t0) / self.h
        powers = theta ** np.arange(1, 5)
        return self.y0 + self.h * (self.K.T @ (_P @ powers))

    def derivative(self, t):
        theta = (t - self.t0) / self.h
        dpowers = np.arange(1, 5) * theta ** np.arange(0, 4)
        return self.K.T @ (_P @ dpowers)


@dataclass
class Solution:
    t: list
    y: list
    f: list = field(default_factory=list)  # derivative at each sample
    segments: list = field(default_factory=list)
    status: str = "window-exhausted"  # or "degeneration", "step-failure"
    reason: str = None
    bracket: tuple = None
    nfev: int = 0
    rejected: int = 0

    def segment_at(self, t):
        segs = self.segments
        if not segs:
            raise ValueError("no accepted steps")
        forward = segs[0].h > 0
        for s in segs:
            lo, hi = (s.t0, s.t1) if forward else (s.t1, s.t0)
            if lo - 1e-15 <= t <= hi + 1e-15:
                return s
        raise ValueError(f"t = {t} outside the integrated range")


def _stages(fun, t, y, h, f0):
    K = np.empty((7, y.size))
    K[0] = f0
    for s in range(1, 6):
        dy = h * (np.asarray(_A[s]) @ K[:s])
        K[s] = fun(t + _C[s] * h, y + dy)
    y_new = y + h * (_B[:6] @ K[:6])
    K[6] = fun(t + h, y_new)
    err = h * (_E @ K)
    return y_new, K, err


def dopri5(
    fun,
    t0,
    y0,
    t_end,
    rtol=1e-10,
    atol=1e-12,
    h0=None,
    monitor=None,
    event_tol=1e-9,
    max_steps=200000,
    h_min=1e-15,
    project=None,
):
    """Integrate ``y' = fun(t, y)`` from ``t0`` towards ``t_end``.

    ``monitor(t, y)`` is called on each accepted state and returns ``None``
    or ``(reason, final)`` once a degeneration floor has been crossed.  A
    final reason stops the integration at once; otherwise the integrator
    goes on to bracket the end of the admissible interval to ``event_tol``.

    ``project(t, y)``, if given, maps each accepted state back onto a
    manifold of conserved quantities (returning ``None`` leaves it as is).
    """
    y = np.array(y0, dtype=float)
    t = float(t0)
    direction = 1.0 if t_end >= t0 else -1.0
    sol = Solution(t=[t], y=[y.copy()])
    f = np.asarray(fun(t, y), dtype=float)
    sol.nfev += 1
    sol.f.append(f.copy())
    if t_end == t0:
        return sol
    if h0 is None:
        scale = atol + rtol * np.abs(y)
        d0 = np.sqrt(np.mean((y / scale) ** 2))
        d1 = np.sqrt(np.mean((f / scale) ** 2))
        h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        h0 = min(h0, abs(t_end - t0))
    h = direction * abs(h0)
    near_boundary = None  # reason once a floor or failure has been seen

    for _ in range(max_steps):
        remaining = t_end - t
        if direction * remaining <= 0:
            break
        if abs(h) > abs(remaining):
            h = remaining
        try:
            y_new, K, err = _stages(fun, t, y, h, f)
            sol.nfev += 6
            if not (np.all(np.isfinite(y_new)) and np.all(np.isfinite(K))):
                raise Inadmissible("non-finite state")
        except Inadmissible as exc:
            # a trial step of size h leaves the domain: the boundary is near
            # t + h, or the step was simply too bold; halve and retry
            sol.rejected += 1
            near_boundary = near_boundary or str(exc) or "inadmissible"
            if abs(h) <= event_tol * (1 + 1e-9):
                sol.status = "degeneration"
                sol.reason = str(exc) or near_boundary
                sol.bracket = tuple(sorted((t, t + h)))
                return sol
            h = h / 2
            continue
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        enorm = np.sqrt(np.mean((err / scale) ** 2))
        at_floor = near_boundary and abs(h) <= event_tol * (1 + 1e-9)
        if enorm > 1.0 and not at_floor:
            # next to a boundary round-off in the right-hand side can swamp
            # the error estimate; there the step never shrinks below
            # event_tol and only an inadmissible trial stops the run
            sol.rejected += 1
            h = h * max(0.2, 0.9 * enorm ** -0.2)
            if abs(h) < event_tol:
                # a smooth solution never asks for steps this short: treat
                # the collapse as the approach to a singularity
                near_boundary = near_boundary or "step-size collapse"
                h = direction * event_tol
                continue
            if abs(h) < max(h_min, 4 * np.spacing(abs(t))):
                sol.status = "step-failure"
                sol.reason = "minimum step size reached"
                return sol
            continue
        sol.segments.append(Segment(t, h, y.copy(), K))
        t = t + h
        y = y_new
        f = K[6]
        if project is not None:
            try:
                moved = project(t, y)
                if moved is not None:
                    moved = np.asarray(moved, dtype=float)
                    f_moved = np.asarray(fun(t, moved), dtype=float)
                    sol.nfev += 1
                    y, f = moved, f_moved
            except Inadmissible:
                pass
        sol.t.append(t)
        sol.y.append(y.copy())
        sol.f.append(f.copy())
        if monitor is not None:
            why = monitor(t, y)
            if why:
                reason, final = why
                near_boundary = near_boundary or reason
                if final:
                    sol.status = "degeneration"
                    sol.reason = reason
                    sol.bracket = tuple(sorted((sol.t[-2], t)))
                    return sol
        factor = 5.0 if enorm == 0 else min(5.0, max(0.2, 0.9 * enorm ** -0.2))
        h = h * factor
        if near_boundary and abs(h) < event_tol:
            h = direction * event_tol
    else:
        sol.status = "step-failure"
        sol.reason = "maximum number of steps reached"
        return sol
    return sol
