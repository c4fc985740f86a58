"""SU(2)-invariant half-flat structures on sl(2, C) and their Hitchin flow.

In the basis used here ``su(2) = span(e1, e2, e3)`` and ``p = span(e4, e5, e6)``.
Every SU(2)-invariant half-flat structure is

    omega = 2^{-1/3} eps (-lambda)^{1/6} (e14 + e25 + e36)
    rho   = b1 e123 + b2 e456 + b3 (e126 - e135 + e234) - b1 (e156 - e246 + e345)

and the flow reduces to one scalar ODE for ``x = y3``:

    x' = -2^{-1/3} eps f(x)^{1/6},   f(x) = -lambda(b1, 3x + b2 - 3b3, x).
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from . import gstruct, linalg
from .exterior import sqrt_scalar
from .flow import FlowSpec, integrate
from .forms import Form
from .lie import Subalgebra, invariant_forms
from .salamon import parse_salamon

__all__ = [
    "InadmissibleParameters",
    "SL2CParams",
    "sl2c_algebra",
    "su2",
    "lam",
    "f_coefficients",
    "half_flat_family",
    "classify",
    "reduced_rhs",
    "Window",
    "blowup_window",
    "EndReport",
    "ExtensionReport",
    "extension_report",
    "Homothety",
    "homothety_normalize",
    "DerivativeTables",
    "derivative_recursion",
    "evaluate_derivative",
    "ansatz",
    "flow_spec",
]

CUBE_ROOT_2 = 2 ** (1 / 3)
BLOWUP_G11 = 1e3
QUAD_TOL = 1e-9
SPLIT = 1e-3

ALGEBRA_TEXT = """dim 6;
d e1 = e23 - e56;
d e2 = -e13 + e46;
d e3 = e12 - e45;
d e4 = e26 - e35;
d e5 = -e16 + e34;
d e6 = e15 - e24;
"""

OMEGA_SHAPE = "e14 + e25 + e36"
RHO_SHAPES = ("e123", "e456", "e126 - e135 + e234", "e156 - e246 + e345")


class InadmissibleParameters(ValueError):
    pass


def lam(b1, b2, b3):
    """``lambda(b1, b2, b3) = b1^2 (b2+b3)^2 - 4 (b1^2 + b3^2)(b1^2 - b2 b3)``."""
    return b1 * b1 * (b2 + b3) ** 2 - 4 * (b1 * b1 + b3 * b3) * (b1 * b1 - b2 * b3)


def _exact(v):
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    return v


@dataclass(frozen=True)
class SL2CParams:
    eps: int
    b1: object
    b2: object
    b3: object

    def __post_init__(self):
        if self.eps not in (1, -1):
            raise ValueError("eps must be +1 or -1")
        for name in ("b1", "b2", "b3"):
            v = getattr(self, name)
            if isinstance(v, float) and not np.isfinite(v):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, _exact(v))
        value = lam(self.b1, self.b2, self.b3)
        if not value < 0:
            msg = f"inadmissible parameters: lambda(b1, b2, b3) = {_fmt(value)} >= 0"
            if self.b1 == 0 and 3 * self.b3 - self.b2 == 0:
                msg += " (b1 = 0 and 3 b3 - b2 = 0)"
            raise InadmissibleParameters(msg)

    @property
    def lam(self):
        return lam(self.b1, self.b2, self.b3)

    @property
    def exact(self):
        return all(isinstance(v, Fraction) for v in (self.b1, self.b2, self.b3))

    def as_tuple(self):
        return (self.eps, self.b1, self.b2, self.b3)

    def to_dict(self):
        return {"eps": self.eps, "b1": float(self.b1), "b2": float(self.b2), "b3": float(self.b3)}


def _fmt(v):
    return str(v) if isinstance(v, Fraction) else repr(float(v))


@lru_cache(maxsize=None)
def sl2c_algebra():
    return parse_salamon(ALGEBRA_TEXT)


def su2():
    """The subalgebra ``span(e1, e2, e3)``."""
    return Subalgebra.spanned_by(sl2c_algebra(), (0, 1, 2))


# --------------------------------------------------------------------------
# classification


@lru_cache(maxsize=None)
def half_flat_family():
    """Invariant 2-forms and closed invariant 3-forms, computed from scratch.

    Returns ``(inv2, closed3)`` as tuples of exact Forms.  Half-flatness of an
    invariant pair reduces to ``d rho = 0``: ``omega^2`` is invariant of degree
    4 and the invariant 4-forms turn out to be closed (checked in the tests).
    """
    g = sl2c_algebra()
    h = su2()
    inv2 = invariant_forms(g, h, 2)
    inv3 = invariant_forms(g, h, 3)
    from .lie import ce_differential

    images = [ce_differential(g, f).to_vector() for f in inv3]
    # coefficients c with sum c_i d(inv3_i) = 0
    rows = [[images[j][r] for j in range(len(inv3))] for r in range(len(images[0]))]
    kernel = linalg.nullspace(rows, len(inv3))
    closed = []
    for c in kernel:
        form = Form.zero(6, 3)
        for ci, f in zip(c, inv3):
            form = form + f * ci
        closed.append(form)
    return tuple(inv2), tuple(closed)


def _shape(text, deg):
    return Form.parse(text, 6)


def omega_scale(params):
    """``2^{-1/3} eps (-lambda)^{1/6}``; exact when it is rational."""
    q = -params.lam
    if isinstance(q, Fraction):
        c = sqrt_scalar(q / 4, 6)
        if isinstance(c, Fraction):
            return params.eps * c
        return params.eps * float(c)
    return params.eps * (float(q) / 4) ** (1 / 6)


def classify(params):
    """The invariant half-flat pair ``(omega, rho)`` for ``params``.

    The closed forms are the ones generated by :func:`half_flat_family`; the
    explicit coefficients are matched against that span before returning.
    """
    inv2, closed3 = half_flat_family()
    b1, b2, b3 = params.b1, params.b2, params.b3
    shapes = [_shape(s, 3) for s in RHO_SHAPES]
    if not params.exact:
        shapes = [f.to_float() for f in shapes]
        b1, b2, b3 = float(b1), float(b2), float(b3)
    rho = shapes[0] * b1 + shapes[1] * b2 + shapes[2] * b3 - shapes[3] * b1
    base = _shape(OMEGA_SHAPE, 2)
    if len(inv2) != 1 or not linalg.in_span(base.to_vector(), [inv2[0].to_vector()]):
        raise AssertionError("invariant 2-forms do not match e14 + e25 + e36")
    basis = [f.to_vector() for f in closed3]
    if rho.exact and not linalg.in_span(rho.to_vector(), basis):
        raise AssertionError("rho is not in the computed family of closed invariant 3-forms")
    c = omega_scale(params)
    omega = base * c if isinstance(c, Fraction) else base.to_float() * c
    if omega.exact != rho.exact:
        omega, rho = omega.to_float(), rho.to_float()
    return omega, rho


# --------------------------------------------------------------------------
# reduced ODE


def f_coefficients(params):
    """Coefficients ``[a0, .., a4]`` of ``f(x) = -lambda(b1, 3x + b2 - 3b3, x)``."""
    b1 = params.b1
    c0 = params.b2 - 3 * params.b3
    b1s = b1 * b1
    return [4 * b1s * b1s - c0 * c0 * b1s, -12 * c0 * b1s, -24 * b1s, -4 * c0, -12 + 0 * c0]


def _f(coeffs, x):
    return np.polynomial.polynomial.polyval(x, [float(c) for c in coeffs])


def reduced_rhs(params, x):
    """``x' = -2^{-1/3} eps f(x)^{1/6}``."""
    coeffs = f_coefficients(params)
    if all(isinstance(c, Fraction) for c in coeffs) and isinstance(x, (int, Fraction)):
        fx = sum(c * Fraction(x) ** k for k, c in enumerate(coeffs))
        if fx < 0:
            raise ValueError(f"f(x) = {fx} < 0 outside the admissible range")
        return -params.eps * float(fx / 4) ** (1 / 6) if fx else 0.0
    fx = _f(coeffs, float(x))
    if fx < 0:
        raise ValueError(f"f(x) = {fx} < 0 outside the admissible range")
    return -params.eps * (fx / 4) ** (1 / 6)


# --------------------------------------------------------------------------
# maximal interval by quadrature


@dataclass(frozen=True)
class Root:
    x: float
    multiplicity: int


@dataclass(frozen=True)
class Window:
    a: float
    b: float
    lower: Root  # x1 < b3
    upper: Root  # x2 > b3
    x_at_a: float
    x_at_b: float

    def as_tuple(self):
        return (self.a, self.b)

    def to_dict(self):
        return {
            "a": self.a,
            "b": self.b,
            "x1": self.lower.x,
            "x1_multiplicity": self.lower.multiplicity,
            "x2": self.upper.x,
            "x2_multiplicity": self.upper.multiplicity,
            "x_at_a": self.x_at_a,
            "x_at_b": self.x_at_b,
        }


def _exact_eval(coeffs, x):
    return sum(c * x**k for k, c in enumerate(coeffs))


def _refine(coeffs, x, m):
    """Polish a root of multiplicity ``m`` (bisection on the ``m-1``-th derivative)."""
    poly = np.polynomial.Polynomial([float(c) for c in coeffs]).deriv(m - 1)
    width = 1e-6 * (1 + abs(x))
    for _ in range(40):
        lo, hi = x - width, x + width
        if np.sign(poly(lo)) != np.sign(poly(hi)):
            return brentq(poly, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        if poly(x) == 0:
            return x
        width *= 2
    return x


def _roots(params):
    coeffs = f_coefficients(params)
    b3 = float(params.b3)
    raw = np.roots([float(c) for c in reversed(coeffs)])
    real = sorted(r.real for r in raw if abs(r.imag) <= 1e-6 * (1 + abs(r.real)))
    below = [r for r in real if r < b3]
    above = [r for r in real if r > b3]
    assert below and above, "f must vanish on both sides of b3"

    def mult(r):
        return int(sum(abs(z - r) <= 1e-4 * (1 + abs(r)) for z in raw))

    out = []
    for r in (max(below), min(above)):
        m = mult(r)
        x = _refine(coeffs, r, m)
        # snap to an exact rational root when there is one nearby
        if params.exact:
            for cand in (Fraction(x).limit_denominator(1000), Fraction(round(x * 3), 3)):
                if all(_exact_eval(_deriv(coeffs, k), cand) == 0 for k in range(m)):
                    x = float(cand)
                    break
        out.append(Root(float(x), m))
    # exact sign check: f(b3) > 0 (it equals -lambda(b1, b2, b3))
    fb3 = _exact_eval(coeffs, params.b3)
    assert fb3 > 0, "f(b3) must be positive"
    return coeffs, out[0], out[1]


def _deriv(coeffs, k):
    c = list(coeffs)
    for _ in range(k):
        c = [i * c[i] for i in range(1, len(c))]
    return c


def _taylor(coeffs, root, m):
    from math import factorial

    c = [float(v) for v in coeffs]
    shifted = [np.polynomial.polynomial.polyval(root, _deriv(c, k)) / factorial(k) for k in range(len(c))]
    return np.array([0.0] * m + shifted[m:])


def _side_integral(coeffs, root, end):
    """``int f^{-1/6}`` between a root of ``f`` and ``end`` (improper at the root)."""
    q = _taylor(coeffs, root.x, root.multiplicity)[root.multiplicity:]  # f = s^m q(s)
    m = root.multiplicity
    sgn = 1.0 if end > root.x else -1.0
    length = abs(end - root.x)
    split = min(SPLIT, length)
    p = 6.0 / (6.0 - m)

    def near(u):
        s = sgn * u**p
        # p u^{p-1} |s|^{-m/6} = p since p - 1 = p m / 6
        qs = np.polynomial.polynomial.polyval(s, q)
        sign_m = sgn**m
        return p * (sign_m * qs) ** (-1 / 6)

    val, _ = quad(near, 0.0, split ** (1 / p), epsabs=QUAD_TOL * 1e-3, epsrel=QUAD_TOL * 1e-3, limit=200)
    if length > split:

        def far(y):
            return _f(coeffs, y) ** (-1 / 6)

        lo, hi = sorted((root.x + sgn * split, end))
        v2, _ = quad(far, lo, hi, epsabs=QUAD_TOL * 1e-3, epsrel=QUAD_TOL * 1e-3, limit=200)
        val += v2
    return val


def blowup_window(params):
    """Maximal existence interval ``(a, b)`` of the reduced flow by quadrature.

    ``|t| = 2^{1/3} |int_{b3}^{x(t)} f^{-1/6}|``; the zeros ``x1 < b3 < x2`` of
    ``f`` bound ``x``.  For ``eps = 1`` the solution decreases, so ``b`` is
    reached at ``x1``; ``eps = -1`` reverses time.
    """
    coeffs, r1, r2 = _roots(params)
    b3 = float(params.b3)
    down = CUBE_ROOT_2 * _side_integral(coeffs, r1, b3)
    up = CUBE_ROOT_2 * _side_integral(coeffs, r2, b3)
    if params.eps == 1:
        return Window(-up, down, r1, r2, x_at_a=r2.x, x_at_b=r1.x)
    return Window(-down, up, r1, r2, x_at_a=r1.x, x_at_b=r2.x)


# --------------------------------------------------------------------------
# full flow on the invariant ansatz


def ansatz():
    return {2: (_shape(OMEGA_SHAPE, 2),), 3: tuple(_shape(s, 3) for s in RHO_SHAPES)}


def flow_spec(params, window=None, **tol):
    omega, rho = classify(params)
    if window is None:
        w = blowup_window(params)
        pad = 0.1 * (w.b - w.a) + 0.1
        window = (w.a - pad, w.b + pad)
    return FlowSpec("hitchin6", sl2c_algebra(), {"omega": omega, "rho": rho}, ansatz=ansatz(), window=window, **tol)


def trajectory_x(traj):
    """``x(t)`` (the e126 coefficient of rho) along an integrated trajectory."""
    return traj.coordinate("rho")[:, 2]


def g11(params, x):
    """``g_t(e1, e1) = 2^{2/3} (b1^2 + x^2) / f(x)^{1/3}``."""
    fx = _f(f_coefficients(params), x)
    return 2 ** (2 / 3) * (float(params.b1) ** 2 + x * x) / np.cbrt(fx)


# --------------------------------------------------------------------------
# homothety for b1 = 0


@dataclass(frozen=True)
class Homothety:
    scale: object  # s = 4 / (3 b3 - b2)
    ratio: float  # h_{b2,b3} = ratio * h_{-1,1} after x -> s x
    deviation: float  # max relative spread of the sampled ratios
    target: SL2CParams

    def to_dict(self):
        return {"scale": float(self.scale), "ratio": self.ratio, "deviation": self.deviation, "target": self.target.to_dict()}


def _h_coeffs(c, x):
    """Diagonal coefficients of ``h_{b2,b3}`` (``c = 3b3 - b2``) at ``x``."""
    w = np.cbrt(c - 3 * x)
    return np.array([x / w, w * w, 1.0 / (x * w)])


def homothety_normalize(params, samples=25):
    """Scale ``x -> 4x / (3b3 - b2)`` taking ``h_{b2,b3}`` to a multiple of ``h_{-1,1}``.

    ``params`` may be an :class:`SL2CParams` or a raw ``(eps, b1, b2, b3)``
    tuple: the metric ``h_{b2,b3}`` on ``J_{b2,b3}`` only needs ``3b3 != b2``.
    """
    eps, b1, b2, b3 = params.as_tuple() if isinstance(params, SL2CParams) else tuple(_exact(v) for v in params)
    if b1 != 0:
        raise ValueError("the homothety needs b1 = 0")
    c = 3 * b3 - b2
    if c == 0:
        raise InadmissibleParameters("inadmissible parameters: 3 b3 - b2 = 0 forces lambda >= 0")
    s = Fraction(4) / c if isinstance(c, Fraction) else 4.0 / c
    cf = float(c)
    ratios = []
    for theta in np.linspace(0.02, 0.98, samples):
        x = theta * cf / 3  # interior of J_{b2,b3}
        y = float(s) * x
        hx = _h_coeffs(cf, x)
        hx[2] *= (1.0 / float(s)) ** 2  # dx = dy / s
        hy = _h_coeffs(4.0, y)
        ratios.extend(hx / hy)
    ratios = np.array(ratios)
    ratio = float(np.mean(ratios))
    dev = float(np.max(np.abs(ratios / ratio - 1)))
    return Homothety(s, ratio, dev, SL2CParams(eps, 0, -1, 1))


# --------------------------------------------------------------------------
# derivatives of x along x' = -sqrt(x) (4 - 3x)^{1/6}


@dataclass(frozen=True)
class DerivativeTables:
    """Exact coefficients of the derivatives of ``x``.

    ``odd[k]`` lists ``(i, c_ki, alpha_ki)`` with
    ``x^{(2k+1)} = sum c x^{(2i+1)/2} (4-3x)^alpha``; ``even[k]`` lists
    ``(i, d_ki, beta_ki)`` with ``x^{(2k)} = sum d x^i (4-3x)^beta`` (k >= 1).
    """

    order: int
    odd: dict = field(default_factory=dict)
    even: dict = field(default_factory=dict)

    def terms(self, n):
        """Terms of the ``n``-th derivative as ``(power of x, coeff, exponent)``."""
        if n % 2:
            return [(Fraction(2 * i + 1, 2), c, a) for i, c, a in self.odd[(n - 1) // 2]]
        return [(Fraction(i), d, b) for i, d, b in self.even[n // 2]]

    def to_dict(self):
        def rows(tab):
            return {str(k): [[i, str(c), str(e)] for i, c, e in v] for k, v in tab.items()}

        return {"order": self.order, "odd": rows(self.odd), "even": rows(self.even)}


_SIXTH = Fraction(1, 6)


def _collect(acc, i, coeff, expo):
    if coeff:
        key = (i, expo)
        acc[key] = acc.get(key, Fraction(0)) + coeff


def _table(acc):
    return sorted(((i, c, e) for (i, e), c in acc.items() if c != 0), key=lambda r: (r[0], r[2]))


def derivative_recursion(K):
    """Coefficient tables for ``x^{(n)}``, ``n <= 2K + 1``.

    Uses ``x' = -x^{1/2} (4-3x)^{1/6}`` and the chain rule:

    * ``d/dt x^{(2i+1)/2} (4-3x)^a = -(2i+1)/2 x^i (4-3x)^{a+1/6} + 3a x^{i+1} (4-3x)^{a-5/6}``
    * ``d/dt x^i (4-3x)^b = -i x^{i-1/2} (4-3x)^{b+1/6} + 3b x^{i+1/2} (4-3x)^{b-5/6}``
    """
    if not 0 <= K <= 12:
        raise ValueError("order must be between 0 and 12")
    tabs = DerivativeTables(K)
    odd = [(0, Fraction(-1), _SIXTH)]
    tabs.odd[0] = odd
    for k in range(1, K + 1):
        acc = {}
        for i, c, a in odd:
            _collect(acc, i, -c * Fraction(2 * i + 1, 2), a + _SIXTH)
            _collect(acc, i + 1, 3 * a * c, a - 5 * _SIXTH)
        even = _table(acc)
        tabs.even[k] = even
        acc = {}
        for i, d, b in even:
            if i:
                _collect(acc, i - 1, -i * d, b + _SIXTH)
            _collect(acc, i, 3 * b * d, b - 5 * _SIXTH)
        odd = _table(acc)
        tabs.odd[k] = odd
    return tabs


def evaluate_derivative(tables, n, x):
    """Value of ``x^{(n)}`` at a point where the solution equals ``x`` (``0 <= x < 4/3``)."""
    if n == 0:
        return float(x)
    return float(sum(float(c) * x ** float(p) * (4 - 3 * x) ** float(e) for p, c, e in tables.terms(n)))


# --------------------------------------------------------------------------
# extension report


@dataclass(frozen=True)
class EndReport:
    time: float
    x_limit: float
    multiplicity: int
    behavior: str  # "metric-blowup" or "fiber-collapse"
    extension_possible: bool
    g11_last: float
    event_time: float = None

    def to_dict(self):
        return {
            "time": self.time,
            "event_time": self.event_time,
            "x_limit": self.x_limit,
            "root_multiplicity": self.multiplicity,
            "behavior": self.behavior,
            "extension_possible": self.extension_possible,
            "g11_last": self.g11_last,
        }


@dataclass
class ExtensionReport:
    params: SL2CParams
    window: tuple
    ends: dict  # "a" / "b" -> EndReport
    v_limit: float = None
    v_samples: list = None
    homothety: Homothety = None
    odd_derivatives: dict = None
    integration: dict = None
    trajectory: object = field(default=None, repr=False)

    @property
    def extension_possible(self):
        return {k: e.extension_possible for k, e in self.ends.items()}

    def to_dict(self):
        return {
            "params": self.params.to_dict(),
            "window": list(self.window),
            "ends": {k: e.to_dict() for k, e in self.ends.items()},
            "extension_possible": self.extension_possible,
            "v_limit": self.v_limit,
            "v_samples": self.v_samples,
            "homothety": None if self.homothety is None else self.homothety.to_dict(),
            "odd_derivatives": self.odd_derivatives,
            "integration": self.integration,
        }


def _richardson(ts, vals):
    """Value at 0 of ``v(t) = v0 + c1 t^2 + c2 t^4`` through three samples."""
    A = np.array([[1.0, t**2, t**4] for t in ts])
    return float(np.linalg.solve(A, np.array(vals))[0])


def _event_times(traj):
    out = {}
    for side, key in (("backward", "a"), ("forward", "b")):
        term = traj.termination[side]
        out[key] = float(np.mean(term.bracket)) if term.bracket else None
    return out


def _v_limit(eps, traj=None):
    """``lim 4 x(b - t) / (t^2 (4 - 3x)^{1/3})`` on the normalized trajectory."""
    norm = SL2CParams(eps, 0, -1, 1)
    w = blowup_window(norm)
    end = w.b if eps == 1 else w.a
    if traj is None:
        traj = integrate(flow_spec(norm), check=False)
    ts = [1e-2, 10**-2.5, 1e-3]
    vals = []
    for tp in ts:
        t = end - eps * tp
        x = float(traj.state(t)[traj.system.slices["rho"]][2])
        vals.append(4 * x / (tp * tp * np.cbrt(4 - 3 * x)))
    return _richardson(ts, vals), list(zip(ts, vals)), traj, end


def _odd_check(traj, end, eps, K=4, x_probe=1e-3, h=1e-2):
    """Odd derivatives at x -> 0 and a finite-difference cross-check near the end.

    The tables are evaluated at the time where the integrated ``x`` equals
    ``x_probe`` and compared with central differences of the interpolant.
    """
    tabs = derivative_recursion(K)
    at_zero = {str(2 * k + 1): evaluate_derivative(tabs, 2 * k + 1, 0.0) for k in range(K + 1)}
    col = traj.system.slices["rho"].start + 2

    def xs(t):
        return float(traj.state(t)[col])

    lo, hi = sorted((end - eps * 0.5, end - eps * 1e-4))
    t_probe = brentq(lambda t: xs(t) - x_probe, lo, hi, xtol=1e-14)
    st = [xs(t_probe + j * h) for j in range(-3, 4)]
    fd = {
        1: (st[1] - 8 * st[2] + 8 * st[4] - st[5]) / (12 * h),
        2: (-st[1] + 16 * st[2] - 30 * st[3] + 16 * st[4] - st[5]) / (12 * h * h),
        3: (st[0] - 8 * st[1] + 13 * st[2] - 13 * st[4] + 8 * st[5] - st[6]) / (8 * h**3),
    }
    rel = {}
    x0 = xs(t_probe)
    for n, v in fd.items():
        # the tables describe x' = -sqrt(x)(4-3x)^{1/6}; eps = -1 flips odd orders
        model = evaluate_derivative(tabs, n, x0) * (eps if n % 2 else 1)
        rel[str(n)] = abs(v / model - 1)
    return {
        "orders": 2 * K + 1,
        "odd_at_zero": at_zero,
        "odd_vanish_at_zero": all(v == 0 for v in at_zero.values()),
        "probe_x": x_probe,
        "probe_t": t_probe,
        "fd_step": h,
        "fd_rel_error": rel,
        "fd_agree": max(rel.values()) <= 1e-4,
    }


def extension_report(params, traj=None, checks=True):
    """Behaviour of the metric at both ends of the maximal interval.

    With ``checks`` and ``b1 = 0`` the report also carries the homothety to
    the normalized parameters, the V-part limit and the derivative checks.
    """
    w = blowup_window(params)
    if traj is None:
        traj = integrate(flow_spec(params), check=False)
    events = _event_times(traj)
    x = trajectory_x(traj)
    g11s = g11(params, x)
    ends = {}
    for key, t_end, x_lim, root, idx in (
        ("a", w.a, w.x_at_a, w.upper if w.x_at_a == w.upper.x else w.lower, 0),
        ("b", w.b, w.x_at_b, w.upper if w.x_at_b == w.upper.x else w.lower, -1),
    ):
        last = float(g11s[idx])
        if params.b1 == 0 and abs(x_lim) <= 1e-12:
            behavior, ok = "fiber-collapse", True
            if last > 1e-2:
                behavior = "fiber-collapse (unconfirmed: g11 not small at the last sample)"
        else:
            behavior, ok = "metric-blowup", False
            if last <= BLOWUP_G11:
                behavior = "metric-blowup (unconfirmed: g11 below threshold at the last sample)"
        ends[key] = EndReport(float(t_end), float(x_lim), root.multiplicity, behavior, ok, last, events[key])
    report = ExtensionReport(params, (w.a, w.b), ends, trajectory=traj)
    report.integration = {
        "samples": int(len(traj.t)),
        "max_flow_residual": traj.max_residual("flow_residual"),
        "max_closure_residual": traj.max_residual("closure_residual"),
        "event_times": events,
        "window_mismatch": max(abs(events[k] - getattr(w, k)) for k in "ab" if events[k] is not None) if any(events.values()) else None,
    }
    if params.b1 == 0 and checks:
        report.homothety = homothety_normalize(params)
        same = params.as_tuple() == (params.eps, 0, -1, 1)
        report.v_limit, samples, ntraj, nend = _v_limit(params.eps, traj if same else None)
        report.v_samples = [[t, v] for t, v in samples]
        report.odd_derivatives = _odd_check(ntraj, nend, params.eps)
    return report
