"""Invariant hypo and Hitchin flows as ODEs on spaces of left-invariant forms.

A :class:`FlowSpec` names the flow, the Lie algebra, the initial structure
and an optional ansatz (a basis of the subspace each defining form is
constrained to).  :func:`integrate` runs the flow both ways from ``t0``
until the requested window is exhausted or the structure degenerates.

State vectors are the ansatz coordinates of the defining forms.  The
evolved quantities (``omega^2/2``, ``*phi``, ``omega_i ∧ alpha``) are
nonlinear in them, so each right-hand side solves a small linear system
for the derivative of the coordinates.
"""

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import gstruct, linalg, numeric
from .forms import Form
from .lie import LieAlgebra, Subalgebra, ce_differential, invariant_forms
from .ode import Inadmissible, dopri5

__all__ = [
    "KINDS",
    "SLOTS",
    "FlowError",
    "AnsatzError",
    "InitialDataError",
    "FlowSpec",
    "Termination",
    "DegenerationEvent",
    "Trajectory",
    "flow_rhs",
    "integrate",
    "assemble_product",
    "torsion_residual",
]

KINDS = ("hypo5", "hitchin6", "hitchin7")
DIMS = {"hypo5": 5, "hitchin6": 6, "hitchin7": 7}
SLOTS = {
    "hypo5": (("alpha", 1), ("omega1", 2), ("omega2", 2), ("omega3", 2)),
    "hitchin6": (("omega", 2), ("rho", 3)),
    "hitchin7": (("phi", 3),),
}

SOLVE_TOL = 1e-10
NEAR = 1e-6  # endgame starts once lambda or det g has shrunk by this factor
BLOWUP = 1e12


class FlowError(ValueError):
    pass


class AnsatzError(FlowError):
    """The flow leaves the ansatz subspace (a wrong ansatz, not a numerical blip)."""


class InitialDataError(FlowError):
    """Initial structure is invalid or violates the closure condition."""


# --------------------------------------------------------------------------
# specification


@dataclass(frozen=True)
class FlowSpec:
    kind: str
    algebra: LieAlgebra
    initial: dict
    ansatz: dict = None  # degree -> sequence of basis Forms
    symmetry: Subalgebra = None
    t0: float = 0.0
    window: tuple = None
    rtol: float = 1e-10
    atol: float = 1e-12
    event_tol: float = 1e-9

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown flow kind {self.kind!r}")
        n = DIMS[self.kind]
        if self.algebra.dim != n:
            raise ValueError(f"{self.kind} needs a {n}-dimensional algebra, got {self.algebra.dim}")
        missing = [name for name, _ in SLOTS[self.kind] if name not in self.initial]
        if missing:
            raise ValueError(f"initial structure lacks {', '.join(missing)}")
        for name, deg in SLOTS[self.kind]:
            f = self.initial[name]
            if f.dim != n or f.degree != deg:
                raise ValueError(f"{name} must be a {deg}-form on R^{n}")
        if self.window is None:
            object.__setattr__(self, "window", (self.t0 - 10.0, self.t0 + 10.0))
        lo, hi = self.window
        if not lo <= self.t0 <= hi:
            raise ValueError("t0 must lie inside the window")
        if min(self.rtol, self.atol, self.event_tol) <= 0:
            raise ValueError("tolerances must be positive")
        ansatz = dict(self.ansatz or {})
        if self.symmetry is not None:
            for _, deg in SLOTS[self.kind]:
                if deg not in ansatz:
                    ansatz[deg] = tuple(invariant_forms(self.algebra, self.symmetry, deg))
        object.__setattr__(self, "ansatz", {k: tuple(v) for k, v in ansatz.items()})

    def check_initial(self):
        """Raise InitialDataError unless the initial data is valid and closed."""
        g = self.algebra
        f = self.initial
        if self.kind == "hitchin6":
            report = gstruct.su3_validate(f["omega"], f["rho"])
            if not report.ok:
                raise InitialDataError("not an SU(3)-structure: " + "; ".join(report.failures()))
            if not gstruct.is_half_flat(g, f["omega"], f["rho"]):
                bad = []
                if not gstruct._closed(g, f["rho"]):
                    bad.append("d rho != 0")
                if not gstruct._closed(g, f["omega"] ^ f["omega"]):
                    bad.append("d(omega^2) != 0")
                raise InitialDataError("initial structure is not half-flat: " + ", ".join(bad))
        elif self.kind == "hitchin7":
            try:
                s = gstruct.G2Structure(f["phi"])
            except ValueError as exc:
                raise InitialDataError(f"not a G2-structure: {exc}") from exc
            if not gstruct._closed(g, s.star):
                raise InitialDataError("initial structure is not cocalibrated: d(*phi) != 0")
        else:
            s = gstruct.SU2Structure(f["alpha"], f["omega1"], f["omega2"], f["omega3"])
            report = gstruct.su2_validate(s)
            if not report.ok:
                raise InitialDataError("not an SU(2)-structure: " + "; ".join(report.reasons))
            if not gstruct.is_hypo(g, s):
                raise InitialDataError("initial structure is not hypo: d omega1, d(alpha∧omega2), d(alpha∧omega3) must vanish")

    def to_dict(self):
        from .salamon import format_form, print_salamon

        return {
            "kind": self.kind,
            "algebra": print_salamon(self.algebra),
            "initial": {k: format_form(v) for k, v in self.initial.items()},
            "ansatz": {str(k): [format_form(f) for f in v] for k, v in self.ansatz.items()},
            "t0": self.t0,
            "window": list(self.window),
            "rtol": self.rtol,
            "atol": self.atol,
            "event_tol": self.event_tol,
        }


# --------------------------------------------------------------------------
# compiled system


def _coords(form, basis):
    """Exact ansatz coordinates of ``form`` (None if not in the span)."""
    if form.is_zero():
        return [Fraction(0)] * len(basis)
    vec = form.to_exact().to_vector()
    cols = linalg.transpose([b.to_exact().to_vector() for b in basis])
    return linalg.solve(cols, vec)


class _System:
    def __init__(self, spec):
        self.spec = spec
        self.kind = spec.kind
        n = self.n = DIMS[spec.kind]
        self.ext = numeric.exterior(n)
        g = spec.algebra
        self.slices = {}
        self.bases = {}
        self.B = {}
        self.P = {}
        y0 = []
        start = 0
        for name, deg in SLOTS[spec.kind]:
            basis = spec.ansatz.get(deg)
            if basis is None:
                basis = tuple(Form.basis(n, I) for I in self.ext.idx[deg])
            if not basis:
                raise AnsatzError(f"empty ansatz for degree {deg}")
            c = _coords(spec.initial[name], basis)
            if c is None:
                raise AnsatzError(f"initial {name} is not in the ansatz subspace")
            self.bases[name] = basis
            if deg not in self.B:
                Bm = np.array([b.to_float().to_vector() for b in basis], dtype=float).T
                self.B[deg] = Bm
                self.P[deg] = np.linalg.pinv(Bm)
            y0.extend(float(x) for x in c)
            self.slices[name] = slice(start, start + len(basis))
            start += len(basis)
        self.y0 = np.array(y0)
        self.D = {k: numeric.d_matrix(g, k) for k in range(0, n)}
        self._precheck(g)
        self._init_reference()

    def _precheck(self, g):
        """Linear parts of the flow must map the ansatz into itself (exact check)."""
        if self.kind == "hitchin6":
            rho_basis = [b.to_exact().to_vector() for b in self.bases["rho"]]
            for b in self.bases["omega"]:
                if not linalg.in_span(ce_differential(g, b.to_exact()).to_vector(), rho_basis):
                    raise AnsatzError("flow leaves the ansatz subspace: d(omega) is not in the rho ansatz")

    def split(self, y):
        return {name: y[s] for name, s in self.slices.items()}

    def full(self, y):
        """Full coefficient vectors of the defining forms."""
        out = {}
        for name, deg in SLOTS[self.kind]:
            out[name] = self.B[deg] @ y[self.slices[name]]
        return out

    def forms(self, y):
        return {name: self.ext.to_form(v, deg) for (name, deg), v in zip(SLOTS[self.kind], self.full(y).values())}

    def to_coords(self, deg, vec, what):
        c = self.P[deg] @ vec
        back = self.B[deg] @ c
        if np.linalg.norm(back - vec) > SOLVE_TOL * max(1.0, np.linalg.norm(vec)):
            raise AnsatzError(f"flow leaves the ansatz subspace ({what})")
        return c

    # geometric data of a state ------------------------------------------

    def geometry(self, y):
        """``(lam, det_g, extra)`` or raise Inadmissible."""
        f = self.full(y)
        if self.kind == "hitchin6":
            w, r = f["omega"], f["rho"]
            o = np.sign(numeric.omega_cubed(w))
            if o == 0 or (hasattr(self, "o0") and o != self.o0):
                raise Inadmissible("metric_degenerate")
            try:
                K, lam, J, rhat = numeric.su3_data(r, w)
            except ValueError:
                raise Inadmissible("lambda_to_zero") from None
            G = numeric.su3_metric(w, J)
            ev = np.linalg.eigvalsh(G)
            if ev.min() <= 0:
                raise Inadmissible("metric_degenerate")
            # rho_hat loses digits like |K|^2 / |lambda| as lambda -> 0
            cond = max(1.0, float(np.sum(K * K)) / (6 * abs(lam)))
            return lam, float(np.prod(ev)), {"J": J, "rhohat": rhat, "metric": G, "cond": cond}
        if self.kind == "hitchin7":
            try:
                G, sign, star = numeric.g2_data(f["phi"])
            except ValueError:
                raise Inadmissible("metric_degenerate") from None
            if hasattr(self, "o0") and sign != self.o0:
                raise Inadmissible("metric_degenerate")
            ev = np.linalg.eigvalsh(G)
            if ev.min() <= 0:
                raise Inadmissible("metric_degenerate")
            return float("nan"), float(np.prod(ev)), {"star": star, "metric": G, "sign": sign}
        # hypo5: through the SU(3)-structure on the product with a line
        w6, r6 = self._product_su3(f)
        o = np.sign(numeric.omega_cubed(w6))
        if o == 0 or (hasattr(self, "o0") and o != self.o0):
            raise Inadmissible("metric_degenerate")
        try:
            K, lam, J, rhat = numeric.su3_data(r6, w6)
        except ValueError:
            raise Inadmissible("lambda_to_zero") from None
        G = numeric.su3_metric(w6, J)[:5, :5]
        ev = np.linalg.eigvalsh(G)
        if ev.min() <= 0:
            raise Inadmissible("metric_degenerate")
        return lam, float(np.prod(ev)), {"metric": G}

    def _product_su3(self, f):
        """``omega = omega1 + alpha ∧ dt``, ``rho = omega2 ∧ alpha - omega3 ∧ dt`` on R^6."""
        e6 = numeric.exterior(6)
        lift = lambda v, k: _embed_vec(v, k, 5, 6)
        dt = np.zeros(6)
        dt[5] = 1.0
        a = lift(f["alpha"], 1)
        w = lift(f["omega1"], 2) + e6.wedge(a, 1, dt, 1)
        r = lift(self.ext.wedge(f["omega2"], 2, f["alpha"], 1), 3) - e6.wedge(lift(f["omega3"], 2), 2, dt, 1)
        return w, r

    def _init_reference(self):
        y = self.y0
        f = self.full(y)
        if self.kind in ("hitchin6", "hypo5"):
            w = f["omega"] if self.kind == "hitchin6" else self._product_su3(f)[0]
            self.o0 = np.sign(numeric.omega_cubed(w))
        try:
            lam, det, extra = self.geometry(y)
        except Inadmissible as exc:
            raise InitialDataError(f"initial structure is degenerate ({exc})") from None
        if self.kind == "hitchin7":
            self.o0 = extra["sign"]
        self.lam0 = lam
        self.det0 = det

    # right-hand sides -----------------------------------------------------

    def rhs(self, t, y):
        return getattr(self, "_rhs_" + self.kind)(y)

    def _rhs_hitchin6(self, y):
        f = self.full(y)
        w = f["omega"]
        _, _, extra = self.geometry(y)
        rdot = self.to_coords(3, self.D[2] @ w, "rho' = d omega")
        target = self.D[3] @ extra["rhohat"]
        L = self.ext.wedge_left(w, 2, 2) @ self.B[2]
        wdot = _solve(L, target, "omega ∧ omega' = d rho_hat", noise=extra["cond"])
        out = np.empty_like(y)
        out[self.slices["omega"]] = wdot
        out[self.slices["rho"]] = rdot
        return out

    def star_phi(self, y):
        phi = self.B[3] @ y
        try:
            return numeric.g2_data(phi)[2]
        except ValueError:
            raise Inadmissible("metric_degenerate") from None

    def star_jacobian(self, y):
        """Linearization of ``phi ↦ *phi`` on the ansatz coordinates."""
        try:
            D = numeric.g2_star_derivative(self.B[3] @ y)
        except (ValueError, np.linalg.LinAlgError):
            raise Inadmissible("metric_degenerate") from None
        return D @ self.B[3]

    def star_jacobian_fd(self, y, rel_step=1e-7):
        """Central finite-difference version of :meth:`star_jacobian`."""
        h = rel_step * max(1.0, np.abs(y).max())
        cols = []
        for k in range(y.size):
            e = np.zeros_like(y)
            e[k] = h
            cols.append((self.star_phi(y + e) - self.star_phi(y - e)) / (2 * h))
        return np.array(cols).T

    def _rhs_hitchin7(self, y):
        phi = self.B[3] @ y
        try:
            G, sign, _, D = numeric.g2_data(phi, derivative=True)
        except (ValueError, np.linalg.LinAlgError):
            raise Inadmissible("metric_degenerate") from None
        if sign != self.o0 or np.linalg.eigvalsh(G).min() <= 0:
            raise Inadmissible("metric_degenerate")
        target = self.D[3] @ phi
        if not np.any(target):
            return np.zeros_like(y)
        return _solve(D @ self.B[3], target, "(*phi)' = d phi")

    def _gl_action(self, k):
        cache = self.__dict__.setdefault("_act", {})
        if k not in cache:
            cache[k] = _gl_matrices(self.n, k)
        return cache[k]

    def _rhs_hypo5(self, y):
        self.geometry(y)
        f = self.full(y)
        a, w1, w2, w3 = f["alpha"], f["omega1"], f["omega2"], f["omega3"]
        ext = self.ext
        T2 = ext.wedge(w2, 2, a, 1)
        T3 = ext.wedge(w3, 2, a, 1)
        A1, A2, A3 = self._gl_action(1), self._gl_action(2), self._gl_action(3)
        M = np.concatenate([np.einsum("pij,j->ip", A2, w1), np.einsum("pij,j->ip", A3, T2), np.einsum("pij,j->ip", A3, T3)])
        target = np.concatenate([-self.D[1] @ a, -self.D[2] @ w3, self.D[2] @ w2])
        if not np.any(target):
            return np.zeros_like(y)
        X = _solve(M, target, "hypo flow equations", square=False)
        out = np.empty_like(y)
        out[self.slices["alpha"]] = self.to_coords(1, np.einsum("pij,j,p->i", A1, a, X), "alpha'")
        for name, w in (("omega1", w1), ("omega2", w2), ("omega3", w3)):
            out[self.slices[name]] = self.to_coords(2, np.einsum("pij,j,p->i", A2, w, X), name + "'")
        return out

    def project(self, t, y):
        """Rescale omega onto the normalization ``(omega^3 / 3)^2 = -lambda``.

        The flow preserves it exactly, but the transverse direction is
        unstable near a collapse (x -> 0 on the sl(2,C) family), where
        unprojected round-off grows like a negative power of x.
        """
        if self.kind != "hitchin6":
            return None
        f = self.full(y)
        top = abs(numeric.omega_cubed(f["omega"]))
        try:
            lam = numeric.su3_data(f["rho"])[1]
        except ValueError:
            return None
        if top == 0:
            return None
        s = (3 * np.sqrt(-lam) / top) ** (1 / 3)
        if abs(s - 1) < 1e-15:
            return None
        out = y.copy()
        out[self.slices["omega"]] *= s
        return out

    # monitoring -----------------------------------------------------------

    def monitor(self, t, y):
        if np.abs(y).max() >= BLOWUP:
            return ("coefficient_blowup", True)
        try:
            lam, det, _ = self.geometry(y)
        except Inadmissible as exc:
            return (str(exc), False)
        if self.kind != "hitchin7" and lam / self.lam0 <= NEAR:
            return ("lambda_to_zero", False)
        if det / self.det0 <= NEAR:
            return ("metric_degenerate", False)
        return None


def _solve(L, target, what, square=True, noise=1.0):
    """Least-squares solve with a consistency check on the backward error.

    For the square systems of the Hitchin flows a numerically singular
    matrix means the structure is degenerating (inadmissible), not that
    the ansatz is wrong.  ``noise`` widens the threshold when the target
    itself is known to carry amplified round-off.
    """
    x, _, _, sv = np.linalg.lstsq(L, target, rcond=None)
    if square and sv.size and sv[-1] <= 1e-12 * sv[0]:
        raise Inadmissible("metric_degenerate")
    r = np.linalg.norm(L @ x - target)
    scale = sv[0] * np.linalg.norm(x) + np.linalg.norm(target) if sv.size else 0.0
    if r > SOLVE_TOL * noise * max(scale, np.finfo(float).tiny):
        raise AnsatzError(f"flow leaves the ansatz subspace ({what})")
    return x


def _embed_vec(v, k, n, m):
    src = numeric.exterior(n)
    dst = numeric.exterior(m)
    out = np.zeros(dst.size(k))
    for r, I in enumerate(src.idx[k]):
        out[dst.pos[k][I]] = v[r]
    return out


def _gl_matrices(n, k):
    """``A[p*n+q]``: derivative of the pullback by ``1 + s E_pq`` on ``Lambda^k``.

    ``E_pq`` maps ``e_q`` to ``e_p``, so ``e^m`` goes to ``delta_mp e^q``.
    """
    from .forms import sort_sign

    ext = numeric.exterior(n)
    N = ext.size(k)
    A = np.zeros((n * n, N, N))
    for col, I in enumerate(ext.idx[k]):
        for slot, m in enumerate(I):
            for q in range(n):
                J, s = sort_sign(I[:slot] + (q,) + I[slot + 1:])
                if s:
                    A[m * n + q, ext.pos[k][J], col] += s
    return A


# --------------------------------------------------------------------------
# trajectories


@dataclass(frozen=True)
class Termination:
    status: str  # window-exhausted | degeneration | step-failure
    t_end: float
    reason: str = None
    bracket: tuple = None

    def to_dict(self):
        return {
            "status": self.status,
            "t_end": self.t_end,
            "reason": self.reason,
            "bracket": list(self.bracket) if self.bracket else None,
        }


@dataclass(frozen=True)
class DegenerationEvent:
    t_star: tuple  # bracketing interval
    reason: str  # lambda_to_zero | metric_degenerate | coefficient_blowup
    last_good: tuple  # (t, coordinates)

    @property
    def time(self):
        return 0.5 * (self.t_star[0] + self.t_star[1])

    def to_dict(self):
        return {
            "t_star": list(self.t_star),
            "reason": self.reason,
            "last_good_t": self.last_good[0],
        }


@dataclass
class Trajectory:
    spec: FlowSpec
    t: np.ndarray
    y: np.ndarray
    ydot: np.ndarray
    diagnostics: dict
    termination: dict
    events: list
    system: object = field(repr=False, default=None)
    segments: list = field(repr=False, default_factory=list)

    @property
    def window(self):
        return float(self.t[0]), float(self.t[-1])

    @property
    def coordinate_names(self):
        names = []
        for name, _ in SLOTS[self.spec.kind]:
            s = self.system.slices[name]
            names.extend(f"{name}_{i + 1}" for i in range(s.stop - s.start))
        return names

    def _segment(self, t):
        lo, hi = self.window
        if not lo - 1e-12 <= t <= hi + 1e-12:
            raise ValueError(f"t = {t} outside the trajectory window [{lo}, {hi}]")
        for seg in self.segments:
            a, b = sorted((seg.t0, seg.t1))
            if a <= t <= b:
                return seg
        raise ValueError(f"t = {t} outside the trajectory window")

    def _node(self, t):
        k = int(np.searchsorted(self.t, t))
        if k < len(self.t) and self.t[k] == t:
            return k
        return None

    def state(self, t):
        """Coefficients at ``t``: the stored sample at a node, else the interpolant."""
        k = self._node(t)
        if k is not None:
            return self.y[k].copy()
        return self._segment(t)(t)

    def derivative(self, t):
        k = self._node(t)
        if k is not None:
            return self.ydot[k].copy()
        return self._segment(t).derivative(t)

    def forms(self, t):
        return self.system.forms(self.state(t))

    def coordinate(self, name, t=None):
        s = self.system.slices[name]
        if t is None:
            return self.y[:, s]
        return self.state(t)[s]

    def max_residual(self, key):
        return float(np.nanmax(self.diagnostics[key])) if len(self.t) else 0.0

    def header(self):
        return {
            "spec": self.spec.to_dict(),
            "columns": ["t"] + self.coordinate_names + list(self.diagnostics),
            "samples": int(len(self.t)),
            "window": list(self.window),
            "termination": {k: v.to_dict() for k, v in self.termination.items()},
            "events": [e.to_dict() for e in self.events],
        }

    def write_csv(self, path_or_file):
        import csv

        close = False
        if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__"):
            fh = open(path_or_file, "w", newline="", encoding="utf-8")
            close = True
        else:
            fh = path_or_file
        try:
            w = csv.writer(fh)
            cols = list(self.diagnostics)
            w.writerow(["t"] + self.coordinate_names + cols)
            for i, t in enumerate(self.t):
                row = [repr(float(t))] + [repr(float(x)) for x in self.y[i]]
                row += [repr(float(self.diagnostics[c][i])) for c in cols]
                w.writerow(row)
        finally:
            if close:
                fh.close()

    def write_header(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.header(), fh, indent=2)


def flow_rhs(kind, algebra, state, ansatz=None):
    """Derivative of a structure under the flow.

    ``state`` maps slot names to Forms; the result maps the same names to
    the derivative Forms (floating).
    """
    spec = FlowSpec(kind, algebra, dict(state), ansatz=ansatz)
    system = _System(spec)
    ydot = system.rhs(spec.t0, system.y0)
    return system.forms(ydot)


def integrate(spec, check=True):
    """Integrate the flow over ``spec.window`` (both directions from ``t0``)."""
    if check:
        spec.check_initial()
    system = _System(spec)
    lo, hi = spec.window
    runs = {}
    for side, t_end in (("backward", lo), ("forward", hi)):
        runs[side] = dopri5(
            system.rhs,
            spec.t0,
            system.y0,
            t_end,
            rtol=spec.rtol,
            atol=spec.atol,
            monitor=system.monitor,
            event_tol=spec.event_tol,
            project=system.project,
        )
    back, fwd = runs["backward"], runs["forward"]
    ts = list(reversed(back.t[1:])) + fwd.t
    ys = list(reversed(back.y[1:])) + fwd.y
    fs = list(reversed(back.f[1:])) + fwd.f
    segments = list(reversed(back.segments)) + fwd.segments
    termination = {}
    events = []
    for side, sol in runs.items():
        t_last = sol.t[-1]
        termination[side] = Termination(sol.status, float(t_last), sol.reason, tuple(map(float, sol.bracket)) if sol.bracket else None)
        if sol.status == "degeneration":
            events.append(DegenerationEvent(tuple(map(float, sol.bracket)), sol.reason, (float(t_last), sol.y[-1].copy())))
    traj = Trajectory(
        spec=spec,
        t=np.array(ts, dtype=float),
        y=np.array(ys, dtype=float),
        ydot=np.array(fs, dtype=float),
        diagnostics={},
        termination=termination,
        events=events,
        system=system,
        segments=segments,
    )
    traj.diagnostics = _diagnostics(traj)
    return traj


def _diagnostics(traj):
    system = traj.system
    out = {"lambda": [], "det_g": [], "flow_residual": [], "closure_residual": []}
    for t, y in zip(traj.t, traj.y):
        try:
            lam, det, _ = system.geometry(y)
        except Inadmissible:
            lam, det = float("nan"), 0.0
        out["lambda"].append(lam)
        out["det_g"].append(det)
        res = torsion_residual(traj.spec.kind, traj, t)
        out["flow_residual"].append(res["flow"])
        out["closure_residual"].append(res["closure"])
    return {k: np.array(v, dtype=float) for k, v in out.items()}


# --------------------------------------------------------------------------
# residuals and product structures


def _norm(form):
    return float(np.sqrt(sum(float(c) ** 2 for _, c in form.items())))


def _scaled(diff, scale):
    # exact zero stays exactly zero; otherwise relative to max(1, scale)
    if diff.is_zero():
        return 0.0 if not diff.exact else Fraction(0)
    return _norm(diff) / max(1.0, scale)


def _mismatch(lhs, rhs, scale=0.0):
    """``|sum(lhs) - rhs|`` relative to ``max(1, scale, |rhs|, |each lhs term|)``."""
    terms = lhs if isinstance(lhs, (list, tuple)) else [lhs]
    total = terms[0]
    for term in terms[1:]:
        total = total + term
    return _scaled(total - rhs, max([scale, _norm(rhs)] + [_norm(term) for term in terms]))


def _closure(dform, form):
    return _scaled(dform, _norm(form))


def torsion_residual(kind, trajectory, t, exact=False):
    """Residuals of the flow equations and closure conditions at time ``t``.

    Each entry is a norm of the mismatch of one equation, relative to
    ``max(1, size of its terms)``: near a degeneration the derivatives
    themselves blow up and an absolute measure would only report that.
    Time derivatives come from the dense output of the integrator.  With
    ``exact=True`` the sampled state and derivative are replayed in rational
    arithmetic (their binary values), so constant flows give exactly zero.
    """
    system = trajectory.system
    g = trajectory.spec.algebra
    y = trajectory.state(t)
    ydot = trajectory.derivative(t)
    if exact:
        forms = _exact_forms(system, y)
        dots = _exact_forms(system, ydot)
    else:
        forms = system.forms(y)
        dots = system.forms(ydot)
    d = lambda f: ce_differential(g, f)
    parts = {}
    if kind == "hitchin6":
        w, r = forms["omega"], forms["rho"]
        wd, rd = dots["omega"], dots["rho"]
        parts["d_rho"] = _closure(d(r), r)
        parts["d_omega2"] = _closure(d(w ^ w), w ^ w)
        parts["rho_dot"] = _mismatch(rd, d(w))
        rhohat = _rhohat(w, r, exact)
        if rhohat.exact != wd.exact:
            w, wd = w.to_float(), wd.to_float()
        parts["sigma_dot"] = _mismatch(w ^ wd, d(rhohat))
        closure = parts["d_rho"] + parts["d_omega2"]
        flow = parts["rho_dot"] + parts["sigma_dot"]
    elif kind == "hitchin7":
        phi = forms["phi"]
        star = gstruct.g2_star(phi) if exact else system.ext.to_form(system.star_phi(y), 4)
        parts["d_star_phi"] = _closure(d(star), star)
        scale = 0.0
        if all(x == 0 for x in ydot):
            star_dot = Form.zero(7, 4, exact=star.exact)
        else:
            L = system.star_jacobian(y)
            star_dot = system.ext.to_form(L @ ydot, 4)
            scale = float(np.linalg.norm(np.abs(L) @ np.abs(ydot)))
            if star.exact:
                star_dot = star_dot.to_exact()
        rhs = d(phi if star_dot.exact == phi.exact else phi.to_float())
        parts["star_phi_dot"] = _mismatch(star_dot, rhs, scale)
        closure = parts["d_star_phi"]
        flow = parts["star_phi_dot"]
    else:
        a, w1, w2, w3 = forms["alpha"], forms["omega1"], forms["omega2"], forms["omega3"]
        ad, w1d, w2d, w3d = dots["alpha"], dots["omega1"], dots["omega2"], dots["omega3"]
        parts["d_omega1"] = _closure(d(w1), w1)
        parts["d_alpha_omega2"] = _closure(d(a ^ w2), a ^ w2)
        parts["d_alpha_omega3"] = _closure(d(a ^ w3), a ^ w3)
        parts["omega1_dot"] = _mismatch(w1d, -d(a))
        parts["omega2_alpha_dot"] = _mismatch([w2d ^ a, w2 ^ ad], -d(w3))
        parts["omega3_alpha_dot"] = _mismatch([w3d ^ a, w3 ^ ad], d(w2))
        closure = parts["d_omega1"] + parts["d_alpha_omega2"] + parts["d_alpha_omega3"]
        flow = parts["omega1_dot"] + parts["omega2_alpha_dot"] + parts["omega3_alpha_dot"]
    parts["closure"] = closure
    parts["flow"] = flow
    return parts


def _rhohat(w, r, exact):
    if exact:
        return gstruct.su3_rhohat(r, gstruct.su3_orientation(w))
    _, _, _, rhat = numeric.su3_data(r.to_array(), w.to_array())
    return numeric.exterior(6).to_form(rhat, 3)


def _exact_forms(system, y):
    out = {}
    for name, deg in SLOTS[system.kind]:
        coeffs = [Fraction(float(c)) for c in y[system.slices[name]]]
        form = Form.zero(system.n, deg)
        for c, b in zip(coeffs, system.bases[name]):
            if c:
                form = form + b.to_exact() * c
        out[name] = form
    return out


@dataclass(frozen=True)
class ProductSample:
    forms: dict
    metric: np.ndarray


def assemble_product(kind, trajectory):
    """Sampler ``t -> ProductSample`` for the structure on the product with a line.

    hypo5 gives ``(omega, rho)`` on R^6, hitchin6 gives ``phi`` on R^7 and
    hitchin7 gives ``Phi`` on R^8; the metric is ``g_t + dt^2``.
    """
    system = trajectory.system
    if kind != trajectory.spec.kind:
        raise ValueError("kind does not match the trajectory")

    def sample(t):
        y = trajectory.state(t)
        f = system.full(y)
        _, _, extra = system.geometry(y)
        n = system.n
        G = np.zeros((n + 1, n + 1))
        G[:n, :n] = extra["metric"]
        G[n, n] = 1.0
        if kind == "hypo5":
            w, r = system._product_su3(f)
            e6 = numeric.exterior(6)
            forms = {"omega": e6.to_form(w, 2), "rho": e6.to_form(r, 3)}
        elif kind == "hitchin6":
            e7 = numeric.exterior(7)
            dt = np.zeros(7)
            dt[6] = 1.0
            phi = e7.wedge(_embed_vec(f["omega"], 2, 6, 7), 2, dt, 1) + _embed_vec(f["rho"], 3, 6, 7)
            forms = {"phi": e7.to_form(phi, 3)}
        else:
            e8 = numeric.exterior(8)
            dt = np.zeros(8)
            dt[7] = 1.0
            Phi = e8.wedge(dt, 1, _embed_vec(f["phi"], 3, 7, 8), 3) + _embed_vec(extra["star"], 4, 7, 8)
            forms = {"Phi": e8.to_form(Phi, 4)}
        return ProductSample(forms, G)

    return sample
