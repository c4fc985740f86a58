"""SU(2), SU(3), G2 and Spin(7) structures given by their defining forms.

The SU(3) side uses Hitchin's stable-form calculus: for a 3-form rho on R^6,
``K_rho(v) = kappa((v ⌟ rho) ∧ rho)`` is an endomorphism (times the
reference volume), ``lambda = tr(K^2) / 6`` and, when ``lambda < 0``,
``J = K / sqrt(-lambda)`` is a complex structure.  Everything is computed
relative to the reference volume ``e^{1..n}``.
"""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import linalg
from .exterior import (
    Endomorphism,
    MetricTensor,
    contract,
    hodge_star,
    kappa,
    pullback,
    sqrt_scalar,
    volume_form,
    wedge,
)
from .forms import Form
from .lie import ce_differential

__all__ = [
    "StabilityError",
    "su3_K",
    "su3_lambda",
    "su3_J",
    "su3_rhohat",
    "su3_psi",
    "su3_metric",
    "su3_orientation",
    "su3_validate",
    "SU3Report",
    "SU3Structure",
    "SU2Structure",
    "SU2Report",
    "su2_validate",
    "su2_common_kernel",
    "G2Structure",
    "Spin7Structure",
    "g2_B",
    "g2_metric",
    "g2_star",
    "is_hypo",
    "is_half_flat",
    "is_cocalibrated",
    "lift_su3_to_g2",
    "lift_g2_to_spin7",
    "embed",
    "standard_su3",
    "standard_su2",
    "standard_g2",
    "form_matrix",
]

CLOSURE_TOL = 1e-10


class StabilityError(ValueError):
    """The form is not stable of the required type (or the structure is invalid)."""


def _unit(n, i, exact=True):
    z, o = (Fraction(0), Fraction(1)) if exact else (0.0, 1.0)
    return [o if j == i else z for j in range(n)]


def _zero(exact):
    return Fraction(0) if exact else 0.0


def form_matrix(omega):
    """Matrix ``Omega_ij = omega(e_i, e_j)`` of a 2-form."""
    n = omega.dim
    M = [[_zero(omega.exact)] * n for _ in range(n)]
    for (i, j), c in omega.items():
        M[i][j] = c
        M[j][i] = -c
    return M


def _top(form):
    return form[tuple(range(form.dim))]


def _is_zero(x, exact, scale=1.0):
    return x == 0 if exact else abs(x) <= CLOSURE_TOL * max(1.0, scale)


# --------------------------------------------------------------------------
# stable 3-forms in dimension 6


def _check_rho(rho):
    if rho.degree != 3 or rho.dim != 6:
        raise ValueError("expected a 3-form on a 6-dimensional space")


def su3_K(rho):
    """Matrix of ``K_rho`` relative to ``e^{1..6}`` (columns are ``K(e_i)``)."""
    _check_rho(rho)
    cols = []
    for i in range(6):
        xi = wedge(contract(_unit(6, i, rho.exact), rho), rho)
        v, _ = kappa(xi)
        cols.append(v)
    return Endomorphism(linalg.transpose(cols))


def su3_lambda(rho):
    """``lambda(rho)`` as the coefficient of ``(e^{1..6})^{⊗2}``."""
    K = su3_K(rho)
    return (K @ K).trace() / 6


def su3_orientation(omega):
    """Sign of ``omega^3`` against ``e^{1..6}`` (0 if degenerate)."""
    top = _top(wedge(wedge(omega, omega), omega))
    return (top > 0) - (top < 0)


def su3_J(rho, orientation=None):
    """Complex structure ``J_rho`` for the given orientation (sign or top form)."""
    lam = su3_lambda(rho)
    if lam >= 0:
        raise StabilityError("not stable of the required type (lambda >= 0)")
    o = _sign_of(orientation)
    root = sqrt_scalar(-lam)
    K = su3_K(rho)
    if isinstance(root, float):
        K = K.to_float()
    return K * (o / root if isinstance(root, float) else Fraction(o) / root)


def _sign_of(orientation):
    if orientation is None:
        return 1
    if isinstance(orientation, Form):
        c = _top(orientation)
        if c == 0:
            raise ValueError("orientation form is zero")
        return 1 if c > 0 else -1
    return 1 if orientation > 0 else -1


def _pull(J, rho):
    if not J.exact and rho.exact:
        rho = rho.to_float()
    return pullback(J, rho)


def su3_rhohat(rho, orientation=None):
    """``rho_hat = J_rho^* rho``."""
    return _pull(su3_J(rho, orientation), rho)


def su3_psi(rho, orientation=None):
    """Complex volume form ``Psi = rho + i rho_hat`` as the pair of real parts."""
    rhohat = su3_rhohat(rho, orientation)
    if not rhohat.exact:
        rho = rho.to_float()
    return rho, rhohat


def su3_metric(omega, rho):
    """``g(X, Y) = omega(J X, Y)`` with the orientation induced by ``omega^3``."""
    o = su3_orientation(omega)
    if o == 0:
        raise StabilityError("omega is degenerate")
    J = su3_J(rho, o)
    W = form_matrix(omega if J.exact else omega.to_float())
    G = linalg.matmul(linalg.transpose(J.matrix), W) if J.exact else (J.to_array().T @ np.array(W, dtype=float)).tolist()
    if not J.exact:
        A = np.array(G)
        G = ((A + A.T) / 2).tolist()
    try:
        return MetricTensor(G)
    except ValueError as exc:
        raise StabilityError("conditions (a)-(e) not satisfiable: metric is not positive definite") from exc


@dataclass(frozen=True)
class SU3Report:
    nondegenerate: bool
    stable: bool
    compatible: bool
    normalized: bool
    positive: bool
    lam: object = None
    ratio: object = None

    @property
    def ok(self):
        return self.nondegenerate and self.stable and self.compatible and self.normalized and self.positive

    def failures(self):
        names = {
            "nondegenerate": "(a) omega^3 != 0",
            "stable": "(b) lambda(rho) < 0",
            "compatible": "(c) omega ∧ rho = 0",
            "normalized": "(d) sqrt(-lambda) = omega^3/3",
            "positive": "(e) metric positive definite",
        }
        return [text for key, text in names.items() if not getattr(self, key)]


def su3_validate(omega, rho):
    """Check conditions (a)-(e) for an SU(3)-structure.

    ``ratio`` is the constant ``c`` with ``sqrt(-lambda) = c * omega^3 / 3``
    (1 for normalized pairs).  Exact pairs are checked exactly, floating ones
    to a relative tolerance of 1e-10.
    """
    if omega.degree != 2 or omega.dim != 6:
        raise ValueError("omega must be a 2-form on R^6")
    _check_rho(rho)
    exact = omega.exact and rho.exact
    if not exact:
        omega, rho = omega.to_float(), rho.to_float()
    top = _top(wedge(wedge(omega, omega), omega))
    scale = max(omega.norm(), rho.norm(), 1.0)
    a = not _is_zero(top, exact, scale**3)
    lam = su3_lambda(rho)
    b = lam < 0 and not _is_zero(lam, exact, scale**4)
    mixed = wedge(omega, rho)
    c = all(_is_zero(x, exact, scale**2) for _, x in mixed.items())
    d = e = False
    ratio = None
    if a and b:
        third = top / 3
        if exact:
            d = third * third == -lam
        else:
            d = abs(third * third + lam) <= CLOSURE_TOL * abs(lam)
        root = sqrt_scalar(-lam)
        ratio = root / abs(third) if not isinstance(root, float) else float(root) / abs(float(third))
        o = 1 if top > 0 else -1
        # g is positive definite iff o * omega(K., .) is (J = o K / sqrt(-lambda))
        K = su3_K(rho)
        W = form_matrix(omega)
        P = linalg.matmul(linalg.transpose(K.matrix), W) if exact else (K.to_array().T @ np.array(W)).tolist()
        P = [[o * x for x in row] for row in P]
        if exact:
            e = linalg.is_positive_definite(P)
        else:
            A = np.array(P)
            e = bool(np.allclose(A, A.T, atol=1e-10 * max(1.0, np.abs(A).max())) and np.linalg.eigvalsh((A + A.T) / 2).min() > 0)
    return SU3Report(a, b, c, d, e, lam=lam, ratio=ratio)


@dataclass(frozen=True)
class SU3Structure:
    """Validated pair ``(omega, rho)`` with derived data computed eagerly."""

    omega: Form
    rho: Form
    lam: object = field(init=False)
    J: Endomorphism = field(init=False)
    rhohat: Form = field(init=False)
    metric: MetricTensor = field(init=False)
    orientation: int = field(init=False)

    def __post_init__(self):
        report = su3_validate(self.omega, self.rho)
        if not report.ok:
            raise StabilityError("invalid SU(3)-structure: " + "; ".join(report.failures()))
        o = su3_orientation(self.omega)
        object.__setattr__(self, "lam", report.lam)
        object.__setattr__(self, "orientation", o)
        object.__setattr__(self, "J", su3_J(self.rho, o))
        object.__setattr__(self, "rhohat", su3_rhohat(self.rho, o))
        object.__setattr__(self, "metric", su3_metric(self.omega, self.rho))


def standard_su3():
    """``(omega_0, rho_0) = (e12 + e34 + e56, e135 - e146 - e236 - e245)``."""
    return Form.parse("e12 + e34 + e56", 6), Form.parse("e135 - e146 - e236 - e245", 6)


# --------------------------------------------------------------------------
# SU(2) in dimension 5


@dataclass(frozen=True)
class SU2Structure:
    alpha: Form
    omega1: Form
    omega2: Form
    omega3: Form

    def __post_init__(self):
        if self.alpha.degree != 1 or any(w.degree != 2 for w in self.omegas):
            raise ValueError("SU(2)-structure needs a 1-form and three 2-forms")
        if any(f.dim != 5 for f in (self.alpha,) + self.omegas):
            raise ValueError("SU(2)-structures live on 5-dimensional spaces")

    @property
    def omegas(self):
        return (self.omega1, self.omega2, self.omega3)

    @property
    def exact(self):
        return all(f.exact for f in (self.alpha,) + self.omegas)

    def forms(self):
        return {"alpha": self.alpha, "omega1": self.omega1, "omega2": self.omega2, "omega3": self.omega3}


def standard_su2():
    return SU2Structure(
        Form.parse("e5", 5),
        Form.parse("e12 + e34", 5),
        Form.parse("e13 - e24", 5),
        Form.parse("e14 + e23", 5),
    )


@dataclass(frozen=True)
class SU2Report:
    ok: bool
    kernel: tuple = None
    reasons: tuple = ()


def su2_common_kernel(s):
    """Basis of the common kernel of ``omega_1, omega_2, omega_3``."""
    rows = []
    for w in s.omegas:
        rows.extend(form_matrix(w.to_exact()))
    return linalg.nullspace(rows, 5)


def _restrict(M, basis):
    return linalg.matmul(linalg.matmul(linalg.transpose(basis), M), basis)


def _handedness(Ws):
    """Symmetric matrix ``Omega_1 Omega_2^{-1} Omega_3`` on the horizontal space."""
    try:
        inv2 = linalg.inverse(Ws[1])
    except ZeroDivisionError:
        return None
    return linalg.matmul(linalg.matmul(Ws[0], inv2), Ws[2])


def _definite_sign(S):
    if linalg.is_positive_definite(S):
        return 1
    if linalg.is_positive_definite([[-x for x in row] for row in S]):
        return -1
    return 0


def su2_validate(s):
    """Decide constructively whether an adapted basis exists.

    Floating structures are checked through their exact binary values, so
    they pass only if they are exactly of model type.
    """
    reasons = []
    alpha = s.alpha.to_exact()
    ker = su2_common_kernel(s)
    if len(ker) != 1:
        return SU2Report(False, None, (f"common kernel has dimension {len(ker)}, expected 1",))
    v = ker[0]
    av = alpha(v)
    if av == 0:
        return SU2Report(False, None, ("alpha vanishes on the common kernel",))
    v = tuple(x / av for x in v)
    # horizontal space ker(alpha) in coordinates
    H = linalg.nullspace([alpha.to_vector()], 5)
    basis = linalg.transpose(H)
    Ws = [_restrict(form_matrix(w.to_exact()), basis) for w in s.omegas]
    # pairing omega_i ∧ omega_j = delta_ij mu with mu != 0 on the horizontal space
    forms4 = [_matrix_to_form(W) for W in Ws]
    P = [[_top(wedge(a, b)) for b in forms4] for a in forms4]
    mu = P[0][0]
    if mu == 0 or any(P[i][j] != (mu if i == j else 0) for i in range(3) for j in range(3)):
        reasons.append("pairing omega_i ∧ omega_j is not delta_ij * omega_1^2")
    else:
        S = _handedness(Ws)
        if S is None or _definite_sign(S) != _MODEL_HANDEDNESS:
            reasons.append("triple has the wrong handedness")
    return SU2Report(not reasons, v if not reasons else v, tuple(reasons))


def _matrix_to_form(W):
    n = len(W)
    return Form(n, 2, {(i, j): W[i][j] for i in range(n) for j in range(i + 1, n)}, exact=True)


def _model_handedness():
    s = standard_su2()
    alpha = s.alpha
    H = linalg.nullspace([alpha.to_vector()], 5)
    basis = linalg.transpose(H)
    Ws = [_restrict(form_matrix(w), basis) for w in s.omegas]
    return _definite_sign(_handedness(Ws))


_MODEL_HANDEDNESS = _model_handedness()


# --------------------------------------------------------------------------
# G2 and Spin(7)


def standard_g2():
    return Form.parse("e127 + e347 + e567 + e135 - e146 - e236 - e245", 7)


def g2_B(phi):
    """``B_ij`` = coefficient of ``(e_i ⌟ phi) ∧ (e_j ⌟ phi) ∧ phi`` on ``e^{1..7}``."""
    if phi.degree != 3 or phi.dim != 7:
        raise ValueError("expected a 3-form on a 7-dimensional space")
    contractions = [contract(_unit(7, i, phi.exact), phi) for i in range(7)]
    B = [[_zero(phi.exact)] * 7 for _ in range(7)]
    for i in range(7):
        wi = wedge(contractions[i], phi)
        for j in range(i, 7):
            B[i][j] = B[j][i] = _top(wedge(contractions[j], wi))
    return B


def g2_metric(phi):
    """Metric and volume form of a G2 3-form.

    ``g = B / (36 det B)^{1/9}`` (real ninth root), which is the identity on
    the standard form; the orientation follows the sign of ``B``.
    """
    B = g2_B(phi)
    if phi.exact:
        sign = 1 if linalg.is_positive_definite(B) else (-1 if linalg.is_positive_definite([[-x for x in r] for r in B]) else 0)
        detB = linalg.det(B)
    else:
        ev = np.linalg.eigvalsh(np.array(B))
        sign = 1 if ev.min() > 0 else (-1 if ev.max() < 0 else 0)
        detB = float(np.prod(ev))
    if sign == 0:
        raise StabilityError("not a G2-form: B is not definite")
    root = sqrt_scalar(36 * detB, 9)
    if isinstance(root, float):
        G = (np.array(B, dtype=float) / root).tolist()
    else:
        G = [[x / root for x in row] for row in B]
    g = MetricTensor(G)
    vol_coeff = sqrt_scalar(g.det())
    vol = Form(7, 7, {tuple(range(7)): sign * vol_coeff}, exact=not isinstance(vol_coeff, float))
    return g, vol


def g2_star(phi):
    g, vol = g2_metric(phi)
    star = hodge_star(phi if phi.exact or not g.exact else phi, g, vol)
    return star


@dataclass(frozen=True)
class G2Structure:
    phi: Form
    metric: MetricTensor = field(init=False)
    volume: Form = field(init=False)
    star: Form = field(init=False)

    def __post_init__(self):
        g, vol = g2_metric(self.phi)
        object.__setattr__(self, "metric", g)
        object.__setattr__(self, "volume", vol)
        object.__setattr__(self, "star", hodge_star(self.phi, g, vol))


@dataclass(frozen=True)
class Spin7Structure:
    Phi: Form

    def __post_init__(self):
        if self.Phi.degree != 4 or self.Phi.dim != 8:
            raise ValueError("Spin(7)-structures are 4-forms on R^8")


def embed(form, dim):
    """The same multi-indices viewed on a larger space (new covectors appended)."""
    return Form(dim, form.degree, form.terms, exact=form.exact)


def _dt(dim, exact):
    return Form(dim, 1, {(dim - 1,): 1 if exact else 1.0}, exact=exact)


def lift_su3_to_g2(omega, rho):
    """``phi = omega ∧ dt + rho`` with ``dt = e^7``."""
    s = SU3Structure(omega, rho)
    exact = omega.exact and rho.exact
    phi = wedge(embed(s.omega, 7), _dt(7, exact)) + embed(s.rho, 7)
    return G2Structure(phi)


def lift_g2_to_spin7(phi):
    """``Phi = dt ∧ phi + ⋆phi`` with ``dt = e^8``."""
    s = phi if isinstance(phi, G2Structure) else G2Structure(phi)
    star = s.star
    p = s.phi
    if p.exact != star.exact:
        p, star = p.to_float(), star.to_float()
    Phi = wedge(_dt(8, p.exact), embed(p, 8)) + embed(star, 8)
    return Spin7Structure(Phi)


# --------------------------------------------------------------------------
# closure predicates


def _closed(g, form):
    d = ce_differential(g, form)
    if form.exact:
        return d.is_zero()
    return d.norm() <= CLOSURE_TOL


def is_hypo(g, s):
    a = s.alpha
    return _closed(g, s.omega1) and _closed(g, wedge(a, s.omega2)) and _closed(g, wedge(a, s.omega3))


def is_half_flat(g, omega, rho):
    return _closed(g, wedge(omega, omega)) and _closed(g, rho)


def is_cocalibrated(g, phi):
    star = phi.star if isinstance(phi, G2Structure) else g2_star(phi)
    return _closed(g, star)
