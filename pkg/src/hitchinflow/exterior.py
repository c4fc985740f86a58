"""Multilinear operations on forms: wedge, interior product, pullback, Hodge star, κ."""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import linalg
from .forms import Form, ModeError, _det, multi_indices, sort_sign

__all__ = [
    "Endomorphism",
    "MetricTensor",
    "wedge",
    "wedge_all",
    "contract",
    "pullback",
    "kappa",
    "volume_form",
    "hodge_star",
    "form_inner",
    "sqrt_scalar",
]


def _mode(*forms):
    nonzero = [f.exact for f in forms if not f.is_zero()]
    if nonzero and any(m != nonzero[0] for m in nonzero):
        raise ModeError("mixed exact and floating forms; convert explicitly")
    return nonzero[0] if nonzero else forms[0].exact


def sqrt_scalar(q, k=2):
    """Positive real ``k``-th root; exact when rational, float otherwise."""
    if isinstance(q, float):
        return float(np.sign(q) * abs(q) ** (1.0 / k)) if k % 2 else q ** (1.0 / k)
    r = linalg.exact_root(q, k)
    if r is not None:
        return r
    q = float(q)
    return float(np.sign(q) * abs(q) ** (1.0 / k))


# --------------------------------------------------------------------------
# matrices


@dataclass(frozen=True)
class Endomorphism:
    """``n x n`` matrix acting on the Lie algebra; columns are images of basis vectors."""

    matrix: tuple

    def __post_init__(self):
        m = tuple(tuple(row) for row in self.matrix)
        n = len(m)
        if any(len(row) != n for row in m):
            raise ValueError("endomorphism matrix must be square")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls, n):
        return cls(linalg.identity(n))

    @classmethod
    def diag(cls, entries):
        n = len(entries)
        return cls([[entries[i] if i == j else 0 * entries[i] for j in range(n)] for i in range(n)])

    @property
    def n(self):
        return len(self.matrix)

    @property
    def exact(self):
        return not any(isinstance(x, float) for row in self.matrix for x in row)

    def column(self, j):
        return [row[j] for row in self.matrix]

    def __call__(self, v):
        return [sum((a * b for a, b in zip(row, v)), 0 * v[0]) for row in self.matrix]

    def __matmul__(self, other):
        return Endomorphism(_matmul(self.matrix, other.matrix))

    def __mul__(self, s):
        return Endomorphism([[s * x for x in row] for row in self.matrix])

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def __add__(self, other):
        return Endomorphism([[a + b for a, b in zip(r, s)] for r, s in zip(self.matrix, other.matrix)])

    def __sub__(self, other):
        return self + (-other)

    def transpose(self):
        return Endomorphism(list(zip(*self.matrix)))

    def trace(self):
        return sum(self.matrix[i][i] for i in range(self.n))

    def det(self):
        if self.exact:
            return linalg.det(self.matrix)
        return float(np.linalg.det(self.to_array()))

    def inverse(self):
        if self.exact:
            return Endomorphism(linalg.inverse(self.matrix))
        return Endomorphism(np.linalg.inv(self.to_array()).tolist())

    def to_array(self):
        return np.array([[float(x) for x in row] for row in self.matrix])

    def to_float(self):
        return Endomorphism([[float(x) for x in row] for row in self.matrix])

    def allclose(self, other, atol=1e-12):
        return np.allclose(self.to_array(), np.asarray(other.to_array() if isinstance(other, Endomorphism) else other), atol=atol, rtol=0)


def _matmul(A, B):
    Bt = list(zip(*B))
    return [[sum((a * b for a, b in zip(row, col)), 0 * row[0]) for col in Bt] for row in A]


@dataclass(frozen=True)
class MetricTensor:
    """Symmetric bilinear form ``g_ij``; ``signature`` is ``"riemannian"`` or ``"indefinite"``."""

    matrix: tuple
    signature: str = "riemannian"

    def __post_init__(self):
        m = tuple(tuple(row) for row in self.matrix)
        n = len(m)
        if any(len(row) != n for row in m):
            raise ValueError("metric matrix must be square")
        for i in range(n):
            for j in range(i):
                a, b = m[i][j], m[j][i]
                if a != b and not (isinstance(a, float) and abs(a - b) <= 1e-12 * max(1.0, abs(a))):
                    raise ValueError("metric matrix is not symmetric")
        object.__setattr__(self, "matrix", m)
        if self.signature == "riemannian" and not self._definite():
            raise ValueError("metric is not positive definite")

    def _definite(self):
        if self.exact:
            return linalg.is_positive_definite(self.matrix)
        A = self.to_array()
        return bool(np.linalg.eigvalsh((A + A.T) / 2).min() > 0)

    @classmethod
    def identity(cls, n):
        return cls(linalg.identity(n))

    @property
    def n(self):
        return len(self.matrix)

    @property
    def exact(self):
        return not any(isinstance(x, float) for row in self.matrix for x in row)

    def to_array(self):
        return np.array([[float(x) for x in row] for row in self.matrix])

    def det(self):
        if self.exact:
            return linalg.det(self.matrix)
        return float(np.linalg.det(self.to_array()))

    def inverse_matrix(self):
        if self.exact:
            return linalg.inverse(self.matrix)
        return np.linalg.inv(self.to_array()).tolist()

    def __call__(self, u, v):
        return sum(u[i] * self.matrix[i][j] * v[j] for i in range(self.n) for j in range(self.n))

    def allclose(self, other, atol=1e-12):
        other = other.to_array() if isinstance(other, MetricTensor) else np.asarray(other, dtype=float)
        return bool(np.allclose(self.to_array(), other, atol=atol, rtol=0))


# --------------------------------------------------------------------------
# wedge, contraction, pullback


def wedge(a, b):
    if a.dim != b.dim:
        raise ValueError("forms live on spaces of different dimension")
    deg = a.degree + b.degree
    if deg > a.dim:
        raise ValueError(f"degree {deg} exceeds dimension {a.dim}")
    exact = _mode(a, b)
    out = {}
    for I, x in a.items():
        for J, y in b.items():
            K, s = sort_sign(I + J)
            if s:
                out[K] = out.get(K, 0) + s * x * y
    return Form(a.dim, deg, out, exact=exact)


def wedge_all(*forms):
    result = forms[0]
    for f in forms[1:]:
        result = wedge(result, f)
    return result


def contract(v, omega):
    """Interior product ``v ⌟ omega`` (insertion into the first slot)."""
    if omega.degree < 1:
        raise ValueError("cannot contract a 0-form")
    if len(v) != omega.dim:
        raise ValueError("vector has the wrong length")
    exact = omega.exact
    if exact and any(isinstance(x, float) for x in v):
        raise ModeError("floating vector contracted into an exact form")
    out = {}
    for I, c in omega.items():
        for p, i in enumerate(I):
            vi = v[i]
            if vi:
                J = I[:p] + I[p + 1:]
                out[J] = out.get(J, 0) + (-1) ** p * vi * c
    if not exact:
        out = {k: float(x) for k, x in out.items()}
    return Form(omega.dim, omega.degree - 1, out, exact=exact)


def pullback(A, omega):
    """``(A^* omega)(v_1..v_k) = omega(A v_1, .., A v_k)``."""
    M = A.matrix if isinstance(A, Endomorphism) else A
    n = omega.dim
    k = omega.degree
    if len(M) != n:
        raise ValueError("matrix size does not match the form")
    exact = omega.exact and all(not isinstance(x, float) for row in M for x in row)
    if omega.exact and not exact:
        raise ModeError("floating matrix pulled back against an exact form")
    if k == 0:
        return omega
    out = {}
    for J in multi_indices(n, k):
        total = 0
        for I, c in omega.items():
            total += c * _det([[M[i][j] for j in J] for i in I])
        if total != 0:
            out[J] = total
    if not exact:
        out = {key: float(x) for key, x in out.items()}
    return Form(n, k, out, exact=exact)


def volume_form(n, exact=True):
    return Form(n, n, {tuple(range(n)): 1 if exact else 1.0}, exact=exact)


def kappa(xi):
    """Inverse of ``v ↦ v ⌟ vol`` against the reference volume ``e^{1..n}``.

    Returns ``(v, vol)`` with ``v ⌟ vol = xi``.
    """
    n = xi.dim
    if xi.degree != n - 1:
        raise ValueError(f"kappa needs an (n-1)-form, got degree {xi.degree} on R^{n}")
    zero = Fraction(0) if xi.exact else 0.0
    v = [zero] * n
    for I, c in xi.items():
        i = next(j for j in range(n) if j not in I)
        v[i] = c if i % 2 == 0 else -c
    return v, volume_form(n, xi.exact)


# --------------------------------------------------------------------------
# Hodge star


def _orientation_sign(orientation):
    if orientation.degree != orientation.dim:
        raise ValueError("orientation must be a top-degree form")
    c = orientation[tuple(range(orientation.dim))]
    if c == 0:
        raise ValueError("orientation form is zero")
    return 1 if c > 0 else -1


def _gram(inv, I, J):
    return _det([[inv[i][j] for j in J] for i in I])


def form_inner(a, b, g):
    """Inner product of k-forms induced by ``g`` (dual metric on covectors)."""
    if a.degree != b.degree:
        raise ValueError("forms of different degree")
    inv = g.inverse_matrix()
    total = 0
    for I, x in a.items():
        for J, y in b.items():
            total += x * y * _gram(inv, I, J)
    return total


def hodge_star(omega, g, orientation=None):
    """Hodge star with ``alpha ∧ ⋆beta = g(alpha, beta) vol_g``.

    ``vol_g`` is the metric volume positively proportional to ``orientation``
    (default ``e^{1..n}``).  Exact when the metric is rational with a rational
    square-root determinant, otherwise floating.
    """
    n = omega.dim
    if g.n != n:
        raise ValueError("metric and form dimensions differ")
    o = 1 if orientation is None else _orientation_sign(orientation)
    d = g.det()
    if d <= 0:
        raise ValueError("degenerate metric")
    root = sqrt_scalar(d)
    exact = omega.exact and g.exact and not isinstance(root, float)
    inv = g.inverse_matrix()
    if not exact:
        inv = [[float(x) for x in row] for row in inv]
        root = float(root)
    k = omega.degree
    full = tuple(range(n))
    out = {}
    for I in multi_indices(n, k):
        total = 0
        for J, beta in omega.items():
            gij = _gram(inv, I, J)
            if gij:
                total += gij * (beta if exact else float(beta))
        if total:
            Ic = tuple(i for i in full if i not in I)
            _, s = sort_sign(I + Ic)
            out[Ic] = s * o * root * total
    if not exact:
        out = {key: float(x) for key, x in out.items()}
    return Form(n, n - k, out, exact=exact)
