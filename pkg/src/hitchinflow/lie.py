"""Finite-dimensional real Lie algebras given by structure constants.

Basis vectors are 0-based in code.  ``[e_i, e_j] = sum_k c^k_ij e_k`` is stored
for ``i < j`` only.  The dual basis satisfies ``d e^k(e_i, e_j) = -c^k_ij``,
i.e. ``d alpha(X, Y) = -alpha([X, Y])``.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb

from . import linalg
from .forms import Form, multi_indices, sort_sign

__all__ = [
    "LieAlgebra",
    "JacobiReport",
    "CentralSeries",
    "Subalgebra",
    "jacobi_check",
    "ce_differential",
    "central_series",
    "derived_algebra",
    "derived_series",
    "is_solvable",
    "invariant_forms",
    "lie_derivative_matrix",
]


def _scalar(c):
    if isinstance(c, float):
        return c
    return Fraction(c)


class LieAlgebra:
    """Structure constants in a fixed basis.

    ``structure`` maps ``(i, j)`` with ``i < j`` to ``{k: c^k_ij}``.  Pairs
    given with ``i > j`` are folded in with a sign flip; ``i == j`` is
    rejected.  Jacobi is *not* checked here, see :func:`jacobi_check`.
    """

    __slots__ = ("dim", "labels", "_brackets", "_hash")

    def __init__(self, dim, structure=None, labels=None):
        if dim < 1:
            raise ValueError("dimension must be positive")
        brackets = {}
        for (i, j), images in (structure or {}).items():
            if i == j:
                raise ValueError("[e_i, e_i] is zero by antisymmetry")
            sign = 1
            if i > j:
                i, j, sign = j, i, -1
            for k, c in images.items():
                if not all(0 <= a < dim for a in (i, j, k)):
                    raise ValueError(f"index out of range for dimension {dim}")
                c = _scalar(c) * sign
                row = brackets.setdefault((i, j), {})
                row[k] = row.get(k, 0) + c
        self.dim = dim
        self.labels = tuple(labels) if labels else None
        self._brackets = {
            key: {k: c for k, c in sorted(row.items()) if c != 0}
            for key, row in sorted(brackets.items())
        }
        self._brackets = {key: row for key, row in self._brackets.items() if row}
        self._hash = None

    @classmethod
    def abelian(cls, dim):
        return cls(dim, {})

    @classmethod
    def from_differentials(cls, dim, differentials, labels=None):
        """Build from ``{k: d e^k}`` (2-forms), using ``c^k_ij = -(d e^k)_ij``."""
        structure = {}
        for k, form in differentials.items():
            if form.degree != 2:
                raise ValueError(f"d e^{k + 1} must be a 2-form")
            for (i, j), a in form.items():
                structure.setdefault((i, j), {})[k] = -a
        return cls(dim, structure, labels)

    @property
    def structure(self):
        return {key: dict(row) for key, row in self._brackets.items()}

    @property
    def exact(self):
        return all(not isinstance(c, float) for row in self._brackets.values() for c in row.values())

    def bracket_basis(self, i, j):
        """``[e_i, e_j]`` as a dict ``{k: c}``."""
        if i == j:
            return {}
        if i < j:
            return self._brackets.get((i, j), {})
        return {k: -c for k, c in self._brackets.get((j, i), {}).items()}

    def bracket(self, x, y):
        """Bracket of two coefficient vectors."""
        out = [Fraction(0)] * self.dim
        for (i, j), row in self._brackets.items():
            w = x[i] * y[j] - x[j] * y[i]
            if w:
                for k, c in row.items():
                    out[k] += w * c
        return out

    def ad(self, x):
        """Matrix of ``ad_x`` (columns are ``[x, e_j]``)."""
        cols = [self.bracket(x, _unit(self.dim, j)) for j in range(self.dim)]
        return linalg.transpose(cols)

    def differential_of_dual(self, k):
        """``d e^k`` as a 2-form."""
        terms = {(i, j): -row[k] for (i, j), row in self._brackets.items() if k in row}
        return Form(self.dim, 2, terms, exact=self.exact)

    def is_abelian(self):
        return not self._brackets

    def __eq__(self, other):
        if not isinstance(other, LieAlgebra):
            return NotImplemented
        return self.dim == other.dim and self._brackets == other._brackets

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.dim, tuple((k, tuple(v.items())) for k, v in self._brackets.items())))
        return self._hash

    def __repr__(self):
        from .salamon import print_salamon

        return f"LieAlgebra({print_salamon(self)!r})"

    def direct_sum(self, other):
        """``self ⊕ other`` with ``other``'s basis appended."""
        n = self.dim
        structure = self.structure
        for (i, j), row in other._brackets.items():
            structure[(i + n, j + n)] = {k + n: c for k, c in row.items()}
        return LieAlgebra(n + other.dim, structure)

    def restrict(self, basis):
        """Structure constants of the subalgebra spanned by ``basis``, in that basis."""
        basis = [list(map(Fraction, b)) for b in basis]
        cols = linalg.transpose(basis)
        structure = {}
        for a, b in combinations(range(len(basis)), 2):
            br = self.bracket(basis[a], basis[b])
            coeffs = linalg.solve(cols, br)
            if coeffs is None:
                raise ValueError("span is not closed under the bracket")
            row = {k: c for k, c in enumerate(coeffs) if c != 0}
            if row:
                structure[(a, b)] = row
        return LieAlgebra(len(basis), structure)


def _unit(n, j):
    v = [Fraction(0)] * n
    v[j] = Fraction(1)
    return v


# --------------------------------------------------------------------------
# Jacobi identity


@dataclass(frozen=True)
class JacobiReport:
    ok: bool
    worst_violation: float
    witnesses: tuple = ()


def jacobi_check(g, tol=1e-12):
    """Check the cyclic Jacobi sum on every basis triple ``i < j < k``.

    Exact algebras must satisfy it exactly; floating ones up to ``tol``.
    Witnesses are 0-based index triples.
    """
    exact = g.exact
    worst = 0.0
    witnesses = []
    for i, j, k in combinations(range(g.dim), 3):
        total = [0] * g.dim
        for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
            for m, coef in g.bracket_basis(a, b).items():
                for p, coef2 in g.bracket_basis(m, c).items():
                    total[p] += coef * coef2
        size = max(abs(float(x)) for x in total)
        worst = max(worst, size)
        bad = any(x != 0 for x in total) if exact else size > tol
        if bad:
            witnesses.append((i, j, k))
    return JacobiReport(ok=not witnesses, worst_violation=worst, witnesses=tuple(witnesses))


# --------------------------------------------------------------------------
# Chevalley-Eilenberg differential


def ce_differential(g, omega):
    """Exterior derivative of a left-invariant form.

    Evaluated on basis vectors ``X_0 < ... < X_k`` by
    ``sum_{a<b} (-1)^{a+b} omega([X_a, X_b], X_0, ..., ^a, ..., ^b, ..., X_k)``.
    """
    if omega.dim != g.dim:
        raise ValueError("form and algebra have different dimensions")
    k = omega.degree
    if k >= g.dim:
        raise ValueError("degree exceeds dimension")
    if omega.is_zero():
        return Form.zero(g.dim, k + 1, exact=omega.exact)
    conv = (lambda c: c) if omega.exact else float
    terms = {}
    for J in multi_indices(g.dim, k + 1):
        total = 0
        for a, b in combinations(range(k + 1), 2):
            br = g.bracket_basis(J[a], J[b])
            if not br:
                continue
            rest = J[:a] + J[a + 1:b] + J[b + 1:]
            sgn = -1 if (a + b) % 2 else 1
            for m, c in br.items():
                idx, s = sort_sign((m,) + rest)
                if s == 0:
                    continue
                w = omega._terms.get(idx)
                if w is not None:
                    total += sgn * s * conv(c) * w
        if total != 0:
            terms[J] = total
    return Form(g.dim, k + 1, terms, exact=omega.exact)


# --------------------------------------------------------------------------
# series


@dataclass(frozen=True)
class CentralSeries:
    terms: tuple
    is_nilpotent: bool

    @property
    def dims(self):
        return tuple(len(t) for t in self.terms)

    @property
    def center(self):
        return self.terms[1] if len(self.terms) > 1 else self.terms[0]


def _annihilator(basis, n):
    if not basis:
        return [_unit(n, j) for j in range(n)]
    return linalg.nullspace(basis, n)


def central_series(g):
    """Ascending central series ``g_(0) = 0 ⊂ g_(1) = z(g) ⊂ ...`` until it stabilizes."""
    n = g.dim
    brackets = [[g.bracket(_unit(n, i), _unit(n, j)) for j in range(n)] for i in range(n)]
    terms = [[]]
    while True:
        ann = _annihilator(terms[-1], n)
        rows = []
        for j in range(n):
            for p in ann:
                rows.append([sum(pm * bm for pm, bm in zip(p, brackets[i][j])) for i in range(n)])
        nxt = linalg.nullspace(rows, n) if rows else [_unit(n, j) for j in range(n)]
        nxt = linalg.span_basis(nxt, n)
        if len(nxt) == len(terms[-1]):
            break
        terms.append(nxt)
    return CentralSeries(terms=tuple(tuple(map(tuple, t)) for t in terms), is_nilpotent=len(terms[-1]) == n)


def derived_algebra(g, basis=None):
    """Basis of ``[h, h]`` for ``h`` spanned by ``basis`` (default: all of g)."""
    n = g.dim
    if basis is None:
        basis = [_unit(n, j) for j in range(n)]
    spans = [g.bracket(x, y) for x, y in combinations(basis, 2)]
    spans = [v for v in spans if any(c != 0 for c in v)]
    return [tuple(v) for v in linalg.span_basis(spans, n)] if spans else []


def derived_series(g):
    n = g.dim
    series = [[tuple(_unit(n, j)) for j in range(n)]]
    while series[-1]:
        nxt = derived_algebra(g, [list(v) for v in series[-1]])
        if len(nxt) == len(series[-1]):
            break
        series.append(nxt)
    return series


def is_solvable(g):
    return not derived_series(g)[-1]


# --------------------------------------------------------------------------
# subalgebras and invariant forms


@dataclass(frozen=True)
class Subalgebra:
    algebra: LieAlgebra
    basis: tuple = field(default=())

    def __post_init__(self):
        basis = tuple(tuple(Fraction(c) for c in v) for v in self.basis)
        object.__setattr__(self, "basis", basis)
        n = self.algebra.dim
        if any(len(v) != n for v in basis):
            raise ValueError("basis vectors have the wrong length")
        if basis and linalg.rank([list(v) for v in basis], n) != len(basis):
            raise ValueError("subalgebra basis is linearly dependent")
        for x, y in combinations(basis, 2):
            if not linalg.in_span(self.algebra.bracket(x, y), [list(v) for v in basis]):
                raise ValueError("span is not closed under the bracket")

    @classmethod
    def spanned_by(cls, g, indices):
        return cls(g, tuple(tuple(_unit(g.dim, i)) for i in indices))

    @property
    def dim(self):
        return len(self.basis)


def lie_derivative_matrix(g, x, k):
    """Matrix of ``L_x`` on ``Lambda^k`` in the lexicographic basis.

    ``(L_x w)(Y_1..Y_k) = -sum_i w(Y_1, .., [x, Y_i], .., Y_k)``; columns are
    images of basis forms.
    """
    n = g.dim
    idxs = multi_indices(n, k)
    pos = {I: r for r, I in enumerate(idxs)}
    A = g.ad(list(x))
    M = [[Fraction(0)] * len(idxs) for _ in idxs]
    for col, I in enumerate(idxs):
        for p, i in enumerate(I):
            # L_x e^i = -sum_j A[i][j] e^j
            for j in range(n):
                a = A[i][j]
                if a == 0:
                    continue
                new, s = sort_sign(I[:p] + (j,) + I[p + 1:])
                if s:
                    M[pos[new]][col] -= s * a
    return M


def invariant_forms(g, h, k):
    """Basis of ``(Lambda^k g^*)^h``, the joint kernel of ``L_x`` for ``x`` in ``h``."""
    n = g.dim
    size = comb(n, k)
    rows = []
    for x in h.basis:
        rows.extend(lie_derivative_matrix(g, x, k))
    kernel = linalg.nullspace(rows, size) if rows else linalg.nullspace([], size)
    return [Form.from_vector(n, k, v, exact=True) for v in kernel]
