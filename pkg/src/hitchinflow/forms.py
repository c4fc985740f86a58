"""Exterior forms over a fixed dual basis ``e^1, ..., e^n``.

A :class:`Form` stores its coefficients on strictly increasing multi-indices
(0-based internally, printed 1-based as ``e135``).  Coefficients are either
exact rationals (``Fraction``/``int``) or binary floats; the two modes never
mix implicitly.  Evaluation follows the determinant convention, so
``e^{12}(e_1, e_2) = 1``.
"""

from fractions import Fraction
from itertools import combinations
from numbers import Integral

import numpy as np

__all__ = [
    "Form",
    "sort_sign",
    "multi_indices",
    "format_index",
    "ModeError",
]


class ModeError(TypeError):
    """Raised when exact and floating forms are combined without conversion."""


def sort_sign(idx):
    """Sort a tuple of indices, returning ``(sorted, sign)``.

    ``sign`` is 0 (and ``sorted`` is None) when an index repeats.
    """
    idx = list(idx)
    if len(set(idx)) != len(idx):
        return None, 0
    sign = 1
    # insertion sort, counting transpositions
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    return tuple(idx), sign


def multi_indices(n, k):
    """All strictly increasing ``k``-tuples from ``range(n)``, lexicographic."""
    return list(combinations(range(n), k))


def format_index(idx, n=None):
    labels = [str(i + 1) for i in idx]
    if n is not None and n >= 10:
        return "e{" + ",".join(labels) + "}"
    return "e" + "".join(labels)


def _is_exact_scalar(c):
    return isinstance(c, (Fraction, Integral)) and not isinstance(c, bool)


def _is_float_scalar(c):
    return isinstance(c, (float, np.floating))


class Form:
    """An element of ``Lambda^k`` of the dual of an ``n``-dimensional space."""

    __slots__ = ("dim", "degree", "exact", "_terms", "_hash")

    def __init__(self, dim, degree, terms=None, exact=None):
        if not 0 <= degree:
            raise ValueError("negative degree")
        if degree > dim:
            raise ValueError("degree exceeds dimension")
        clean = {}
        mode = exact
        for idx, c in (terms or {}).items():
            idx = tuple(int(i) for i in idx)
            if len(idx) != degree:
                raise ValueError(f"multi-index {idx} has length {len(idx)}, expected {degree}")
            if any(not 0 <= i < dim for i in idx):
                raise ValueError(f"index out of range in {idx} for dimension {dim}")
            if _is_exact_scalar(c):
                c_mode = True
                c = Fraction(c)
            elif _is_float_scalar(c):
                c_mode = False
                c = float(c)
            else:
                raise TypeError(f"unsupported coefficient type {type(c).__name__}")
            if mode is None:
                mode = c_mode
            elif mode != c_mode:
                raise ModeError("mixed exact and floating coefficients")
            s_idx, sign = sort_sign(idx)
            if sign == 0:
                continue
            clean[s_idx] = clean.get(s_idx, 0) + sign * c
        self.dim = dim
        self.degree = degree
        self.exact = True if mode is None else mode
        self._terms = {i: c for i, c in sorted(clean.items()) if c != 0}
        self._hash = None

    # construction -------------------------------------------------------

    @classmethod
    def zero(cls, dim, degree, exact=True):
        return cls(dim, degree, {}, exact=exact)

    @classmethod
    def basis(cls, dim, idx, coeff=1):
        """Single term ``coeff * e^{idx}`` with 0-based ``idx``."""
        return cls(dim, len(idx), {tuple(idx): coeff})

    @classmethod
    def parse(cls, text, dim):
        """Parse term syntax such as ``"e135 - e146 + 1/2*e236"``."""
        from .salamon import parse_form

        return parse_form(text, dim)

    @classmethod
    def from_vector(cls, dim, degree, vec, exact=None):
        """Inverse of :meth:`to_vector` (lexicographic basis of Lambda^k)."""
        idxs = multi_indices(dim, degree)
        if len(vec) != len(idxs):
            raise ValueError("vector length does not match dim C(n, k)")
        if exact is None:
            exact = all(_is_exact_scalar(c) for c in vec)
        if exact:
            vals = [Fraction(c) for c in vec]
        else:
            vals = [float(c) for c in vec]
        return cls(dim, degree, dict(zip(idxs, vals)), exact=exact)

    # views ---------------------------------------------------------------

    @property
    def terms(self):
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __getitem__(self, idx):
        s_idx, sign = sort_sign(idx)
        if sign == 0:
            return self._zero_scalar()
        return sign * self._terms.get(s_idx, self._zero_scalar())

    def _zero_scalar(self):
        return Fraction(0) if self.exact else 0.0

    def to_vector(self):
        """Coefficients on the lexicographic basis of Lambda^k."""
        z = self._zero_scalar()
        return [self._terms.get(i, z) for i in multi_indices(self.dim, self.degree)]

    def to_array(self):
        return np.array([float(c) for c in self.to_vector()])

    def is_zero(self):
        return not self._terms

    def norm(self):
        """Euclidean norm of the coefficient vector (a float)."""
        return float(np.sqrt(sum(float(c) ** 2 for c in self._terms.values())))

    # mode conversion -----------------------------------------------------

    def to_float(self):
        if not self.exact:
            return self
        return Form(self.dim, self.degree, {i: float(c) for i, c in self._terms.items()}, exact=False)

    def to_exact(self):
        """Exact form with the binary value of every float coefficient."""
        if self.exact:
            return self
        return Form(self.dim, self.degree, {i: Fraction(c) for i, c in self._terms.items()}, exact=True)

    # arithmetic ----------------------------------------------------------

    def _check_compatible(self, other):
        if not isinstance(other, Form):
            return NotImplemented
        if self.dim != other.dim or self.degree != other.degree:
            raise ValueError(
                f"cannot add a {other.degree}-form on R^{other.dim} to a {self.degree}-form on R^{self.dim}"
            )
        if self.exact != other.exact and not (self.is_zero() or other.is_zero()):
            raise ModeError("mixed exact and floating forms; convert explicitly")
        return True

    def _combine(self, other, sign):
        out = dict(self._terms)
        for i, c in other._terms.items():
            out[i] = out.get(i, 0) + sign * c
        # a zero operand adopts the mode of the other side
        exact = other.exact if self.is_zero() else self.exact
        if exact != other.exact:
            out = {i: (Fraction(c) if exact else float(c)) for i, c in out.items()}
        return Form(self.dim, self.degree, out, exact=exact)

    def __add__(self, other):
        if self._check_compatible(other) is NotImplemented:
            return NotImplemented
        return self._combine(other, 1)

    def __sub__(self, other):
        if self._check_compatible(other) is NotImplemented:
            return NotImplemented
        return self._combine(other, -1)

    def __neg__(self):
        return Form(self.dim, self.degree, {i: -c for i, c in self._terms.items()}, exact=self.exact)

    def __pos__(self):
        return self

    def _scalar(self, s):
        if isinstance(s, bool):
            raise TypeError("boolean scalar")
        if isinstance(s, Integral):
            return Fraction(s) if self.exact else float(s)
        if self.exact and isinstance(s, Fraction):
            return s
        if not self.exact and _is_float_scalar(s):
            return float(s)
        raise ModeError(f"scalar of type {type(s).__name__} does not match form mode")

    def __mul__(self, s):
        if isinstance(s, Form):
            return NotImplemented
        s = self._scalar(s)
        return Form(self.dim, self.degree, {i: s * c for i, c in self._terms.items()}, exact=self.exact)

    __rmul__ = __mul__

    def __truediv__(self, s):
        s = self._scalar(s)
        return Form(self.dim, self.degree, {i: c / s for i, c in self._terms.items()}, exact=self.exact)

    def __xor__(self, other):
        from .exterior import wedge

        return wedge(self, other)

    def __eq__(self, other):
        if not isinstance(other, Form):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.degree == other.degree
            and self._terms == other._terms
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.dim, self.degree, tuple(self._terms.items())))
        return self._hash

    def allclose(self, other, atol=1e-12):
        if self.dim != other.dim or self.degree != other.degree:
            return False
        keys = set(self._terms) | set(other._terms)
        return all(abs(float(self[k]) - float(other[k])) <= atol for k in keys)

    # evaluation ----------------------------------------------------------

    def __call__(self, *vectors):
        """Evaluate on ``k`` vectors given as coefficient sequences."""
        if len(vectors) != self.degree:
            raise ValueError(f"a {self.degree}-form takes {self.degree} arguments")
        total = self._zero_scalar()
        for idx, c in self._terms.items():
            sub = [[v[i] for v in vectors] for i in idx]
            total += c * _det(sub)
        return total

    def __repr__(self):
        return f"Form({self.dim}, {self.degree}, {self.to_string()!r})"

    def to_string(self):
        from .salamon import format_form

        return format_form(self)


def _det(m):
    k = len(m)
    if k == 0:
        return 1
    if k == 1:
        return m[0][0]
    if k == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    total = 0
    for j in range(k):
        if m[0][j] == 0:
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        total += (-1) ** j * m[0][j] * _det(minor)
    return total
