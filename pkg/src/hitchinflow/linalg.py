"""Exact linear algebra over the rationals.

Matrices are plain lists of rows.  Elimination is fraction-free (Bareiss)
on integer-scaled rows; pivots are chosen by smallest column index and then
smallest row index, so every basis returned here is deterministic.
"""

from fractions import Fraction
from math import gcd, lcm, isqrt

__all__ = [
    "to_fraction",
    "echelon",
    "rank",
    "nullspace",
    "span_basis",
    "solve",
    "det",
    "inverse",
    "matmul",
    "transpose",
    "identity",
    "in_span",
    "exact_root",
    "is_positive_definite",
]


def to_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


def _integer_row(row):
    den = 1
    for x in row:
        den = lcm(den, x.denominator)
    ints = [int(x * den) for x in row]
    g = 0
    for v in ints:
        g = gcd(g, v)
    if g > 1:
        ints = [v // g for v in ints]
    return ints


def echelon(rows, ncols=None):
    """Fraction-free row echelon form.

    Returns ``(E, pivots)`` where ``E`` holds integer rows in echelon shape
    (only the nonzero rows) and ``pivots`` the pivot column of each row.
    """
    rows = [[to_fraction(x) for x in r] for r in rows]
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    m = [_integer_row(r) for r in rows if any(x != 0 for x in r)]
    pivots = []
    prev = 1
    r = 0
    for c in range(ncols):
        if r == len(m):
            break
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        piv = m[r][c]
        for i in range(r + 1, len(m)):
            a = m[i][c]
            m[i] = [(piv * m[i][j] - a * m[r][j]) // prev for j in range(ncols)]
        prev = piv
        pivots.append(c)
        r += 1
    return [_integer_row([Fraction(x) for x in row]) for row in m[:r]], pivots


def rank(rows, ncols=None):
    if not rows:
        return 0
    return len(echelon(rows, ncols)[1])


def _reduced(rows, ncols):
    E, pivots = echelon(rows, ncols)
    R = [[Fraction(x) for x in row] for row in E]
    for i, c in enumerate(pivots):
        p = R[i][c]
        R[i] = [x / p for x in R[i]]
        for k in range(len(R)):
            if k != i and R[k][c] != 0:
                f = R[k][c]
                R[k] = [a - f * b for a, b in zip(R[k], R[i])]
    return R, pivots


def nullspace(rows, ncols=None):
    """Basis of ``{x : rows @ x = 0}``, one vector per free column.

    The vector for free column ``j`` has a 1 in position ``j`` and zeros in
    every other free position.
    """
    if ncols is None:
        if not rows:
            raise ValueError("ncols required for an empty matrix")
        ncols = len(rows[0])
    if not rows:
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    R, pivots = _reduced(rows, ncols)
    free = [j for j in range(ncols) if j not in pivots]
    basis = []
    for j in free:
        v = [Fraction(0)] * ncols
        v[j] = Fraction(1)
        for i, c in enumerate(pivots):
            v[c] = -R[i][j]
        basis.append(v)
    return basis


def span_basis(vectors, ncols=None):
    """Reduced row echelon basis of the span of ``vectors``."""
    vectors = list(vectors)
    if not vectors:
        return []
    if ncols is None:
        ncols = len(vectors[0])
    R, _ = _reduced(vectors, ncols)
    return R


def in_span(v, basis):
    if not basis:
        return all(to_fraction(x) == 0 for x in v)
    return rank(list(basis) + [list(v)]) == rank(basis)


def solve(A, b):
    """One exact solution of ``A x = b`` or ``None`` if inconsistent."""
    n = len(A[0])
    aug = [list(row) + [bi] for row, bi in zip(A, b)]
    R, pivots = _reduced(aug, n + 1)
    if n in pivots:
        return None
    x = [Fraction(0)] * n
    for i, c in enumerate(pivots):
        x[c] = R[i][n]
    return x


def det(A):
    n = len(A)
    if n == 0:
        return Fraction(1)
    m = [[to_fraction(x) for x in row] for row in A]
    sign = 1
    result = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if m[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            sign = -sign
        piv = m[c][c]
        result *= piv
        for i in range(c + 1, n):
            f = m[i][c] / piv
            if f:
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return sign * result


def identity(n):
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def inverse(A):
    n = len(A)
    aug = [list(map(to_fraction, row)) + e for row, e in zip(A, identity(n))]
    R, pivots = _reduced(aug, 2 * n)
    if len(pivots) < n or pivots[:n] != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return [row[n:] for row in R[:n]]


def matmul(A, B):
    Bt = list(zip(*B))
    return [[sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in Bt] for row in A]


def transpose(A):
    return [list(col) for col in zip(*A)]


def _int_root(n, k):
    if n < 0:
        return None
    r = round(n ** (1.0 / k)) if n < 2**1000 else None
    if r is None:
        lo, hi = 0, 1 << (n.bit_length() // k + 1)
        while lo < hi:
            mid = (lo + hi) // 2
            if mid**k < n:
                lo = mid + 1
            else:
                hi = mid
        r = lo
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**k == n:
            return cand
    return None


def exact_root(q, k):
    """Real ``k``-th root of a rational if it is rational, else ``None``.

    Negative ``q`` is allowed for odd ``k`` (real branch).
    """
    q = to_fraction(q)
    if q < 0:
        if k % 2 == 0:
            return None
        r = exact_root(-q, k)
        return None if r is None else -r
    if k == 2:
        a, b = isqrt(q.numerator), isqrt(q.denominator)
        if a * a == q.numerator and b * b == q.denominator:
            return Fraction(a, b)
        return None
    a, b = _int_root(q.numerator, k), _int_root(q.denominator, k)
    if a is None or b is None:
        return None
    return Fraction(a, b)


def is_positive_definite(A):
    """Sylvester's criterion on leading principal minors (exact)."""
    n = len(A)
    for i in range(n):
        for j in range(i):
            if to_fraction(A[i][j]) != to_fraction(A[j][i]):
                return False
    return all(det([row[:k] for row in A[:k]]) > 0 for k in range(1, n + 1))
