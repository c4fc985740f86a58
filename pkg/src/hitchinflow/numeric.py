"""Floating-point kernels for the flow right-hand sides.

Forms are plain coefficient arrays on the lexicographic basis of
``Lambda^k``.  All index bookkeeping is precomputed once per dimension, so
the per-step cost is a handful of dense numpy operations.
"""

from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

from .forms import Form, sort_sign
from .lie import ce_differential

__all__ = ["Exterior", "exterior", "d_matrix", "compound", "su3_data", "g2_data", "g2_star_derivative"]


class Exterior:
    def __init__(self, n):
        self.n = n
        self.idx = [list(combinations(range(n), k)) for k in range(n + 1)]
        self.pos = [{I: r for r, I in enumerate(ix)} for ix in self.idx]
        self._wedge = {}
        self._contract = {}
        self._top = {}

    def size(self, k):
        return comb(self.n, k)

    def wedge_table(self, p, q):
        key = (p, q)
        if key not in self._wedge:
            ia, ib, ic, sg = [], [], [], []
            target = self.pos[p + q]
            for a, I in enumerate(self.idx[p]):
                for b, J in enumerate(self.idx[q]):
                    K, s = sort_sign(I + J)
                    if s:
                        ia.append(a)
                        ib.append(b)
                        ic.append(target[K])
                        sg.append(s)
            self._wedge[key] = tuple(np.array(x) for x in (ia, ib, ic, sg))
        return self._wedge[key]

    def wedge(self, a, p, b, q):
        ia, ib, ic, sg = self.wedge_table(p, q)
        out = np.zeros(self.size(p + q))
        np.add.at(out, ic, sg * a[ia] * b[ib])
        return out

    def wedge_left(self, a, p, q):
        """Matrix of ``b ↦ a ∧ b`` from ``Lambda^q`` to ``Lambda^{p+q}``."""
        ia, ib, ic, sg = self.wedge_table(p, q)
        M = np.zeros((self.size(p + q), self.size(q)))
        np.add.at(M, (ic, ib), sg * a[ia])
        return M

    def contraction(self, k):
        """Array ``C[i]`` with ``e_i ⌟`` as a matrix ``Lambda^k -> Lambda^{k-1}``."""
        if k not in self._contract:
            C = np.zeros((self.n, self.size(k - 1), self.size(k)))
            for col, I in enumerate(self.idx[k]):
                for p, i in enumerate(I):
                    C[i, self.pos[k - 1][I[:p] + I[p + 1:]], col] += (-1) ** p
            self._contract[k] = C
        return self._contract[k]

    def complement(self, k):
        """``(perm, sign)``: ``e^I ∧ e^{I^c} = sign[I] vol`` and ``perm[I]`` = position of ``I^c``."""
        if k not in self._top:
            perm = np.zeros(self.size(k), dtype=int)
            sign = np.zeros(self.size(k))
            full = tuple(range(self.n))
            for r, I in enumerate(self.idx[k]):
                Ic = tuple(i for i in full if i not in I)
                perm[r] = self.pos[self.n - k][Ic]
                sign[r] = sort_sign(I + Ic)[1]
            self._top[k] = (perm, sign)
        return self._top[k]

    def star_matrix(self, k, g, ginv_compound=None):
        """Hodge star ``Lambda^k -> Lambda^{n-k}`` for metric matrix ``g`` (orientation e^{1..n})."""
        root = np.sqrt(np.linalg.det(g))
        G = compound(np.linalg.inv(g), k, self) if ginv_compound is None else ginv_compound
        perm, sign = self.complement(k)
        S = np.zeros((self.size(self.n - k), self.size(k)))
        S[perm, :] = (sign * root)[:, None] * G
        return S

    def to_form(self, vec, k):
        return Form.from_vector(self.n, k, [float(x) for x in vec], exact=False)


@lru_cache(maxsize=None)
def exterior(n):
    return Exterior(n)


def compound(M, k, ext=None):
    """``k``-th compound matrix: entry ``(I, J)`` is ``det M[I, J]``."""
    n = M.shape[0]
    ext = ext or exterior(n)
    idx = np.array(ext.idx[k])
    if k == 0:
        return np.ones((1, 1))
    sub = M[idx[:, None, :, None], idx[None, :, None, :]]
    return np.linalg.det(sub)


def d_matrix(g, k):
    """Chevalley-Eilenberg differential ``Lambda^k -> Lambda^{k+1}`` as a float matrix."""
    return _d_matrix_cached(g, k).copy()


@lru_cache(maxsize=64)
def _d_matrix_cached(g, k):
    n = g.dim
    ext = exterior(n)
    M = np.zeros((ext.size(k + 1), ext.size(k)))
    for col, I in enumerate(ext.idx[k]):
        d = ce_differential(g, Form.basis(n, I))
        for J, c in d.items():
            M[ext.pos[k + 1][J], col] = float(c)
    return M


# --------------------------------------------------------------------------
# SU(3): K_rho, lambda, J, rho_hat


@lru_cache(maxsize=None)
def _k_tensor():
    """``T[i, j, a, b]`` with ``K_rho = sum T rho_a rho_b`` (columns ``K(e_j)``)."""
    ext = exterior(6)
    T = np.zeros((6, 6, 20, 20))
    C = ext.contraction(3)
    ia, ib, ic, sg = ext.wedge_table(2, 3)
    five = ext.idx[5]
    for j in range(6):
        for a in range(20):
            col = C[j, :, a]
            nz = np.nonzero(col)[0]
            for r in nz:
                sel = ia == r
                for b, c5, s in zip(ib[sel], ic[sel], sg[sel]):
                    missing = next(m for m in range(6) if m not in five[c5])
                    kap = 1 if missing % 2 == 0 else -1
                    T[missing, j, a, b] += kap * s * col[r]
    return T


def su3_data(rho, omega=None):
    """Return ``(K, lam, J, rhohat)`` for a float 3-form on R^6.

    The orientation is that of ``omega^3`` when ``omega`` is given, else
    ``e^{1..6}``.  Raises ValueError when ``lambda >= 0``.
    """
    K = np.einsum("ijab,a,b->ij", _k_tensor(), rho, rho)
    lam = np.trace(K @ K) / 6
    if not lam < 0:
        raise ValueError("lambda >= 0")
    o = 1.0
    if omega is not None:
        o = np.sign(omega_cubed(omega))
        if o == 0:
            raise ValueError("omega degenerate")
    J = o * K / np.sqrt(-lam)
    rhohat = compound(J, 3).T @ rho
    return K, lam, J, rhohat


def omega_cubed(omega):
    ext = exterior(6)
    w2 = ext.wedge(omega, 2, omega, 2)
    return ext.wedge(w2, 4, omega, 2)[0]


def two_form_matrix(omega, n):
    ext = exterior(n)
    W = np.zeros((n, n))
    for r, (i, j) in enumerate(ext.idx[2]):
        W[i, j] = omega[r]
        W[j, i] = -omega[r]
    return W


def su3_metric(omega, J):
    W = two_form_matrix(omega, 6)
    G = J.T @ W
    return (G + G.T) / 2


# --------------------------------------------------------------------------
# G2: B matrix, metric, Hodge star


@lru_cache(maxsize=None)
def _b_pairing():
    """``M[a, b, c]`` with ``B_ij = sum M (e_i ⌟ phi)_a (e_j ⌟ phi)_b phi_c``."""
    ext = exterior(7)
    ia, ib, ic, sg = ext.wedge_table(2, 2)
    perm, sign = ext.complement(4)
    M = np.zeros((21, 21, 35))
    # 4-form u wedge 3-form phi: top coefficient sum_K u_K phi_{K^c} sign_K
    np.add.at(M, (ia, ib, perm[ic]), sg * sign[ic])
    return M


def g2_data(phi, derivative=False):
    """Return ``(g, vol_sign, star_phi)`` for a float 3-form on R^7.

    With ``derivative=True`` the derivative of ``phi ↦ *phi`` is appended:
    splitting ``Lambda^3 = Lambda^3_1 + Lambda^3_7 + Lambda^3_27``
    orthogonally for the metric of ``phi``, it is ``*(4/3 pi_1 + pi_7 - pi_27)``.
    """
    ext = exterior(7)
    C = ext.contraction(3)
    c = np.einsum("iab,b->ia", C, phi)  # rows e_i ⌟ phi
    Mphi = np.einsum("abc,c->ab", _b_pairing(), phi)
    B = c @ Mphi @ c.T
    B = (B + B.T) / 2
    ev = np.linalg.eigvalsh(B)
    if ev.min() > 0:
        sign = 1.0
    elif ev.max() < 0:
        sign = -1.0
    else:
        raise ValueError("B not definite")
    detB = float(np.prod(ev))
    root = np.sign(detB) * abs(36 * detB) ** (1 / 9)
    g = B / root
    G3 = compound(np.linalg.inv(g), 3, ext)
    S = sign * ext.star_matrix(3, g, G3)
    star = S @ phi
    if not derivative:
        return g, sign, star
    V7 = np.einsum("iab,b->ai", ext.contraction(4), star)  # columns e_i ⌟ *phi
    P1 = np.outer(phi, G3 @ phi) / (phi @ G3 @ phi)
    P7 = V7 @ np.linalg.solve(V7.T @ G3 @ V7, V7.T @ G3)
    P27 = np.eye(35) - P1 - P7
    return g, sign, star, S @ (4 / 3 * P1 + P7 - P27)


def g2_star_derivative(phi):
    """Derivative of ``phi ↦ *phi`` at a G2 3-form, as a 35 x 35 matrix."""
    return g2_data(phi, derivative=True)[3]
