from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import algebra
from hitchinflow import linalg
from hitchinflow.exterior import contract, pullback, wedge
from hitchinflow.forms import Form, multi_indices
from hitchinflow.gstruct import (
    G2Structure,
    SU2Structure,
    SU3Structure,
    StabilityError,
    g2_metric,
    g2_star,
    is_cocalibrated,
    is_half_flat,
    is_hypo,
    lift_g2_to_spin7,
    lift_su3_to_g2,
    standard_g2,
    standard_su2,
    standard_su3,
    su2_common_kernel,
    su2_validate,
    su3_J,
    su3_K,
    su3_lambda,
    su3_metric,
    su3_orientation,
    su3_rhohat,
    su3_validate,
)
from hitchinflow.lie import LieAlgebra, ce_differential

rats = st.fractions(min_value=-3, max_value=3, max_denominator=5)


def family_rho(b1, b2, b3, b4=None):
    b4 = -b1 if b4 is None else b4
    parts = [("e123", b1), ("e456", b2), ("e126 - e135 + e234", b3), ("e156 - e246 + e345", b4)]
    out = Form.zero(6, 3)
    for text, c in parts:
        out = out + Form.parse(text, 6) * c
    return out


def lam_formula(b1, b2, b3):
    return b1**2 * (b2 + b3) ** 2 - 4 * (b1**2 + b3**2) * (b1**2 - b2 * b3)


def test_K_standard_squares_to_minus_four():
    K = su3_K(standard_su3()[1])
    K2 = linalg.matmul(K.matrix, K.matrix)
    assert K2 == [[Fraction(-4 * (i == j)) for j in range(6)] for i in range(6)]


@given(rats, rats, rats)
def test_K_family_column(b1, b2, b3):
    K = su3_K(family_rho(b1, b2, b3)).matrix
    col = [K[i][0] for i in range(6)]
    assert col == [b1 * (b2 + b3), 0, 0, 2 * (b1**2 + b3**2), 0, 0]


def test_K_zero():
    K = su3_K(Form.zero(6, 3)).matrix
    assert all(x == 0 for row in K for x in row)


def test_lambda_examples():
    assert su3_lambda(standard_su3()[1]) == -4
    assert su3_lambda(family_rho(0, 1, 1)) == 4


def test_J_standard():
    w, r = standard_su3()
    J = su3_J(r, su3_orientation(w)).matrix
    for a, b in ((0, 1), (2, 3), (4, 5)):
        assert abs(J[b][a]) == 1 and all(J[i][a] == 0 for i in range(6) if i != b)
    assert su3_J(su3_rhohat(r, 1), 1).matrix == J


@given(rats, rats, rats, st.sampled_from([1, -1]))
def test_J_family_display(b1, b2, b3, eps):
    lam = lam_formula(b1, b2, b3)
    assume(lam < 0)
    a = eps  # only the sign of the omega coefficient matters for J
    omega = Form.parse("e14 + e25 + e36", 6) * a
    J = np.array(su3_J(family_rho(b1, b2, b3), su3_orientation(omega)).to_array())
    s = -eps / np.sqrt(-float(lam))
    want = np.zeros((6, 6))
    for i in range(3):
        want[i, i] = s * float(b1 * (b2 + b3))
        want[i + 3, i] = s * float(2 * (b1**2 + b3**2))
        want[i, i + 3] = s * float(2 * (b2 * b3 - b1**2))
        want[i + 3, i + 3] = -s * float(b1 * (b2 + b3))
    assert np.allclose(J, want, atol=1e-12 * max(1.0, np.abs(want).max()))
    assert np.allclose(J @ J, -np.eye(6), atol=1e-10)


def test_rhohat_standard():
    w, r = standard_su3()
    rh = su3_rhohat(r, su3_orientation(w))
    target = Form.parse("e136 + e145 + e235 - e246", 6)
    assert rh in (target, -target)
    # brute force: rho_hat(X, Y, Z) = rho(JX, JY, JZ) on every basis triple
    J = su3_J(r, su3_orientation(w)).matrix
    col = lambda j: [J[i][j] for i in range(6)]
    for I in multi_indices(6, 3):
        assert rh[I] == r(*(col(j) for j in I))
    # with g = omega(J., .) positive the wedge comes out as -(2/3) omega^3
    www = wedge(wedge(w, w), w)
    assert wedge(r, rh) == www * Fraction(-2, 3)
    assert su3_rhohat(rh, su3_orientation(w)) == -r


def test_metric_standard_identity():
    w, r = standard_su3()
    assert su3_metric(w, r).matrix == tuple(tuple(Fraction(int(i == j)) for j in range(6)) for i in range(6))


def test_metric_family_identity_point():
    omega = Form.parse("e14 + e25 + e36", 6)
    g = su3_metric(omega, family_rho(0, -1, 1))
    assert g.matrix == tuple(tuple(Fraction(int(i == j)) for j in range(6)) for i in range(6))


@st.composite
def unimodular(draw, n):
    """Product of rational shears and a signed permutation: determinant +-1, exact."""
    M = linalg.identity(n)
    for _ in range(draw(st.integers(1, 6))):
        i, j = draw(st.integers(0, n - 1)), draw(st.integers(0, n - 1))
        if i == j:
            continue
        E = linalg.identity(n)
        E[i][j] = draw(st.fractions(min_value=-2, max_value=2, max_denominator=3))
        M = linalg.matmul(M, E)
    return M


@given(unimodular(6))
def test_metric_transforms_by_pullback(A):
    # A^* of the standard pair is a normalized SU(3)-structure with metric A^T A
    w, r = standard_su3()
    w2, r2 = pullback(A, w), pullback(A, r)
    rep = su3_validate(w2, r2)
    assert rep.ok
    assert su3_metric(w2, r2).matrix == tuple(map(tuple, linalg.matmul(linalg.transpose(A), A)))
    # omega ∧ rho_hat = 0 is not one of the defining conditions; it follows
    assert wedge(w2, su3_rhohat(r2, su3_orientation(w2))).is_zero()


def test_su3_validate_examples():
    w, r = standard_su3()
    rep = su3_validate(w, r)
    assert rep.ok and rep.ratio == 1
    rep = su3_validate(w * 2, r)
    assert rep.nondegenerate and rep.stable and rep.compatible and rep.positive
    assert not rep.normalized and rep.ratio == Fraction(1, 8)
    assert not su3_validate(w, Form.parse("e123", 6)).stable
    with pytest.raises(StabilityError):
        SU3Structure(w * 2, r)


def test_su2_examples():
    s = standard_su2()
    rep = su2_validate(s)
    assert rep.ok and list(rep.kernel) == [0, 0, 0, 0, 1]
    bad = SU2Structure(s.alpha, s.omega1, s.omega1, s.omega3)
    assert not su2_validate(bad).ok
    # the definition only asks for an adapted basis: 2 omega_i is the model after rescaling e1..e4
    scaled = SU2Structure(s.alpha, s.omega1 * 2, s.omega2 * 2, s.omega3 * 2)
    assert su2_validate(scaled).ok
    assert len(su2_common_kernel(scaled)) == 1


def test_su2_wrong_handedness():
    s = standard_su2()
    swapped = SU2Structure(s.alpha, s.omega1, s.omega3, s.omega2)
    assert not su2_validate(swapped).ok


def test_closure_predicates():
    assert is_hypo(LieAlgebra.abelian(5), standard_su2())
    assert is_cocalibrated(LieAlgebra.abelian(7), standard_g2())
    g = algebra("sl2c.lie")
    omega = Form.parse("e14 + e25 + e36", 6)
    assert is_half_flat(g, omega, family_rho(0, -1, 1))
    assert is_half_flat(g, omega, family_rho(1, 0, 0))
    assert not ce_differential(g, family_rho(1, 0, 0, b4=1)).is_zero()


def test_g2_standard():
    g, vol = g2_metric(standard_g2())
    assert g.matrix == tuple(tuple(Fraction(int(i == j)) for j in range(7)) for i in range(7))
    assert vol == Form.parse("e1234567", 7)


@pytest.mark.parametrize("s", [Fraction(8), Fraction(1, 27), Fraction(64, 125)])
def test_g2_scaling(s):
    g, _ = g2_metric(standard_g2() * s)
    c = linalg.exact_root(s, 3) ** 2
    assert g.matrix == tuple(tuple(c * int(i == j) for j in range(7)) for i in range(7))


def test_g2_scaling_irrational_float():
    g, _ = g2_metric(standard_g2() * 2)
    assert np.allclose(g.to_array(), 2 ** (2 / 3) * np.eye(7), atol=1e-12)


def test_g2_anchor():
    assert g2_star(standard_g2()) == Form.parse("e1234 + e1256 + e3456 + e1367 + e1457 + e2357 - e2467", 7)


def test_lift_su3_to_g2():
    w, r = standard_su3()
    s = lift_su3_to_g2(w, r)
    assert s.phi == standard_g2()
    assert s.metric.matrix == tuple(tuple(Fraction(int(i == j)) for j in range(7)) for i in range(7))
    g7 = LieAlgebra.abelian(7)
    assert ce_differential(g7, s.phi).is_zero() and ce_differential(g7, s.star).is_zero()


def test_lift_g2_to_spin7_model_up_to_orientation_of_dt():
    Phi = lift_g2_to_spin7(standard_g2()).Phi
    model = Form.parse(
        "e1278 + e3478 + e5678 + e1358 - e1468 - e2368 - e2458"
        " + e1234 + e1256 + e3456 + e1367 + e1457 + e2357 - e2467",
        8,
    )
    flip = [[Fraction(int(i == j)) * (-1 if i == 7 else 1) for j in range(8)] for i in range(8)]
    assert pullback(flip, Phi) == model


def test_g2_rejects_degenerate():
    with pytest.raises(StabilityError):
        G2Structure(Form.parse("e123", 7))


@given(unimodular(7), st.data())
def test_g2_star_equivariant(A, data):
    phi = pullback(A, standard_g2())
    star = g2_star(phi)
    if linalg.det(A) > 0:
        assert star == pullback(A, g2_star(standard_g2()))
    x = [Fraction(data.draw(st.integers(-2, 2))) for _ in range(7)]
    # interior products commute with pullback: X ⌟ A^*w = A^*((A X) ⌟ w)
    AX = [sum(A[i][j] * x[j] for j in range(7)) for i in range(7)]
    assert contract(x, phi) == pullback(A, contract(AX, standard_g2()))
