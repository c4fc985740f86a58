import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from conftest import algebra
from hitchinflow import gstruct
from hitchinflow.exterior import pullback
from hitchinflow.forms import Form
from hitchinflow.lie import ce_differential
from hitchinflow.numeric import compound, d_matrix, exterior, g2_data, g2_star_derivative, su3_data

PHI0 = gstruct.standard_g2().to_array()


def near_identity(n, draw, size=0.3):
    vals = draw(st.lists(st.floats(-size, size), min_size=n * n, max_size=n * n))
    return np.eye(n) + np.array(vals).reshape(n, n)


@st.composite
def g2_forms(draw):
    A = near_identity(7, draw)
    return pullback(A.tolist(), gstruct.standard_g2().to_float()).to_array()


def test_d_matrix_matches_ce_differential():
    g = algebra("sl2c.lie")
    ext = exterior(6)
    for k in range(5):
        D = d_matrix(g, k)
        for col, I in enumerate(ext.idx[k]):
            d = ce_differential(g, Form.basis(6, I)).to_array()
            assert np.array_equal(D[:, col], d)


@given(st.data())
def test_compound_matches_pullback(data):
    A = near_identity(6, data.draw, size=1.0)
    f = np.array(data.draw(st.lists(st.floats(-2, 2), min_size=20, max_size=20)))
    exact = pullback(A.tolist(), Form.from_vector(6, 3, list(f), exact=False)).to_array()
    with np.errstate(divide="ignore"):  # singular minors are fine here
        C = compound(A, 3)
    assert np.allclose(C.T @ f, exact, atol=1e-10)


@given(st.data())
def test_su3_data_agrees_with_exact_route(data):
    A = near_identity(6, data.draw)
    w, r = gstruct.standard_su3()
    w2 = pullback(A.tolist(), w.to_float())
    r2 = pullback(A.tolist(), r.to_float())
    K, lam, J, rhohat = su3_data(r2.to_array(), w2.to_array())
    assert np.isclose(lam, gstruct.su3_lambda(r2), rtol=1e-10)
    Je = gstruct.su3_J(r2, gstruct.su3_orientation(w2)).to_array()
    assert np.allclose(J, Je, atol=1e-9)
    assert np.allclose(rhohat, gstruct.su3_rhohat(r2, gstruct.su3_orientation(w2)).to_array(), atol=1e-9)


def test_g2_data_standard():
    g, sign, star = g2_data(PHI0)
    assert np.allclose(g, np.eye(7), atol=1e-14) and sign == 1
    assert np.allclose(star, gstruct.g2_star(gstruct.standard_g2()).to_array(), atol=1e-14)


@given(g2_forms())
def test_g2_star_float_matches_exact_route(phi):
    _, _, star = g2_data(phi)
    ref = gstruct.g2_star(Form.from_vector(7, 3, list(phi), exact=False)).to_array()
    assert np.allclose(star, ref, atol=1e-9)


@given(g2_forms(), st.data())
def test_star_derivative_matches_finite_differences(phi, data):
    direction = np.array(data.draw(st.lists(st.floats(-1, 1), min_size=35, max_size=35)))
    if np.linalg.norm(direction) < 1e-3:
        direction[0] = 1.0
    D = g2_star_derivative(phi)
    h = 1e-5
    fd = (g2_data(phi + h * direction)[2] - g2_data(phi - h * direction)[2]) / (2 * h)
    assert np.allclose(D @ direction, fd, atol=1e-6 * max(1.0, np.abs(fd).max()))


def test_star_derivative_on_phi_itself():
    # *phi is homogeneous of degree 4/3 in phi
    D = g2_star_derivative(PHI0)
    _, _, star = g2_data(PHI0)
    assert np.allclose(D @ PHI0, 4 / 3 * star, atol=1e-12)
