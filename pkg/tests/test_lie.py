from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import algebra
from hitchinflow.forms import Form, multi_indices
from hitchinflow.lie import (
    LieAlgebra,
    Subalgebra,
    ce_differential,
    central_series,
    derived_algebra,
    invariant_forms,
    is_solvable,
    jacobi_check,
)
from hitchinflow.salamon import ParseError, parse_salamon, print_salamon

N65 = "dim 6; d e5 = e13 + e24; d e6 = e14 - e23;"
SU2 = "dim 3; d e1 = e23; d e2 = -e13; d e3 = e12;"


def unit(n, i):
    return [Fraction(int(j == i)) for j in range(n)]


def brute_bracket_from_differentials(dim, diffs):
    """[e_i, e_j] = -sum_k (d e^k)(e_i, e_j) e_k, straight from the definition."""
    out = {}
    for i, j in combinations(range(dim), 2):
        v = [Fraction(0)] * dim
        for k, form in diffs.items():
            v[k] = -form[(i, j)]
        out[(i, j)] = v
    return out


def test_parse_n65_brackets():
    g = parse_salamon(N65)
    expected = {(0, 2): {4: -1}, (0, 3): {5: -1}, (1, 2): {5: 1}, (1, 3): {4: -1}}
    for i, j in combinations(range(6), 2):
        want = [Fraction(0)] * 6
        for k, c in expected.get((i, j), {}).items():
            want[k] = Fraction(c)
        assert g.bracket(unit(6, i), unit(6, j)) == want, (i, j)


def test_parse_matches_brute_force_bracket_rule():
    g = parse_salamon(N65)
    diffs = {4: Form.parse("e13 + e24", 6), 5: Form.parse("e14 - e23", 6)}
    for (i, j), v in brute_bracket_from_differentials(6, diffs).items():
        assert g.bracket(unit(6, i), unit(6, j)) == v


def test_abelian_parse():
    g = parse_salamon("dim 5;")
    assert g.is_abelian()
    assert all(c == 0 for i, j in combinations(range(5), 2) for c in g.bracket(unit(5, i), unit(5, j)))


def test_su2_jacobi_ok():
    assert jacobi_check(parse_salamon(SU2)).ok


def test_jacobi_mutated_constant_fails_with_witness():
    # [e1,e2]=e3, [e1,e3]=e2, [e2,e3]=e2
    g = LieAlgebra(3, {(0, 1): {2: 1}, (0, 2): {1: 1}, (1, 2): {1: 1}})
    rep = jacobi_check(g)
    assert not rep.ok
    assert (0, 1, 2) in rep.witnesses


def test_jacobi_fixtures():
    for name in ("n65.lie", "sl2c.lie", "h3r3.lie", "a54r.lie", "n64.lie", "r7.lie"):
        assert jacobi_check(algebra(name)).ok, name


def test_ce_differential_examples():
    g = parse_salamon(N65)
    assert ce_differential(g, Form.basis(6, (4,))) == Form.parse("e13 + e24", 6)
    s = algebra("sl2c.lie")
    assert ce_differential(s, Form.basis(6, (0,))) == Form.parse("e23 - e56", 6)


@pytest.mark.parametrize("name", ["n65.lie", "sl2c.lie", "h3r4.lie", "n65r.lie"])
def test_d_squared_zero_every_basis_form(name):
    g = algebra(name)
    for k in range(g.dim - 1):
        for idx in multi_indices(g.dim, k):
            f = Form.basis(g.dim, idx)
            assert ce_differential(g, ce_differential(g, f)).is_zero()


@given(st.lists(st.integers(-3, 3), min_size=20, max_size=20))
def test_leibniz_rule(coeffs):
    g = algebra("sl2c.lie")
    idx1 = multi_indices(6, 1)
    idx2 = multi_indices(6, 2)
    a = Form(6, 1, {i: c for i, c in zip(idx1, coeffs[:6])})
    b = Form(6, 2, {i: c for i, c in zip(idx2, coeffs[6:])})
    lhs = ce_differential(g, a ^ b)
    rhs = (ce_differential(g, a) ^ b) - (a ^ ce_differential(g, b))
    assert lhs == rhs


def test_central_series_examples():
    h3 = parse_salamon("dim 3; d e3 = e12;")
    cs = central_series(h3)
    assert cs.dims == (0, 1, 3) and cs.is_nilpotent
    cs = central_series(parse_salamon(N65))
    assert cs.dims == (0, 2, 6) and cs.is_nilpotent
    cs = central_series(LieAlgebra.abelian(4))
    assert cs.dims == (0, 4) and cs.is_nilpotent
    assert not central_series(algebra("sl2c.lie")).is_nilpotent


def _span_equal(a, b, n):
    from hitchinflow import linalg

    a, b = [list(v) for v in a], [list(v) for v in b]
    return linalg.rank(a, n) == linalg.rank(b, n) == linalg.rank(a + b, n)


def test_derived_algebra_examples():
    h3 = parse_salamon("dim 3; d e3 = e12;")
    assert _span_equal(derived_algebra(h3), [unit(3, 2)], 3)
    assert _span_equal(derived_algebra(parse_salamon(N65)), [unit(6, 4), unit(6, 5)], 6)
    assert len(derived_algebra(LieAlgebra.abelian(3))) == 0
    assert len(derived_algebra(algebra("sl2c.lie"))) == 6


def test_solvability():
    assert is_solvable(parse_salamon(N65))
    assert not is_solvable(algebra("sl2c.lie"))


def test_invariant_forms_sl2c():
    g = algebra("sl2c.lie")
    h = Subalgebra.spanned_by(g, (0, 1, 2))
    two = invariant_forms(g, h, 2)
    three = invariant_forms(g, h, 3)
    assert len(two) == 1 and len(three) == 4
    want2 = [Form.parse("e14 + e25 + e36", 6)]
    want3 = [Form.parse(s, 6) for s in ("e123", "e456", "e126 - e135 + e234", "e156 - e246 + e345")]
    assert _span_equal([f.to_vector() for f in two], [f.to_vector() for f in want2], 15)
    assert _span_equal([f.to_vector() for f in three], [f.to_vector() for f in want3], 20)


def test_invariant_forms_trivial_subalgebra():
    g = algebra("n65.lie")
    assert len(invariant_forms(g, Subalgebra(g, ()), 3)) == 20


def test_subalgebra_rejects_non_closed_span():
    g = algebra("sl2c.lie")
    with pytest.raises(ValueError):
        Subalgebra.spanned_by(g, (0, 1))


@pytest.mark.parametrize("text", [N65, SU2, "dim 5;", "dim 7; d e7 = 1/2*e12 - 3*e34;"])
def test_print_parse_roundtrip(text):
    g = parse_salamon(text)
    assert parse_salamon(print_salamon(g)) == g


@pytest.mark.parametrize(
    "bad",
    ["dim 3; d e4 = e12;", "d e1 = e23;", "dim 3; d e1 = e11;", "dim 3; d e1 = e23", "dim 3; d e1 = e2;"],
)
def test_parse_errors(bad):
    with pytest.raises(ParseError):
        parse_salamon(bad)
