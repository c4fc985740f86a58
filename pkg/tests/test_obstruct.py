from fractions import Fraction

import pytest
import sympy as sp

from conftest import FIXTURES, algebra
from hitchinflow.obstruct import (
    N65_LIMITATION,
    NO_MATCH,
    NOT_SOLVABLE,
    DecompositionWitness,
    WitnessError,
    classify_obstructions,
    load_witness,
    parse_witness,
)
from hitchinflow.salamon import ParseError, parse_salamon


def unit(n, i):
    return [Fraction(int(j == i)) for j in range(n)]


def brute_central_dims(g):
    """Ascending central series by sympy linear algebra on the bracket table.

    g_(k+1) = {x : [x, e_j] in g_(k) for all j}; computed as a kernel of the
    stacked maps x -> [x, e_j] composed with the projection onto g / g_(k).
    """
    n = g.dim
    ad = [sp.Matrix([[g.bracket(unit(n, i), unit(n, j))[k] for i in range(n)] for k in range(n)]) for j in range(n)]
    # ad[j] * x = [x, e_j]
    span = sp.zeros(n, 0)
    dims = [0]
    while True:
        if span.shape[1]:
            q = sp.Matrix.hstack(*span.T.nullspace()).T  # rows kill span
        else:
            q = sp.eye(n)
        stacked = sp.Matrix.vstack(*[q * a for a in ad])
        ker = stacked.nullspace()
        d = len(ker)
        if d == dims[-1]:
            return tuple(dims)
        dims.append(d)
        span = sp.Matrix.hstack(*ker)
        if d == n:
            return tuple(dims)


@pytest.mark.parametrize(
    "name", ["h3r2.lie", "h3r3.lie", "h3r4.lie", "heis5.lie", "n64.lie", "n65.lie", "n65r.lie", "a54r.lie", "g7_e27.lie", "r7.lie"]
)
def test_invariants_match_brute_force(name):
    g = algebra(name)
    rep = classify_obstructions(g)
    assert tuple(rep.invariants["central_series_dims"]) == brute_central_dims(g)


# expected ids follow from the hypotheses and the brute-force central series
VERDICTS = [
    ("h3r2.lie", None, False, ["hypo-5"]),
    ("heis5.lie", None, False, ["hypo-5"]),
    ("r5.lie", None, False, ["hypo-5"]),
    ("h3r3.lie", None, False, ["g2-6"]),
    ("a54r.lie", None, False, ["g2-6"]),
    ("n64.lie", None, False, ["g2-6"]),
    ("n65.lie", None, False, ["g2-6"]),
    ("h3r4.lie", None, False, ["spin7-c"]),
    ("h3r4.lie", "h3r4_direct.witness", False, ["spin7-b", "spin7-c"]),
    ("r7.lie", None, False, ["spin7-c"]),
    ("g7_e27.lie", None, False, ["spin7-c"]),
    ("n65r.lie", "n65r_direct.witness", False, []),
    ("sl2c.lie", None, False, []),
    ("sl2c.lie", None, True, []),
]


@pytest.mark.parametrize("name, wit, assume, ids", VERDICTS)
def test_verdict_table(name, wit, assume, ids):
    g = algebra(name)
    w = load_witness(FIXTURES / wit, g.dim) if wit else None
    rep = classify_obstructions(g, w, assume_split_solvable=assume)
    assert rep.matched == ids


def test_n65_plus_r_explicit_non_match():
    g = algebra("n65r.lie")
    w = load_witness(FIXTURES / "n65r_direct.witness", 7)
    rep = classify_obstructions(g, w)
    assert rep.summary == NO_MATCH
    assert "case (b) not applicable: u is presented as n6,5" in rep.notes
    assert any(N65_LIMITATION in n for n in rep.notes)
    # dim g_(1) = 3 for n6,5 + R, so (c) does not rescue it
    assert rep.invariants["central_series_dims"][1] == 3


def test_sl2c_not_solvable():
    for flag in (False, True):
        rep = classify_obstructions(algebra("sl2c.lie"), assume_split_solvable=flag)
        assert rep.summary == NOT_SOLVABLE and not rep.statements
        assert not rep.invariants["solvable"]


def test_solvable_non_nilpotent_needs_assumption():
    g5 = parse_salamon("dim 5; d e1 = e15;")
    assert classify_obstructions(g5).invariants["split_solvable"] is None
    assert classify_obstructions(g5).matched == []
    rep = classify_obstructions(g5, assume_split_solvable=True)
    assert rep.matched == ["hypo-5"]
    assert rep.invariants["split_solvable_source"] == "assumed"


def test_semidirect_six_dim():
    # n6,4 = u ⋊ R e1 with u = span(e2..e6); inside u only [e2, e4] = -e6 survives
    g = algebra("n64.lie")
    w = DecompositionWitness(tuple(unit(6, i) for i in range(1, 6)), tuple(unit(6, 0)))
    rep = classify_obstructions(g, w)
    assert rep.witness["u_nilpotent"] and rep.witness["u_derived_dim"] == 1
    assert rep.matched == ["g2-6", "g2-6-semidirect"]


def test_spin7_case_a():
    # h3 + R^4 = u ⋊ R e1 with u = span(e2..e7) abelian and containing the center
    g = algebra("h3r4.lie")
    w = DecompositionWitness(tuple(unit(7, i) for i in range(1, 7)), tuple(unit(7, 0)), proper=True)
    rep = classify_obstructions(g, w)
    assert rep.matched == ["spin7-a", "spin7-c"]


def test_spin7_case_a_needs_properness():
    # u = span(e1..e6) misses the central e7, so the decomposition is not proper
    g = algebra("h3r4.lie")
    w = DecompositionWitness(tuple(unit(7, i) for i in range(6)), tuple(unit(7, 6)))
    rep = classify_obstructions(g, w)
    assert not rep.witness["proper"] and "spin7-a" not in rep.matched


def test_parse_witness_roundtrip_and_errors():
    w = parse_witness("ideal = e1, e2, e3, e4, e5, e6;\ncomplement = e7;\nsum = direct;", 7)
    assert w.sum == "direct" and len(w.ideal) == 6
    with pytest.raises(ParseError):
        parse_witness("ideal = e1;", 7)
    with pytest.raises((ParseError, WitnessError)):
        parse_witness("ideal = e1, e2, e3, e4, e5, e6;\ncomplement = e7;\nsum = weird;", 7)


@pytest.mark.parametrize(
    "ideal, comp, kind, msg",
    [
        ((0, 1, 2, 3, 4, 5), 0, "semidirect", "complement lies"),
        ((0, 1, 3, 4, 5, 6), 2, "semidirect", "not an ideal"),
        ((0, 1, 2, 3, 4), 6, "semidirect", "n - 1"),
    ],
)
def test_witness_invariants_enforced(ideal, comp, kind, msg):
    g = algebra("h3r4.lie")
    w = DecompositionWitness(tuple(unit(7, i) for i in ideal), tuple(unit(7, comp)), kind)
    with pytest.raises(WitnessError, match=msg):
        classify_obstructions(g, w)


def test_direct_sum_claim_checked():
    # [e1, e2] = -e3 so e1 does not commute with u = span(e2..e7)
    g = algebra("h3r4.lie")
    w = DecompositionWitness(tuple(unit(7, i) for i in range(1, 7)), tuple(unit(7, 0)), "direct")
    with pytest.raises(WitnessError):
        classify_obstructions(g, w)


def test_false_properness_claim():
    # u = span(e1, e2, e3, e4, e5, e7) misses the central e6
    g = algebra("h3r4.lie")
    w = DecompositionWitness(tuple(unit(7, i) for i in (0, 1, 2, 3, 4, 6)), tuple(unit(7, 5)), proper=True)
    with pytest.raises(WitnessError, match="properness"):
        classify_obstructions(g, w)


@pytest.mark.parametrize(
    "name, wit",
    [("h3r4.lie", "h3r4_direct.witness"), ("n65r.lie", "n65r_direct.witness")],
)
def test_witness_monotone(name, wit):
    g = algebra(name)
    bare = classify_obstructions(g)
    w = load_witness(FIXTURES / wit, g.dim)
    full = classify_obstructions(g, w)
    assert set(bare.matched) <= set(full.matched)


def test_report_dict_shape():
    d = classify_obstructions(algebra("h3r4.lie")).to_dict()
    assert set(d) == {"invariants", "matched", "notes", "witness", "summary"}
    assert d["matched"][0]["structure"] == "Spin(7)"
