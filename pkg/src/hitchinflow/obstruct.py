"""Which non-existence and flatness statements apply to a given Lie algebra.

The statements concern complete manifolds with a parallel SU(3)-, G2- or
Spin(7)-structure preserved by a proper cohomogeneity-one action of a
split-solvable group ``G`` of dimension 5, 6 or 7.  Their hypotheses are
conditions on ``g = Lie(G)`` (central series, derived algebra) and, for some
of them, on a decomposition ``g = u ⋊ R`` that the caller supplies.

Split-solvability is not decided here: it is automatic for nilpotent
algebras and otherwise taken from the caller.
"""

import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import linalg
from .lie import central_series, derived_algebra, derived_series, is_solvable
from .salamon import ParseError, parse_salamon, parse_vector

__all__ = [
    "WitnessError",
    "DecompositionWitness",
    "parse_witness",
    "load_witness",
    "Statement",
    "ObstructionReport",
    "classify_obstructions",
    "N65",
    "N65_LIMITATION",
]

N65_TEXT = "dim 6; d e5 = e13 + e24; d e6 = e14 - e23;"
N65 = parse_salamon(N65_TEXT)
N65_LIMITATION = (
    "the exclusion u != n6,5 is tested by a literal match of the structure constants "
    "of u (in the presented basis) against de5 = e13 + e24, de6 = e14 - e23; "
    "isomorphism is not tested"
)
NOT_SOLVABLE = "no statement applies: g not solvable"
NO_MATCH = "no statement matches"


class WitnessError(ValueError):
    pass


@dataclass(frozen=True)
class DecompositionWitness:
    """``g = u ⋊ R X`` (``sum = "semidirect"``) or ``g = u ⊕ R X`` (``"direct"``)."""

    ideal: tuple
    complement: tuple
    sum: str = "semidirect"
    proper: bool = None  # optional claim, verified against the algebra

    def __post_init__(self):
        if self.sum not in ("semidirect", "direct"):
            raise WitnessError("sum must be 'semidirect' or 'direct'")
        object.__setattr__(self, "ideal", tuple(tuple(Fraction(c) for c in v) for v in self.ideal))
        object.__setattr__(self, "complement", tuple(Fraction(c) for c in self.complement))


@dataclass(frozen=True)
class CheckedWitness:
    witness: DecompositionWitness
    u: object  # LieAlgebra of the ideal in the given basis
    proper: bool
    u_nilpotent: bool
    u_derived_dim: int
    u_derived_is_center: bool
    u_is_n65: bool

    def bounds_ok(self):
        """``u`` nilpotent with ``dim [u,u] <= 1``, or ``= 2`` and ``[u,u] = z(u)``."""
        return self.u_nilpotent and (
            self.u_derived_dim <= 1 or (self.u_derived_dim == 2 and self.u_derived_is_center)
        )

    def to_dict(self):
        return {
            "sum": self.witness.sum,
            "ideal_dim": self.u.dim,
            "proper": self.proper,
            "u_nilpotent": self.u_nilpotent,
            "u_derived_dim": self.u_derived_dim,
            "u_derived_equals_center": self.u_derived_is_center,
            "u_literally_n65": self.u_is_n65,
        }


def _strip(text):
    return "\n".join(line.split("#", 1)[0] for line in text.splitlines())


def parse_witness(text, dim):
    """Parse a witness file.

    ::

        ideal = e1, e2, e3, e4, e5, e6;
        complement = e7;
        sum = direct;        # or semidirect (default)
        proper = yes;        # optional claim
    """
    fields = {}
    for stmt in _strip(text).split(";"):
        if not stmt.strip():
            continue
        m = re.fullmatch(r"\s*([a-z]+)\s*=\s*(.*?)\s*", stmt, re.S)
        if not m:
            raise ParseError(f"expected 'name = value' in witness, got {stmt.strip()!r}")
        key, value = m.groups()
        if key in fields:
            raise ParseError(f"duplicate witness field '{key}'")
        fields[key] = value
    unknown = set(fields) - {"ideal", "complement", "sum", "proper"}
    if unknown:
        raise ParseError(f"unknown witness field(s): {', '.join(sorted(unknown))}")
    for key in ("ideal", "complement"):
        if key not in fields:
            raise ParseError(f"witness lacks '{key}'")
    ideal = tuple(parse_vector(v.strip(), dim) for v in fields["ideal"].split(","))
    complement = parse_vector(fields["complement"], dim)
    proper = None
    if "proper" in fields:
        if fields["proper"] not in ("yes", "no"):
            raise ParseError("proper must be 'yes' or 'no'")
        proper = fields["proper"] == "yes"
    try:
        return DecompositionWitness(ideal, complement, fields.get("sum", "semidirect"), proper)
    except WitnessError as exc:
        raise ParseError(str(exc)) from exc


def load_witness(path, dim):
    return parse_witness(Path(path).read_text(encoding="utf-8"), dim)


def _check_witness(g, w):
    n = g.dim
    basis = [list(v) for v in w.ideal]
    if any(len(v) != n for v in basis) or len(w.complement) != n:
        raise WitnessError("witness vectors have the wrong length")
    if linalg.rank(basis, n) != n - 1 or len(basis) != n - 1:
        raise WitnessError("the ideal must have a basis of n - 1 independent vectors")
    X = list(w.complement)
    if linalg.in_span(X, basis):
        raise WitnessError("the complement lies in the ideal")
    for v in basis:
        for e in range(n):
            unit = [Fraction(int(i == e)) for i in range(n)]
            if not linalg.in_span(g.bracket(unit, v), basis):
                raise WitnessError("the proposed u is not an ideal")
    if w.sum == "direct":
        for v in basis:
            if any(c != 0 for c in g.bracket(X, v)):
                raise WitnessError("direct sum claimed but [X, u] != 0")
    u = g.restrict(basis)
    center = central_series(g).center
    center_in_u = all(linalg.in_span(list(z), basis) for z in center)
    proper = w.sum == "semidirect" and center_in_u
    if w.proper is True and not proper:
        raise WitnessError("properness claimed but the center of g is not contained in u")
    us = central_series(u)
    du = derived_algebra(u)
    zu = us.center
    same = len(du) == len(zu) and all(linalg.in_span(list(v), [list(z) for z in zu]) for v in du)
    return CheckedWitness(w, u, proper, us.is_nilpotent, len(du), same, u == N65)


@dataclass(frozen=True)
class Statement:
    id: str
    structure: str
    verdict: str

    def to_dict(self):
        return {"id": self.id, "structure": self.structure, "verdict": self.verdict}


@dataclass
class ObstructionReport:
    invariants: dict
    statements: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    witness: dict = None

    @property
    def matched(self):
        return [s.id for s in self.statements]

    @property
    def summary(self):
        if self.statements:
            return "; ".join(s.verdict for s in self.statements)
        return NOT_SOLVABLE if NOT_SOLVABLE in self.notes else NO_MATCH

    def to_dict(self):
        return {
            "invariants": self.invariants,
            "matched": [s.to_dict() for s in self.statements],
            "notes": list(self.notes),
            "witness": self.witness,
            "summary": self.summary,
        }


def _invariants(g, split_flag):
    cs = central_series(g)
    nilpotent = cs.is_nilpotent
    solvable = is_solvable(g)
    return {
        "dim": g.dim,
        "central_series_dims": list(cs.dims),
        "derived_dim": len(derived_algebra(g)),
        "derived_series_dims": [len(t) for t in derived_series(g)],
        "center_dim": len(cs.center) if len(cs.dims) > 1 else 0,
        "nilpotent": nilpotent,
        "solvable": solvable,
        # nilpotent algebras have nilpotent ad, hence real (zero) eigenvalues
        "split_solvable": True if nilpotent else (True if split_flag and solvable else None),
        "split_solvable_source": "nilpotent" if nilpotent else ("assumed" if split_flag and solvable else "unknown"),
    }


def _term(dims, k):
    """``dim g_(k)`` of the ascending central series (stationary once stable)."""
    return dims[k] if k < len(dims) else dims[-1]


def classify_obstructions(g, witness=None, assume_split_solvable=False):
    inv = _invariants(g, assume_split_solvable)
    report = ObstructionReport(inv)
    checked = _check_witness(g, witness) if witness is not None else None
    if checked is not None:
        report.witness = checked.to_dict()
    if not inv["solvable"]:
        report.notes.append(NOT_SOLVABLE)
        return report
    if not inv["split_solvable"]:
        report.notes.append("split-solvability not established (not nilpotent); pass assume_split_solvable to assert it")
        report.notes.append(NO_MATCH)
        return report
    dims = inv["central_series_dims"]
    add = report.statements.append
    n = g.dim
    if n == 5:
        add(Statement("hypo-5", "SU(3)", "all orbits five-dimensional (no singular orbit); complete implies flat"))
    elif n == 6:
        if _term(dims, 2) != 1:
            add(Statement("g2-6", "G2", "dim g_(2) != 1: all orbits six-dimensional; complete implies flat"))
        if checked is not None and checked.u_nilpotent and checked.u.dim == 5 and checked.u_derived_dim <= 1:
            add(Statement("g2-6-semidirect", "G2", "g = u ⋊ R with u 5-dim nilpotent, dim [u,u] <= 1: all orbits six-dimensional; complete implies flat"))
    elif n == 7:
        if checked is not None and checked.witness.sum == "semidirect" and checked.proper and checked.bounds_ok():
            add(Statement("spin7-a", "Spin(7)", "case (a): proper u ⋊ R with u nilpotent: all orbits seven-dimensional; complete implies flat"))
        if checked is not None and checked.witness.sum == "direct":
            report.notes.append("case (b) limitation: " + N65_LIMITATION)
            if checked.bounds_ok() and not checked.u_is_n65:
                add(Statement("spin7-b", "Spin(7)", "case (b): u ⊕ R with u != n6,5: all orbits seven-dimensional; complete implies flat"))
            elif checked.u_is_n65:
                report.notes.append("case (b) not applicable: u is presented as n6,5")
        if inv["nilpotent"] and all(_term(dims, k) != 3 for k in (1, 2, 3)):
            add(Statement("spin7-c", "Spin(7)", "case (c): nilpotent with dim g_(k) != 3 for k = 1, 2, 3: all orbits seven-dimensional; complete implies flat"))
    else:
        report.notes.append(f"no statement concerns dimension {n}")
    if not report.statements:
        report.notes.append(NO_MATCH)
    return report
