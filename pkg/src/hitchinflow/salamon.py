"""Salamon notation for Lie algebras and the term syntax for forms.

Algebra files look like::

    dim 6;
    d e5 = e13 + e24;    # comments run to end of line
    d e6 = e14 - e23;

Terms are ``[coeff "*"] e<digits>`` where each digit is one index (dimension
at most 9) or ``e{1,12}`` for larger dimensions.  Coefficients are decimals
or rationals ``p/q`` and are read exactly.

Structure files add a small header and named assignments::

    algebra "sl2c.lie";
    kind hitchin6;
    symmetry = e1, e2, e3;
    omega = 2*e14 + 2*e25 + 2*e36;
    rho = e456 - e123;
"""

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .forms import Form, format_index, sort_sign

__all__ = [
    "ParseError",
    "parse_salamon",
    "print_salamon",
    "parse_form",
    "format_form",
    "parse_vector",
    "StructFile",
    "parse_struct",
    "load_algebra",
    "load_struct",
]


class ParseError(ValueError):
    """Syntax or semantic error, located by 1-based line and column."""

    def __init__(self, message, line=None, col=None):
        self.message = message
        self.line = line
        self.col = col
        where = f"line {line}, column {col}: " if line is not None else ""
        super().__init__(where + message)


class _Scanner:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def where(self, pos=None):
        pos = self.pos if pos is None else pos
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, col

    def error(self, message, pos=None):
        return ParseError(message, *self.where(pos))

    def skip(self):
        t = self.text
        while self.pos < len(t):
            c = t[self.pos]
            if c.isspace():
                self.pos += 1
            elif c == "#":
                nl = t.find("\n", self.pos)
                self.pos = len(t) if nl < 0 else nl
            else:
                break

    def at_end(self):
        self.skip()
        return self.pos >= len(self.text)

    def peek(self):
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def accept(self, lit):
        self.skip()
        if self.text.startswith(lit, self.pos):
            self.pos += len(lit)
            return True
        return False

    def expect(self, lit):
        if not self.accept(lit):
            found = self.peek() or "end of input"
            raise self.error(f"expected '{lit}', found '{found}'")

    def digits(self):
        """A run of digits; spaces inside the run are skipped (whitespace-insensitive)."""
        self.skip()
        start = self.pos
        out = []
        while True:
            save = self.pos
            self.skip()
            if self.pos < len(self.text) and self.text[self.pos].isdigit():
                out.append(self.text[self.pos])
                self.pos += 1
            else:
                self.pos = save
                break
        if not out:
            raise self.error("expected digits", start)
        return "".join(out)

    def integer(self):
        return int(self.digits())

    def word(self):
        self.skip()
        start = self.pos
        t = self.text
        while self.pos < len(t) and (t[self.pos].isalnum() or t[self.pos] == "_"):
            self.pos += 1
        return t[start:self.pos]

    def number(self):
        """Decimal or ``p/q`` as an exact Fraction."""
        start = self.pos
        whole = self.digits()
        if self.accept("."):
            whole += "." + self.digits()
        value = Fraction(whole)
        if self.accept("/"):
            den = Fraction(self.digits())
            if den == 0:
                raise self.error("zero denominator", start)
            value /= den
        return value


def _index_list(sc, dim):
    """Indices after an ``e``: single digits, or ``{i,j,...}``. Returns 0-based tuple."""
    start = sc.pos
    if sc.accept("{"):
        idx = [sc.integer()]
        while sc.accept(","):
            idx.append(sc.integer())
        sc.expect("}")
    else:
        if dim >= 10:
            raise sc.error("use e{i,j,...} for indices when dim >= 10", start)
        idx = [int(ch) for ch in sc.digits()]
    for i in idx:
        if not 1 <= i <= dim:
            raise sc.error(f"index {i} out of range 1..{dim}", start)
    if len(set(idx)) != len(idx):
        raise sc.error("repeated index in a basis form", start)
    return tuple(i - 1 for i in idx)


def _term(sc, dim):
    coeff = Fraction(1)
    if sc.peek().isdigit():
        at = sc.pos
        coeff = sc.number()
        if not sc.accept("*"):
            if coeff == 0 and sc.peek() in (";", ""):
                return None, Fraction(0), at
            raise sc.error("expected '*' after coefficient")
    sc.skip()
    at = sc.pos
    sc.expect("e")
    return _index_list(sc, dim), coeff, at


def _expr(sc, dim, degree=None):
    """Parse a sum of terms. Returns a Form (exact); degree inferred unless given."""
    terms = {}
    sign = 1
    if sc.accept("-"):
        sign = -1
    else:
        sc.accept("+")
    while True:
        idx, coeff, at = _term(sc, dim)
        if idx is not None:
            if degree is None:
                degree = len(idx)
            elif len(idx) != degree:
                raise sc.error(f"mixed degrees in one expression ({degree} and {len(idx)})", at)
            key, s = sort_sign(idx)
            terms[key] = terms.get(key, 0) + sign * s * coeff
        if sc.accept("+"):
            sign = 1
        elif sc.accept("-"):
            sign = -1
        else:
            break
    return terms, degree


def parse_salamon(text):
    """Parse an algebra in Salamon notation."""
    from .lie import LieAlgebra

    sc = _Scanner(text)
    dim = None
    diffs = {}
    while not sc.at_end():
        start = sc.pos
        w = sc.word()
        if w.startswith("dim"):
            sc.pos = start + 3
            if dim is not None:
                raise sc.error("duplicate 'dim' statement", start)
            dim = sc.integer()
            if dim < 1:
                raise sc.error("dimension must be positive", start)
            sc.expect(";")
        elif w.startswith("d"):
            # 'd', 'de5' and 'd e5' are all accepted
            sc.pos = start + 1
            if dim is None:
                raise sc.error("'dim' must precede all 'd' statements", start)
            sc.expect("e")
            at = sc.pos
            idx = _index_list(sc, dim) if sc.peek() == "{" else (sc.integer() - 1,)
            if len(idx) != 1 or not 0 <= idx[0] < dim:
                raise sc.error("left-hand side must be a single e<i> within range", at)
            k = idx[0]
            if k in diffs:
                raise sc.error(f"duplicate declaration of d e{k + 1}", start)
            sc.expect("=")
            terms, degree = _expr(sc, dim)
            if degree not in (None, 2):
                raise sc.error(f"d e{k + 1} must be a 2-form", start)
            diffs[k] = Form(dim, 2, terms, exact=True)
            sc.expect(";")
        else:
            raise sc.error(f"unexpected '{w or sc.peek()}'", start)
    if dim is None:
        raise ParseError("missing 'dim' statement", 1, 1)
    return LieAlgebra.from_differentials(dim, diffs)


def format_scalar(c):
    if isinstance(c, float):
        return repr(c)
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_form(form, unit_coeff=False):
    """Term syntax: ``e135 - e146 + 1/2*e236`` (``0`` for the zero form)."""
    if form.is_zero():
        return "0"
    parts = []
    for idx, c in form.items():
        neg = c < 0
        mag = -c if neg else c
        name = format_index(idx, form.dim)
        if mag == 1 and not unit_coeff:
            body = name
        else:
            body = f"{format_scalar(mag)}*{name}"
        if not parts:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append(("- " if neg else "+ ") + body)
    return " ".join(parts)


def print_salamon(g):
    """Canonical text for ``g``; inverse of :func:`parse_salamon`."""
    lines = [f"dim {g.dim};"]
    for k in range(g.dim):
        dk = g.differential_of_dual(k)
        if not dk.is_zero():
            name = f"e{{{k + 1}}}" if g.dim >= 10 else f"e{k + 1}"
            lines.append(f"d {name} = {format_form(dk)};")
    return "\n".join(lines) + "\n"


def parse_form(text, dim, degree=None):
    """Parse a single expression such as ``"e12 + 1/2*e34"``."""
    sc = _Scanner(text)
    terms, deg = _expr(sc, dim, degree)
    if not sc.at_end():
        raise sc.error(f"unexpected '{sc.peek()}'")
    if deg is None:
        deg = degree
    if deg is None:
        raise ParseError("cannot infer the degree of '0'; pass degree explicitly")
    return Form(dim, deg, terms, exact=True)


def _vector(sc, dim):
    terms, degree = _expr(sc, dim, 1)
    v = [Fraction(0)] * dim
    for (i,), c in terms.items():
        v[i] = c
    return tuple(v)


def parse_vector(text, dim):
    """Parse ``"e1 - 2*e4"`` into a coefficient tuple (vectors share the term syntax)."""
    sc = _Scanner(text)
    v = _vector(sc, dim)
    if not sc.at_end():
        raise sc.error(f"unexpected '{sc.peek()}'")
    return v


# --------------------------------------------------------------------------
# structure files


@dataclass
class StructFile:
    kind: str
    algebra_path: str
    algebra: object
    forms: dict = field(default_factory=dict)
    symmetry: tuple = None
    source: str = None


KINDS = ("hypo5", "hitchin6", "hitchin7")


def parse_struct(text, algebra=None, base_dir=None):
    """Parse a structure file.

    ``algebra`` may be passed directly; otherwise the ``algebra "path";``
    header is resolved relative to ``base_dir``.
    """
    sc = _Scanner(text)
    kind = None
    path = None
    forms = {}
    symmetry = None
    pending = []
    while not sc.at_end():
        start = sc.pos
        w = sc.word()
        if not w:
            raise sc.error(f"unexpected '{sc.peek()}'", start)
        if w == "algebra":
            sc.skip()
            if not sc.accept('"'):
                raise sc.error("expected a quoted path")
            end = sc.text.find('"', sc.pos)
            if end < 0:
                raise sc.error("unterminated string")
            path = sc.text[sc.pos:end]
            sc.pos = end + 1
            sc.expect(";")
        elif w == "kind":
            at = sc.pos
            kind = sc.word()
            if kind not in KINDS:
                raise sc.error(f"unknown kind '{kind}' (expected one of {', '.join(KINDS)})", at)
            sc.expect(";")
        else:
            # body needs the dimension: defer until the algebra is known
            sc.skip()
            pending.append((w, start))
            depth_start = sc.pos
            end = sc.text.find(";", depth_start)
            if end < 0:
                raise sc.error("missing ';'")
            pending[-1] = (w, start, depth_start, end)
            sc.pos = end + 1
    if algebra is None:
        if path is None:
            raise ParseError("missing 'algebra' header", 1, 1)
        p = Path(path)
        if not p.is_absolute() and base_dir is not None:
            p = Path(base_dir) / p
        algebra = parse_salamon(p.read_text(encoding="utf-8"))
    dim = algebra.dim
    for name, start, body, end in pending:
        sub = _Scanner(sc.text)
        sub.pos = body
        if name == "symmetry":
            sub.expect("=")
            vecs = [_vector(sub, dim)]
            while sub.accept(","):
                vecs.append(_vector(sub, dim))
            symmetry = tuple(vecs)
        else:
            sub.expect("=")
            terms, degree = _expr(sub, dim)
            if degree is None:
                raise sub.error(f"cannot infer the degree of '{name}' from '0'", start)
            if name in forms:
                raise sub.error(f"duplicate assignment to '{name}'", start)
            forms[name] = Form(dim, degree, terms, exact=True)
        sub.skip()
        if sub.pos != end:
            raise sub.error(f"unexpected '{sub.peek()}'")
    if kind is None:
        raise ParseError("missing 'kind' header", 1, 1)
    return StructFile(kind=kind, algebra_path=path, algebra=algebra, forms=forms, symmetry=symmetry, source=text)


def load_algebra(path):
    return parse_salamon(Path(path).read_text(encoding="utf-8"))


def load_struct(path):
    p = Path(path)
    return parse_struct(p.read_text(encoding="utf-8"), base_dir=p.parent)
