"""Invariant hypo and Hitchin flows on Lie algebras.

Modules by topic:

* :mod:`.lie`, :mod:`.salamon` -- Lie algebras, the Chevalley-Eilenberg
  differential, Salamon-notation I/O
* :mod:`.forms`, :mod:`.exterior` -- exact and floating exterior algebra
* :mod:`.gstruct` -- SU(2), SU(3), G2 and Spin(7) structures
* :mod:`.flow` -- the flows as ODEs, with degeneration detection
* :mod:`.sl2c` -- invariant half-flat structures on sl(2, C)
* :mod:`.obstruct` -- which structural obstructions apply to an algebra
"""

from .forms import Form
from .lie import LieAlgebra, Subalgebra, ce_differential, central_series, invariant_forms, jacobi_check
from .salamon import ParseError, load_algebra, load_struct, parse_form, parse_salamon, print_salamon

__version__ = "0.1.0"

__all__ = [
    "Form",
    "LieAlgebra",
    "Subalgebra",
    "ParseError",
    "ce_differential",
    "central_series",
    "invariant_forms",
    "jacobi_check",
    "load_algebra",
    "load_struct",
    "parse_form",
    "parse_salamon",
    "print_salamon",
]
