"""Source emission for registered target dialects.

Two reference dialects ship: ``cxx`` (curly-brace, 0-based, compiled)
and ``py3`` (indentation, 0-based, interpreted). The registry is open:
register an Emitter subclass to add a dialect.
"""

from .base import (
    DialectTraits, Emitter, SourceText, available_dialects, emit,
    get_dialect, register,
)
from .diff import (
    CxxToolchain, EquivalenceReport, Py3Toolchain, Trial, TrialVerdict,
    default_toolchain, differential_check,
)
from . import cxx as _cxx
from . import py3 as _py3

register(_cxx.CxxEmitter())
register(_py3.Py3Emitter())

__all__ = [
    "DialectTraits", "Emitter", "SourceText", "emit", "register",
    "get_dialect", "available_dialects",
    "Trial", "TrialVerdict", "EquivalenceReport", "differential_check",
    "CxxToolchain", "Py3Toolchain", "default_toolchain",
]
