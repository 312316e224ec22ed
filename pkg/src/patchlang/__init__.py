"""Patch visual programming language toolkit."""

from .errors import (
    DocumentError, EmitError, EvalError, ModelError, PatchError,
    ResolveError, RunAborted, ValueSemanticsError,
)
from .model import (
    ModuleDef, PatchProgram, Step, ChildGroup, DataObjectDecl,
    normalize_identifier,
)
from .values import (
    PatchSet, PatchTuple, PatchType, apply_binary, apply_unary,
    assign_coerce, compatible, field, index, patch_equal, type_of,
)
from .validate import Finding, ValidationReport, validate
from .resolver import CallSignature, Mapping, resolve_call, resolve_module
from .interpreter import (
    Interpreter, Repository, RunConfig, RunResult, ScriptedConsole,
    TraceEvent, run_module, watch,
)
from .document import (
    PatchDocument, parse, read_value, render_value, serialize,
)

__version__ = "0.1.0"

__all__ = [
    "PatchError", "ModelError", "ValueSemanticsError", "EvalError",
    "ResolveError", "DocumentError", "EmitError", "RunAborted",
    "PatchProgram", "ModuleDef", "Step", "ChildGroup", "DataObjectDecl",
    "normalize_identifier",
    "PatchType", "PatchSet", "PatchTuple", "type_of", "compatible",
    "assign_coerce", "index", "field", "apply_binary", "apply_unary",
    "patch_equal",
    "validate", "ValidationReport", "Finding",
    "CallSignature", "Mapping", "resolve_call", "resolve_module",
    "Interpreter", "run_module", "watch", "RunConfig", "RunResult",
    "TraceEvent", "ScriptedConsole", "Repository",
    "PatchDocument", "parse", "serialize", "render_value", "read_value",
    "__version__",
]
