"""Error taxonomy shared by every patchlang subsystem.

Every raised condition carries a stable kebab-case ``code`` so the CLI,
service, and tests can dispatch on it without parsing messages.
"""

from __future__ import annotations


class PatchError(Exception):
    """Base error with a machine-readable code."""

    def __init__(self, code: str, message: str, *, step_id: str | None = None):
        self.code = code
        self.message = message
        self.step_id = step_id
        super().__init__(f"[{code}] {message}")

    def at_step(self, step_id: str) -> "PatchError":
        """Attach the originating step id (kept once set)."""
        if self.step_id is None:
            self.step_id = step_id
        return self


class ModelError(PatchError):
    """Malformed identifiers or program structure."""


class ValueSemanticsError(PatchError):
    """Type or value errors from the operator and coercion rules."""


class EvalError(PatchError):
    """Runtime failure while executing a step tree."""


class ResolveError(PatchError):
    """Call-signature to module binding failure."""


class DocumentError(PatchError):
    """Document parse or serialize failure."""

    def __init__(self, code: str, message: str, *, line: int | None = None,
                 column: int | None = None):
        super().__init__(code, message)
        self.line = line
        self.column = column


class EmitError(PatchError):
    """Code emission or differential-check failure."""


class RunAborted(PatchError):
    """A run was force-stopped from outside (UI stop button)."""

    def __init__(self, message: str = "run aborted"):
        super().__init__("run-aborted", message)
