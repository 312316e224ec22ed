"""Program model: modules, the step tree, and expressions.

A program is a set of named modules. Each module pairs its declared data
objects (inputs and outputs) with a step tree: steps are nodes holding a
kind-specific payload, a ``next`` reference (the solid arrow, downward
control flow) and dashed child groups (membership of steps in a branch
or loop body). Steps live in a flat per-module table keyed by id and
reference each other by id, which is what lets the validator detect
fan-in, cycles, and orphan nodes the drawing rules forbid.

Step ids are opaque stable strings chosen by the editor or serializer;
nothing here renumbers them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from typing import Any, Iterator, Optional

from .errors import ModelError
from .values import PatchType, Value

# Step kinds. module-root is the synthetic root each module body hangs off.
K_MODULE_ROOT = "module-root"
K_ASSIGN = "assign"
K_TRANSFORM = "transform"
K_READ = "read"
K_DISPLAY = "display"
K_BYPASS = "by-pass"
K_EITHER_OR = "either-or"
K_LABELED = "labeled"
K_COUNTER_LOOP = "counter-loop"
K_CONDITIONAL_LOOP = "conditional-loop"
K_SENTINEL_LOOP = "sentinel-loop"
K_CALL = "call"
K_EXIT = "exit"
K_STOP = "stop"

STEP_KINDS = frozenset({
    K_MODULE_ROOT, K_ASSIGN, K_TRANSFORM, K_READ, K_DISPLAY, K_BYPASS,
    K_EITHER_OR, K_LABELED, K_COUNTER_LOOP, K_CONDITIONAL_LOOP,
    K_SENTINEL_LOOP, K_CALL, K_EXIT, K_STOP,
})

# Kinds that own dashed child groups, and how many groups each takes.
# labeled is open-ended: one group per arm plus an optional default.
CONTAINER_KINDS = frozenset({
    K_MODULE_ROOT, K_BYPASS, K_EITHER_OR, K_LABELED,
    K_COUNTER_LOOP, K_CONDITIONAL_LOOP, K_SENTINEL_LOOP,
})
LOOP_KINDS = frozenset({K_COUNTER_LOOP, K_CONDITIONAL_LOOP, K_SENTINEL_LOOP})
BRANCH_KINDS = frozenset({K_BYPASS, K_EITHER_OR, K_LABELED})

GROUP_BODY = "body"
GROUP_THEN = "then"
GROUP_ELSE = "else"
GROUP_ARM = "arm"
GROUP_DEFAULT = "default"

_IDENT_RE = re.compile(r"^[^\W\d_][\w]*$", re.UNICODE)


@lru_cache(maxsize=4096)
def normalize_identifier(raw: str) -> str:
    """Canonical (case-folded) form of a variable, field, or module name."""
    if not isinstance(raw, str) or not raw:
        raise ModelError("malformed-identifier", "identifier is empty")
    if not _IDENT_RE.match(raw):
        raise ModelError(
            "malformed-identifier",
            f"{raw!r} must start with a letter and use letters, digits, "
            "or underscore")
    return raw.casefold()


# --- Expressions -----------------------------------------------------------
#
# Expr is a closed union: literal, variable, index, field access, unary,
# binary. Operator spellings come from values.py.


@dataclass(frozen=True)
class Lit:
    value: Value
    type: PatchType


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Index:
    base: "Expr"
    pos: "Expr"


@dataclass(frozen=True)
class Field:
    base: "Expr"
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    arg: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    lhs: "Expr"
    rhs: "Expr"


Expr = Any  # Lit | Var | Index | Field | Unary | Binary


def is_reference_expr(e: Expr) -> bool:
    """True for exprs that only name an existing value (no computation).

    Assignments copy such values; anything involving an operator is a
    transformation because it mutates the target object.
    """
    if isinstance(e, (Lit, Var)):
        return True
    if isinstance(e, Index):
        return is_reference_expr(e.base) and is_reference_expr(e.pos)
    if isinstance(e, Field):
        return is_reference_expr(e.base)
    return False


def is_path_expr(e: Expr) -> bool:
    """True for exprs usable as a write target: a variable plus optional
    index/field selectors."""
    if isinstance(e, Var):
        return True
    if isinstance(e, Index):
        return is_path_expr(e.base)
    if isinstance(e, Field):
        return is_path_expr(e.base)
    return False


def path_root(e: Expr) -> str:
    """The variable a path target ultimately writes."""
    while not isinstance(e, Var):
        if isinstance(e, (Index, Field)):
            e = e.base
        else:
            raise ModelError("target-shape", "write target must be a path")
    return e.name


def walk_expr(e: Expr) -> Iterator[Expr]:
    yield e
    if isinstance(e, Index):
        yield from walk_expr(e.base)
        yield from walk_expr(e.pos)
    elif isinstance(e, Field):
        yield from walk_expr(e.base)
    elif isinstance(e, Unary):
        yield from walk_expr(e.arg)
    elif isinstance(e, Binary):
        yield from walk_expr(e.lhs)
        yield from walk_expr(e.rhs)


# --- Steps ------------------------------------------------------------------


@dataclass(frozen=True)
class CallArg:
    """One actual in a call step; name is optional (schema mapping binds it)."""

    value: Expr
    name: Optional[str] = None


@dataclass(frozen=True)
class ResultBind:
    """Binds a callee output to a caller variable. ``output`` of None means
    the callee's single output."""

    target: str
    output: Optional[str] = None


@dataclass
class ChildGroup:
    """One dashed child group: the body of a loop, an arm of a branch.

    The dashed arrow points at the group's entry step only; the rest of
    the group chains from it along solid arrows. ``label`` carries the
    matching constant on labeled-branch arms; an entry of None is an
    empty group.
    """

    tag: str
    entry: Optional[str] = None
    label: Optional[Value] = None
    label_type: Optional[PatchType] = None


@dataclass
class Step:
    id: str
    kind: str
    payload: dict[str, Any] = dc_field(default_factory=dict)
    next: Optional[str] = None
    children: list[ChildGroup] = dc_field(default_factory=list)
    extra: dict[str, Any] = dc_field(default_factory=dict)


@dataclass
class DataObjectDecl:
    """A declared data object and where it comes from or goes to."""

    name: str
    type: PatchType
    binding: str = "caller"  # caller | console | repository

    def norm(self) -> str:
        return normalize_identifier(self.name)


BINDINGS = ("caller", "console", "repository")


@dataclass
class ModuleDef:
    name: str
    inputs: list[DataObjectDecl] = dc_field(default_factory=list)
    outputs: list[DataObjectDecl] = dc_field(default_factory=list)
    steps: dict[str, Step] = dc_field(default_factory=dict)
    extra: dict[str, Any] = dc_field(default_factory=dict)

    def norm(self) -> str:
        return normalize_identifier(self.name)

    def root(self) -> Step:
        roots = [s for s in self.steps.values() if s.kind == K_MODULE_ROOT]
        if len(roots) != 1:
            raise ModelError(
                "module-root-unique",
                f"module {self.name!r} needs exactly one module-root step, "
                f"found {len(roots)}")
        return roots[0]

    def step(self, step_id: str) -> Step:
        try:
            return self.steps[step_id]
        except KeyError:
            raise ModelError("unknown-step",
                             f"no step with id {step_id!r}") from None

    def add(self, step: Step) -> Step:
        if step.id in self.steps:
            raise ModelError("duplicate-step-id",
                             f"step id {step.id!r} already used")
        self.steps[step.id] = step
        return step

    def input_decl(self, name: str) -> Optional[DataObjectDecl]:
        want = normalize_identifier(name)
        for d in self.inputs:
            if d.norm() == want:
                return d
        return None

    def output_decl(self, name: str) -> Optional[DataObjectDecl]:
        want = normalize_identifier(name)
        for d in self.outputs:
            if d.norm() == want:
                return d
        return None


@dataclass
class PatchProgram:
    modules: list[ModuleDef] = dc_field(default_factory=list)
    entry: str = ""

    def module(self, name: str) -> Optional[ModuleDef]:
        want = normalize_identifier(name)
        for m in self.modules:
            if m.norm() == want:
                return m
        return None

    def entry_module(self) -> ModuleDef:
        m = self.module(self.entry) if self.entry else None
        if m is None:
            raise ModelError("entry-exists",
                             f"entry module {self.entry!r} not found")
        return m


def document_order(module: ModuleDef) -> list[str]:
    """Step ids in execution layout order: node, dashed groups, then the
    solid successor. This is the order the preview cut and the canvas
    numbering use."""
    seen: set[str] = set()
    out: list[str] = []

    def visit(sid: Optional[str]) -> None:
        while sid is not None and sid in module.steps and sid not in seen:
            seen.add(sid)
            out.append(sid)
            step = module.steps[sid]
            for group in step.children:
                visit(group.entry)
            sid = step.next

    try:
        visit(module.root().id)
    except ModelError:
        pass
    return out


def canonical_order(module: ModuleDef) -> list[str]:
    """Step ids in canonical serialization order: pre-order, solid edge
    before dashed groups. Unreachable steps append afterwards sorted by id
    so serialization stays total even on invalid documents."""
    seen: set[str] = set()
    out: list[str] = []

    def visit(sid: Optional[str]) -> None:
        if sid is None or sid not in module.steps or sid in seen:
            return
        seen.add(sid)
        out.append(sid)
        step = module.steps[sid]
        visit(step.next)
        for group in step.children:
            visit(group.entry)

    roots = [s for s in module.steps.values() if s.kind == K_MODULE_ROOT]
    if len(roots) == 1:
        visit(roots[0].id)
    for sid in sorted(module.steps):
        if sid not in seen:
            visit(sid)
    return out
