"""Shared emitter machinery: dialect registry, module typing plan.

Emission is static: every variable needs one concrete type, every call
one concrete mapping. The plan pass walks a validated module in document
order, fixes each variable's slot type at its first binding (exactly the
interpreter's rule), resolves call mappings on static types, and
collects the callee closure. Programs the plan cannot type emit an
unsupported-construct error rather than wrong code.

Supported value types in emitted programs: the four scalars and lists
(nested). Sets and tuples stay interpreter-only for now.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field as dc_field
from ..errors import EmitError, PatchError
from ..exprtypes import static_expr_type
from ..model import (
    Expr, K_ASSIGN, K_BYPASS, K_CALL, K_CONDITIONAL_LOOP,
    K_COUNTER_LOOP, K_DISPLAY, K_EITHER_OR, K_EXIT, K_LABELED,
    K_READ, K_SENTINEL_LOOP, K_TRANSFORM,
    ModuleDef, PatchProgram, Step, Var, normalize_identifier,
    )
from ..values import INTEGER, PatchType


@dataclass(frozen=True)
class DialectTraits:
    """Observable characteristics of a target dialect."""

    block_style: str        # braces | indent
    index_base: int         # native sequence base (both references: 0)
    int_division: str       # native integer-division semantics


@dataclass
class SourceText:
    """Emitted program text plus the pieces tooling needs to drive it."""

    dialect: str
    text: str           # complete program, harness included
    entry_symbol: str   # generated function name of the module
    harness: str        # the I/O scaffold section of text
    filename: str       # suggested file name


class Emitter(ABC):
    id: str
    traits: DialectTraits

    @abstractmethod
    def emit(self, module: ModuleDef,
             program: PatchProgram | None = None) -> SourceText:
        ...


_REGISTRY: dict[str, Emitter] = {}


def register(emitter: Emitter) -> None:
    if emitter.id in _REGISTRY:
        raise EmitError("dialect-conflict",
                        f"dialect {emitter.id!r} already registered")
    _REGISTRY[emitter.id] = emitter


def get_dialect(dialect_id: str) -> Emitter:
    if dialect_id not in _REGISTRY:
        raise EmitError("unknown-dialect",
                        f"no dialect {dialect_id!r} registered "
                        f"(have: {', '.join(sorted(_REGISTRY))})")
    return _REGISTRY[dialect_id]


def available_dialects() -> list[str]:
    return sorted(_REGISTRY)


def emit(module: ModuleDef, dialect: str,
         program: PatchProgram | None = None) -> SourceText:
    """Emit a validated module (plus its callees) for a dialect.

    Deterministic: identical module and dialect give byte-identical text.
    """
    return get_dialect(dialect).emit(module, program)


SUPPORTED_SCALARS = ("integer", "real", "boolean", "string")


def check_type_supported(t: PatchType | None, where: str) -> PatchType:
    if t is None:
        raise EmitError("unsupported-construct",
                        f"{where}: type is not statically known")
    if t.kind in SUPPORTED_SCALARS:
        return t
    if t.kind == "list":
        check_type_supported(t.elem, where)
        return t
    raise EmitError("unsupported-construct",
                    f"{where}: {t} values have no lowering yet")


@dataclass
class CallPlan:
    callee: str                       # normalized callee name
    arg_for_formal: list[int]         # formal order -> actual index
    result_binds: list[tuple[str, int]]  # (caller var, callee output index)


@dataclass
class ModulePlan:
    module: ModuleDef
    var_types: dict[str, PatchType] = dc_field(default_factory=dict)
    param_names: list[str] = dc_field(default_factory=list)
    output_names: list[str] = dc_field(default_factory=list)
    call_plans: dict[str, CallPlan] = dc_field(default_factory=dict)
    read_types: dict[str, PatchType] = dc_field(default_factory=dict)

    def locals(self) -> list[str]:
        params = set(self.param_names)
        return [n for n in self.var_types if n not in params]


def plan_program(module: ModuleDef, program: PatchProgram | None
                 ) -> tuple[list[ModulePlan], ModulePlan]:
    """Plans for the target module and its callee closure (callees first,
    deterministic order)."""
    prog = program if program is not None else PatchProgram(
        modules=[module], entry=module.name)
    order: list[ModuleDef] = []
    seen: set[str] = set()

    def visit(m: ModuleDef, trail: tuple[str, ...]) -> None:
        norm = m.norm()
        if norm in trail:
            return  # recursion: already in the closure
        if norm in seen:
            return
        seen.add(norm)
        for s in m.steps.values():
            if s.kind == K_CALL and s.payload.get("module"):
                callee = prog.module(s.payload["module"])
                if callee is None:
                    raise EmitError("unknown-module",
                                    f"call to unknown module "
                                    f"{s.payload['module']!r}")
                visit(callee, trail + (norm,))
        order.append(m)

    visit(module, ())
    plans = {m.norm(): plan_module(m, prog) for m in order}
    return [plans[m.norm()] for m in order], plans[module.norm()]


def plan_module(m: ModuleDef, program: PatchProgram) -> ModulePlan:
    from ..resolver import CallSignature, caller_bound_inputs, resolve_call

    plan = ModulePlan(module=m)
    env = plan.var_types
    for d in caller_bound_inputs(m):
        t = check_type_supported(d.type, f"input {d.name!r}")
        plan.param_names.append(d.norm())
        env[d.norm()] = t
    for d in m.inputs:
        if d.binding != "caller":
            env[d.norm()] = check_type_supported(d.type, f"input {d.name!r}")
    for d in m.outputs:
        plan.output_names.append(d.norm())
        t = check_type_supported(d.type, f"output {d.name!r}")
        # declared outputs fix their slot type before any write, exactly
        # like the interpreter's first-bind rule with a declaration
        env.setdefault(d.norm(), t)

    def settle(name: str, t: PatchType | None, where: str) -> None:
        n = normalize_identifier(name)
        known = env.get(n)
        if known is None:
            env[n] = check_type_supported(t, where)
        # later writes keep the first slot type; emitters coerce

    def expr_type(e: Expr, where: str) -> PatchType:
        try:
            t = static_expr_type(e, env, strict=True)
        except PatchError as err:
            raise EmitError("unsupported-construct",
                            f"{where}: {err.message}") from None
        return check_type_supported(t, where)

    def walk_chain(entry: str | None) -> None:
        sid = entry
        while sid is not None:
            walk_step(m.step(sid))
            sid = m.step(sid).next

    def walk_step(s: Step) -> None:
        p = s.payload
        where = f"step {s.id}"
        if s.kind in (K_ASSIGN, K_TRANSFORM):
            t = expr_type(p["source"], where)
            target = p["target"]
            if isinstance(target, Var):
                settle(target.name, t, where)
            else:
                expr_type(target, where)  # container path must type
        elif s.kind == K_READ:
            name = p["target"]
            decl = m.input_decl(name) or m.output_decl(name)
            t = decl.type if decl is not None else p.get("type")
            t = check_type_supported(t, where)
            settle(name, t, where)
            plan.read_types[s.id] = t
        elif s.kind == K_DISPLAY:
            expr_type(p["value"], where)
        elif s.kind in (K_BYPASS, K_EITHER_OR, K_CONDITIONAL_LOOP):
            expr_type(p["condition"], where)
        elif s.kind == K_LABELED:
            expr_type(p["scrutinee"], where)
        elif s.kind == K_COUNTER_LOOP:
            expr_type(p["start"], where)
            expr_type(p["end"], where)
            settle(p["var"], INTEGER, where)
            if env[normalize_identifier(p["var"])] != INTEGER:
                raise EmitError("unsupported-construct",
                                f"{where}: counter reuses non-integer "
                                f"variable {p['var']!r}")
        elif s.kind == K_SENTINEL_LOOP:
            coll_t = expr_type(p["collection"], where)
            if coll_t.kind != "list":
                raise EmitError("unsupported-construct",
                                f"{where}: sentinel loops iterate lists")
            expr_type(p["marker"], where)
            settle(p["var"], coll_t.elem, where)
        elif s.kind == K_CALL:
            plan_call(s)
        for g in s.children:
            walk_chain(g.entry)

    def plan_call(s: Step) -> None:
        p = s.payload
        where = f"step {s.id}"
        callee = program.module(p["module"])
        if callee is None:
            raise EmitError("unknown-module",
                            f"{where}: unknown module {p['module']!r}")
        args = list(p.get("args", ()))
        types = [expr_type(a.value, where) for a in args]
        try:
            mapping = resolve_call(
                CallSignature([(a.name, t) for a, t in zip(args, types)]),
                callee)
        except PatchError as err:
            raise EmitError("unsupported-construct",
                            f"{where}: {err.message}") from None
        formals = [d.norm() for d in caller_bound_inputs(callee)]
        by_formal = {f: pos for pos, f in mapping.as_dict().items()}
        outputs = [d.norm() for d in callee.outputs]
        binds: list[tuple[str, int]] = []
        for r in p.get("results", ()):
            if r.output is not None:
                out_idx = outputs.index(normalize_identifier(r.output))
            else:
                out_idx = 0
            d = callee.outputs[out_idx]
            settle(r.target, d.type, where)
            binds.append((normalize_identifier(r.target), out_idx))
        plan.call_plans[s.id] = CallPlan(
            callee=callee.norm(),
            arg_for_formal=[by_formal[f] for f in formals],
            result_binds=binds)

    root = m.root()
    for g in root.children:
        walk_chain(g.entry)
    return plan


def chain_has_direct_exit(m: ModuleDef, entry: str | None) -> bool:
    """True when a chain contains an exit step at its own level (one that
    unwinds to the chain's owning construct). Exits nested in inner
    containers are intercepted there and do not count."""
    sid = entry
    while sid is not None:
        s = m.step(sid)
        if s.kind == K_EXIT:
            return True
        sid = s.next
    return False


def iter_chain(m: ModuleDef, entry: str | None):
    sid = entry
    while sid is not None:
        s = m.step(sid)
        yield s
        sid = s.next
