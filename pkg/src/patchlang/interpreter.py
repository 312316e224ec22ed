"""Tree-walking interpreter with animation-grade execution tracing.

Each module invocation owns one flat frame (no cross-frame visibility,
no block scoping: loop variables stay readable after their loop). Values
are treated as immutable; element writes rebuild the containing value,
so trace snapshots can share structure safely.

Control flow: EXIT unwinds to the nearest enclosing loop or branch step
and resumes at that step's solid successor; STOP ends the whole run,
collecting whatever outputs are bound. The trace records every step
entry/completion, every mutation with old and new values, every
comparison, loop iteration, read and display, and synthesizes a swap
event when two element writes on one container complete an exchange,
which is what drives the sorting animation.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Any, Callable, Iterable, Optional

from .errors import EvalError, PatchError, RunAborted
from .model import (
    Binary, ChildGroup, Expr, Field, GROUP_ARM, GROUP_DEFAULT, Index, Lit,
    K_ASSIGN, K_BYPASS, K_CALL, K_CONDITIONAL_LOOP, K_COUNTER_LOOP,
    K_DISPLAY, K_EITHER_OR, K_EXIT, K_LABELED, K_MODULE_ROOT, K_READ,
    K_SENTINEL_LOOP, K_STOP, K_TRANSFORM, ModuleDef, PatchProgram, Step,
    Unary, Var, normalize_identifier, path_root,
)
from .values import (
    INTEGER, OP_AND, OP_OR, PatchType, PatchTuple, Value,
    apply_binary, apply_unary, assign_coerce, patch_equal, type_of,
    COMPARE_OPS,
)


# --- Trace ------------------------------------------------------------------


@dataclass(frozen=True)
class TraceEvent:
    """One timestamped execution effect.

    kind is one of: enter, exit-step, assign, transform, compare, swap,
    read, display, loop-iter, exited, stopped. ``data`` holds the
    kind-specific record; ``snapshot`` appears on module enter events and
    maps every seeded variable to its initial value.
    """

    seq: int
    module: str
    step_id: Optional[str]
    kind: str
    data: dict[str, Any] = dc_field(default_factory=dict)
    snapshot: Optional[dict[str, Value]] = None


def watch(trace: Iterable[TraceEvent], var: str,
          module: str | None = None) -> list[tuple[int, Value]]:
    """Chronological value history of one variable across a trace.

    Unknown variables yield an empty history. The first entry is the
    seeded value from the module-enter snapshot when the variable was an
    input.
    """
    try:
        want = normalize_identifier(var)
    except PatchError:
        return []
    want_mod = normalize_identifier(module) if module else None
    out: list[tuple[int, Value]] = []
    for ev in trace:
        if want_mod is not None and normalize_identifier(ev.module) != want_mod:
            continue
        if ev.kind == "enter" and ev.snapshot and want in ev.snapshot:
            out.append((ev.seq, ev.snapshot[want]))
        elif ev.kind in ("assign", "transform") and ev.data.get("var") == want:
            out.append((ev.seq, ev.data["new"]))
        elif ev.kind == "read" and ev.data.get("var") == want:
            out.append((ev.seq, ev.data["value"]))
        elif ev.kind == "loop-iter" and ev.data.get("var") == want:
            out.append((ev.seq, ev.data["value"]))
    return out


# --- I/O adapters -----------------------------------------------------------


class ScriptedConsole:
    """Console fed from a list of input lines; displays are recorded."""

    def __init__(self, lines: Iterable[str] = ()):
        self._lines = list(lines)
        self._cursor = 0
        self.displayed: list[str] = []

    def read_line(self, prompt: str) -> str:
        if self._cursor >= len(self._lines):
            raise EvalError("console-exhausted",
                            f"no scripted input left for {prompt!r}")
        line = self._lines[self._cursor]
        self._cursor += 1
        return line

    def display_line(self, text: str) -> None:
        self.displayed.append(text)


class InteractiveConsole:
    """Console over stdin/stdout for CLI runs."""

    def __init__(self):
        self.displayed: list[str] = []

    def read_line(self, prompt: str) -> str:
        return input(f"{prompt}? ")

    def display_line(self, text: str) -> None:
        self.displayed.append(text)
        print(text)


class Repository:
    """Named-value store keyed by (module, object name)."""

    def __init__(self):
        self._store: dict[tuple[str, str], Value] = {}

    def load(self, module: str, name: str) -> Value:
        key = (normalize_identifier(module), normalize_identifier(name))
        if key not in self._store:
            raise EvalError("repository-missing",
                            f"repository holds no {name!r} for {module!r}")
        return self._store[key]

    def store(self, module: str, name: str, value: Value) -> None:
        key = (normalize_identifier(module), normalize_identifier(name))
        self._store[key] = value


# --- Execution --------------------------------------------------------------


NORMAL = "normal"
EXITED = "exited"
STOPPED = "stopped"


@dataclass
class RunConfig:
    iteration_budget: int = 1_000_000
    max_call_depth: int = 128
    trace: bool = True
    abort_check: Optional[Callable[[], bool]] = None
    # preview: per-module allowed step ids; steps outside the set are
    # inert, modules absent from the dict execute in full
    allowed_steps: Optional[dict[str, set[str]]] = None


@dataclass
class RunResult:
    outputs: dict[str, Value]
    trace: list[TraceEvent]
    stopped: bool = False


class _Frame:
    __slots__ = ("values", "types")

    _SCALAR_FAST = {"integer": int, "real": float, "boolean": bool,
                    "string": str}

    def __init__(self):
        self.values: dict[str, Value] = {}
        self.types: dict[str, Optional[PatchType]] = {}

    def bind(self, name: str, value: Value,
             declared: PatchType | None = None,
             known_fit: bool = False) -> tuple[Value, Value]:
        """Bind name to value, coercing to the slot's type. The first
        binding fixes the slot type. Returns (old, new).

        known_fit skips coercion for values already shaped to the slot
        (rebuilt containers whose elements were coerced individually)."""
        n = normalize_identifier(name)
        slot_t = self.types.get(n) or declared
        if known_fit or slot_t is None:
            new = value
        else:
            fast = self._SCALAR_FAST.get(slot_t.kind)
            if fast is not None and type(value) is fast:
                new = value
            else:
                new = assign_coerce(value, slot_t)
        old = self.values.get(n)
        self.values[n] = new
        if self.types.get(n) is None:
            self.types[n] = slot_t or type_of(new)
        return old, new

    def get(self, name: str) -> Value:
        n = normalize_identifier(name)
        if n not in self.values:
            raise EvalError("unbound-variable", f"{name!r} is not bound")
        return self.values[n]


class Interpreter:
    """Executes validated programs; one instance per run."""

    def __init__(self, program: PatchProgram,
                 console=None, repository: Repository | None = None,
                 config: RunConfig | None = None,
                 on_event: Optional[Callable[[TraceEvent], None]] = None):
        self.program = program
        self.console = console if console is not None else ScriptedConsole()
        self.repository = repository if repository is not None else Repository()
        self.config = config or RunConfig()
        self.on_event = on_event
        self.events: list[TraceEvent] = []
        self._seq = 0
        self._iterations = 0
        self._depth = 0
        # swap recognition: container var -> (index, old, new) of the last
        # unmatched element write
        self._last_elem_write: dict[str, tuple[int, Value, Value]] = {}

    # -- tracing helpers

    def _emit(self, module: str, step_id: str | None, kind: str,
              data: dict | None = None,
              snapshot: dict | None = None) -> None:
        if not self.config.trace:
            return
        self._seq += 1
        ev = TraceEvent(self._seq, module, step_id, kind, data or {}, snapshot)
        self.events.append(ev)
        if self.on_event is not None:
            self.on_event(ev)

    def _tick_loop(self, module: str, step: Step, iteration: int,
                   var: str | None = None, value: Value | None = None) -> None:
        self._iterations += 1
        if self._iterations > self.config.iteration_budget:
            raise EvalError("budget-exceeded",
                            f"iteration budget of "
                            f"{self.config.iteration_budget} exceeded",
                            step_id=step.id)
        # loops with empty bodies never re-enter exec_step, so the
        # force-stop check has to live on the iteration tick as well
        if self.config.abort_check is not None and self.config.abort_check():
            raise RunAborted()
        data: dict[str, Any] = {"iteration": iteration}
        if var is not None:
            data["var"] = normalize_identifier(var)
            data["value"] = value
        self._emit(module, step.id, "loop-iter", data)

    # -- public entry points

    def run(self, module: str | None = None,
            args: dict[str, Value] | None = None) -> RunResult:
        name = module or self.program.entry
        m = self.program.module(name) if name else None
        if m is None:
            raise EvalError("unknown-module", f"no module named {name!r}")
        frame = self._seed_frame(m, args or {})
        outcome = self._run_module(m, frame)
        outputs = self._collect_outputs(m, frame)
        return RunResult(outputs=outputs, trace=self.events,
                         stopped=(outcome == STOPPED))

    # -- module machinery

    def _seed_frame(self, m: ModuleDef, args: dict[str, Value]) -> _Frame:
        from .resolver import CallSignature, caller_bound_inputs, resolve_call

        actuals = [(name, type_of(v)) for name, v in args.items()]
        mapping = resolve_call(CallSignature(actuals), m)
        values = list(args.values())
        frame = _Frame()
        formals = {d.norm(): d for d in caller_bound_inputs(m)}
        for pos, formal in mapping.as_dict().items():
            frame.bind(formal, values[pos], declared=formals[formal].type)
        return frame

    def _run_module(self, m: ModuleDef, frame: _Frame) -> str:
        if self._depth >= self.config.max_call_depth:
            raise EvalError("call-depth-exceeded",
                            f"call depth over {self.config.max_call_depth}")
        self._depth += 1
        try:
            root = m.root()
            snapshot = dict(frame.values)
            self._emit(m.name, root.id, "enter", snapshot=snapshot)
            outcome = NORMAL
            for group in root.children:
                outcome = self._run_chain(m, group.entry, frame)
                if outcome == STOPPED:
                    return STOPPED
            # EXIT at the top level just ends the module body
            self._emit(m.name, root.id, "exit-step")
            return NORMAL if outcome != STOPPED else STOPPED
        finally:
            self._depth -= 1

    def _collect_outputs(self, m: ModuleDef, frame: _Frame) -> dict[str, Value]:
        from .document import render_value

        outputs: dict[str, Value] = {}
        for d in m.outputs:
            n = d.norm()
            if n not in frame.values:
                raise EvalError("output-unassigned",
                                f"output {d.name!r} was never bound")
            v = assign_coerce(frame.values[n], d.type)
            if d.binding == "caller":
                outputs[d.name] = v
            elif d.binding == "console":
                self._emit(m.name, None, "display", {"value": v})
                self.console.display_line(render_value(v))
            elif d.binding == "repository":
                self.repository.store(m.name, d.name, v)
        return outputs

    # -- step machinery

    def _run_chain(self, m: ModuleDef, entry: str | None,
                   frame: _Frame) -> str:
        sid = entry
        while sid is not None:
            step = m.step(sid)
            outcome = self._exec_step(m, step, frame)
            if outcome != NORMAL:
                return outcome
            sid = step.next
        return NORMAL

    def _run_group(self, m: ModuleDef, step: Step, group: ChildGroup,
                   frame: _Frame) -> str:
        """Run one dashed group; EXIT from inside lands here and resumes
        at the owning step's solid successor."""
        outcome = self._run_chain(m, group.entry, frame)
        if outcome == EXITED:
            return NORMAL
        return outcome

    def _exec_step(self, m: ModuleDef, s: Step, frame: _Frame) -> str:
        cfg = self.config
        if cfg.allowed_steps is not None:
            allowed = cfg.allowed_steps.get(m.norm())
            if allowed is not None and s.id not in allowed:
                return NORMAL  # preview: later steps are inert
        if cfg.abort_check is not None and cfg.abort_check():
            raise RunAborted()
        self._emit(m.name, s.id, "enter")
        try:
            outcome = self._dispatch(m, s, frame)
        except PatchError as e:
            raise e.at_step(s.id)
        if outcome != STOPPED:
            self._emit(m.name, s.id, "exit-step")
        return outcome

    def _dispatch(self, m: ModuleDef, s: Step, frame: _Frame) -> str:
        kind = s.kind
        p = s.payload

        if kind == K_ASSIGN or kind == K_TRANSFORM:
            self._write_target(m, s, frame, p["target"], p["source"],
                               "assign" if kind == K_ASSIGN else "transform")
            return NORMAL

        if kind == K_READ:
            return self._do_read(m, s, frame)

        if kind == K_DISPLAY:
            from .document import render_value
            v = self._eval(m, p["value"], frame)
            self._emit(m.name, s.id, "display", {"value": v})
            self.console.display_line(render_value(v))
            return NORMAL

        if kind == K_BYPASS:
            if self._require_bool(self._eval(m, p["condition"], frame)):
                return self._run_group(m, s, s.children[0], frame)
            return NORMAL

        if kind == K_EITHER_OR:
            which = 0 if self._require_bool(
                self._eval(m, p["condition"], frame)) else 1
            return self._run_group(m, s, s.children[which], frame)

        if kind == K_LABELED:
            v = self._eval(m, p["scrutinee"], frame)
            default = None
            for g in s.children:
                if g.tag == GROUP_DEFAULT:
                    default = g
                elif g.tag == GROUP_ARM and patch_equal(g.label, v):
                    return self._run_group(m, s, g, frame)
            if default is not None:
                return self._run_group(m, s, default, frame)
            return NORMAL  # no match, no default: silent no-op

        if kind == K_COUNTER_LOOP:
            return self._do_counter_loop(m, s, frame)

        if kind == K_CONDITIONAL_LOOP:
            iteration = 0
            while self._require_bool(self._eval(m, p["condition"], frame)):
                iteration += 1
                self._tick_loop(m.name, s, iteration)
                outcome = self._run_chain(m, s.children[0].entry, frame)
                if outcome == EXITED:
                    return NORMAL
                if outcome == STOPPED:
                    return STOPPED
            return NORMAL

        if kind == K_SENTINEL_LOOP:
            return self._do_sentinel_loop(m, s, frame)

        if kind == K_CALL:
            return self._do_call(m, s, frame)

        if kind == K_EXIT:
            self._emit(m.name, s.id, "exited")
            return EXITED

        if kind == K_STOP:
            self._emit(m.name, s.id, "stopped")
            return STOPPED

        if kind == K_MODULE_ROOT:
            raise EvalError("malformed-tree", "nested module-root step")
        raise EvalError("malformed-tree", f"unknown step kind {kind!r}")

    # -- individual step kinds

    def _do_read(self, m: ModuleDef, s: Step, frame: _Frame) -> str:
        from .document import read_value

        name = s.payload["target"]
        decl = m.input_decl(name) or m.output_decl(name)
        t = decl.type if decl is not None else s.payload.get("type")
        if t is None:
            raise EvalError("read-untyped",
                            f"read into {name!r} has no declared type")
        if decl is not None and decl.binding == "repository":
            v = self.repository.load(m.name, name)
            v = assign_coerce(v, t)
        else:
            raw = self.console.read_line(name)
            v = read_value(raw, t)
        old, new = frame.bind(name, v, declared=t)
        self._emit(m.name, s.id, "read",
                   {"var": normalize_identifier(name), "value": new})
        return NORMAL

    def _do_counter_loop(self, m: ModuleDef, s: Step, frame: _Frame) -> str:
        p = s.payload
        start = self._require_int(self._eval(m, p["start"], frame), "start")
        end = self._require_int(self._eval(m, p["end"], frame), "end")
        direction = p.get("direction", "auto")
        if direction == "auto":
            step_by = 1 if start <= end else -1
        else:
            step_by = 1 if direction == "up" else -1
        var = p["var"]
        i = start
        iteration = 0
        while (i <= end) if step_by > 0 else (i >= end):
            iteration += 1
            frame.bind(var, i, declared=INTEGER)
            self._tick_loop(m.name, s, iteration, var, i)
            outcome = self._run_chain(m, s.children[0].entry, frame)
            if outcome == EXITED:
                return NORMAL
            if outcome == STOPPED:
                return STOPPED
            i += step_by
        return NORMAL

    def _do_sentinel_loop(self, m: ModuleDef, s: Step, frame: _Frame) -> str:
        p = s.payload
        coll = self._eval(m, p["collection"], frame)
        if not isinstance(coll, list):
            raise EvalError("type-mismatch",
                            "sentinel loops iterate ordered collections "
                            "(lists); sets have no iteration order")
        marker = self._eval(m, p["marker"], frame)
        var = p["var"]
        iteration = 0
        for elem in list(coll):  # snapshot: body writes don't steer iteration
            if patch_equal(elem, marker):
                break  # stop before processing the sentinel
            iteration += 1
            frame.bind(var, elem)
            self._tick_loop(m.name, s, iteration, var, elem)
            outcome = self._run_chain(m, s.children[0].entry, frame)
            if outcome == EXITED:
                return NORMAL
            if outcome == STOPPED:
                return STOPPED
        return NORMAL

    def _do_call(self, m: ModuleDef, s: Step, frame: _Frame) -> str:
        from .resolver import (CallSignature, caller_bound_inputs,
                               resolve_module)

        p = s.payload
        args = list(p.get("args", ()))
        values = [self._eval(m, a.value, frame) for a in args]
        signature = CallSignature(
            [(a.name, type_of(v)) for a, v in zip(args, values)])
        callee, mapping = resolve_module(p["module"], signature, self.program)

        callee_frame = _Frame()
        formals = {d.norm(): d for d in caller_bound_inputs(callee)}
        for pos, formal in mapping.as_dict().items():
            callee_frame.bind(formal, values[pos],
                              declared=formals[formal].type)
        outcome = self._run_module(callee, callee_frame)
        outputs = self._collect_outputs(callee, callee_frame)

        by_norm = {normalize_identifier(k): v for k, v in outputs.items()}
        for r in p.get("results", ()):
            if r.output is not None:
                key = normalize_identifier(r.output)
                if key not in by_norm:
                    raise EvalError("call-binding",
                                    f"{callee.name!r} returned no "
                                    f"{r.output!r}")
                v = by_norm[key]
            else:
                if len(outputs) != 1:
                    raise EvalError("call-binding",
                                    "unnamed result binding needs a "
                                    "single-output callee")
                v = next(iter(outputs.values()))
            old, new = frame.bind(r.target, v)
            self._emit(m.name, s.id, "assign",
                       {"var": normalize_identifier(r.target),
                        "old": old, "new": new})
        return STOPPED if outcome == STOPPED else NORMAL

    # -- writes and expressions

    def _write_target(self, m: ModuleDef, s: Step, frame: _Frame,
                      target: Expr, source: Expr, event_kind: str) -> None:
        v = self._eval(m, source, frame)
        if isinstance(target, Var):
            decl = m.input_decl(target.name) or m.output_decl(target.name)
            old, new = frame.bind(target.name, v,
                                  declared=decl.type if decl else None)
            self._emit(m.name, s.id, event_kind,
                       {"var": normalize_identifier(target.name),
                        "old": old, "new": new})
            return
        # element or field write: rebuild the container along the path;
        # elements coerce during the rebuild, so the rebind skips it
        root_name = path_root(target)
        selectors = self._path_selectors(m, target, frame)
        old_whole = frame.get(root_name)
        slot_t = frame.types.get(normalize_identifier(root_name))
        new_whole = self._rebuild(old_whole, selectors, v, s, slot_t)
        old, new = frame.bind(root_name, new_whole, known_fit=True)
        self._emit(m.name, s.id, event_kind,
                   {"var": normalize_identifier(root_name),
                    "old": old, "new": new})
        if (len(selectors) == 1 and selectors[0][0] == "index"
                and isinstance(old_whole, list)):
            self._note_elem_write(m, s, normalize_identifier(root_name),
                                  selectors[0][1], old_whole, new_whole)

    def _path_selectors(self, m: ModuleDef, target: Expr,
                        frame: _Frame) -> list[tuple[str, Any]]:
        sels: list[tuple[str, Any]] = []
        e = target
        while not isinstance(e, Var):
            if isinstance(e, Index):
                sels.append(("index", self._require_int(
                    self._eval(m, e.pos, frame), "index")))
                e = e.base
            elif isinstance(e, Field):
                sels.append(("field", e.name))
                e = e.base
            else:
                raise EvalError("target-shape",
                                "write target must be a variable path")
        sels.reverse()
        return sels

    def _rebuild(self, container: Value, sels: list[tuple[str, Any]],
                 v: Value, s: Step, slot_t: PatchType | None) -> Value:
        """Copy-on-write update along a selector path; the incoming value
        coerces to the slot type threaded down from the frame (falling
        back to the old element's type when the slot is untyped)."""
        if not sels:
            if slot_t is None:
                slot_t = type_of(container)
            return assign_coerce(v, slot_t)
        kind, key = sels[0]
        rest = sels[1:]
        if kind == "index":
            if isinstance(container, list):
                if key < 1 or key > len(container):
                    raise EvalError("index-out-of-range",
                                    f"position {key} outside "
                                    f"1..{len(container)}")
                elem_slot = slot_t.elem \
                    if slot_t is not None and slot_t.kind == "list" else None
                inner = self._rebuild(container[key - 1], rest, v, s,
                                      elem_slot)
                out = list(container)
                out[key - 1] = inner
                return out
            if isinstance(container, PatchTuple):
                if key < 1 or key > len(container):
                    raise EvalError("index-out-of-range",
                                    f"position {key} outside "
                                    f"1..{len(container)}")
                ft = slot_t.fields[key - 1][1] \
                    if slot_t is not None and slot_t.kind == "tuple" else None
                inner = self._rebuild(container.values[key - 1], rest, v, s,
                                      ft)
                vals = list(container.values)
                vals[key - 1] = inner
                return PatchTuple(container.names, vals)
            raise EvalError("not-indexable",
                            f"{type_of(container)} is not indexable")
        else:
            if not isinstance(container, PatchTuple):
                raise EvalError("no-such-field",
                                f"{type_of(container)} has no named fields")
            pos = container.position(key)
            ft = slot_t.fields[pos - 1][1] \
                if slot_t is not None and slot_t.kind == "tuple" else None
            inner = self._rebuild(container.values[pos - 1], rest, v, s, ft)
            vals = list(container.values)
            vals[pos - 1] = inner
            return PatchTuple(container.names, vals)

    def _note_elem_write(self, m: ModuleDef, s: Step, container: str,
                         i: int, old_whole: list, new_whole: list) -> None:
        """Recognize the three-statement exchange idiom.

        Two element writes on one container where the second write puts
        back the first one's overwritten value (and vice versa) complete
        a swap; that is what the editor animates as an exchange.
        """
        old_elem = old_whole[i - 1]
        new_elem = new_whole[i - 1]
        prev = self._last_elem_write.get(container)
        if prev is not None:
            pi, p_old, p_new = prev
            if (pi != i and patch_equal(new_elem, p_old)
                    and patch_equal(old_elem, p_new)):
                del self._last_elem_write[container]
                self._emit(m.name, s.id, "swap",
                           {"container": container,
                            "i": min(pi, i), "j": max(pi, i)})
                return
        self._last_elem_write[container] = (i, old_elem, new_elem)

    def _eval(self, m: ModuleDef, e: Expr, frame: _Frame) -> Value:
        if isinstance(e, Lit):
            return e.value
        if isinstance(e, Var):
            return frame.get(e.name)
        if isinstance(e, Index):
            from .values import index as index_op
            return index_op(self._eval(m, e.base, frame),
                            self._eval(m, e.pos, frame))
        if isinstance(e, Field):
            from .values import field as field_op
            return field_op(self._eval(m, e.base, frame), e.name)
        if isinstance(e, Unary):
            return apply_unary(e.op, self._eval(m, e.arg, frame))
        if isinstance(e, Binary):
            if e.op == OP_AND or e.op == OP_OR:
                lhs = self._require_bool(self._eval(m, e.lhs, frame))
                if e.op == OP_AND and not lhs:
                    return False
                if e.op == OP_OR and lhs:
                    return True
                return self._require_bool(self._eval(m, e.rhs, frame))
            lhs = self._eval(m, e.lhs, frame)
            rhs = self._eval(m, e.rhs, frame)
            result = apply_binary(e.op, lhs, rhs)
            if e.op in COMPARE_OPS:
                self._emit(m.name, None, "compare",
                           {"lhs": lhs, "rhs": rhs, "op": e.op,
                            "result": result})
            return result
        raise EvalError("malformed-expr", f"not an expression: {e!r}")

    @staticmethod
    def _require_bool(v: Value) -> bool:
        if not isinstance(v, bool):
            raise EvalError("type-mismatch",
                            f"condition must be Boolean, got {type_of(v)}")
        return v

    @staticmethod
    def _require_int(v: Value, what: str) -> int:
        if isinstance(v, bool) or not isinstance(v, int):
            raise EvalError("type-mismatch",
                            f"{what} must be an integer, got {type_of(v)}")
        return v


def run_module(program: PatchProgram, module: str | None = None,
               args: dict[str, Value] | None = None,
               console=None, repository: Repository | None = None,
               config: RunConfig | None = None,
               on_event: Optional[Callable[[TraceEvent], None]] = None
               ) -> RunResult:
    """Run one module of a validated program and return its outputs and
    full trace."""
    interp = Interpreter(program, console=console, repository=repository,
                         config=config, on_event=on_event)
    return interp.run(module, args)
