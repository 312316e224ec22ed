"""Python 3 dialect: indentation blocks, 0-based native indexing.

Stop lowers to a private exception caught at the module function's
boundary so output collection always runs; branch bodies holding a
direct exit wrap in a single-pass for loop so ``break`` leaves just the
branch. Display formatting mirrors the interpreter's literal renderer
byte for byte.
"""

from __future__ import annotations

import json

from ..errors import EmitError
from ..model import (
    Binary, Expr, Field, GROUP_DEFAULT, Index, K_ASSIGN, K_BYPASS, K_CALL,
    K_CONDITIONAL_LOOP, K_COUNTER_LOOP, K_DISPLAY, K_EITHER_OR, K_EXIT,
    K_LABELED, K_READ, K_SENTINEL_LOOP, K_STOP, K_TRANSFORM, Lit,
    ModuleDef, PatchProgram, Step, Unary, Var, normalize_identifier,
)
from ..values import (
    OP_AND, OP_CROSS, OP_DIV, OP_EQ, OP_GE, OP_IN, OP_INTERSECT, OP_LE,
    OP_LENGTH, OP_NEG, OP_NOT, OP_OR, OP_POW, OP_SETDIFF, OP_UNION,
    PatchType, is_numeric, type_of,
)
from ..exprtypes import static_expr_type
from .base import (
    DialectTraits, Emitter, ModulePlan, SourceText, chain_has_direct_exit,
    plan_program,
)

_PREAMBLE = '''# generated by patchlang (dialect: py3)
import ast as _ast
import json as _json
import sys as _sys


class _Stop(Exception):
    pass


def _next_line():
    line = _sys.stdin.readline()
    if not line:
        _sys.stderr.write("out of input\\n")
        _sys.exit(2)
    return line.rstrip("\\n")


def _rd(text):
    out = []
    i = 0
    in_str = False
    while i < len(text):
        ch = text[i]
        if in_str:
            out.append(ch)
            if ch == "\\\\" and i + 1 < len(text):
                out.append(text[i + 1])
                i += 2
                continue
            if ch == '"':
                in_str = False
            i += 1
            continue
        if ch == '"':
            in_str = True
            out.append(ch)
            i += 1
            continue
        if text.startswith("TRUE", i):
            out.append("True")
            i += 4
            continue
        if text.startswith("FALSE", i):
            out.append("False")
            i += 5
            continue
        out.append(ch)
        i += 1
    return _ast.literal_eval("".join(out))


def _show(v):
    if isinstance(v, bool):
        return "TRUE" if v else "FALSE"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if v == int(v) and abs(v) < 1e16:
            return f"{v:.1f}"
        return repr(v)
    if isinstance(v, str):
        return _json.dumps(v, ensure_ascii=False)
    if isinstance(v, list):
        return "[" + ", ".join(_show(e) for e in v) + "]"
    raise ValueError(f"unshowable value: {v!r}")
'''


def _py_literal(v, t: PatchType) -> str:
    if t.kind == "boolean":
        return "True" if v else "False"
    if t.kind == "integer":
        return str(v)
    if t.kind == "real":
        if v != v or v in (float("inf"), float("-inf")):
            raise EmitError("unsupported-construct", "non-finite literal")
        return repr(float(v))
    if t.kind == "string":
        return json.dumps(v, ensure_ascii=False)
    if t.kind == "list":
        elem = t.elem
        if elem is None and v:
            elem = type_of(v[0])
        items = ", ".join(_py_literal(e, elem) for e in v)
        return f"[{items}]"
    raise EmitError("unsupported-construct", f"{t} literal has no lowering")


def _widener(t: PatchType, code: str) -> str:
    """Coerce a parsed canonical literal to exactly type t (numeric
    widening only; canonical ints may stand for reals)."""
    if t.kind == "real":
        return f"float({code})"
    if t.kind == "list":
        inner = _widener(t.elem, "e")
        if inner == "e":
            return code
        return f"[{inner} for e in {code}]"
    return code


def _copier(t: PatchType, code: str) -> str:
    """Copy expression for list values: Patch stores have value
    semantics, Python assignment aliases."""
    if t.kind != "list":
        return code
    if t.elem is not None and t.elem.kind == "list":
        return f"[{_copier(t.elem, 'e')} for e in {code}]"
    return f"list({code})"


class _Fn:
    def __init__(self):
        self.lines: list[str] = []
        self.depth = 0

    def put(self, text: str = "") -> None:
        self.lines.append(("    " * self.depth + text) if text else "")

    def block(self):
        fn = self

        class _Ctx:
            def __enter__(self_inner):
                fn.depth += 1

            def __exit__(self_inner, *exc):
                fn.depth -= 1

        return _Ctx()


class Py3Emitter(Emitter):
    id = "py3"
    traits = DialectTraits(block_style="indent", index_base=0,
                           int_division="real")

    def emit(self, module: ModuleDef,
             program: PatchProgram | None = None) -> SourceText:
        plans, main_plan = plan_program(module, program)
        self._program = program if program is not None else \
            PatchProgram(modules=[module], entry=module.name)
        parts = [_PREAMBLE]
        for plan in plans:
            parts.append(self._emit_function(plan))
        harness = self._emit_main(main_plan)
        parts.append(harness)
        entry = f"f_{main_plan.module.norm()}"
        return SourceText(dialect=self.id, text="\n".join(parts),
                          entry_symbol=entry, harness=harness,
                          filename=f"{main_plan.module.norm()}.py")

    def _emit_function(self, plan: ModulePlan) -> str:
        m = plan.module
        self._plan = plan
        self._tmp = 0
        fn = _Fn()
        params = [f"p_{n}" for n in plan.param_names]
        fn.put(f"def f_{m.norm()}({', '.join(params)}):")
        with fn.block():
            for n in plan.param_names:
                fn.put(f"v_{n} = {_copier(plan.var_types[n], f'p_{n}')}")
            fn.put("try:")
            with fn.block():
                root = m.root()
                count = 0
                for g in root.children:
                    count += self._chain(fn, m, g.entry)
                if count == 0:
                    fn.put("pass")
            fn.put("except _Stop:")
            with fn.block():
                fn.put("pass")
            outs = []
            env = plan.var_types
            for d, n in zip(m.outputs, plan.output_names):
                if d.binding == "console":
                    fn.put(f"print(_show(v_{n}))")
                outs.append(f"v_{n}")
            fn.put(f"return ({', '.join(outs)}{',' if len(outs) == 1 else ''})"
                   if outs else "return ()")
        return "\n".join(fn.lines) + "\n"

    def _emit_main(self, plan: ModulePlan) -> str:
        m = plan.module
        env = plan.var_types
        fn = _Fn()
        fn.put("def main():")
        with fn.block():
            call_args = []
            for k, n in enumerate(plan.param_names):
                t = env[n]
                fn.put(f"a{k} = {_widener(t, '_rd(_next_line())')}")
                call_args.append(f"a{k}")
            fn.put(f"r = f_{m.norm()}({', '.join(call_args)})")
            for idx, d in enumerate(m.outputs):
                if d.binding == "caller":
                    fn.put(f"print(_show(r[{idx}]))")
        fn.put("")
        fn.put("")
        fn.put('if __name__ == "__main__":')
        with fn.block():
            fn.put("main()")
        return "\n".join(fn.lines) + "\n"

    # -- statements

    def _temp(self, base: str) -> str:
        self._tmp += 1
        return f"_{base}{self._tmp}"

    def _chain(self, fn: _Fn, m: ModuleDef, entry: str | None) -> int:
        sid = entry
        count = 0
        while sid is not None:
            step = m.step(sid)
            self._step(fn, m, step)
            count += 1
            sid = step.next
        return count

    def _group(self, fn: _Fn, m: ModuleDef, entry: str | None) -> None:
        if self._chain(fn, m, entry) == 0:
            fn.put("pass")

    def _breakable_group(self, fn: _Fn, m: ModuleDef,
                         entry: str | None) -> None:
        if chain_has_direct_exit(m, entry):
            brk = self._temp("once")
            fn.put(f"for {brk} in (0,):")
            with fn.block():
                self._group(fn, m, entry)
        else:
            self._group(fn, m, entry)

    def _step(self, fn: _Fn, m: ModuleDef, s: Step) -> None:
        p = s.payload
        if s.kind in (K_ASSIGN, K_TRANSFORM):
            self._write(fn, m, s)
        elif s.kind == K_READ:
            t = self._plan.read_types[s.id]
            name = normalize_identifier(p["target"])
            fn.put(f"v_{name} = {_widener(t, '_rd(_next_line())')}")
        elif s.kind == K_DISPLAY:
            code, _ = self._expr(p["value"])
            fn.put(f"print(_show({code}))")
        elif s.kind == K_BYPASS:
            cond, _ = self._expr(p["condition"])
            fn.put(f"if {cond}:")
            with fn.block():
                self._breakable_group(fn, m, s.children[0].entry)
        elif s.kind == K_EITHER_OR:
            cond, _ = self._expr(p["condition"])
            fn.put(f"if {cond}:")
            with fn.block():
                self._breakable_group(fn, m, s.children[0].entry)
            fn.put("else:")
            with fn.block():
                self._breakable_group(fn, m, s.children[1].entry)
        elif s.kind == K_LABELED:
            self._labeled(fn, m, s)
        elif s.kind == K_COUNTER_LOOP:
            self._counter_loop(fn, m, s)
        elif s.kind == K_CONDITIONAL_LOOP:
            cond, _ = self._expr(p["condition"])
            fn.put(f"while {cond}:")
            with fn.block():
                self._group(fn, m, s.children[0].entry)
        elif s.kind == K_SENTINEL_LOOP:
            self._sentinel_loop(fn, m, s)
        elif s.kind == K_CALL:
            self._call(fn, m, s)
        elif s.kind == K_EXIT:
            fn.put("break")
        elif s.kind == K_STOP:
            fn.put("raise _Stop()")
        else:
            raise EmitError("unsupported-construct",
                            f"step kind {s.kind!r} has no py3 lowering")

    def _labeled(self, fn: _Fn, m: ModuleDef, s: Step) -> None:
        scr_code, scr_t = self._expr(s.payload["scrutinee"])
        scr = self._temp("scr")
        fn.put(f"{scr} = {scr_code}")
        arms = [g for g in s.children if g.tag == "arm"]
        default = next((g for g in s.children if g.tag == GROUP_DEFAULT),
                       None)
        first = True
        for g in arms:
            lt = g.label_type if g.label_type is not None else type_of(g.label)
            if not self._label_comparable(scr_t, lt):
                continue  # incomparable constant can never match
            lit = _py_literal(g.label, lt)
            fn.put(f"{'if' if first else 'elif'} {scr} == {lit}:")
            with fn.block():
                self._breakable_group(fn, m, g.entry)
            first = False
        if default is not None:
            if first:
                self._breakable_group(fn, m, default.entry)
            else:
                fn.put("else:")
                with fn.block():
                    self._breakable_group(fn, m, default.entry)

    @staticmethod
    def _label_comparable(scr_t: PatchType, label_t: PatchType) -> bool:
        # bool stays apart from the numerics (Python would conflate them)
        if scr_t.kind == "boolean" or label_t.kind == "boolean":
            return scr_t == label_t
        if is_numeric(scr_t) and is_numeric(label_t):
            return True
        return scr_t == label_t

    def _counter_loop(self, fn: _Fn, m: ModuleDef, s: Step) -> None:
        p = s.payload
        var = f"v_{normalize_identifier(p['var'])}"
        start, _ = self._expr(p["start"])
        end, _ = self._expr(p["end"])
        sN, eN, it = self._temp("s"), self._temp("e"), self._temp("it")
        direction = p.get("direction", "auto")
        fn.put(f"{sN} = {start}")
        fn.put(f"{eN} = {end}")
        if direction == "up":
            fn.put(f"for {it} in range({sN}, {eN} + 1):")
        elif direction == "down":
            fn.put(f"for {it} in range({sN}, {eN} - 1, -1):")
        else:
            dN = self._temp("d")
            fn.put(f"{dN} = 1 if {sN} <= {eN} else -1")
            fn.put(f"for {it} in range({sN}, {eN} + {dN}, {dN}):")
        with fn.block():
            fn.put(f"{var} = {it}")
            self._group(fn, m, s.children[0].entry)

    def _sentinel_loop(self, fn: _Fn, m: ModuleDef, s: Step) -> None:
        p = s.payload
        var = f"v_{normalize_identifier(p['var'])}"
        coll_code, coll_t = self._expr(p["collection"])
        marker_code, marker_t = self._expr(p["marker"])
        cN, mN, it = self._temp("c"), self._temp("m"), self._temp("x")
        fn.put(f"{cN} = list({coll_code})")
        comparable = self._label_comparable(coll_t.elem, marker_t)
        if comparable:
            fn.put(f"{mN} = {marker_code}")
        fn.put(f"for {it} in {cN}:")
        with fn.block():
            if comparable:
                fn.put(f"if {it} == {mN}:")
                with fn.block():
                    fn.put("break")
            fn.put(f"{var} = {it}")
            self._group(fn, m, s.children[0].entry)

    def _call(self, fn: _Fn, m: ModuleDef, s: Step) -> None:
        plan = self._plan.call_plans[s.id]
        args = list(s.payload.get("args", ()))
        arg_codes = [self._expr(a.value)[0] for a in args]
        ordered = [arg_codes[i] for i in plan.arg_for_formal]
        callee_mod = self._program.module(plan.callee)
        ret = self._temp("r")
        fn.put(f"{ret} = f_{plan.callee}({', '.join(ordered)})")
        for target, out_idx in plan.result_binds:
            slot_t = self._plan.var_types[target]
            out_t = callee_mod.outputs[out_idx].type
            fn.put(f"v_{target} = "
                   f"{self._coerce(f'{ret}[{out_idx}]', out_t, slot_t)}")

    def _write(self, fn: _Fn, m: ModuleDef, s: Step) -> None:
        p = s.payload
        src_code, src_t = self._expr(p["source"])
        target = p["target"]
        if isinstance(target, Var):
            name = normalize_identifier(target.name)
            slot_t = self._plan.var_types[name]
            fn.put(f"v_{name} = {self._coerce(src_code, src_t, slot_t)}")
            return
        code, slot_t = self._lvalue(target)
        fn.put(f"{code} = {self._coerce(src_code, src_t, slot_t)}")

    def _lvalue(self, target: Expr) -> tuple[str, PatchType]:
        if isinstance(target, Var):
            name = normalize_identifier(target.name)
            return f"v_{name}", self._plan.var_types[name]
        if isinstance(target, Index):
            base_code, base_t = self._lvalue(target.base)
            pos_code, _ = self._expr(target.pos)
            if base_t.kind != "list":
                raise EmitError("unsupported-construct",
                                f"cannot element-write into {base_t}")
            return f"{base_code}[({pos_code}) - 1]", base_t.elem
        raise EmitError("unsupported-construct",
                        "field writes have no py3 lowering yet")

    @staticmethod
    def _coerce(code: str, src_t: PatchType, slot_t: PatchType) -> str:
        if slot_t.kind == "list":
            return _copier(slot_t, code)
        if src_t == slot_t:
            return code
        if slot_t.kind == "real" and src_t.kind == "integer":
            return f"float({code})"
        if slot_t.kind == "integer" and src_t.kind == "real":
            return f"int({code})"  # truncates toward zero
        return code

    # -- expressions

    def _expr(self, e: Expr) -> tuple[str, PatchType]:
        env = self._plan.var_types
        t = static_expr_type(e, env, strict=True)
        if isinstance(e, Lit):
            return _py_literal(e.value, e.type), t
        if isinstance(e, Var):
            return f"v_{normalize_identifier(e.name)}", t
        if isinstance(e, Index):
            base, _ = self._expr(e.base)
            pos, _ = self._expr(e.pos)
            return f"({base})[({pos}) - 1]", t
        if isinstance(e, Field):
            raise EmitError("unsupported-construct",
                            "tuple fields have no py3 lowering yet")
        if isinstance(e, Unary):
            arg, _ = self._expr(e.arg)
            if e.op == OP_NOT:
                return f"(not ({arg}))", t
            if e.op == OP_NEG:
                return f"(-({arg}))", t
            if e.op == OP_LENGTH:
                return f"len({arg})", t
            raise EmitError("unsupported-construct",
                            f"unary {e.op!r} has no py3 lowering")
        if isinstance(e, Binary):
            lhs, _ = self._expr(e.lhs)
            rhs, _ = self._expr(e.rhs)
            op = e.op
            if op == OP_DIV:
                return f"(({lhs}) / ({rhs}))", t
            if op == OP_POW:
                return f"(float({lhs}) ** float({rhs}))", t
            if op in ("+", "-", "*", "<", ">"):
                return f"(({lhs}) {op} ({rhs}))", t
            if op == OP_EQ:
                return f"(({lhs}) == ({rhs}))", t
            if op == OP_LE:
                return f"(({lhs}) <= ({rhs}))", t
            if op == OP_GE:
                return f"(({lhs}) >= ({rhs}))", t
            if op == OP_AND:
                return f"(({lhs}) and ({rhs}))", t
            if op == OP_OR:
                return f"(({lhs}) or ({rhs}))", t
            if op in (OP_IN, OP_UNION, OP_INTERSECT, OP_SETDIFF, OP_CROSS):
                raise EmitError("unsupported-construct",
                                "set algebra has no py3 lowering yet")
            raise EmitError("unsupported-construct",
                            f"operator {op!r} has no py3 lowering")
        raise EmitError("unsupported-construct", f"bad expression {e!r}")
