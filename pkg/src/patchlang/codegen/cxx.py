"""C++ dialect: curly braces, 0-based native indexing, compiled.

Integer maps to int64_t, real to double, lists to std::vector. Division
and exponentiation force double regardless of the native truncating
integer division. One-based indexing lowers with an explicit -1 offset.
Each module becomes a function whose body runs inside an immediately
invoked lambda so that stop (and a top-level exit) can return without
skipping output collection.
"""

from __future__ import annotations

from ..errors import EmitError
from ..model import (
    Binary, Expr, Field, GROUP_DEFAULT, Index, K_ASSIGN, K_BYPASS, K_CALL,
    K_CONDITIONAL_LOOP, K_COUNTER_LOOP, K_DISPLAY, K_EITHER_OR, K_EXIT,
    K_LABELED, K_READ, K_SENTINEL_LOOP, K_STOP, K_TRANSFORM, Lit,
    ModuleDef, PatchProgram, Step, Unary, Var, normalize_identifier,
)
from ..values import (
    OP_AND, OP_CROSS, OP_DIV, OP_EQ, OP_GE, OP_IN,
    OP_INTERSECT, OP_LE, OP_LENGTH, OP_NEG, OP_NOT, OP_OR, OP_POW,
    OP_SETDIFF, OP_UNION, PatchType, is_numeric, type_of,
)
from ..exprtypes import static_expr_type
from .base import (
    DialectTraits, Emitter, ModulePlan, SourceText, chain_has_direct_exit,
    plan_program,
)

_PREAMBLE = r"""// generated by patchlang (dialect: cxx)
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

namespace patchrt {

struct Cur {
    const std::string& s;
    size_t i = 0;
    explicit Cur(const std::string& t) : s(t) {}
    void ws() {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' ||
                                s[i] == '\r' || s[i] == '\n')) ++i;
    }
    char peek() const { return i < s.size() ? s[i] : '\0'; }
    void expect(char c) {
        ws();
        if (peek() != c) { std::fprintf(stderr, "bad literal\n"); std::exit(2); }
        ++i;
    }
};

inline int64_t rd_i(Cur& c) {
    c.ws();
    char* end = nullptr;
    long long v = std::strtoll(c.s.c_str() + c.i, &end, 10);
    c.i = static_cast<size_t>(end - c.s.c_str());
    return v;
}

inline double rd_r(Cur& c) {
    c.ws();
    char* end = nullptr;
    double v = std::strtod(c.s.c_str() + c.i, &end);
    c.i = static_cast<size_t>(end - c.s.c_str());
    return v;
}

inline bool rd_b(Cur& c) {
    c.ws();
    if (c.s.compare(c.i, 4, "TRUE") == 0) { c.i += 4; return true; }
    if (c.s.compare(c.i, 5, "FALSE") == 0) { c.i += 5; return false; }
    std::fprintf(stderr, "bad boolean literal\n");
    std::exit(2);
}

inline void utf8_append(std::string& out, unsigned code) {
    if (code < 0x80) { out += static_cast<char>(code); return; }
    if (code < 0x800) {
        out += static_cast<char>(0xC0 | (code >> 6));
        out += static_cast<char>(0x80 | (code & 0x3F));
        return;
    }
    out += static_cast<char>(0xE0 | (code >> 12));
    out += static_cast<char>(0x80 | ((code >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (code & 0x3F));
}

inline std::string rd_s(Cur& c) {
    c.expect('"');
    std::string out;
    while (c.i < c.s.size()) {
        char ch = c.s[c.i];
        if (ch == '"') { ++c.i; return out; }
        if (ch == '\\') {
            char nx = c.i + 1 < c.s.size() ? c.s[c.i + 1] : '\0';
            switch (nx) {
                case 'n': out += '\n'; c.i += 2; break;
                case 't': out += '\t'; c.i += 2; break;
                case 'r': out += '\r'; c.i += 2; break;
                case '"': out += '"'; c.i += 2; break;
                case '\\': out += '\\'; c.i += 2; break;
                case 'u': {
                    unsigned code = static_cast<unsigned>(
                        std::stoul(c.s.substr(c.i + 2, 4), nullptr, 16));
                    utf8_append(out, code);
                    c.i += 6;
                    break;
                }
                default: out += nx; c.i += 2; break;
            }
            continue;
        }
        out += ch;
        ++c.i;
    }
    std::fprintf(stderr, "unterminated string\n");
    std::exit(2);
}

template <class F>
auto rd_list(Cur& c, F elem) -> std::vector<decltype(elem(c))> {
    std::vector<decltype(elem(c))> out;
    c.expect('[');
    c.ws();
    if (c.peek() == ']') { ++c.i; return out; }
    while (true) {
        out.push_back(elem(c));
        c.ws();
        if (c.peek() == ',') { ++c.i; continue; }
        c.expect(']');
        return out;
    }
}

inline std::string show(int64_t v) { return std::to_string(v); }
inline std::string show(bool v) { return v ? "TRUE" : "FALSE"; }

inline std::string show(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, res.ptr);
    if (s.find('.') == std::string::npos &&
        s.find('e') == std::string::npos &&
        s.find("inf") == std::string::npos &&
        s.find("nan") == std::string::npos)
        s += ".0";
    return s;
}

inline std::string show(const std::string& v) {
    std::string out = "\"";
    for (char ch : v) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out += ch;
        }
    }
    return out + "\"";
}

template <class T>
std::string show(const std::vector<T>& v) {
    std::string out = "[";
    for (size_t k = 0; k < v.size(); ++k) {
        if (k) out += ", ";
        out += show(v[k]);
    }
    return out + "]";
}

inline std::string next_line() {
    std::string line;
    if (!std::getline(std::cin, line)) {
        std::fprintf(stderr, "out of input\n");
        std::exit(2);
    }
    return line;
}

}  // namespace patchrt
"""


def _cpp_type(t: PatchType) -> str:
    if t.kind == "integer":
        return "int64_t"
    if t.kind == "real":
        return "double"
    if t.kind == "boolean":
        return "bool"
    if t.kind == "string":
        return "std::string"
    if t.kind == "list":
        return f"std::vector<{_cpp_type(t.elem)}>"
    raise EmitError("unsupported-construct", f"{t} has no C++ lowering")


def _cpp_string(v: str) -> str:
    out = ['"']
    for ch in v:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ch == "\r":
            out.append("\\r")
        elif ord(ch) < 0x20 or ord(ch) > 0x7E:
            out.append(f"\\u{ord(ch):04x}" if ord(ch) > 0x7E
                       else f"\\x{ord(ch):02x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def _cpp_literal(v, t: PatchType) -> str:
    if t.kind == "boolean":
        return "true" if v else "false"
    if t.kind == "integer":
        return f"INT64_C({v})"
    if t.kind == "real":
        if v != v or v in (float("inf"), float("-inf")):
            raise EmitError("unsupported-construct", "non-finite literal")
        s = repr(float(v))
        return s
    if t.kind == "string":
        return f"std::string({_cpp_string(v)})"
    if t.kind == "list":
        elem = t.elem
        if elem is None and v:
            elem = type_of(v[0])
        if elem is None:
            raise EmitError("unsupported-construct",
                            "empty list literal of unknown element type")
        items = ", ".join(_cpp_literal(e, elem) for e in v)
        return f"std::vector<{_cpp_type(elem)}>{{{items}}}"
    raise EmitError("unsupported-construct", f"{t} literal has no lowering")


def _reader_expr(t: PatchType, cur: str) -> str:
    if t.kind == "integer":
        return f"patchrt::rd_i({cur})"
    if t.kind == "real":
        return f"patchrt::rd_r({cur})"
    if t.kind == "boolean":
        return f"patchrt::rd_b({cur})"
    if t.kind == "string":
        return f"patchrt::rd_s({cur})"
    if t.kind == "list":
        inner = _reader_expr(t.elem, "c2")
        return (f"patchrt::rd_list({cur}, [](patchrt::Cur& c2) "
                f"{{ return {inner}; }})")
    raise EmitError("unsupported-construct", f"{t} has no reader")


class _Fn:
    """Accumulates indented lines for one emitted function."""

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


class CxxEmitter(Emitter):
    id = "cxx"
    traits = DialectTraits(block_style="braces", index_base=0,
                           int_division="truncating")

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
                          filename=f"{main_plan.module.norm()}.cpp")

    # -- functions

    def _emit_function(self, plan: ModulePlan) -> str:
        m = plan.module
        self._plan = plan
        self._tmp = 0
        fn = _Fn()
        env = plan.var_types

        params = [f"{_cpp_type(env[n])} p_{n}" for n in plan.param_names]
        outs = [f"{_cpp_type(env[n])}& o_{n}" for n in plan.output_names]
        fn.put(f"void f_{m.norm()}({', '.join(params + outs)}) {{")
        with fn.block():
            for n in plan.param_names:
                fn.put(f"{_cpp_type(env[n])} v_{n} = std::move(p_{n});")
            for n in sorted(plan.locals()):
                fn.put(f"{_cpp_type(env[n])} v_{n}{{}};")
            fn.put("[&] {")
            with fn.block():
                root = m.root()
                for g in root.children:
                    self._chain(fn, m, g.entry)
            fn.put("}();")
            for n in plan.output_names:
                fn.put(f"o_{n} = v_{n};")
        fn.put("}")
        return "\n".join(fn.lines) + "\n"

    def _emit_main(self, plan: ModulePlan) -> str:
        m = plan.module
        env = plan.var_types
        fn = _Fn()
        fn.put("int main() {")
        with fn.block():
            fn.put("std::ios::sync_with_stdio(false);")
            call_args = []
            for k, n in enumerate(plan.param_names):
                t = env[n]
                fn.put(f"std::string line{k} = patchrt::next_line();")
                fn.put(f"patchrt::Cur cur{k}(line{k});")
                fn.put(f"{_cpp_type(t)} a{k} = "
                       f"{_reader_expr(t, f'cur{k}')};")
                call_args.append(f"a{k}")
            for n in plan.output_names:
                fn.put(f"{_cpp_type(env[n])} o_{n}{{}};")
                call_args.append(f"o_{n}")
            fn.put(f"f_{m.norm()}({', '.join(call_args)});")
            for d in m.outputs:
                if d.binding == "caller":
                    fn.put(f'std::cout << patchrt::show(o_{d.norm()}) '
                           f'<< "\\n";')
            fn.put("return 0;")
        fn.put("}")
        return "\n".join(fn.lines) + "\n"

    # -- statements

    def _chain(self, fn: _Fn, m: ModuleDef, entry: str | None) -> None:
        sid = entry
        while sid is not None:
            step = m.step(sid)
            self._step(fn, m, step)
            sid = step.next

    def _temp(self, base: str) -> str:
        self._tmp += 1
        return f"{base}{self._tmp}"

    def _step(self, fn: _Fn, m: ModuleDef, s: Step) -> None:
        p = s.payload
        env = self._plan.var_types
        if s.kind in (K_ASSIGN, K_TRANSFORM):
            self._write(fn, m, s)
        elif s.kind == K_READ:
            t = self._plan.read_types[s.id]
            name = normalize_identifier(p["target"])
            line = self._temp("rline")
            cur = self._temp("rcur")
            fn.put("{")
            with fn.block():
                fn.put(f"std::string {line} = patchrt::next_line();")
                fn.put(f"patchrt::Cur {cur}({line});")
                fn.put(f"v_{name} = {_reader_expr(t, cur)};")
            fn.put("}")
        elif s.kind == K_DISPLAY:
            code, _ = self._expr(p["value"])
            fn.put(f'std::cout << patchrt::show({code}) << "\\n";')
        elif s.kind == K_BYPASS:
            cond, _ = self._expr(p["condition"])
            fn.put(f"if ({cond}) {{")
            with fn.block():
                self._breakable_group(fn, m, s, s.children[0].entry)
            fn.put("}")
        elif s.kind == K_EITHER_OR:
            cond, _ = self._expr(p["condition"])
            fn.put(f"if ({cond}) {{")
            with fn.block():
                self._breakable_group(fn, m, s, s.children[0].entry)
            fn.put("} else {")
            with fn.block():
                self._breakable_group(fn, m, s, s.children[1].entry)
            fn.put("}")
        elif s.kind == K_LABELED:
            self._labeled(fn, m, s)
        elif s.kind == K_COUNTER_LOOP:
            self._counter_loop(fn, m, s)
        elif s.kind == K_CONDITIONAL_LOOP:
            cond, _ = self._expr(p["condition"])
            fn.put(f"while ({cond}) {{")
            with fn.block():
                self._chain(fn, m, s.children[0].entry)
            fn.put("}")
        elif s.kind == K_SENTINEL_LOOP:
            self._sentinel_loop(fn, m, s)
        elif s.kind == K_CALL:
            self._call(fn, m, s)
        elif s.kind == K_EXIT:
            fn.put("break;")
        elif s.kind == K_STOP:
            fn.put("return;")
        else:
            raise EmitError("unsupported-construct",
                            f"step kind {s.kind!r} has no cxx lowering")

    def _breakable_group(self, fn: _Fn, m: ModuleDef, owner: Step,
                         entry: str | None) -> None:
        """Branch bodies with a direct exit wrap in do/while(false) so the
        exit's break leaves only the branch."""
        if chain_has_direct_exit(m, entry):
            fn.put("do {")
            with fn.block():
                self._chain(fn, m, entry)
            fn.put("} while (false);")
        else:
            self._chain(fn, m, entry)

    def _labeled(self, fn: _Fn, m: ModuleDef, s: Step) -> None:
        scr_code, scr_t = self._expr(s.payload["scrutinee"])
        scr = self._temp("scr")
        fn.put("{")
        with fn.block():
            fn.put(f"const {_cpp_type(scr_t)} {scr} = {scr_code};")
            first = True
            arms = [g for g in s.children if g.tag == "arm"]
            default = next((g for g in s.children if g.tag == GROUP_DEFAULT),
                           None)
            emitted = 0
            for g in arms:
                lt = g.label_type if g.label_type is not None \
                    else type_of(g.label)
                if not self._label_comparable(scr_t, lt):
                    continue  # this arm can never match; skip its lowering
                lit = _cpp_literal(g.label, lt)
                kw = "if" if first else "} else if"
                fn.put(f"{kw} ({scr} == {lit}) {{")
                with fn.block():
                    self._breakable_group(fn, m, s, g.entry)
                first = False
                emitted += 1
            if default is not None:
                if first:
                    self._breakable_group(fn, m, s, default.entry)
                else:
                    fn.put("} else {")
                    with fn.block():
                        self._breakable_group(fn, m, s, default.entry)
                    fn.put("}")
            elif not first:
                fn.put("}")
        fn.put("}")

    @staticmethod
    def _label_comparable(scr_t: PatchType, label_t: PatchType) -> bool:
        if is_numeric(scr_t) and is_numeric(label_t):
            return True
        return scr_t == label_t

    def _counter_loop(self, fn: _Fn, m: ModuleDef, s: Step) -> None:
        p = s.payload
        var = f"v_{normalize_identifier(p['var'])}"
        start, _ = self._expr(p["start"])
        end, _ = self._expr(p["end"])
        sN, eN = self._temp("s"), self._temp("e")
        direction = p.get("direction", "auto")
        it = self._temp("it")
        fn.put("{")
        with fn.block():
            fn.put(f"const int64_t {sN} = {start};")
            fn.put(f"const int64_t {eN} = {end};")
            # iterate on a temp: the loop variable only binds when the
            # body actually runs (zero iterations leave it untouched)
            if direction == "up":
                fn.put(f"for (int64_t {it} = {sN}; {it} <= {eN}; ++{it}) {{")
            elif direction == "down":
                fn.put(f"for (int64_t {it} = {sN}; {it} >= {eN}; --{it}) {{")
            else:
                dN = self._temp("d")
                fn.put(f"const int64_t {dN} = ({sN} <= {eN}) ? 1 : -1;")
                fn.put(f"for (int64_t {it} = {sN}; ({dN} > 0) ? "
                       f"({it} <= {eN}) : ({it} >= {eN}); {it} += {dN}) {{")
            with fn.block():
                fn.put(f"{var} = {it};")
                self._chain(fn, m, s.children[0].entry)
            fn.put("}")
        fn.put("}")

    def _sentinel_loop(self, fn: _Fn, m: ModuleDef, s: Step) -> None:
        p = s.payload
        var = f"v_{normalize_identifier(p['var'])}"
        coll_code, coll_t = self._expr(p["collection"])
        marker_code, marker_t = self._expr(p["marker"])
        cN, mN, kN = self._temp("coll"), self._temp("mark"), self._temp("k")
        fn.put("{")
        with fn.block():
            fn.put(f"const {_cpp_type(coll_t)} {cN} = {coll_code};")
            comparable = self._label_comparable(coll_t.elem, marker_t)
            if comparable:
                fn.put(f"const {_cpp_type(marker_t)} {mN} = {marker_code};")
            fn.put(f"for (size_t {kN} = 0; {kN} < {cN}.size(); ++{kN}) {{")
            with fn.block():
                if comparable:
                    fn.put(f"if ({cN}[{kN}] == {mN}) break;")
                fn.put(f"{var} = {cN}[{kN}];")
                self._chain(fn, m, s.children[0].entry)
            fn.put("}")
        fn.put("}")

    def _call(self, fn: _Fn, m: ModuleDef, s: Step) -> None:
        plan = self._plan.call_plans[s.id]
        args = list(s.payload.get("args", ()))
        arg_codes = [self._expr(a.value)[0] for a in args]
        callee_outs: list[str] = []
        fn.put("{")
        with fn.block():
            # temporaries for every callee output, in declared order
            callee_mod = self._program.module(plan.callee)
            for d in callee_mod.outputs:
                tmp = self._temp("r")
                callee_outs.append(tmp)
                fn.put(f"{_cpp_type(d.type)} {tmp}{{}};")
            ordered = [arg_codes[i] for i in plan.arg_for_formal]
            fn.put(f"f_{plan.callee}({', '.join(ordered + callee_outs)});")
            for target, out_idx in plan.result_binds:
                src = callee_outs[out_idx]
                slot_t = self._plan.var_types[target]
                out_t = callee_mod.outputs[out_idx].type
                fn.put(f"v_{target} = {self._coerce(src, out_t, slot_t)};")
        fn.put("}")

    def _write(self, fn: _Fn, m: ModuleDef, s: Step) -> None:
        p = s.payload
        src_code, src_t = self._expr(p["source"])
        target = p["target"]
        if isinstance(target, Var):
            name = normalize_identifier(target.name)
            slot_t = self._plan.var_types[name]
            fn.put(f"v_{name} = {self._coerce(src_code, src_t, slot_t)};")
            return
        # element write: lower the path to chained native indexing
        code, slot_t = self._lvalue(target)
        fn.put(f"{code} = {self._coerce(src_code, src_t, slot_t)};")

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
            return (f"{base_code}[static_cast<size_t>(({pos_code}) - 1)]",
                    base_t.elem)
        raise EmitError("unsupported-construct",
                        "field writes have no cxx lowering yet")

    @staticmethod
    def _coerce(code: str, src_t: PatchType, slot_t: PatchType) -> str:
        if src_t == slot_t:
            return code
        if slot_t.kind == "real" and src_t.kind == "integer":
            return f"static_cast<double>({code})"
        if slot_t.kind == "integer" and src_t.kind == "real":
            return f"static_cast<int64_t>({code})"  # truncates toward zero
        return code

    # -- expressions

    def _expr(self, e: Expr) -> tuple[str, PatchType]:
        env = self._plan.var_types
        t = static_expr_type(e, env, strict=True)
        if isinstance(e, Lit):
            return _cpp_literal(e.value, e.type), t
        if isinstance(e, Var):
            return f"v_{normalize_identifier(e.name)}", t
        if isinstance(e, Index):
            base, base_t = self._expr(e.base)
            pos, _ = self._expr(e.pos)
            return (f"({base})[static_cast<size_t>(({pos}) - 1)]", t)
        if isinstance(e, Field):
            raise EmitError("unsupported-construct",
                            "tuple fields have no cxx lowering yet")
        if isinstance(e, Unary):
            arg, arg_t = self._expr(e.arg)
            if e.op == OP_NOT:
                return f"(!({arg}))", t
            if e.op == OP_NEG:
                return f"(-({arg}))", t
            if e.op == OP_LENGTH:
                return f"static_cast<int64_t>(({arg}).size())", t
            raise EmitError("unsupported-construct",
                            f"unary {e.op!r} has no cxx lowering")
        if isinstance(e, Binary):
            return self._binary(e, t)
        raise EmitError("unsupported-construct", f"bad expression {e!r}")

    def _binary(self, e: Binary, t: PatchType) -> tuple[str, PatchType]:
        lhs, lt = self._expr(e.lhs)
        rhs, rt = self._expr(e.rhs)
        op = e.op
        if op == OP_DIV:
            return (f"(static_cast<double>({lhs}) / "
                    f"static_cast<double>({rhs}))", t)
        if op == OP_POW:
            return (f"std::pow(static_cast<double>({lhs}), "
                    f"static_cast<double>({rhs}))", t)
        if op in ("+", "-", "*"):
            return f"(({lhs}) {op} ({rhs}))", t
        if op in ("<", ">"):
            return f"(({lhs}) {op} ({rhs}))", t
        if op == OP_EQ:
            return f"(({lhs}) == ({rhs}))", t
        if op == OP_LE:
            return f"(({lhs}) <= ({rhs}))", t
        if op == OP_GE:
            return f"(({lhs}) >= ({rhs}))", t
        if op == OP_AND:
            return f"(({lhs}) && ({rhs}))", t
        if op == OP_OR:
            return f"(({lhs}) || ({rhs}))", t
        if op in (OP_IN, OP_UNION, OP_INTERSECT, OP_SETDIFF, OP_CROSS):
            raise EmitError("unsupported-construct",
                            "set algebra has no cxx lowering yet")
        raise EmitError("unsupported-construct",
                        f"operator {op!r} has no cxx lowering")
