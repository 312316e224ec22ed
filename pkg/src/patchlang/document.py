"""Canonical document format and value-literal grammar.

Documents are UTF-8 JSON (extension ``.patch.json``, media type
``application/vnd.patch+json``). Top level::

    {"formatVersion": 1, "entry": "...", "modules": [...], "layout": {...}}

Each module is ``{name, inputs[], outputs[], steps[]}``; each step is
``{id, kind, payload, next, children[]}`` with steps listed flat in
canonical pre-order (solid successor before dashed groups) and linked by
id. Unknown fields at the document, module, and step levels survive a
parse/serialize round trip. Serialization is canonical: stable key
order, stable step order, two-space indent, newline-terminated; parsing
then serializing is idempotent.

Value literals use the surface syntax: ``[20, 9, 34]`` for lists,
``{87.2, 2.87}`` for sets (always rendered sorted), ``<2, "Main Road",
"New York", 10026>`` for tuples, ``TRUE``/``FALSE`` for Booleans.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from typing import Any

from .errors import DocumentError
from .model import (
    Binary, CallArg, ChildGroup, Expr, Field, Index, K_ASSIGN, K_BYPASS,
    K_CALL, K_CONDITIONAL_LOOP, K_COUNTER_LOOP, K_DISPLAY, K_EITHER_OR,
    K_LABELED, K_READ, K_SENTINEL_LOOP, K_TRANSFORM, Lit, ModuleDef, DataObjectDecl, PatchProgram, ResultBind,
    Step, STEP_KINDS, Unary, Var, canonical_order,
)
from .values import (
    BOOLEAN, INT64_MAX, INT64_MIN, INTEGER, PatchSet, PatchTuple, PatchType,
    REAL, STRING, Value, assign_coerce, list_of, set_of, tuple_of, type_of,
    OP_LE, OP_GE, OP_IN, OP_SETDIFF, OP_UNION, OP_INTERSECT, OP_CROSS,
)

FORMAT_VERSION = 1
FILE_EXTENSION = ".patch.json"
MEDIA_TYPE = "application/vnd.patch+json"

# ASCII spellings accepted for the symbolic operators on parse.
_OP_ALIASES = {
    "<=": OP_LE, ">=": OP_GE, "in": OP_IN, "IN": OP_IN,
    "\\": OP_SETDIFF, "setminus": OP_SETDIFF, "union": OP_UNION,
    "intersect": OP_INTERSECT, "cross": OP_CROSS, "−": "-",
}


@dataclass
class PatchDocument:
    program: PatchProgram
    format_version: int = FORMAT_VERSION
    layout: Any = None
    extra: dict[str, Any] = dc_field(default_factory=dict)


# --- value literals ---------------------------------------------------------


def render_value(v: Value) -> str:
    """Canonical literal text of a runtime value."""
    if isinstance(v, bool):
        return "TRUE" if v else "FALSE"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if v == int(v) and abs(v) < 1e16:
            return f"{v:.1f}"
        return repr(v)
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=False)
    if isinstance(v, list):
        return "[" + ", ".join(render_value(e) for e in v) + "]"
    if isinstance(v, PatchSet):
        return "{" + ", ".join(render_value(e) for e in _set_sorted(v)) + "}"
    if isinstance(v, PatchTuple):
        return "<" + ", ".join(render_value(e) for e in v.values) + ">"
    raise DocumentError("literal-syntax-error", f"unrenderable value {v!r}")


def _set_sorted(s: PatchSet) -> list[Value]:
    elems = s.elems
    if not elems:
        return []
    first = elems[0]
    if isinstance(first, bool):
        return sorted(elems, key=bool)
    if isinstance(first, (int, float)):
        return sorted(elems, key=float)
    if isinstance(first, str):
        return sorted(elems)
    return sorted(elems, key=render_value)


class _LiteralReader:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg: str) -> DocumentError:
        return DocumentError("literal-syntax-error",
                             f"{msg} at offset {self.pos}")

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t\r\n":
            self.pos += 1

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            raise self.error(f"expected {ch!r}")
        self.pos += 1

    def read(self) -> Any:
        self.skip_ws()
        ch = self.peek()
        if ch == "":
            raise self.error("empty literal")
        if ch == "[":
            return self._sequence("[", "]", list)
        if ch == "{":
            return ("set", self._sequence("{", "}", list))
        if ch == "<":
            return ("tuple", self._sequence("<", ">", list))
        if ch == '"':
            return self._string()
        if self.text.startswith("TRUE", self.pos):
            self.pos += 4
            return True
        if self.text.startswith("FALSE", self.pos):
            self.pos += 5
            return False
        return self._number()

    def _sequence(self, open_ch: str, close_ch: str, ctor) -> list:
        self.expect(open_ch)
        items: list[Any] = []
        self.skip_ws()
        if self.peek() == close_ch:
            self.pos += 1
            return ctor(items)
        while True:
            items.append(self.read())
            self.skip_ws()
            if self.peek() == ",":
                self.pos += 1
                continue
            if self.peek() == close_ch:
                self.pos += 1
                return ctor(items)
            raise self.error(f"expected ',' or {close_ch!r}")

    def _string(self) -> str:
        start = self.pos
        self.pos += 1
        out: list[str] = []
        while True:
            if self.pos >= len(self.text):
                self.pos = start
                raise self.error("unterminated string")
            ch = self.text[self.pos]
            if ch == '"':
                self.pos += 1
                return "".join(out)
            if ch == "\\":
                frag = self.text[self.pos:self.pos + 2]
                escapes = {'\\"': '"', "\\\\": "\\", "\\n": "\n",
                           "\\t": "\t", "\\r": "\r"}
                if frag in escapes:
                    out.append(escapes[frag])
                    self.pos += 2
                    continue
                if self.text[self.pos:self.pos + 2] == "\\u":
                    code = self.text[self.pos + 2:self.pos + 6]
                    try:
                        out.append(chr(int(code, 16)))
                    except ValueError:
                        raise self.error("bad unicode escape") from None
                    self.pos += 6
                    continue
                raise self.error("unknown escape")
            out.append(ch)
            self.pos += 1

    def _number(self) -> Any:
        start = self.pos
        if self.peek() in ("+", "-"):
            self.pos += 1
        digits = False
        while self.peek().isdigit():
            self.pos += 1
            digits = True
        is_real = False
        if self.peek() == ".":
            is_real = True
            self.pos += 1
            while self.peek().isdigit():
                self.pos += 1
        if self.peek() in ("e", "E"):
            is_real = True
            self.pos += 1
            if self.peek() in ("+", "-"):
                self.pos += 1
            while self.peek().isdigit():
                self.pos += 1
        if not digits:
            raise self.error("expected a value")
        raw = self.text[start:self.pos]
        if is_real:
            return float(raw)
        n = int(raw)
        if n < INT64_MIN or n > INT64_MAX:
            raise self.error("integer literal out of 64-bit range")
        return n


def _finish_parsed(raw: Any, t: PatchType | None) -> Value:
    """Turn the tagged parse tree into a runtime value of type t (or an
    inferred one when t is None)."""
    if isinstance(raw, tuple) and raw and raw[0] == "set":
        elem_t = t.elem if t is not None and t.kind == "set" else None
        if t is not None and t.kind != "set":
            raise DocumentError("literal-syntax-error",
                                f"set literal where {t} expected")
        return PatchSet([_finish_parsed(e, elem_t) for e in raw[1]])
    if isinstance(raw, tuple) and raw and raw[0] == "tuple":
        items = raw[1]
        if t is not None:
            if t.kind != "tuple":
                raise DocumentError("literal-syntax-error",
                                    f"tuple literal where {t} expected")
            if len(t.fields) != len(items):
                raise DocumentError(
                    "literal-syntax-error",
                    f"tuple literal has {len(items)} fields, type has "
                    f"{len(t.fields)}")
            names = [n for n, _ in t.fields]
            vals = [_finish_parsed(e, ft)
                    for e, (_n, ft) in zip(items, t.fields)]
        else:
            names = [f"f{i + 1}" for i in range(len(items))]
            vals = [_finish_parsed(e, None) for e in items]
        return PatchTuple(names, vals)
    if isinstance(raw, list):
        elem_t = t.elem if t is not None and t.kind == "list" else None
        if t is not None and t.kind != "list":
            raise DocumentError("literal-syntax-error",
                                f"list literal where {t} expected")
        vals = [_finish_parsed(e, elem_t) for e in raw]
        if elem_t is None and vals:
            # homogenize untyped lists: mixed int/real widens to real
            ts = {type_of(v).kind for v in vals}
            if ts == {"integer", "real"}:
                vals = [float(v) if isinstance(v, int) else v for v in vals]
        return vals
    # scalar
    if t is not None:
        try:
            return assign_coerce(raw, t)
        except Exception as e:
            raise DocumentError("literal-syntax-error",
                                f"literal does not fit {t}: {e}") from None
    return raw


def read_value(text: str, t: PatchType | None = None) -> Value:
    """Inverse of render_value; with a type, literals coerce into it."""
    r = _LiteralReader(text)
    raw = r.read()
    r.skip_ws()
    if r.pos != len(r.text):
        raise r.error("trailing characters after literal")
    return _finish_parsed(raw, t)


# --- type wire form ---------------------------------------------------------


def type_to_wire(t: PatchType | None) -> Any:
    if t is None:
        return None
    if t.kind in ("integer", "real", "boolean", "string"):
        return t.kind
    if t.kind == "list":
        return {"list": type_to_wire(t.elem)}
    if t.kind == "set":
        return {"set": type_to_wire(t.elem)}
    return {"tuple": [{"name": n, "type": type_to_wire(ft)}
                      for n, ft in t.fields]}


def type_from_wire(w: Any) -> PatchType | None:
    if w is None:
        return None
    if isinstance(w, str):
        scalars = {"integer": INTEGER, "real": REAL,
                   "boolean": BOOLEAN, "string": STRING}
        if w in scalars:
            return scalars[w]
        raise DocumentError("parse-error", f"unknown type {w!r}")
    if isinstance(w, dict):
        if "list" in w:
            return list_of(type_from_wire(w["list"]))
        if "set" in w:
            return set_of(type_from_wire(w["set"]))
        if "tuple" in w:
            return tuple_of((f["name"], type_from_wire(f["type"]))
                            for f in w["tuple"])
    raise DocumentError("parse-error", f"bad type form {w!r}")


def value_to_wire(v: Value) -> Any:
    """JSON shape of a value whose type travels separately."""
    if isinstance(v, (bool, int, float, str)):
        return v
    if isinstance(v, list):
        return [value_to_wire(e) for e in v]
    if isinstance(v, PatchSet):
        return [value_to_wire(e) for e in _set_sorted(v)]
    if isinstance(v, PatchTuple):
        return [value_to_wire(e) for e in v.values]
    raise DocumentError("parse-error", f"unencodable value {v!r}")


def value_from_wire(w: Any, t: PatchType | None) -> Value:
    if t is None or t.kind in ("integer", "real", "boolean", "string"):
        if isinstance(w, (bool, str)):
            return w
        if isinstance(w, int):
            return float(w) if t is not None and t.kind == "real" else w
        if isinstance(w, float):
            if t is not None and t.kind == "integer" and w == int(w):
                return int(w)
            return w
        raise DocumentError("parse-error", f"bad scalar {w!r} for {t}")
    if t.kind == "list":
        return [value_from_wire(e, t.elem) for e in w]
    if t.kind == "set":
        return PatchSet([value_from_wire(e, t.elem) for e in w])
    if t.kind == "tuple":
        if len(w) != len(t.fields):
            raise DocumentError("parse-error", "tuple arity mismatch")
        return PatchTuple([n for n, _ in t.fields],
                          [value_from_wire(e, ft)
                           for e, (_n, ft) in zip(w, t.fields)])
    raise DocumentError("parse-error", f"bad value form {w!r}")


# --- expression wire form ---------------------------------------------------


def expr_to_wire(e: Expr) -> dict[str, Any]:
    if isinstance(e, Lit):
        return {"expr": "lit", "type": type_to_wire(e.type),
                "value": value_to_wire(e.value)}
    if isinstance(e, Var):
        return {"expr": "var", "name": e.name}
    if isinstance(e, Index):
        return {"expr": "index", "base": expr_to_wire(e.base),
                "pos": expr_to_wire(e.pos)}
    if isinstance(e, Field):
        return {"expr": "field", "base": expr_to_wire(e.base),
                "name": e.name}
    if isinstance(e, Unary):
        return {"expr": "unary", "op": e.op, "arg": expr_to_wire(e.arg)}
    if isinstance(e, Binary):
        return {"expr": "binary", "op": e.op,
                "lhs": expr_to_wire(e.lhs), "rhs": expr_to_wire(e.rhs)}
    raise DocumentError("parse-error", f"unencodable expression {e!r}")


def expr_from_wire(w: Any) -> Expr:
    if not isinstance(w, dict) or "expr" not in w:
        raise DocumentError("parse-error", f"bad expression form {w!r}")
    kind = w["expr"]
    if kind == "lit":
        t = type_from_wire(w.get("type"))
        return Lit(value_from_wire(w.get("value"), t),
                   t if t is not None else type_of(w.get("value")))
    if kind == "var":
        return Var(w["name"])
    if kind == "index":
        return Index(expr_from_wire(w["base"]), expr_from_wire(w["pos"]))
    if kind == "field":
        return Field(expr_from_wire(w["base"]), w["name"])
    if kind == "unary":
        op = _OP_ALIASES.get(w["op"], w["op"])
        return Unary(op, expr_from_wire(w["arg"]))
    if kind == "binary":
        op = _OP_ALIASES.get(w["op"], w["op"])
        return Binary(op, expr_from_wire(w["lhs"]), expr_from_wire(w["rhs"]))
    raise DocumentError("parse-error", f"unknown expression kind {kind!r}")


# --- step payloads ----------------------------------------------------------

_EXPR_PAYLOAD_KEYS = {
    K_ASSIGN: ("target", "source"),
    K_TRANSFORM: ("target", "source"),
    K_DISPLAY: ("value",),
    K_BYPASS: ("condition",),
    K_EITHER_OR: ("condition",),
    K_CONDITIONAL_LOOP: ("condition",),
    K_LABELED: ("scrutinee",),
}


def _payload_to_wire(step: Step) -> dict[str, Any]:
    p = step.payload
    kind = step.kind
    if kind in _EXPR_PAYLOAD_KEYS:
        return {k: expr_to_wire(p[k]) for k in _EXPR_PAYLOAD_KEYS[kind]
                if p.get(k) is not None}
    if kind == K_READ:
        out: dict[str, Any] = {"target": p.get("target")}
        if p.get("type") is not None:
            out["type"] = type_to_wire(p["type"])
        return out
    if kind == K_COUNTER_LOOP:
        return {"var": p.get("var"),
                "start": expr_to_wire(p["start"]),
                "end": expr_to_wire(p["end"]),
                "direction": p.get("direction", "auto")}
    if kind == K_SENTINEL_LOOP:
        return {"var": p.get("var"),
                "collection": expr_to_wire(p["collection"]),
                "marker": expr_to_wire(p["marker"])}
    if kind == K_CALL:
        return {
            "module": p.get("module"),
            "args": [{"name": a.name, "value": expr_to_wire(a.value)}
                     for a in p.get("args", ())],
            "results": [{"output": r.output, "target": r.target}
                        for r in p.get("results", ())],
        }
    return {}


def _payload_from_wire(kind: str, w: Any) -> dict[str, Any]:
    if not isinstance(w, dict):
        raise DocumentError("parse-error", f"{kind} payload must be an object")
    if kind in _EXPR_PAYLOAD_KEYS:
        return {k: expr_from_wire(w[k]) for k in _EXPR_PAYLOAD_KEYS[kind]
                if k in w}
    if kind == K_READ:
        out: dict[str, Any] = {"target": w.get("target")}
        if w.get("type") is not None:
            out["type"] = type_from_wire(w["type"])
        return out
    if kind == K_COUNTER_LOOP:
        out = {"var": w.get("var"), "direction": w.get("direction", "auto")}
        for k in ("start", "end"):
            if k in w:
                out[k] = expr_from_wire(w[k])
        return out
    if kind == K_SENTINEL_LOOP:
        out = {"var": w.get("var")}
        for k in ("collection", "marker"):
            if k in w:
                out[k] = expr_from_wire(w[k])
        return out
    if kind == K_CALL:
        return {
            "module": w.get("module"),
            "args": [CallArg(name=a.get("name"),
                             value=expr_from_wire(a["value"]))
                     for a in w.get("args", ())],
            "results": [ResultBind(output=r.get("output"),
                                   target=r["target"])
                        for r in w.get("results", ())],
        }
    return {}


# --- documents --------------------------------------------------------------

_STEP_KEYS = ("id", "kind", "payload", "next", "children")
_MODULE_KEYS = ("name", "inputs", "outputs", "steps")
_DOC_KEYS = ("formatVersion", "entry", "modules", "layout")


def _step_to_wire(step: Step) -> dict[str, Any]:
    children = []
    for g in step.children:
        gw: dict[str, Any] = {"tag": g.tag}
        if g.tag == "arm":
            gw["label"] = value_to_wire(g.label)
            gw["labelType"] = type_to_wire(
                g.label_type if g.label_type is not None
                else type_of(g.label))
        gw["entry"] = g.entry
        children.append(gw)
    out: dict[str, Any] = {
        "id": step.id,
        "kind": step.kind,
        "payload": _payload_to_wire(step),
        "next": step.next,
        "children": children,
    }
    for k in sorted(step.extra):
        out[k] = step.extra[k]
    return out


def _step_from_wire(w: Any) -> Step:
    if not isinstance(w, dict):
        raise DocumentError("parse-error", "step must be an object")
    for k in ("id", "kind"):
        if k not in w:
            raise DocumentError("parse-error", f"step missing {k!r}")
    kind = w["kind"]
    if kind not in STEP_KINDS:
        raise DocumentError("parse-error", f"unknown step kind {kind!r}")
    children = []
    for gw in w.get("children", ()):
        label_t = type_from_wire(gw.get("labelType")) \
            if gw.get("labelType") is not None else None
        label = None
        if "label" in gw:
            label = value_from_wire(gw["label"], label_t)
        children.append(ChildGroup(tag=gw.get("tag", "body"),
                                   entry=gw.get("entry"),
                                   label=label, label_type=label_t))
    step = Step(
        id=str(w["id"]),
        kind=kind,
        payload=_payload_from_wire(kind, w.get("payload", {})),
        next=w.get("next"),
        children=children,
        extra={k: v for k, v in w.items() if k not in _STEP_KEYS},
    )
    return step


def _decl_to_wire(d: DataObjectDecl) -> dict[str, Any]:
    return {"name": d.name, "type": type_to_wire(d.type),
            "binding": d.binding}


def _decl_from_wire(w: Any) -> DataObjectDecl:
    if not isinstance(w, dict) or "name" not in w:
        raise DocumentError("parse-error", "declaration must name an object")
    return DataObjectDecl(name=w["name"],
                          type=type_from_wire(w.get("type")),
                          binding=w.get("binding", "caller"))


def _module_to_wire(m: ModuleDef) -> dict[str, Any]:
    out: dict[str, Any] = {
        "name": m.name,
        "inputs": [_decl_to_wire(d) for d in m.inputs],
        "outputs": [_decl_to_wire(d) for d in m.outputs],
        "steps": [_step_to_wire(m.steps[sid]) for sid in canonical_order(m)],
    }
    for k in sorted(m.extra):
        out[k] = m.extra[k]
    return out


def _module_from_wire(w: Any) -> ModuleDef:
    if not isinstance(w, dict) or "name" not in w:
        raise DocumentError("parse-error", "module must have a name")
    m = ModuleDef(
        name=w["name"],
        inputs=[_decl_from_wire(d) for d in w.get("inputs", ())],
        outputs=[_decl_from_wire(d) for d in w.get("outputs", ())],
        extra={k: v for k, v in w.items() if k not in _MODULE_KEYS},
    )
    for sw in w.get("steps", ()):
        step = _step_from_wire(sw)
        if step.id in m.steps:
            raise DocumentError("parse-error",
                                f"duplicate step id {step.id!r}")
        m.steps[step.id] = step
    return m


def parse(text: str) -> PatchDocument:
    """Parse document text; structural validation only (run validate()
    separately for the drawing rules)."""
    if not text.strip():
        raise DocumentError("parse-error", "empty document")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentError("parse-error", e.msg,
                            line=e.lineno, column=e.colno) from None
    if not isinstance(data, dict):
        raise DocumentError("parse-error", "document must be an object")
    version = data.get("formatVersion")
    if version != FORMAT_VERSION:
        raise DocumentError("version-unsupported",
                            f"formatVersion {version!r} is not supported")
    program = PatchProgram(
        modules=[_module_from_wire(mw) for mw in data.get("modules", ())],
        entry=data.get("entry", ""),
    )
    return PatchDocument(
        program=program,
        format_version=version,
        layout=data.get("layout"),
        extra={k: v for k, v in data.items() if k not in _DOC_KEYS},
    )


def to_wire(doc: PatchDocument) -> dict[str, Any]:
    out: dict[str, Any] = {
        "formatVersion": doc.format_version,
        "entry": doc.program.entry,
        "modules": [_module_to_wire(m) for m in doc.program.modules],
    }
    if doc.layout is not None:
        out["layout"] = doc.layout
    for k in sorted(doc.extra):
        out[k] = doc.extra[k]
    return out


def serialize(doc: PatchDocument) -> str:
    """Canonical text: stable key and step order, newline-terminated."""
    return json.dumps(to_wire(doc), indent=2, ensure_ascii=False) + "\n"
