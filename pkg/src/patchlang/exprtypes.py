"""Static typing of expressions over a name->type environment.

Used by the validator (lenient: unknown stays None) and by the code
emitters (strict: unknown raises, since target languages need declared
types). Mirrors the runtime operator rules in values.py.
"""

from __future__ import annotations

from typing import Optional

from .errors import ValueSemanticsError
from .model import Binary, Expr, Field, Index, Lit, Unary, Var, normalize_identifier
from .values import (
    ARITH_OPS, BOOLEAN, COMPARE_OPS, INTEGER, LOGIC_OPS, OP_DIV, OP_IN,
    OP_LENGTH, OP_NEG, OP_NOT, OP_POW, OP_CROSS, PatchType, REAL, set_of,
    tuple_of, is_numeric,
)

TypeEnv = dict[str, Optional[PatchType]]


def static_expr_type(e: Expr, env: TypeEnv, strict: bool = False) -> PatchType | None:
    """Best-effort type of e; None when not statically known (lenient mode)."""

    def fail(msg: str) -> None:
        if strict:
            raise ValueSemanticsError("type-mismatch", msg)

    def go(e: Expr) -> PatchType | None:
        if isinstance(e, Lit):
            return e.type
        if isinstance(e, Var):
            t = env.get(normalize_identifier(e.name))
            if t is None:
                fail(f"variable {e.name!r} has no inferable type")
            return t
        if isinstance(e, Index):
            base = go(e.base)
            if base is None:
                return None
            if base.kind == "list":
                if base.elem is None:
                    fail("indexing an empty collection of unknown type")
                return base.elem
            if base.kind == "tuple":
                pos = e.pos
                if isinstance(pos, Lit) and isinstance(pos.value, int):
                    i = pos.value
                    if 1 <= i <= len(base.fields):
                        return base.fields[i - 1][1]
                fail("tuple index must be a literal position")
                return None
            fail(f"{base} is not indexable")
            return None
        if isinstance(e, Field):
            base = go(e.base)
            if base is None:
                return None
            if base.kind == "tuple":
                want = normalize_identifier(e.name)
                for n, t in base.fields:
                    if normalize_identifier(n) == want:
                        return t
            fail(f"{base} has no field {e.name!r}")
            return None
        if isinstance(e, Unary):
            arg = go(e.arg)
            if e.op == OP_NOT:
                return BOOLEAN
            if e.op == OP_LENGTH:
                return INTEGER
            if e.op == OP_NEG:
                return arg
            fail(f"unknown unary operator {e.op!r}")
            return None
        if isinstance(e, Binary):
            lt, rt = go(e.lhs), go(e.rhs)
            if e.op in COMPARE_OPS or e.op in LOGIC_OPS or e.op == OP_IN:
                return BOOLEAN
            if e.op in ARITH_OPS:
                if e.op in (OP_DIV, OP_POW):
                    return REAL
                if lt is None or rt is None:
                    return None
                if lt == INTEGER and rt == INTEGER:
                    return INTEGER
                if is_numeric(lt) and is_numeric(rt):
                    return REAL
                fail(f"{e.op} needs numeric operands, got {lt} and {rt}")
                return None
            if e.op == OP_CROSS:
                if (lt is not None and rt is not None
                        and lt.kind == "set" and rt.kind == "set"):
                    return set_of(tuple_of(
                        [("first", lt.elem), ("second", rt.elem)])
                        if lt.elem and rt.elem else None)
                return None
            # remaining set algebra: result keeps the operand element type
            if lt is not None and lt.kind == "set" and lt.elem is not None:
                return lt
            if rt is not None and rt.kind == "set":
                return rt
            return None
        fail(f"not an expression: {e!r}")
        return None

    return go(e)
