"""Runtime values and operator semantics for Patch.

Scalars map onto native Python values (``int``, ``float``, ``bool``,
``str``); the two composite shapes that Python has no direct analogue
for get small wrapper classes (:class:`PatchSet`, :class:`PatchTuple`).
Lists are plain Python lists treated as immutable: element writes in the
interpreter are copy-on-write, so values can be shared freely between
frames, traces, and trace consumers.

Numeric semantics: integers are 64-bit signed with loud overflow, reals
are binary64. Integers and reals are mutually compatible; integer
division and exponentiation always produce reals; real-to-integer
assignment truncates toward zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterable, Optional

from .errors import ValueSemanticsError

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1

# Operator spellings. Binary comparators and the set algebra use the
# mathematical symbols; the wire format stores these same strings.
OP_ADD, OP_SUB, OP_MUL, OP_DIV, OP_POW = "+", "-", "*", "/", "^"
OP_LT, OP_GT, OP_EQ, OP_LE, OP_GE = "<", ">", "=", "≤", "≥"
OP_AND, OP_OR, OP_NOT = "AND", "OR", "NOT"
OP_IN, OP_SETDIFF, OP_UNION, OP_INTERSECT, OP_CROSS = (
    "∈", "∖", "∪", "∩", "×")
OP_NEG = "-"
OP_LENGTH = "length"  # artifact extension: collection size

ARITH_OPS = frozenset({OP_ADD, OP_SUB, OP_MUL, OP_DIV, OP_POW})
COMPARE_OPS = frozenset({OP_LT, OP_GT, OP_EQ, OP_LE, OP_GE})
LOGIC_OPS = frozenset({OP_AND, OP_OR})
SET_OPS = frozenset({OP_IN, OP_SETDIFF, OP_UNION, OP_INTERSECT, OP_CROSS})
BINARY_OPS = ARITH_OPS | COMPARE_OPS | LOGIC_OPS | SET_OPS
UNARY_OPS = frozenset({OP_NEG, OP_NOT, OP_LENGTH})


def _err(code: str, message: str) -> ValueSemanticsError:
    return ValueSemanticsError(code, message)


@dataclass(frozen=True)
class PatchType:
    """Structural type: a scalar kind or a composite with element/field types.

    ``elem is None`` on a list or set marks the unknown element type of an
    empty collection; it unifies with anything on first use.
    """

    kind: str  # integer | real | boolean | string | list | set | tuple
    elem: Optional["PatchType"] = None
    fields: tuple[tuple[str, "PatchType"], ...] = ()

    def __str__(self) -> str:
        if self.kind in ("list", "set"):
            inner = "?" if self.elem is None else str(self.elem)
            return f"{self.kind}({inner})"
        if self.kind == "tuple":
            inner = ", ".join(f"{n}: {t}" for n, t in self.fields)
            return f"tuple({inner})"
        return self.kind


INTEGER = PatchType("integer")
REAL = PatchType("real")
BOOLEAN = PatchType("boolean")
STRING = PatchType("string")


def list_of(elem: PatchType | None) -> PatchType:
    return PatchType("list", elem=elem)


def set_of(elem: PatchType | None) -> PatchType:
    return PatchType("set", elem=elem)


def tuple_of(fields: Iterable[tuple[str, PatchType]]) -> PatchType:
    return PatchType("tuple", fields=tuple(fields))


def is_numeric(t: PatchType) -> bool:
    return t.kind in ("integer", "real")


class PatchTuple:
    """Ordered, named, heterogeneous fields. Field names are case-insensitive."""

    __slots__ = ("names", "values")

    def __init__(self, names: Iterable[str], values: Iterable[Any]):
        self.names = tuple(names)
        self.values = tuple(values)
        if len(self.names) != len(self.values):
            raise _err("tuple-shape", "tuple needs one name per field")
        folded = [n.casefold() for n in self.names]
        if len(set(folded)) != len(folded):
            raise _err("tuple-shape", "tuple field names must be unique")

    def position(self, name: str) -> int:
        """1-based position of a named field."""
        want = name.casefold()
        for i, n in enumerate(self.names):
            if n.casefold() == want:
                return i + 1
        raise _err("no-such-field", f"tuple has no field named {name!r}")

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PatchTuple) and patch_equal(self, other)

    def __hash__(self):  # pragma: no cover - values are not dict keys
        return hash((self.names, len(self.values)))

    def __repr__(self) -> str:
        inner = ", ".join(f"{n}={v!r}" for n, v in zip(self.names, self.values))
        return f"PatchTuple({inner})"


class PatchSet:
    """Unordered unique homogeneous collection.

    Elements are kept in a plain list and compared with :func:`patch_equal`
    so sets of any element type work, including lists and tuples, and so
    integer/real equality matches the membership rule (2 and 2.0 collide).
    """

    __slots__ = ("elems",)

    def __init__(self, elems: Iterable[Any] = ()):
        unique: list[Any] = []
        for e in elems:
            if not any(patch_equal(e, u) for u in unique):
                unique.append(e)
        self.elems = unique
        _homogeneous_elem_type(self.elems, "set")

    def contains(self, v: Any) -> bool:
        return any(patch_equal(v, e) for e in self.elems)

    def __len__(self) -> int:
        return len(self.elems)

    def __iter__(self):
        return iter(self.elems)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PatchSet) and patch_equal(self, other)

    def __hash__(self):  # pragma: no cover
        return hash(len(self.elems))

    def __repr__(self) -> str:
        return f"PatchSet({self.elems!r})"


Value = Any  # int | float | bool | str | list | PatchSet | PatchTuple


def _homogeneous_elem_type(elems: list[Any], what: str) -> PatchType | None:
    """Unified element type of a collection, or None when empty.

    Mixed integer/real members unify to real; anything else mixed is an
    error because all complex types are homogeneous.
    """
    t: PatchType | None = None
    for e in elems:
        et = type_of(e)
        if t is None:
            t = et
        else:
            u = _unify(t, et)
            if u is None:
                raise _err("type-mismatch",
                           f"{what} members must share one type, "
                           f"got {t} and {et}")
            t = u
    return t


def _resolve_unknown(a: PatchType, b: PatchType) -> PatchType | None:
    """Merge two types that must be structurally equal up to unknown elems.

    No numeric widening here: list(integer) and list(real) stay distinct,
    since numeric compatibility is granted at scalar level only.
    """
    if a == b:
        return a
    if a.kind != b.kind:
        return None
    if a.kind in ("list", "set"):
        if a.elem is None:
            return b
        if b.elem is None:
            return a
        inner = _resolve_unknown(a.elem, b.elem)
        return None if inner is None else PatchType(a.kind, elem=inner)
    if a.kind == "tuple":
        if len(a.fields) != len(b.fields):
            return None
        merged = []
        for (na, ta), (nb, tb) in zip(a.fields, b.fields):
            if na.casefold() != nb.casefold():
                return None
            ft = _resolve_unknown(ta, tb)
            if ft is None:
                return None
            merged.append((na, ft))
        return tuple_of(merged)
    return None


def _unify(a: PatchType, b: PatchType) -> PatchType | None:
    """Unified member type for collection elements; widens mixed numerics."""
    if is_numeric(a) and is_numeric(b):
        return a if a == b else REAL
    return _resolve_unknown(a, b)


def type_of(v: Value) -> PatchType:
    """Structural type of a runtime value (bool checked before int)."""
    if isinstance(v, bool):
        return BOOLEAN
    if isinstance(v, int):
        return INTEGER
    if isinstance(v, float):
        return REAL
    if isinstance(v, str):
        return STRING
    if isinstance(v, list):
        return list_of(_homogeneous_elem_type(v, "list"))
    if isinstance(v, PatchSet):
        return set_of(_homogeneous_elem_type(v.elems, "set"))
    if isinstance(v, PatchTuple):
        return tuple_of((n, type_of(x)) for n, x in zip(v.names, v.values))
    raise _err("type-mismatch", f"not a Patch value: {v!r}")


def compatible(a: PatchType, b: PatchType) -> bool:
    """True when values of type a may be assigned to b (and vice versa).

    Integers and reals are compatible; everything else must match
    structurally. Unknown element types (from empty collections) match
    any element type of the same shape.
    """
    if is_numeric(a) and is_numeric(b):
        return True
    return _resolve_unknown(a, b) is not None


def check_int64(n: int) -> int:
    if n < INT64_MIN or n > INT64_MAX:
        raise _err("arith-overflow", f"integer out of 64-bit range: {n}")
    return n


def assign_coerce(v: Value, target: PatchType | None) -> Value:
    """Coerce a value for assignment into a slot of the target type.

    Identity when types already match; real to integer truncates toward
    zero; integer to real widens exactly. Incompatible pairs raise.
    """
    if target is None:
        return v
    t = type_of(v)
    if not compatible(t, target):
        raise _err("incompatible-assignment",
                   f"cannot assign {t} value into {target} slot")
    if t == target:
        return v
    if target.kind == "integer" and t.kind == "real":
        if not math.isfinite(v):
            raise _err("arith-overflow", "cannot truncate a non-finite real")
        return check_int64(int(v))  # int() truncates toward zero
    if target.kind == "real" and t.kind == "integer":
        return float(v)
    return v


def index(c: Value, i: Value) -> Value:
    """1-based element access on lists and tuples."""
    if isinstance(i, bool) or not isinstance(i, int):
        raise _err("type-mismatch", "index must be an integer")
    if isinstance(c, list):
        if i < 1 or i > len(c):
            raise _err("index-out-of-range",
                       f"position {i} outside 1..{len(c)}")
        return c[i - 1]
    if isinstance(c, PatchTuple):
        if i < 1 or i > len(c):
            raise _err("index-out-of-range",
                       f"position {i} outside 1..{len(c)}")
        return c.values[i - 1]
    if isinstance(c, PatchSet):
        raise _err("not-indexable", "set members can only be tested")
    raise _err("not-indexable", f"{type_of(c)} is not indexable")


def field(t: Value, name: str) -> Value:
    """Named field access on tuples; field(t, n) = index(t, position of n)."""
    if not isinstance(t, PatchTuple):
        raise _err("no-such-field", f"{type_of(t)} has no named fields")
    return t.values[t.position(name) - 1]


def patch_equal(a: Value, b: Value) -> bool:
    """Value equality with integer/real widening; never raises."""
    ab, bb = isinstance(a, bool), isinstance(b, bool)
    if ab or bb:
        return ab and bb and a == b
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        return float(a) == float(b)
    if isinstance(a, str) and isinstance(b, str):
        return a == b
    if isinstance(a, list) and isinstance(b, list):
        return len(a) == len(b) and all(
            patch_equal(x, y) for x, y in zip(a, b))
    if isinstance(a, PatchSet) and isinstance(b, PatchSet):
        return len(a) == len(b) and all(b.contains(x) for x in a)
    if isinstance(a, PatchTuple) and isinstance(b, PatchTuple):
        if len(a) != len(b):
            return False
        names_match = all(
            x.casefold() == y.casefold() for x, y in zip(a.names, b.names))
        return names_match and all(
            patch_equal(x, y) for x, y in zip(a.values, b.values))
    return False


def _both_numeric(a: Value, b: Value) -> bool:
    return (not isinstance(a, bool) and not isinstance(b, bool)
            and isinstance(a, (int, float)) and isinstance(b, (int, float)))


def _check_real(x: float) -> float:
    if math.isnan(x):
        raise _err("arith-domain", "result is not a number")
    if math.isinf(x):
        raise _err("arith-overflow", "real overflow")
    return x


def _set_operand_pair(op: str, a: Value, b: Value) -> tuple[PatchSet, PatchSet]:
    if not isinstance(a, PatchSet) or not isinstance(b, PatchSet):
        raise _err("type-mismatch", f"{op} needs two sets")
    ta, tb = type_of(a).elem, type_of(b).elem
    if ta is not None and tb is not None and _unify(ta, tb) is None:
        raise _err("type-mismatch",
                   f"{op} needs sets of one element type, got {ta} and {tb}")
    return a, b


def _widen_set_members(s: PatchSet, other: PatchSet) -> list[Any]:
    ta, tb = type_of(s).elem, type_of(other).elem
    if ta == INTEGER and tb == REAL:
        return [float(e) for e in s.elems]
    return list(s.elems)


def apply_binary(op: str, a: Value, b: Value) -> Value:
    """Apply a binary operator to two evaluated operands.

    Arithmetic on two integers stays integral except / and ^ which always
    produce reals; mixed integer/real arithmetic produces reals. The set
    algebra returns sets (cartesian product: a set of two-field tuples
    named first/second).
    """
    if op in ARITH_OPS:
        if not _both_numeric(a, b):
            raise _err("type-mismatch",
                       f"{op} needs numeric operands, got "
                       f"{type_of(a)} and {type_of(b)}")
        if op == OP_DIV:
            if b == 0:
                raise _err("division-by-zero", "division by zero")
            return _check_real(a / b)
        if op == OP_POW:
            try:
                r = float(a) ** float(b)
            except ZeroDivisionError:
                raise _err("division-by-zero",
                           "zero cannot be raised to a negative power") from None
            except OverflowError:
                raise _err("arith-overflow", "real overflow") from None
            if isinstance(r, complex):
                raise _err("arith-domain",
                           "negative base with fractional exponent")
            return _check_real(r)
        both_int = isinstance(a, int) and isinstance(b, int)
        r = {OP_ADD: lambda: a + b,
             OP_SUB: lambda: a - b,
             OP_MUL: lambda: a * b}[op]()
        return check_int64(r) if both_int else _check_real(r)

    if op in COMPARE_OPS:
        if op == OP_EQ:
            if not compatible(type_of(a), type_of(b)):
                raise _err("type-mismatch",
                           f"= needs compatible operands, got "
                           f"{type_of(a)} and {type_of(b)}")
            return patch_equal(a, b)
        if _both_numeric(a, b):
            x, y = float(a), float(b)
        elif isinstance(a, str) and isinstance(b, str):
            x, y = a, b  # lexicographic over code points, case-sensitive
        else:
            raise _err("type-mismatch",
                       f"{op} needs two numbers or two strings, got "
                       f"{type_of(a)} and {type_of(b)}")
        return {OP_LT: x < y, OP_GT: x > y,
                OP_LE: x <= y, OP_GE: x >= y}[op]

    if op in LOGIC_OPS:
        if not isinstance(a, bool) or not isinstance(b, bool):
            raise _err("type-mismatch", f"{op} needs Boolean operands")
        return (a and b) if op == OP_AND else (a or b)

    if op == OP_IN:
        if not isinstance(b, PatchSet):
            raise _err("type-mismatch", "∈ needs a set on the right")
        te = type_of(b).elem
        if te is not None and not compatible(type_of(a), te):
            raise _err("type-mismatch",
                       f"cannot test {type_of(a)} against set of {te}")
        return b.contains(a)

    if op in (OP_UNION, OP_INTERSECT, OP_SETDIFF):
        sa, sb = _set_operand_pair(op, a, b)
        ea, eb = _widen_set_members(sa, sb), _widen_set_members(sb, sa)
        wb = PatchSet(eb)
        if op == OP_UNION:
            return PatchSet(ea + eb)
        if op == OP_INTERSECT:
            return PatchSet([e for e in ea if wb.contains(e)])
        return PatchSet([e for e in ea if not wb.contains(e)])

    if op == OP_CROSS:
        # Cartesian product pairs members across element types, so unlike
        # the other set operators it does not require a shared one.
        if not isinstance(a, PatchSet) or not isinstance(b, PatchSet):
            raise _err("type-mismatch", "× needs two sets")
        pairs = [PatchTuple(("first", "second"), (x, y))
                 for x in a.elems for y in b.elems]
        return PatchSet(pairs)

    raise _err("type-mismatch", f"unknown binary operator {op!r}")


def apply_unary(op: str, v: Value) -> Value:
    if op == OP_NOT:
        if not isinstance(v, bool):
            raise _err("type-mismatch", "NOT needs a Boolean operand")
        return not v
    if op == OP_NEG:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise _err("type-mismatch", "unary - needs a numeric operand")
        return check_int64(-v) if isinstance(v, int) else -v
    if op == OP_LENGTH:
        if isinstance(v, (list, PatchSet, PatchTuple)):
            return len(v)
        if isinstance(v, str):
            return len(v)
        raise _err("type-mismatch", f"length over {type_of(v)} is undefined")
    raise _err("type-mismatch", f"unknown unary operator {op!r}")
