"""Reference programs and small expression builders.

The bubble-sort module here is the canonical demo used by the tests,
the CLI examples, and the editor: eight steps, nested counter loops, a
comparison, and a three-statement swap, ending on the stop icon.
"""

from __future__ import annotations

from .document import PatchDocument
from .model import (
    Binary, ChildGroup, Expr, GROUP_ARM, GROUP_BODY, GROUP_DEFAULT,
    Index, K_ASSIGN, K_BYPASS, K_COUNTER_LOOP,
    K_DISPLAY, K_LABELED, K_MODULE_ROOT, K_STOP, K_TRANSFORM, Lit,
    ModuleDef, DataObjectDecl, PatchProgram, Step, Unary, Var,
)
from .values import (
    INTEGER, OP_ADD, OP_GT, OP_LENGTH, OP_SUB, PatchType, Value, list_of,
    type_of,
)


def lit(v: Value, t: PatchType | None = None) -> Lit:
    return Lit(v, t if t is not None else type_of(v))


def var(name: str) -> Var:
    return Var(name)


def ix(base: Expr, pos) -> Index:
    return Index(base, pos if not isinstance(pos, int) else lit(pos))


def bin_(op: str, lhs: Expr, rhs: Expr) -> Binary:
    return Binary(op, lhs, rhs)


def length(e: Expr) -> Unary:
    return Unary(OP_LENGTH, e)


def bubble_sort_module(name: str = "BubbleSort",
                       elem: PatchType = INTEGER) -> ModuleDef:
    """The reference sorting tree.

    ::

        1 module
        2   i: length(list)-1 .. 1 (down)          8 stop
        3     j: 1 .. i (up)
        4       if list[j] > list[j+1]
        5         temp := list[j]
        6         list[j] := list[j+1]
        7         list[j+1] := temp

    The outer loop counts down so that lists of length 0 and 1 skip the
    passes entirely; each swap removes exactly one inversion, so the
    trace's swap count equals the input's inversion count.
    """
    lst = var("list")
    j = var("j")
    j1 = bin_(OP_ADD, j, lit(1))
    m = ModuleDef(
        name=name,
        inputs=[DataObjectDecl("list", list_of(elem), "caller")],
        outputs=[DataObjectDecl("list", list_of(elem), "caller")],
    )
    m.add(Step("1", K_MODULE_ROOT,
               children=[ChildGroup(GROUP_BODY, entry="2")]))
    m.add(Step("2", K_COUNTER_LOOP,
               payload={"var": "i",
                        "start": bin_(OP_SUB, length(lst), lit(1)),
                        "end": lit(1),
                        "direction": "down"},
               next="8",
               children=[ChildGroup(GROUP_BODY, entry="3")]))
    m.add(Step("3", K_COUNTER_LOOP,
               payload={"var": "j", "start": lit(1), "end": var("i"),
                        "direction": "up"},
               children=[ChildGroup(GROUP_BODY, entry="4")]))
    m.add(Step("4", K_BYPASS,
               payload={"condition": bin_(OP_GT, ix(lst, j), ix(lst, j1))},
               children=[ChildGroup(GROUP_BODY, entry="5")]))
    m.add(Step("5", K_ASSIGN,
               payload={"target": var("temp"), "source": ix(lst, j)},
               next="6"))
    m.add(Step("6", K_TRANSFORM,
               payload={"target": ix(lst, j), "source": ix(lst, j1)},
               next="7"))
    m.add(Step("7", K_TRANSFORM,
               payload={"target": ix(lst, j1), "source": var("temp")}))
    m.add(Step("8", K_STOP))
    return m


def bubble_sort_program() -> PatchProgram:
    return PatchProgram(modules=[bubble_sort_module()], entry="BubbleSort")


def bubble_sort_document() -> PatchDocument:
    return PatchDocument(program=bubble_sort_program())


def label_demo_module(name: str = "Classify") -> ModuleDef:
    """Labeled-branch demo: dispatch on a string constant, display a code.

    Used by tests that need a labeled step (duplicate-label mutations,
    branch dispatch semantics).
    """
    m = ModuleDef(
        name=name,
        inputs=[DataObjectDecl("word", PatchType("string"), "caller")],
        outputs=[DataObjectDecl("code", INTEGER, "caller")],
    )
    m.add(Step("1", K_MODULE_ROOT,
               children=[ChildGroup(GROUP_BODY, entry="2")]))
    m.add(Step("2", K_ASSIGN,
               payload={"target": var("code"), "source": lit(0)},
               next="3"))
    m.add(Step("3", K_LABELED,
               payload={"scrutinee": var("word")},
               children=[
                   ChildGroup(GROUP_ARM, entry="4", label="Moscow"),
                   ChildGroup(GROUP_ARM, entry="5", label="Pea"),
                   ChildGroup(GROUP_DEFAULT, entry="6"),
               ],
               next="7"))
    m.add(Step("4", K_TRANSFORM,
               payload={"target": var("code"),
                        "source": bin_(OP_ADD, var("code"), lit(1))}))
    m.add(Step("5", K_TRANSFORM,
               payload={"target": var("code"),
                        "source": bin_(OP_ADD, var("code"), lit(3))}))
    m.add(Step("6", K_TRANSFORM,
               payload={"target": var("code"),
                        "source": bin_(OP_SUB, var("code"), lit(1))}))
    m.add(Step("7", K_DISPLAY, payload={"value": var("code")}))
    return m


def label_demo_program() -> PatchProgram:
    return PatchProgram(modules=[label_demo_module()], entry="Classify")
