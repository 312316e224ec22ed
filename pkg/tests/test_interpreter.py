import random

import pytest

from patchlang.errors import EvalError, ResolveError
from patchlang.interpreter import (
    Repository, RunConfig, ScriptedConsole, run_module, watch,
)
from patchlang.model import (
    CallArg, ChildGroup, GROUP_BODY, GROUP_DEFAULT, GROUP_ELSE,
    GROUP_THEN, K_ASSIGN, K_BYPASS, K_CALL, K_CONDITIONAL_LOOP,
    K_COUNTER_LOOP, K_DISPLAY, K_EITHER_OR, K_EXIT, K_MODULE_ROOT, K_READ, K_SENTINEL_LOOP, K_STOP, K_TRANSFORM,
    ModuleDef, DataObjectDecl, PatchProgram, ResultBind, Step,
)
from patchlang.samples import (
    bin_, bubble_sort_program, ix, label_demo_program, length, lit, var,
)
from patchlang.validate import validate
from patchlang.values import (
    INTEGER, OP_ADD, OP_EQ, OP_GT, OP_SUB, STRING, list_of,
)


def build_module(name, body_steps, inputs=(), outputs=(), extra_steps=()):
    """Chain body_steps with solid links under a fresh module root."""
    m = ModuleDef(name=name, inputs=list(inputs), outputs=list(outputs))
    for s in list(body_steps) + list(extra_steps):
        m.add(s)
    for a, b in zip(body_steps, body_steps[1:]):
        a.next = b.id
    m.add(Step("root", K_MODULE_ROOT,
               children=[ChildGroup(GROUP_BODY,
                                    entry=body_steps[0].id
                                    if body_steps else None)]))
    return m


def run_one(module, args=None, **kw):
    program = PatchProgram(modules=[module], entry=module.name)
    assert validate(program).empty(), list(validate(program))
    return run_module(program, args=args or {}, **kw)


def sum_loop_module(start, end, direction="auto"):
    body = Step("acc", K_TRANSFORM,
                payload={"target": var("s"),
                         "source": bin_(OP_ADD, var("s"), var("i"))})
    loop = Step("loop", K_COUNTER_LOOP,
                payload={"var": "i", "start": lit(start), "end": lit(end),
                         "direction": direction},
                children=[ChildGroup(GROUP_BODY, entry="acc")])
    init = Step("init", K_ASSIGN, payload={"target": var("s"),
                                           "source": lit(0)})
    init.next = "loop"
    return build_module("Sum", [init, loop],
                        outputs=[DataObjectDecl("s", INTEGER)],
                        extra_steps=[body])


def test_counter_loop_accumulates_closed_form():
    res = run_one(sum_loop_module(1, 5))
    assert res.outputs["s"] == 5 * 6 // 2  # n(n+1)/2 oracle


def test_counter_loop_iteration_count_auto():
    for start, end in [(1, 5), (5, 1), (3, 3), (-2, 2)]:
        res = run_one(sum_loop_module(start, end))
        iters = [e for e in res.trace
                 if e.kind == "loop-iter" and e.step_id == "loop"]
        assert len(iters) == abs(end - start) + 1


def test_counter_loop_explicit_direction_can_be_empty():
    res = run_one(sum_loop_module(5, 1, direction="up"))
    assert res.outputs["s"] == 0
    assert not [e for e in res.trace if e.kind == "loop-iter"]
    res = run_one(sum_loop_module(1, 5, direction="down"))
    assert res.outputs["s"] == 0


def test_loop_variable_remains_readable_after_loop():
    m = sum_loop_module(1, 4)
    show = Step("show", K_DISPLAY, payload={"value": var("i")})
    m.add(show)
    m.steps["loop"].next = "show"
    console = ScriptedConsole()
    run_one(m, console=console)
    assert console.displayed == ["4"]


def test_bypass_false_skips_body():
    body = Step("d", K_DISPLAY, payload={"value": lit(1)})
    bp = Step("bp", K_BYPASS, payload={"condition": lit(False)},
              children=[ChildGroup(GROUP_BODY, entry="d")])
    out = Step("o", K_ASSIGN, payload={"target": var("x"),
                                       "source": lit(9)})
    bp.next = "o"
    m = build_module("Skip", [bp], outputs=[DataObjectDecl("x", INTEGER)],
                     extra_steps=[body, out])
    console = ScriptedConsole()
    res = run_one(m, console=console)
    assert console.displayed == []
    assert not [e for e in res.trace if e.kind == "display"]
    assert res.outputs["x"] == 9


def test_either_or_executes_exactly_one_arm():
    then = Step("t", K_ASSIGN, payload={"target": var("x"), "source": lit(1)})
    other = Step("e", K_ASSIGN, payload={"target": var("x"),
                                         "source": lit(2)})
    branch = Step("br", K_EITHER_OR,
                  payload={"condition": bin_(OP_GT, var("n"), lit(0))},
                  children=[ChildGroup(GROUP_THEN, entry="t"),
                            ChildGroup(GROUP_ELSE, entry="e")])
    m = build_module("Pick", [branch],
                     inputs=[DataObjectDecl("n", INTEGER)],
                     outputs=[DataObjectDecl("x", INTEGER)],
                     extra_steps=[then, other])
    assert run_one(m, {"n": 5}).outputs["x"] == 1
    assert run_one(m, {"n": -5}).outputs["x"] == 2


def test_labeled_dispatch_on_string_constant():
    program = label_demo_program()
    console = ScriptedConsole()
    res = run_module(program, args={"word": "Pea"}, console=console)
    assert res.outputs["code"] == 3
    assert console.displayed == ["3"]


def test_labeled_no_match_without_default_is_noop():
    program = label_demo_program()
    branch = program.modules[0].steps["3"]
    branch.children = [g for g in branch.children if g.tag != GROUP_DEFAULT]
    res = run_module(program, args={"word": "nothing"})
    assert res.outputs["code"] == 0


def test_exit_escapes_one_loop_level():
    # inner loop exits immediately; outer keeps iterating
    ex = Step("x", K_EXIT)
    inner = Step("inner", K_COUNTER_LOOP,
                 payload={"var": "j", "start": lit(1), "end": lit(100),
                          "direction": "auto"},
                 children=[ChildGroup(GROUP_BODY, entry="x")])
    bump = Step("bump", K_TRANSFORM,
                payload={"target": var("n"),
                         "source": bin_(OP_ADD, var("n"), lit(1))})
    inner.next = "bump"
    outer = Step("outer", K_COUNTER_LOOP,
                 payload={"var": "i", "start": lit(1), "end": lit(3),
                          "direction": "auto"},
                 children=[ChildGroup(GROUP_BODY, entry="inner")])
    init = Step("init", K_ASSIGN, payload={"target": var("n"),
                                           "source": lit(0)})
    init.next = "outer"
    m = build_module("Exiter", [init, outer],
                     outputs=[DataObjectDecl("n", INTEGER)],
                     extra_steps=[ex, inner, bump])
    res = run_one(m)
    assert res.outputs["n"] == 3  # bump ran every outer pass
    inner_iters = [e for e in res.trace
                   if e.kind == "loop-iter" and e.step_id == "inner"]
    assert len(inner_iters) == 3  # one aborted iteration per outer pass


def test_exit_in_branch_escapes_branch_not_loop():
    # EXIT inside a by-pass leaves the branch; the loop continues, so
    # the step after the branch still runs every iteration
    ex = Step("x", K_EXIT)
    bp = Step("bp", K_BYPASS, payload={"condition": lit(True)},
              children=[ChildGroup(GROUP_BODY, entry="x")])
    bump = Step("bump", K_TRANSFORM,
                payload={"target": var("n"),
                         "source": bin_(OP_ADD, var("n"), lit(1))})
    bp.next = "bump"
    loop = Step("loop", K_COUNTER_LOOP,
                payload={"var": "i", "start": lit(1), "end": lit(4),
                         "direction": "auto"},
                children=[ChildGroup(GROUP_BODY, entry="bp")])
    init = Step("init", K_ASSIGN, payload={"target": var("n"),
                                           "source": lit(0)})
    init.next = "loop"
    m = build_module("BranchExit", [init, loop],
                     outputs=[DataObjectDecl("n", INTEGER)],
                     extra_steps=[ex, bp, bump])
    assert run_one(m).outputs["n"] == 4


def test_stop_ends_run_and_keeps_outputs():
    first = Step("a", K_ASSIGN, payload={"target": var("x"),
                                         "source": lit(7)})
    # stop fires inside the loop on the first pass; the later passes
    # would overwrite x if the run kept going
    halt = Step("h", K_BYPASS,
                payload={"condition": bin_(OP_EQ, var("i"), lit(1))},
                children=[ChildGroup(GROUP_BODY, entry="st")])
    st = Step("st", K_STOP)
    bump = Step("bump", K_TRANSFORM,
                payload={"target": var("x"),
                         "source": bin_(OP_ADD, var("x"), lit(100))})
    halt.next = "bump"
    loop = Step("loop", K_COUNTER_LOOP,
                payload={"var": "i", "start": lit(1), "end": lit(3),
                         "direction": "auto"},
                children=[ChildGroup(GROUP_BODY, entry="h")])
    first.next = "loop"
    m = build_module("Stopper", [first, loop],
                     outputs=[DataObjectDecl("x", INTEGER)],
                     extra_steps=[halt, st, bump])
    res = run_one(m)
    assert res.outputs["x"] == 7
    assert res.stopped
    assert [e.kind for e in res.trace if e.kind == "stopped"] == ["stopped"]


def test_sentinel_loop_stops_before_marker():
    body = Step("acc", K_TRANSFORM,
                payload={"target": var("s"),
                         "source": bin_(OP_ADD, var("s"), var("e"))})
    loop = Step("loop", K_SENTINEL_LOOP,
                payload={"var": "e", "collection": var("xs"),
                         "marker": lit(0)},
                children=[ChildGroup(GROUP_BODY, entry="acc")])
    init = Step("init", K_ASSIGN, payload={"target": var("s"),
                                           "source": lit(0)})
    init.next = "loop"
    m = build_module("Sent", [init, loop],
                     inputs=[DataObjectDecl("xs", list_of(INTEGER))],
                     outputs=[DataObjectDecl("s", INTEGER)],
                     extra_steps=[body])
    assert run_one(m, {"xs": [5, 6, 0, 9]}).outputs["s"] == 11
    # absent marker: consume the whole collection, end normally
    assert run_one(m, {"xs": [1, 2, 3]}).outputs["s"] == 6
    assert run_one(m, {"xs": []}).outputs["s"] == 0


def test_conditional_loop_reevaluates_condition():
    dec = Step("dec", K_TRANSFORM,
               payload={"target": var("n"),
                        "source": bin_(OP_SUB, var("n"), lit(1))})
    loop = Step("loop", K_CONDITIONAL_LOOP,
                payload={"condition": bin_(OP_GT, var("n"), lit(0))},
                children=[ChildGroup(GROUP_BODY, entry="dec")])
    m = build_module("Count", [loop],
                     inputs=[DataObjectDecl("n", INTEGER)],
                     outputs=[DataObjectDecl("n", INTEGER)],
                     extra_steps=[dec])
    res = run_one(m, {"n": 5})
    assert res.outputs["n"] == 0
    assert len([e for e in res.trace if e.kind == "loop-iter"]) == 5


def test_iteration_budget_trips():
    loop = Step("loop", K_CONDITIONAL_LOOP,
                payload={"condition": lit(True)},
                children=[ChildGroup(GROUP_BODY, entry="noop")])
    noop = Step("noop", K_ASSIGN, payload={"target": var("x"),
                                           "source": lit(1)})
    m = build_module("Spin", [loop], extra_steps=[noop])
    program = PatchProgram(modules=[m], entry="Spin")
    with pytest.raises(EvalError) as e:
        run_module(program, config=RunConfig(iteration_budget=50))
    assert e.value.code == "budget-exceeded"


def test_read_and_display_with_scripted_console():
    rd = Step("rd", K_READ, payload={"target": "x", "type": INTEGER})
    show = Step("show", K_DISPLAY,
                payload={"value": bin_(OP_ADD, var("x"), lit(1))})
    rd.next = "show"
    m = build_module("Echo", [rd, show])
    console = ScriptedConsole(["41"])
    res = run_one(m, console=console)
    assert console.displayed == ["42"]
    reads = [e for e in res.trace if e.kind == "read"]
    assert reads and reads[0].data["value"] == 41


def test_console_exhausted():
    rd = Step("rd", K_READ, payload={"target": "x", "type": INTEGER})
    m = build_module("Starve", [rd])
    program = PatchProgram(modules=[m], entry="Starve")
    with pytest.raises(EvalError) as e:
        run_module(program, console=ScriptedConsole([]))
    assert e.value.code == "console-exhausted"


def test_repository_bindings_load_and_store():
    repo = Repository()
    repo.store("Vault", "seed", 10)
    rd = Step("rd", K_READ, payload={"target": "seed"})
    double = Step("dbl", K_TRANSFORM,
                  payload={"target": var("result"),
                           "source": bin_(OP_ADD, var("seed"),
                                          var("seed"))})
    rd.next = "dbl"
    m = build_module(
        "Vault", [rd, double],
        inputs=[DataObjectDecl("seed", INTEGER, "repository")],
        outputs=[DataObjectDecl("result", INTEGER, "repository")])
    run_one(m, repository=repo)
    assert repo.load("Vault", "result") == 20


def test_unbound_variable():
    show = Step("s", K_DISPLAY, payload={"value": bin_(OP_ADD, var("z"),
                                                       lit(1))})
    m = build_module("Unbound", [show])
    program = PatchProgram(modules=[m], entry="Unbound")
    with pytest.raises(EvalError) as e:
        run_module(program)
    assert e.value.code == "unbound-variable"
    assert e.value.step_id == "s"


def call_program():
    # out := a + length(b): actuals below arrive unnamed and reversed,
    # so binding works purely through unique type compatibility
    callee_body = Step("cb", K_TRANSFORM,
                       payload={"target": var("out"),
                                "source": bin_(OP_ADD, var("a"),
                                               length(var("b")))})
    callee = build_module("AddPair", [callee_body],
                          inputs=[DataObjectDecl("a", INTEGER),
                                  DataObjectDecl("b", STRING)],
                          outputs=[DataObjectDecl("out", INTEGER)])
    call = Step("call", K_CALL, payload={
        "module": "addpair",
        "args": [CallArg(value=lit("word")), CallArg(value=lit(4))],
        "results": [ResultBind(target="total")],
    })
    caller = build_module("Main", [call],
                          outputs=[DataObjectDecl("total", INTEGER)])
    return PatchProgram(modules=[callee, caller], entry="Main")


def test_call_binds_by_type_and_name_independent():
    program = call_program()
    assert validate(program).empty()
    res = run_module(program)
    assert res.outputs["total"] == 8


def test_call_events_carry_module_names():
    res = run_module(call_program())
    modules = {e.module for e in res.trace}
    assert modules == {"Main", "AddPair"}


def test_callee_stop_ends_whole_run():
    halt = Step("h", K_STOP)
    callee = build_module("Halter", [halt],
                          outputs=[DataObjectDecl("x", INTEGER)])
    # output never assigned inside Halter: binding caller would fail,
    # so give it a value first
    seed = Step("sd", K_ASSIGN, payload={"target": var("x"),
                                         "source": lit(1)})
    seed.next = "h"
    callee.steps["root"].children[0].entry = "sd"
    callee.add(seed)
    call = Step("call", K_CALL,
                payload={"module": "Halter", "args": [],
                         "results": [ResultBind(target="y")]})
    after = Step("after", K_ASSIGN, payload={"target": var("y"),
                                             "source": lit(99)})
    call.next = "after"
    caller = build_module("Main", [call],
                          outputs=[DataObjectDecl("y", INTEGER)],
                          extra_steps=[after])
    program = PatchProgram(modules=[callee, caller], entry="Main")
    res = run_module(program)
    assert res.stopped
    assert res.outputs["y"] == 1  # bound from the call, never overwritten


def test_call_depth_guard():
    call = Step("c", K_CALL, payload={"module": "Loop", "args": [],
                                      "results": []})
    m = build_module("Loop", [call])
    program = PatchProgram(modules=[m], entry="Loop")
    with pytest.raises(EvalError) as e:
        run_module(program, config=RunConfig(max_call_depth=16))
    assert e.value.code == "call-depth-exceeded"


def test_resolution_failure_surfaces():
    program = call_program()
    with pytest.raises(ResolveError):
        run_module(program, args={"ghost": 1})


def test_expression_evaluation_over_bound_vars():
    # y := 17; shown := y - 1  ->  16;  third := x[3] -> "Pea"
    a = Step("a", K_ASSIGN, payload={"target": var("y"), "source": lit(17)})
    t = Step("t", K_TRANSFORM,
             payload={"target": var("shown"),
                      "source": bin_(OP_SUB, var("y"), lit(1))})
    pick = Step("pick", K_ASSIGN,
                payload={"target": var("third"),
                         "source": ix(var("x"), 3)})
    a.next = "t"
    t.next = "pick"
    m = build_module("Eval", [a, t, pick],
                     inputs=[DataObjectDecl("x", list_of(STRING))],
                     outputs=[DataObjectDecl("shown", INTEGER),
                              DataObjectDecl("third", STRING)])
    res = run_one(m, {"x": ["Moscow", "Java", "Pea"]})
    assert res.outputs["shown"] == 16
    assert res.outputs["third"] == "Pea"


# --- bubble sort semantics


INPUT6 = [29, -4, 2, 17, 45, 9]


def inversions(xs):
    return sum(1 for i in range(len(xs)) for j in range(i + 1, len(xs))
               if xs[i] > xs[j])


def test_bubble_sort_reference_run():
    res = run_module(bubble_sort_program(), args={"list": INPUT6})
    assert res.outputs["list"] == sorted(INPUT6)


def test_bubble_sort_swaps_equal_inversions():
    res = run_module(bubble_sort_program(), args={"list": INPUT6})
    swaps = [e for e in res.trace if e.kind == "swap"]
    assert len(swaps) == inversions(INPUT6) == 6


def test_bubble_sort_first_pass_places_max_last():
    res = run_module(bubble_sort_program(), args={"list": INPUT6})
    outer_iters = [e for e in res.trace
                   if e.kind == "loop-iter" and e.step_id == "2"]
    second_pass_seq = outer_iters[1].seq
    history = watch(res.trace, "list")
    before = [v for s, v in history if s < second_pass_seq][-1]
    assert before[-1] == max(INPUT6)


def test_bubble_sort_sorted_permutation_randomized():
    rng = random.Random(12)
    program = bubble_sort_program()
    for _ in range(40):
        xs = [rng.randint(-1000, 1000) for _ in range(rng.randint(0, 50))]
        res = run_module(program, args={"list": xs},
                         config=RunConfig(trace=False))
        out = res.outputs["list"]
        assert out == sorted(xs)
        assert sorted(out) == sorted(xs)  # permutation (multiset equal)


def test_determinism_event_for_event():
    a = run_module(bubble_sort_program(), args={"list": INPUT6})
    b = run_module(bubble_sort_program(), args={"list": INPUT6})
    assert [(e.seq, e.step_id, e.kind, str(e.data)) for e in a.trace] == \
        [(e.seq, e.step_id, e.kind, str(e.data)) for e in b.trace]


def test_assign_events_touch_only_their_target():
    res = run_module(bubble_sort_program(), args={"list": INPUT6})
    for ev in res.trace:
        if ev.kind == "assign":
            assert ev.data["var"] == "temp"


def test_watch_histories():
    res = run_module(bubble_sort_program(), args={"list": INPUT6})
    history = watch(res.trace, "list")
    assert history[0][1] == INPUT6          # first snapshot: input
    assert history[-1][1] == sorted(INPUT6)  # last: sorted
    assert watch(res.trace, "nonexistent") == []


def test_watch_sees_loop_variables():
    res = run_module(bubble_sort_program(), args={"list": INPUT6})
    i_history = [v for _s, v in watch(res.trace, "i")]
    assert i_history[0] == len(INPUT6) - 1
    assert i_history[-1] == 1


def test_enter_exit_pairing():
    res = run_module(bubble_sort_program(), args={"list": [3, 1, 2]})
    opened = 0
    for ev in res.trace:
        if ev.kind == "enter":
            opened += 1
        elif ev.kind == "exit-step":
            opened -= 1
    # stop unwinds without exit-step events for the frames it crosses
    stopped = any(e.kind == "stopped" for e in res.trace)
    assert stopped and opened > 0


def test_preview_allowed_steps_inert():
    program = bubble_sort_program()
    allowed = {"bubblesort": {"1", "2", "3"}}
    res = run_module(program, args={"list": [3, 1, 2]},
                     config=RunConfig(allowed_steps=allowed))
    assert res.outputs["list"] == [3, 1, 2]  # swap body never ran


def test_trace_off_mode_is_silent_and_fast():
    res = run_module(bubble_sort_program(), args={"list": INPUT6},
                     config=RunConfig(trace=False))
    assert res.trace == []
    assert res.outputs["list"] == sorted(INPUT6)
