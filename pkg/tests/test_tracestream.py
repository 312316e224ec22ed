import random
import threading

import pytest

from patchlang.errors import EvalError, PatchError
from patchlang.interpreter import run_module
from patchlang.samples import bubble_sort_program
from patchlang.tracestream import (
    FAILED, FINISHED, SessionStore, event_to_wire, subscribe, summarize,
)


def finished_session(store, xs):
    session = store.create()
    program = bubble_sort_program()
    result = run_module(program, args={"list": xs},
                        on_event=session.append)
    session.finish({"list": result.outputs["list"]})
    return session


def inversions(xs):
    return sum(1 for i in range(len(xs)) for j in range(i + 1, len(xs))
               if xs[i] > xs[j])


def test_subscribe_replays_all_events_then_terminal():
    store = SessionStore()
    s = finished_session(store, [29, -4, 2, 17, 45, 9])
    feed = subscribe(store, s.session_id, 1)
    events = list(feed)
    assert len(events) == len(s.events)
    assert feed.terminal_status == FINISHED


def test_subscribe_past_end_yields_terminal_only():
    store = SessionStore()
    s = finished_session(store, [3, 1])
    feed = subscribe(store, s.session_id, len(s.events) + 1)
    assert list(feed) == []
    assert feed.terminal_status == FINISHED


def test_subscribe_unknown_session():
    store = SessionStore()
    with pytest.raises(EvalError) as e:
        subscribe(store, "run-404")
    assert e.value.code == "unknown-session"


def test_replay_determinism_across_consumers():
    store = SessionStore()
    s = finished_session(store, [5, 4, 3, 2, 1])
    a = [e.seq for e in subscribe(store, s.session_id)]
    b = [e.seq for e in subscribe(store, s.session_id)]
    assert a == b


def test_live_subscription_sees_whole_run():
    store = SessionStore()
    session = store.create()
    program = bubble_sort_program()

    def work():
        result = run_module(program, args={"list": [9, 8, 7, 1]},
                            on_event=session.append)
        session.finish({"list": result.outputs["list"]})

    t = threading.Thread(target=work)
    feed = subscribe(store, session.session_id, 1)
    t.start()
    events = list(feed)
    t.join()
    assert feed.terminal_status == FINISHED
    assert [e.seq for e in events] == list(range(1, len(events) + 1))


def test_summarize_counts_kinds():
    store = SessionStore()
    s = finished_session(store, [29, -4, 2, 17, 45, 9])
    counts = summarize(s)
    assert counts["swap"] == 6
    assert counts["enter"] > 0
    assert counts["stopped"] == 1


def test_summarize_requires_terminal():
    store = SessionStore()
    s = store.create()
    with pytest.raises(EvalError):
        summarize(s)


def test_sorted_input_has_zero_swaps():
    store = SessionStore()
    s = finished_session(store, [1, 2, 3])
    assert summarize(s).get("swap", 0) == 0


def test_reverse_input_swaps_n_choose_2():
    store = SessionStore()
    s = finished_session(store, [3, 2, 1])
    assert summarize(s)["swap"] == 3


def test_swap_count_equals_inversions_randomized():
    store = SessionStore()
    rng = random.Random(77)
    for _ in range(25):
        xs = [rng.randint(-50, 50) for _ in range(rng.randint(0, 18))]
        s = finished_session(store, xs)
        assert summarize(s).get("swap", 0) == inversions(xs), xs


def test_buffer_overflow_fails_session():
    store = SessionStore(buffer_cap=40)
    session = store.create()
    program = bubble_sort_program()
    with pytest.raises(PatchError) as e:
        run_module(program, args={"list": [9, 8, 7, 6, 5, 4]},
                   on_event=session.append)
    assert e.value.code == "budget-exceeded"
    assert session.status == FAILED
    assert session.error_code == "budget-exceeded"


def test_event_wire_encoding_uses_literal_syntax():
    store = SessionStore()
    s = finished_session(store, [2, 1])
    wires = [event_to_wire(e) for e in s.events]
    assigns = [w for w in wires if w["kind"] == "transform"]
    assert assigns and isinstance(assigns[0]["data"]["new"], str)
    enters = [w for w in wires if w["kind"] == "enter" and "snapshot" in w]
    assert enters[0]["snapshot"]["list"] == "[2, 1]"
    seqs = [w["seq"] for w in wires]
    assert seqs == sorted(seqs)
