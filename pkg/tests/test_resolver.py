import random

import pytest

from patchlang.errors import ResolveError
from patchlang.model import ModuleDef, DataObjectDecl
from patchlang.resolver import CallSignature, resolve_call, resolve_module
from patchlang.samples import bubble_sort_program
from patchlang.values import (
    BOOLEAN, INTEGER, STRING, list_of,
)


def module_with(formals):
    return ModuleDef(
        name="Callee",
        inputs=[DataObjectDecl(n, t, "caller") for n, t in formals],
        outputs=[],
    )


def err_code(fn):
    with pytest.raises(ResolveError) as e:
        fn()
    return e.value.code


def test_named_actuals_bind_regardless_of_order():
    callee = module_with([("city", STRING), ("zip", INTEGER)])
    mapping = resolve_call(
        CallSignature([("zip", INTEGER), ("city", STRING)]), callee)
    assert mapping.as_dict() == {0: "zip", 1: "city"}


def test_unnamed_actuals_bind_by_unique_type():
    callee = module_with([("count", INTEGER), ("label", STRING)])
    mapping = resolve_call(
        CallSignature([(None, STRING), (None, INTEGER)]), callee)
    assert mapping.as_dict() == {0: "label", 1: "count"}


def test_two_same_typed_unnamed_actuals_are_ambiguous():
    callee = module_with([("lo", INTEGER), ("hi", INTEGER)])
    assert err_code(lambda: resolve_call(
        CallSignature([(None, INTEGER), (None, INTEGER)]), callee)) == \
        "ambiguous-mapping"


def test_arity_mismatch():
    callee = module_with([("a", INTEGER)])
    assert err_code(lambda: resolve_call(
        CallSignature([(None, INTEGER), (None, INTEGER)]), callee)) == \
        "arity-mismatch"


def test_unknown_named_actual():
    callee = module_with([("a", INTEGER)])
    assert err_code(lambda: resolve_call(
        CallSignature([("b", INTEGER)]), callee)) == "unresolvable"


def test_zero_candidates_unresolvable():
    callee = module_with([("a", INTEGER), ("b", STRING)])
    assert err_code(lambda: resolve_call(
        CallSignature([(None, BOOLEAN), (None, STRING)]), callee)) == \
        "unresolvable"


def test_fixed_point_unlocks_numeric_pair():
    # integer fits both numerics; binding the string first leaves a
    # unique candidate, then the real one resolves
    callee = module_with([("n", INTEGER), ("s", STRING)])
    mapping = resolve_call(
        CallSignature([(None, INTEGER), (None, STRING)]), callee)
    assert mapping.as_dict() == {0: "n", 1: "s"}


def test_mixed_named_and_unnamed():
    callee = module_with([("a", INTEGER), ("b", INTEGER), ("c", STRING)])
    mapping = resolve_call(
        CallSignature([("b", INTEGER), (None, INTEGER), (None, STRING)]),
        callee)
    assert mapping.as_dict() == {0: "b", 1: "a", 2: "c"}


def test_duplicate_actual_names_rejected():
    with pytest.raises(ResolveError):
        CallSignature([("a", INTEGER), ("A", INTEGER)])


def test_case_insensitive_module_dispatch():
    program = bubble_sort_program()
    callee, _ = resolve_module(
        "bubblesort",
        CallSignature([("list", list_of(INTEGER))]), program)
    assert callee.name == "BubbleSort"


def test_unknown_module():
    program = bubble_sort_program()
    assert err_code(lambda: resolve_module(
        "quicksort", CallSignature([(None, list_of(INTEGER))]),
        program)) == "unknown-module"


# --- randomized properties

DISTINCT_TYPES = [INTEGER, STRING, BOOLEAN, list_of(INTEGER),
                  list_of(STRING), list_of(BOOLEAN)]


def _random_named_case(rng):
    n = rng.randint(1, 6)
    names = rng.sample(
        ["alpha", "beta", "gamma", "delta", "eps", "zeta"], n)
    formals = [(name, rng.choice(DISTINCT_TYPES)) for name in names]
    actuals = [(name, t) for name, t in formals]
    rng.shuffle(actuals)
    return formals, actuals


def test_permutation_invariance_randomized():
    rng = random.Random(2024)
    for _ in range(400):
        formals, actuals = _random_named_case(rng)
        callee = module_with(formals)
        base = resolve_call(CallSignature(actuals), callee)
        by_name_base = {a[0]: base.as_dict()[i]
                        for i, a in enumerate(actuals)}
        perm = actuals[:]
        rng.shuffle(perm)
        other = resolve_call(CallSignature(perm), callee)
        by_name_other = {a[0]: other.as_dict()[i]
                         for i, a in enumerate(perm)}
        assert by_name_base == by_name_other


def test_name_independence_randomized():
    # unnamed actuals with mutually distinct types resolve identically
    # however the distinct types are assigned to formal names
    rng = random.Random(99)
    for _ in range(300):
        n = rng.randint(1, 6)
        types = rng.sample(DISTINCT_TYPES, n)
        names = rng.sample(
            ["uno", "dos", "tres", "cuatro", "cinco", "seis"], n)
        callee = module_with(list(zip(names, types)))
        mapping = resolve_call(
            CallSignature([(None, t) for t in types]), callee)
        for pos, formal in mapping.as_dict().items():
            assert callee.inputs[[d.norm() for d in callee.inputs]
                                 .index(formal)].type == types[pos]


def test_ambiguity_always_raises_randomized():
    rng = random.Random(7)
    for _ in range(300):
        n = rng.randint(2, 6)
        dup = rng.choice(DISTINCT_TYPES)
        formals = [(f"p{i}", dup) for i in range(n)]
        callee = module_with(formals)
        with pytest.raises(ResolveError) as e:
            resolve_call(CallSignature([(None, dup)] * n), callee)
        assert e.value.code == "ambiguous-mapping"


def test_mapping_always_bijective_randomized():
    rng = random.Random(5)
    for _ in range(300):
        formals, actuals = _random_named_case(rng)
        callee = module_with(formals)
        mapping = resolve_call(CallSignature(actuals), callee)
        values = list(mapping.as_dict().values())
        assert len(set(values)) == len(values) == len(formals)
