import random

import pytest
from hypothesis import given, strategies as st

from patchlang.document import (
    PatchDocument, parse, read_value, render_value, serialize,
)
from patchlang.errors import DocumentError
from patchlang.samples import bubble_sort_document, bubble_sort_program
from patchlang.values import (
    BOOLEAN, INTEGER, PatchSet, PatchTuple, REAL, STRING, list_of,
    patch_equal, set_of, tuple_of,
)


def err_code(fn):
    with pytest.raises(DocumentError) as e:
        fn()
    return e.value.code


# --- value literals


def test_list_literal_round_trip():
    assert render_value([20, 9, 34]) == "[20, 9, 34]"
    assert read_value("[20, 9, 34]", list_of(INTEGER)) == [20, 9, 34]


def test_set_renders_sorted():
    s = PatchSet(["Patch", "Java", "C"])
    assert render_value(s) == '{"C", "Java", "Patch"}'
    back = read_value('{"Patch", "Java", "C"}', set_of(STRING))
    assert patch_equal(back, s)


def test_numeric_set_sorted_numerically():
    assert render_value(PatchSet([87.2, 2.87])) == "{2.87, 87.2}"


def test_boolean_literals():
    assert render_value(True) == "TRUE"
    assert read_value("FALSE", BOOLEAN) is False


def test_tuple_wire_form_uses_angle_brackets():
    t = PatchTuple(("no", "street", "city", "zip"),
                   (2, "Main Road", "New York", 10026))
    text = render_value(t)
    assert text == '<2, "Main Road", "New York", 10026>'
    tt = tuple_of([("no", INTEGER), ("street", STRING),
                   ("city", STRING), ("zip", INTEGER)])
    back = read_value(text, tt)
    assert patch_equal(back, t)


def test_real_rendering_keeps_decimal_point():
    assert render_value(48.0) == "48.0"
    assert render_value(5.57) == "5.57"
    assert read_value("48.0", REAL) == 48.0


def test_integer_literal_widens_into_real_slot():
    assert read_value("48", REAL) == 48.0


def test_string_escapes():
    s = 'say "hi"\n\tdone'
    assert read_value(render_value(s), STRING) == s


def test_untyped_reading_infers():
    assert read_value("[1, 2, 3]") == [1, 2, 3]
    assert read_value("[1, 2.5]") == [1.0, 2.5]  # homogenized to real
    assert read_value("TRUE") is True


def test_bad_literals():
    assert err_code(lambda: read_value("")) == "literal-syntax-error"
    assert err_code(lambda: read_value("[1, 2")) == "literal-syntax-error"
    assert err_code(lambda: read_value('"open')) == "literal-syntax-error"
    assert err_code(lambda: read_value("1 2")) == "literal-syntax-error"
    assert err_code(lambda: read_value("9" * 30)) == "literal-syntax-error"


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_real_literals_round_trip_tightly(x):
    back = read_value(render_value(x), REAL)
    if x == 0:
        assert back == 0
    else:
        assert abs(back - x) <= 1e-12 * abs(x)


@given(st.lists(st.integers(min_value=-(2**62), max_value=2**62),
                max_size=20))
def test_integer_lists_round_trip_exactly(xs):
    assert read_value(render_value(xs), list_of(INTEGER)) == xs


# --- documents


def test_reference_document_shape():
    text = serialize(bubble_sort_document())
    doc = parse(text)
    assert len(doc.program.modules) == 1
    assert len(doc.program.modules[0].steps) == 8
    assert doc.program.entry == "BubbleSort"


def test_round_trip_identity_on_canonical_text():
    text = serialize(bubble_sort_document())
    assert serialize(parse(text)) == text


def test_canonicalization_idempotent():
    doc = bubble_sort_document()
    once = serialize(parse(serialize(doc)))
    twice = serialize(parse(once))
    assert once == twice


def test_structurally_equal_programs_serialize_identically():
    a = serialize(PatchDocument(program=bubble_sort_program()))
    b = serialize(PatchDocument(program=bubble_sort_program()))
    assert a == b


def test_unknown_fields_preserved():
    doc = bubble_sort_document()
    doc.extra["color-theme"] = {"accent": "teal"}
    text = serialize(doc)
    reparsed = parse(text)
    assert reparsed.extra["color-theme"] == {"accent": "teal"}
    assert serialize(reparsed) == text


def test_unknown_step_fields_preserved():
    doc = bubble_sort_document()
    doc.program.modules[0].steps["4"].extra["note"] = "the comparison"
    text = serialize(doc)
    assert parse(text).program.modules[0].steps["4"].extra["note"] == \
        "the comparison"


def test_empty_text_is_parse_error():
    assert err_code(lambda: parse("")) == "parse-error"


def test_json_error_carries_position():
    with pytest.raises(DocumentError) as e:
        parse('{"formatVersion": 1,\n  "entry": }')
    assert e.value.code == "parse-error"
    assert e.value.line == 2


def test_version_gate():
    assert err_code(lambda: parse('{"formatVersion": 2}')) == \
        "version-unsupported"


def test_layout_preserved():
    doc = bubble_sort_document()
    doc.layout = {"BubbleSort": {"1": [0, 0], "2": [1, 0]}}
    assert parse(serialize(doc)).layout == doc.layout


def test_generated_document_corpus_round_trips():
    from patchlang.codegen.fuzz import _Gen

    rng = random.Random(31)
    for i in range(150):
        gen = _Gen(rng, include_calls=False)
        module = gen.main_module()
        from patchlang.model import PatchProgram
        doc = PatchDocument(program=PatchProgram(modules=[module],
                                                 entry="Main"))
        if rng.random() < 0.4:
            doc.extra[f"x-{i}"] = {"k": rng.randint(0, 9)}
        if rng.random() < 0.3:
            doc.layout = {"Main": {"root": [rng.randint(0, 5), 0]}}
        text = serialize(doc)
        again = serialize(parse(text))
        assert text == again, f"document {i} failed canonical round-trip"
