import pytest
from hypothesis import given

from scfuzz.dsl import (Extract, HasAttrCond, If, TypeCheckCond, collect_literals,
                        parse_program)
from scfuzz.errors import ParseError

from conftest import load_fixture
from strategies import program_texts


def test_power_fixture_has_four_paths(power):
    assert power.name == "power" and power.params == ("o1", "o2")
    assert power.path_count() == 4
    first = power.body[0]
    assert isinstance(first, If) and first.cond == TypeCheckCond(first.cond.expr, "long")
    assert power.type_names() == {"long", "float"}


def test_identity_one_path():
    assert parse_program("method id(a){ return a }").path_count() == 1


def test_use_before_assign():
    with pytest.raises(ParseError, match="used before assignment"):
        parse_program("method bad(a){ return b }")


def test_conditional_assignment_not_definite():
    src = 'method m(a){ if typecheck(a, long) { x = getattr(a, "y") } return x }'
    with pytest.raises(ParseError, match="'x'"):
        parse_program(src)
    ok = ('method m(a){ if typecheck(a, long) { x = getattr(a, "y") } '
          'else { x = getattr(a, "z") } return x }')
    assert parse_program(ok).path_count() == 2


def test_terminating_branch_keeps_assignment():
    src = 'method m(a){ if typecheck(a, long) { crash } else { x = getattr(a, "y") } return x }'
    assert parse_program(src).path_count() == 2


@pytest.mark.parametrize("src,line,col", [
    ("method m(a) {\n  retrun a\n}", 2, 10),
    ("method m(a) { return a", 1, 23),
    ('method m(a) { x = getattr(a, "has space") return x }', 1, 30),
    ("method m(a, a) { return a }", 1, 13),
    ('method m(a) { if typecheck(a) { crash } }', 1, 29),
    ("method m(a) { return a } trailing", 1, 26),
    ("method m(a) { @ }", 1, 15),
])
def test_syntax_errors_have_positions(src, line, col):
    with pytest.raises(ParseError) as e:
        parse_program(src)
    assert (e.value.line, e.value.column) == (line, col)
    assert f"line {line}, column {col}" in str(e.value)


def test_cannot_assign_parameter():
    with pytest.raises(ParseError):
        parse_program('method m(a) { a = getattr(a, "x") return a }')


def test_grammar_forms():
    src = '''
    # every statement form
    method all(a, b) {
      if typecheck(a, dict, exact) { x = getattr_incref(a, "['k']") decref x }
      else if hasattr(b, "__index__", incref) { y = invoke_incref(b, "__index__") return y }
      else if eq(a, -1.5) { abort "neg" }
      incref b; decref b
      if eq(b, b"raw") { crash }
      return 7
    }'''
    p = parse_program(src)
    assert p.params == ("a", "b")
    cond = p.body[0].orelse[0].cond
    assert isinstance(cond, HasAttrCond) and cond.incref
    assert isinstance(p.body[0].then[0], Extract) and p.body[0].then[0].key == "['k']"
    # dict branch falls through to the 2-way tail; the bare else does too
    assert p.path_count() == 6


def test_collect_literals():
    assert collect_literals(parse_program("method m(a){ if eq(a, 42) { crash } return a }")) \
        == {("int", 42)}
    lits = collect_literals(load_fixture("handcrafted"))
    assert {("str", "names"), ("str", "formats")} <= lits
    assert {v for t, v in lits if t == "int"} == {0, 1, 2, 3}
    assert collect_literals(parse_program("method m(a){ return a }")) == set()


def test_literals_are_typed():
    lits = collect_literals(parse_program("method m(a){ if eq(a, true) { crash } return 1 }"))
    assert lits == {("bool", True), ("int", 1)}


@given(program_texts())
def test_random_programs_parse(src):
    p = parse_program(src)
    assert p.path_count() >= 1
    assert p.source == src
