import pytest
from hypothesis import given

from scfuzz.errors import ParseError
from scfuzz.render import parse_listing, render_value, split_blocks
from scfuzz.values import ValueFactory, structure

from strategies import LATTICE, values

CLASS_LISTING = """\
class self_class(dict):
  index = 1.5
  def __index__(self): return self.index
obj = self_class()
obj['names'] = []"""


def test_scalar_listings(factory):
    assert render_value(factory.scalar("long", 1)) == "obj = 1"
    assert render_value(factory.scalar("str", "abc")) == "obj = 'abc'"
    assert render_value(factory.scalar("bool", True)) == "obj = True"


def test_synthesized_dict_listing(factory, lattice):
    desc = lattice.synthesize(["dict"])
    v = factory.make(desc, {"__index__": factory.method(factory.scalar("float", 1.5))},
                     [("names", factory.from_python([]))])
    assert render_value(v) == CLASS_LISTING


def test_listing_parses_back(factory):
    v = parse_listing(CLASS_LISTING, factory)
    assert v.type.synthesized and v.type.bases == ("dict",)
    assert v.attrs["__index__"].returns.payload == 1.5
    assert v.elements[0][0] == "names" and v.elements[0][1].type_name == "list"


def test_nested_classes_numbered(factory, lattice):
    inner = factory.make(lattice.synthesize(["str"]),
                         {"__index__": factory.method(factory.scalar("long", 0))}, payload="x")
    outer = factory.make(lattice.synthesize(["list"]), {}, [(0, inner)])
    text = render_value(outer)
    assert "class self_class_1(str):" in text and "obj_1 = self_class_1('x')" in text
    assert text.endswith("obj.append(obj_1)")
    assert structure(parse_listing(text, factory)) == structure(outer)


def test_long_renders_as_int(factory, lattice):
    v = factory.make(lattice.synthesize(["long"]), {"tag": factory.scalar("str", "t")}, payload=3)
    assert render_value(v).startswith("class self_class(int):")


def test_render_deterministic(factory):
    v = factory.from_python({"a": [1, (2.5, b"x")], 3: {1, 2}})
    assert render_value(v) == render_value(factory.clone(v))


@pytest.mark.parametrize("text", ["obj = [", "import os", "obj = foo()", "x = 1\ny = undefined"])
def test_bad_listing(factory, text):
    with pytest.raises(ParseError):
        parse_listing(text, factory)


def test_split_blocks():
    assert split_blocks("obj = 1\n\n\nobj = 'a'\n") == ["obj = 1", "obj = 'a'"]
    assert split_blocks("\n\n") == []


@given(values())
def test_render_parse_render_roundtrip(v):
    text = render_value(v)
    back = parse_listing(text, ValueFactory(LATTICE))
    assert structure(back) == structure(v)
    assert render_value(back) == text


@given(values(), values())
def test_render_injective(a, b):
    if structure(a) != structure(b):
        assert render_value(a) != render_value(b)


@given(values())
def test_render_ignores_ids(v):
    assert render_value(ValueFactory(LATTICE, start=77_000).clone(v)) == render_value(v)
