import itertools

import pytest
from hypothesis import given

from scfuzz.errors import ConfigError
from scfuzz.lattice import TypeDescriptor, TypeLattice, default_lattice, is_subtype, load_lattice

from strategies import lattices


@pytest.mark.parametrize("t1,t2,expected", [
    ("long", "long", True),
    ("bool", "long", True),
    ("str", "float", False),
    ("long", "bool", False),
    ("dict", "object", True),
    ("int", "long", True),
])
def test_is_subtype_examples(t1, t2, expected):
    assert is_subtype(default_lattice(), t1, t2) is expected


def test_unknown_type_is_config_error(lattice):
    with pytest.raises(ConfigError):
        lattice.is_subtype("long", "nosuch")
    with pytest.raises(ConfigError):
        lattice.descriptor("frobnicator")


def test_default_lattice_shape(lattice):
    assert set(lattice.builtins) == {"object", "long", "bool", "float", "complex", "str",
                                     "bytes", "list", "tuple", "dict", "set"}
    assert "__index__" in lattice.descriptor("bool").intrinsic_attrs
    assert "__float__" in lattice.descriptor("bool").intrinsic_attrs
    for t in ("str", "bytes", "list", "tuple", "dict", "set"):
        assert "__len__" in lattice.descriptor(t).intrinsic_attrs
    assert "__index__" not in lattice.descriptor("str").intrinsic_attrs


def test_conflicts(lattice):
    layout = ["long", "float", "str", "bytes", "list", "tuple", "dict", "set"]
    for a, b in itertools.combinations(layout, 2):
        assert lattice.conflicting(a, b) and lattice.conflicting(b, a)
    for t in layout:
        assert not lattice.conflicting("object", t)
    # bool inherits long's layout
    assert lattice.conflicting("bool", "str")
    assert not lattice.conflicting("complex", "list")


def test_synthesize(lattice):
    d = lattice.synthesize(["dict"])
    assert d.synthesized and d.bases == ("dict",) and d.storage == "mapping"
    assert "keys" in d.intrinsic_attrs
    assert lattice.is_subtype(d, "dict") and lattice.is_subtype(d, "object")
    assert not lattice.is_subtype(d, "list")
    with pytest.raises(ConfigError):
        lattice.synthesize(["long", "str"])
    with pytest.raises(ConfigError):
        lattice.synthesize([])


@pytest.mark.parametrize("types,parents", [
    ({"a": TypeDescriptor("a", "scalar")}, {"a": ("object",)}),  # no object
    ({"object": TypeDescriptor("object", "opaque"), "a": TypeDescriptor("a", "scalar")},
     {"object": (), "a": ()}),  # orphan
    ({"object": TypeDescriptor("object", "opaque"), "a": TypeDescriptor("a", "scalar"),
      "b": TypeDescriptor("b", "scalar")},
     {"object": (), "a": ("b",), "b": ("a",)}),  # cycle
])
def test_invalid_lattices_rejected(types, parents):
    with pytest.raises(ConfigError):
        TypeLattice(types, parents)


def test_reflexive_conflict_rejected():
    types = {"object": TypeDescriptor("object", "opaque"), "a": TypeDescriptor("a", "scalar")}
    with pytest.raises(ConfigError):
        TypeLattice(types, {"object": (), "a": ("object",)}, {}, frozenset([frozenset(["a"])]))


def test_override_file(tmp_path):
    f = tmp_path / "lat.txt"
    f.write_text("# extra types\n"
                 "type mystr scalar : str\n"
                 "attr mystr upper\n"
                 "type frozenset sequence : object\n"
                 "conflict frozenset list\n", encoding="utf-8")
    lat = load_lattice(f)
    assert lat.is_subtype("mystr", "str")
    assert {"upper", "__len__"} <= lat.descriptor("mystr").intrinsic_attrs
    assert lat.conflicting("frozenset", "list")
    assert "mystr" not in default_lattice()


@pytest.mark.parametrize("line", ["type x scalar", "attr x", "conflict a a", "bogus line",
                                  "type x scalar : nosuch"])
def test_bad_override_lines(tmp_path, line):
    f = tmp_path / "lat.txt"
    f.write_text(line + "\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_lattice(f)


@given(lattices())
def test_subtype_is_partial_order(lat):
    names = list(lat.types)
    for a in names:
        assert lat.is_subtype(a, a)
        assert lat.is_subtype(a, "object")
        for b in names:
            if a != b and lat.is_subtype(a, b):
                assert not lat.is_subtype(b, a)
            for c in names:
                if lat.is_subtype(a, b) and lat.is_subtype(b, c):
                    assert lat.is_subtype(a, c)


@given(lattices())
def test_conflicts_symmetric(lat):
    for a in lat.types:
        for b in lat.types:
            assert lat.conflicting(a, b) == lat.conflicting(b, a)
        assert not lat.conflicting("object", a) or a != "object"


def test_default_lattice_partial_order(lattice):
    names = list(lattice.types)
    for a, b in itertools.product(names, repeat=2):
        if a != b and lattice.is_subtype(a, b):
            assert not lattice.is_subtype(b, a)
