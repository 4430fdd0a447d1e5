"""Structured runtime values and attribute lookup."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from .lattice import TOP, TypeDescriptor, TypeLattice

Scalar = Union[int, float, complex, str, bytes, bool]

FIRST_ID = 1000

# Return value of each intrinsic stub method, by attribute key.
STUB_RETURNS = {
    "__index__": ("long", 0),
    "__int__": ("long", 0),
    "__len__": ("long", 0),
    "__float__": ("float", 0.0),
    "__complex__": ("complex", 0j),
}
_DEFAULT_STUB_RETURN = ("str", "")

_ELEMENT_RE = re.compile(r"^\[(?:(?P<idx>-?\d+)|'(?P<key>[^']*)')\]$")


@dataclass(frozen=True)
class StructuredValue:
    id: int
    type: TypeDescriptor
    attrs: dict[str, StructuredValue] = field(default_factory=dict)
    elements: Optional[tuple[tuple[Scalar, StructuredValue], ...]] = None
    payload: Optional[Scalar] = None
    # set on member methods: the value a call returns
    returns: Optional[StructuredValue] = None

    @property
    def type_name(self) -> str:
        return self.type.name

    @property
    def is_method(self) -> bool:
        return self.returns is not None

    def walk(self):
        """Yield this value and every value reachable from it."""
        yield self
        for v in self.attrs.values():
            yield from v.walk()
        for _, v in self.elements or ():
            yield from v.walk()
        if self.returns is not None:
            yield from self.returns.walk()


def element_key(key: Scalar) -> str:
    """Attribute-key spelling of a collection element: ``[0]`` or ``['k']``."""
    if isinstance(key, int) and not isinstance(key, bool):
        return f"[{key}]"
    return f"['{key}']"


def parse_element_key(key: str):
    """Inverse of :func:`element_key`; ``None`` for plain attribute keys."""
    m = _ELEMENT_RE.match(key)
    if m is None:
        return None
    if m.group("idx") is not None:
        return int(m.group("idx"))
    return m.group("key")


def is_method_key(key: str) -> bool:
    return len(key) > 4 and key.startswith("__") and key.endswith("__")


class ValueFactory:
    """Creates values with campaign-unique identity ids."""

    def __init__(self, lattice: TypeLattice, start: int = FIRST_ID, alloc=None):
        self.lattice = lattice
        self.next_id = alloc or itertools.count(start).__next__

    def scalar(self, type_name: str, payload: Scalar) -> StructuredValue:
        return StructuredValue(self.next_id(), self.lattice.descriptor(type_name),
                               payload=payload)

    def obj(self) -> StructuredValue:
        return StructuredValue(self.next_id(), self.lattice.descriptor(TOP))

    def collection(self, type_name, elements=()) -> StructuredValue:
        desc = self.lattice.descriptor(type_name)
        return self.make(desc, elements=elements)

    def method(self, returns: StructuredValue) -> StructuredValue:
        return StructuredValue(self.next_id(), self.lattice.descriptor(TOP),
                               returns=returns)

    def make(self, desc: TypeDescriptor, attrs=None, elements=None,
             payload=None) -> StructuredValue:
        if desc.is_collection:
            elements = tuple(elements or ())
        elif elements:
            raise ValueError(f"type {desc.name!r} cannot hold elements")
        else:
            elements = None
        return StructuredValue(self.next_id(), desc, dict(attrs or {}),
                               elements, payload)

    def clone(self, value: StructuredValue) -> StructuredValue:
        """Deep copy with fresh ids."""
        return StructuredValue(
            self.next_id(),
            value.type,
            {k: self.clone(v) for k, v in value.attrs.items()},
            None if value.elements is None else
            tuple((k, self.clone(v)) for k, v in value.elements),
            value.payload,
            None if value.returns is None else self.clone(value.returns),
        )

    def from_python(self, obj) -> StructuredValue:
        """Bare built-in value from a plain Python object."""
        if isinstance(obj, bool):
            return self.scalar("bool", obj)
        if isinstance(obj, int):
            return self.scalar("long", obj)
        for py, name in ((float, "float"), (complex, "complex"),
                         (str, "str"), (bytes, "bytes")):
            if isinstance(obj, py):
                return self.scalar(name, obj)
        if isinstance(obj, list):
            return self.collection("list", enumerate(map(self.from_python, obj)))
        if isinstance(obj, tuple):
            return self.collection("tuple", enumerate(map(self.from_python, obj)))
        if isinstance(obj, (set, frozenset)):
            items = sorted(obj, key=repr)
            return self.collection("set", enumerate(map(self.from_python, items)))
        if isinstance(obj, dict):
            return self.collection(
                "dict", [(k, self.from_python(v)) for k, v in obj.items()])
        raise TypeError(f"cannot model {type(obj).__name__} values")


class StubCache:
    """Intrinsic stub values keyed by (owner id, key), ids from ``alloc``."""

    def __init__(self, alloc: Callable[[], int]):
        self._alloc = alloc
        self._stubs: dict[tuple[int, str], StructuredValue] = {}

    def get(self, owner: StructuredValue, key: str) -> StructuredValue:
        slot = (owner.id, key)
        if slot not in self._stubs:
            self._stubs[slot] = make_stub(key, self._alloc)
        return self._stubs[slot]


def make_stub(key: str, alloc) -> StructuredValue:
    type_name, payload = STUB_RETURNS.get(key, _DEFAULT_STUB_RETURN)
    ret_desc = _STUB_DESCRIPTORS.get(type_name)
    ret = StructuredValue(alloc(), ret_desc, payload=payload)
    return StructuredValue(alloc(), _STUB_DESCRIPTORS["object"], returns=ret)


def _stub_descriptors():
    from .lattice import default_lattice
    lat = default_lattice()
    return {n: lat.descriptor(n) for n in ("object", "long", "float", "complex", "str")}


_STUB_DESCRIPTORS = _stub_descriptors()


def _scratch_cache(value: StructuredValue) -> StubCache:
    top = max((v.id for v in value.walk()), default=0)
    return StubCache(itertools.count(top + 1).__next__)


def lookup_attr(value: StructuredValue, key: str,
                stubs: Optional[StubCache] = None) -> Optional[StructuredValue]:
    """Materialized attribute, element, or intrinsic stub for ``key``."""
    if key in value.attrs:
        return value.attrs[key]
    if value.elements is not None:
        ek = parse_element_key(key)
        if ek is not None:
            for k, v in value.elements:
                if k == ek and type(k) is type(ek):
                    return v
            return None
        if value.type.storage == "mapping":
            for k, v in value.elements:
                if k == key:
                    return v
    if key in value.type.intrinsic_attrs:
        cache = stubs if stubs is not None else _scratch_cache(value)
        return cache.get(value, key)
    return None


def has_attr(value: StructuredValue, key: str) -> bool:
    return lookup_attr(value, key) is not None


def resolve_member(value: StructuredValue) -> StructuredValue:
    """Member methods stand for the value they return."""
    while value.returns is not None:
        value = value.returns
    return value


def structure(value: StructuredValue):
    """Hashable structural fingerprint that ignores identity ids."""
    t = value.type
    return (
        t.name, t.kind, t.bases,
        tuple((k, structure(v)) for k, v in value.attrs.items()),
        None if value.elements is None else
        tuple((type(k).__name__, k, structure(v)) for k, v in value.elements),
        (type(value.payload).__name__, value.payload),
        None if value.returns is None else structure(value.returns),
    )
