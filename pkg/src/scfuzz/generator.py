"""Input synthesis from structure constraints.

Paths are generated children-first.  For each path the generator picks the
base type(s) the value must inherit, decides whether a synthesized class is
needed (extra members, or a bare built-in is ruled out), and attaches the
already-generated children as member methods, member variables or
collection elements.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .constraints import (ObjectPath, Quad, StructureConstraint, satisfied_by,
                          validate_quad)
from .errors import UnsatisfiableSC
from .lattice import TypeLattice
from .values import (StructuredValue, ValueFactory, is_method_key,
                     make_stub, parse_element_key)

DEFAULT_SCALARS = (0, 1, -1, 0.0, 1.5, "", "abc")

# fallback payloads when the value set holds nothing of a type
_FALLBACK = {"long": 0, "bool": False, "float": 0.0, "complex": 0j,
             "str": "", "bytes": b""}


def scalar_type_name(v) -> str:
    if isinstance(v, bool):
        return "bool"
    if isinstance(v, int):
        return "long"
    return {float: "float", complex: "complex", str: "str", bytes: "bytes"}[type(v)]


@dataclass
class ValueSet:
    """Multiset of scalar literals with an origin tag per entry."""

    scalars: list = field(default_factory=list)

    @classmethod
    def with_defaults(cls) -> ValueSet:
        vs = cls()
        vs.extend(DEFAULT_SCALARS, "default")
        return vs

    def add(self, value, origin: str):
        scalar_type_name(value)  # rejects non-scalars
        self.scalars.append((value, origin))

    def extend(self, values: Iterable, origin: str):
        for v in values:
            self.add(v, origin)

    def harvest(self, value: StructuredValue, origin="corpus"):
        for v in value.walk():
            if v.payload is not None:
                self.add(v.payload, origin)
            for k, _ in v.elements or ():
                if not isinstance(k, int) or v.type.storage == "mapping":
                    self.add(k, origin)

    def of_type(self, type_name: str) -> list:
        return [v for v, _ in self.scalars if scalar_type_name(v) == type_name]

    def draw(self, type_name: str, rng: random.Random):
        pool = self.of_type(type_name)
        if type_name == "complex" and not pool:
            pool = [complex(f) for f in self.of_type("float")]
        if not pool:
            return _FALLBACK.get(type_name)
        return rng.choice(pool)

    def __len__(self):
        return len(self.scalars)


def topo_order(sc: StructureConstraint) -> list[ObjectPath]:
    """Children before the paths that contain them; ties by path text."""
    pending = {p: len(sc.children(p)) for p in sc.mappings}
    ready = [(p.text, p) for p, n in pending.items() if n == 0]
    heapq.heapify(ready)
    out = []
    while ready:
        _, p = heapq.heappop(ready)
        out.append(p)
        parent = p.parent
        if parent is not None and parent in pending:
            pending[parent] -= 1
            if pending[parent] == 0:
                heapq.heappush(ready, (parent.text, parent))
    return out


def _closed_down(lattice: TypeLattice, forbidden) -> set[str]:
    return {b for b in lattice.builtins
            if any(lattice.is_subtype(b, t) for t in forbidden)}


def compute_inherits(quad: Quad, lattice: TypeLattice) -> frozenset[str]:
    """Built-in types the generated class may (T_bt empty) or must inherit.

    With required types present the result is their conflict-free minimal
    subset: inheriting ``bool`` already satisfies ``long``.
    """
    allowed = set(lattice.builtins) - _closed_down(lattice, quad.t_nbt)
    if not quad.t_bt:
        if not allowed:
            raise UnsatisfiableSC("every built-in type is forbidden")
        return frozenset(allowed)
    required = {lattice.descriptor(t).name for t in quad.t_bt}
    if not required <= allowed:
        raise UnsatisfiableSC(f"required types {sorted(required - allowed)} are forbidden")
    minimal = {t for t in required
               if not any(o != t and lattice.is_subtype(o, t) for o in required)}
    ordered = sorted(minimal)
    for i, a in enumerate(ordered):
        for b in ordered[i + 1:]:
            if lattice.conflicting(a, b):
                raise UnsatisfiableSC(f"cannot inherit both {a} and {b}")
    return frozenset(minimal)


def _element_slot(key: str, storage: Optional[str]):
    """(storage needed, element key) if ``key`` names a collection element."""
    ek = parse_element_key(key)
    if ek is not None:
        if isinstance(ek, int):
            return ("sequence_or_mapping", ek)
        return ("mapping", ek)
    if storage == "mapping" and not is_method_key(key):
        return ("mapping", key)
    return None


def _fits(storage: str, need: str) -> bool:
    if need == "mapping":
        return storage == "mapping"
    return storage in ("sequence", "mapping")


class _Generation:
    def __init__(self, sc, values, rng, lattice, factory):
        self.sc = sc
        self.values = values
        self.rng = rng
        self.lattice = lattice
        self.f = factory
        self.made: dict[ObjectPath, StructuredValue] = {}

    def fail(self, path, why):
        raise UnsatisfiableSC(f"{path.text}: {why}")

    def skip(self, path: ObjectPath, quad: Quad) -> bool:
        """Absent attributes need no value."""
        parent = path.parent
        if parent is None or not quad.is_empty():
            return False
        return path.segments[-1] not in self.sc.quad(parent).a_bt

    def options(self, path, quad):
        """Candidate base tuples for the value at ``path``."""
        if quad.exact_type is not None:
            if not validate_quad(quad, self.lattice):
                self.fail(path, f"exact {quad.exact_type} fails the type tests")
            return [(self.lattice.descriptor(quad.exact_type).name,)]
        inherits = compute_inherits(quad, self.lattice)
        if quad.t_bt:
            return [tuple(sorted(inherits))]
        if path.parent is not None and not quad.a_bt and not quad.a_nbt:
            # unconstrained member: an integer, as for method return values
            if "long" in inherits:
                return [("long",)]
        return [(b,) for b in sorted(inherits)]

    def storage(self, bases) -> str:
        if len(bases) == 1:
            return self.lattice.descriptor(bases[0]).storage
        return self.lattice.synthesize(bases).storage

    def intrinsic(self, bases) -> frozenset:
        out = set()
        for b in bases:
            out |= self.lattice.descriptor(b).intrinsic_attrs
        return frozenset(out)

    def viable(self, path, quad, bases) -> bool:
        storage = self.storage(bases)
        intrinsic = self.intrinsic(bases)
        if quad.a_nbt & intrinsic:
            return False
        for key in quad.a_bt:
            slot = _element_slot(key, storage)
            if slot is not None:
                if not _fits(storage, slot[0]):
                    return False
                if storage == "sequence" and slot[1] < 0:
                    return False
            elif key.startswith("["):
                return False
        if storage == "sequence" and not self._dense_ok(quad):
            return False
        if quad.exact_type is not None:
            for key in quad.a_bt:
                if _element_slot(key, storage) is None and key not in intrinsic:
                    return False
        return True

    def generate_path(self, path: ObjectPath, quad: Quad) -> StructuredValue:
        opts = [b for b in self.options(path, quad) if self.viable(path, quad, b)]
        if not opts:
            self.fail(path, "no base type satisfies the attribute constraints")
        bases = opts[0] if len(opts) == 1 else self.rng.choice(opts)
        storage = self.storage(bases)
        intrinsic = self.intrinsic(bases)
        exact = quad.exact_type is not None

        attrs, elements = {}, []
        for key in sorted(quad.a_bt):
            child_path = path.child(key)
            child = self.made.get(child_path)
            child_quad = self.sc.quad(child_path)
            slot = _element_slot(key, storage)
            if slot is not None:
                if child is None:
                    child = self.f.scalar("long", self.values.draw("long", self.rng))
                elements.append((slot[1], child))
                continue
            if key in intrinsic and (child_quad.is_empty() or self._stub_ok(key, child_path)):
                continue
            if exact:
                self.fail(path, f"exact {quad.exact_type} cannot carry member {key}")
            if child is None:
                child = self.f.scalar("long", self.values.draw("long", self.rng))
            attrs[key] = self.f.method(child) if is_method_key(key) else child

        if storage == "sequence":
            elements = self._dense(elements)
        single = bases[0] if len(bases) == 1 else None
        needs_class = (bool(attrs) or single is None
                       or (single in quad.forbidden_exact))
        if exact and needs_class:
            self.fail(path, "exact type cannot be subclassed")
        if needs_class:
            desc = self.lattice.synthesize(bases)
        else:
            desc = self.lattice.descriptor(single)
        payload = None
        if desc.storage == "scalar":
            payload = self._payload(bases)
        return self.f.make(desc, attrs, elements if desc.is_collection else None, payload)

    def _stub_ok(self, key, child_path) -> bool:
        """True iff the intrinsic member meets the whole subtree under it."""
        stub = make_stub(key, iter(range(2)).__next__)
        cut = len(child_path.segments)
        sub = StructureConstraint(mappings={
            ObjectPath("_", p.segments[cut:]): q for p, q in self.sc.mappings.items()
            if p == child_path or child_path.contains(p)})
        return satisfied_by(sub, {"_": stub.returns}, self.lattice)

    @staticmethod
    def _dense_ok(quad: Quad) -> bool:
        """A dense sequence must not fill an index that A_nbt forbids."""
        need = [k for k in map(parse_element_key, quad.a_bt) if isinstance(k, int)]
        size = max(need) + 1 if need else 0
        for k in map(parse_element_key, quad.a_nbt):
            if isinstance(k, int) and (0 <= k < size or 0 < -k <= size):
                return False
        return True

    def _dense(self, elements):
        """Sequence elements at every index up to the highest required one."""
        by_index = {k: v for k, v in elements}
        if not by_index:
            return []
        top = max(by_index)
        out = []
        for i in range(top + 1):
            v = by_index.get(i)
            if v is None:
                v = self.f.scalar("long", self.values.draw("long", self.rng))
            out.append((i, v))
        return out

    def _payload(self, bases):
        for b in bases:
            for a in sorted(self.lattice.ancestors(b), key=lambda t: -len(self.lattice.ancestors(t))):
                if a in _FALLBACK:
                    return self.values.draw(a, self.rng)
        return None

    def run(self) -> dict[str, StructuredValue]:
        for path in topo_order(self.sc):
            quad = self.sc.quad(path)
            if self.skip(path, quad):
                continue
            self.made[path] = self.generate_path(path, quad)
        return {p.root: self.made[p] for p in self.sc.mappings if not p.segments}


def generate(sc: StructureConstraint, values: ValueSet, rng: random.Random,
             lattice: TypeLattice, factory: Optional[ValueFactory] = None
             ) -> dict[str, StructuredValue]:
    """One value per root of ``sc`` satisfying it, or UnsatisfiableSC."""
    factory = factory or ValueFactory(lattice)
    return _Generation(sc, values, rng, lattice, factory).run()
