"""Structure constraints: per-path quads, conjunctions, canonical form.

A quad constrains one object reachable from a method argument::

    (T_bt, T_nbt, A_bt, A_nbt)

required supertypes, forbidden supertypes, required attribute keys and
forbidden attribute keys.  Two extensions cover the ``*_CheckExact`` API
family: ``exact_type`` (type name must be exactly this built-in) and
``forbidden_exact`` (type name must differ from these).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional

from .lattice import TypeLattice
from .values import StructuredValue, lookup_attr, resolve_member

_SEGMENT_RE = re.compile(r"\.([^.\[]+)|(\[(?:-?\d+|'[^']*')\])")


@dataclass(frozen=True, order=True)
class ObjectPath:
    root: str
    segments: tuple[str, ...] = ()

    @property
    def text(self) -> str:
        out = [self.root]
        for s in self.segments:
            out.append(s if s.startswith("[") else "." + s)
        return "".join(out)

    def __str__(self):
        return self.text

    @property
    def depth(self) -> int:
        return len(self.segments)

    @property
    def parent(self) -> Optional[ObjectPath]:
        if not self.segments:
            return None
        return ObjectPath(self.root, self.segments[:-1])

    def child(self, key: str) -> ObjectPath:
        return ObjectPath(self.root, self.segments + (key,))

    def contains(self, other: ObjectPath) -> bool:
        """True iff ``other`` is this path plus one or more segments."""
        return (other.root == self.root and len(other.segments) > len(self.segments)
                and other.segments[:len(self.segments)] == self.segments)

    @classmethod
    def parse(cls, text: str) -> ObjectPath:
        m = re.match(r"[^.\[]+", text)
        if m is None:
            raise ValueError(f"bad object path {text!r}")
        root, pos, segs = m.group(0), m.end(), []
        while pos < len(text):
            m = _SEGMENT_RE.match(text, pos)
            if m is None:
                raise ValueError(f"bad object path {text!r}")
            segs.append(m.group(1) or m.group(2))
            pos = m.end()
        return cls(root, tuple(segs))


@dataclass(frozen=True)
class Quad:
    t_bt: frozenset[str] = frozenset()
    t_nbt: frozenset[str] = frozenset()
    a_bt: frozenset[str] = frozenset()
    a_nbt: frozenset[str] = frozenset()
    exact_type: Optional[str] = None
    forbidden_exact: frozenset[str] = frozenset()

    def is_empty(self) -> bool:
        return not (self.t_bt or self.t_nbt or self.a_bt or self.a_nbt
                    or self.exact_type or self.forbidden_exact)

    def add(self, **sets) -> Quad:
        """Copy with items added to the named sets (``t_bt=["long"]``, ...)."""
        changes = {name: getattr(self, name) | frozenset(items)
                   for name, items in sets.items()}
        return replace(self, **changes)

    def to_json(self) -> dict:
        out = {
            "a_bt": sorted(self.a_bt),
            "a_nbt": sorted(self.a_nbt),
            "t_bt": sorted(self.t_bt),
            "t_nbt": sorted(self.t_nbt),
        }
        if self.exact_type is not None:
            out["exact"] = self.exact_type
        if self.forbidden_exact:
            out["forbidden_exact"] = sorted(self.forbidden_exact)
        return out

    @classmethod
    def from_json(cls, obj: Mapping) -> Quad:
        unknown = set(obj) - {"a_bt", "a_nbt", "t_bt", "t_nbt", "exact", "forbidden_exact"}
        if unknown:
            raise ValueError(f"unknown quad fields {sorted(unknown)}")
        return cls(
            t_bt=frozenset(obj.get("t_bt", ())),
            t_nbt=frozenset(obj.get("t_nbt", ())),
            a_bt=frozenset(obj.get("a_bt", ())),
            a_nbt=frozenset(obj.get("a_nbt", ())),
            exact_type=obj.get("exact"),
            forbidden_exact=frozenset(obj.get("forbidden_exact", ())),
        )


def validate_quad(q: Quad, lattice: TypeLattice, strict: bool = False) -> bool:
    """Check the quad's well-formedness invariants.

    No required type may be a subtype of a forbidden one (that quad has no
    inhabitant), and an exact type must satisfy every type test.  With ``strict=True`` the symmetric condition is checked as
    well, so required and forbidden types must be pairwise incomparable.
    """
    for t in q.t_bt | q.t_nbt | q.forbidden_exact:
        lattice.descriptor(t)
    if q.exact_type is not None:
        lattice.descriptor(q.exact_type)
        if q.exact_type not in q.t_bt or q.exact_type in q.forbidden_exact:
            return False
        # the exact type is the whole answer: it must meet every type test
        if any(not lattice.is_subtype(q.exact_type, t) for t in q.t_bt):
            return False
        if any(lattice.is_subtype(q.exact_type, t) for t in q.t_nbt):
            return False
    if q.a_bt & q.a_nbt:
        return False
    for t1 in q.t_bt:
        for t2 in q.t_nbt:
            if lattice.is_subtype(t1, t2):
                return False
            if strict and lattice.is_subtype(t2, t1):
                return False
    return True


@dataclass(frozen=True)
class StructureConstraint:
    mappings: dict[ObjectPath, Quad] = field(default_factory=dict)
    bindings: dict[int, ObjectPath] = field(default_factory=dict)

    @classmethod
    def for_roots(cls, roots: Mapping[str, int]) -> StructureConstraint:
        return cls(
            mappings={ObjectPath(r): Quad() for r in roots},
            bindings={i: ObjectPath(r) for r, i in roots.items()},
        )

    @property
    def roots(self) -> list[str]:
        return [p.root for p in self.mappings if not p.segments]

    def quad(self, path: ObjectPath) -> Quad:
        return self.mappings.get(path, Quad())

    def children(self, path: ObjectPath) -> list[ObjectPath]:
        return [p for p in self.mappings
                if len(p.segments) == len(path.segments) + 1 and path.contains(p)]

    def to_json(self) -> dict:
        return {p.text: self.mappings[p].to_json()
                for p in sorted(self.mappings, key=lambda p: p.text)}

    @classmethod
    def from_json(cls, obj: Mapping) -> StructureConstraint:
        mappings = {ObjectPath.parse(k): Quad.from_json(v) for k, v in obj.items()}
        sc = cls(mappings=mappings)
        check_well_formed(sc)
        return sc

    def __str__(self):
        return " ∧ ".join(f"{p.text} ↦ {_quad_text(q)}"
                          for p, q in sorted(self.mappings.items(), key=lambda i: i[0].text))


def _quad_text(q: Quad) -> str:
    parts = []
    for name in ("t_bt", "t_nbt", "a_bt", "a_nbt", "forbidden_exact"):
        s = getattr(q, name)
        if s:
            parts.append(f"{name.upper()}={{{', '.join(sorted(s))}}}")
    if q.exact_type:
        parts.append(f"EXACT={q.exact_type}")
    return "(" + ", ".join(parts) + ")"


def check_well_formed(sc: StructureConstraint):
    for p in sc.mappings:
        if p.parent is not None and p.parent not in sc.mappings:
            raise ValueError(f"path {p.text} has no parent mapping")
    ids = list(sc.bindings.values())
    if len(set(ids)) != len(ids):
        raise ValueError("bindings are not injective")


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def canonical_key(sc: StructureConstraint) -> str:
    """Order-insensitive text identity of an SC (bindings excluded)."""
    return canonical_json(sc.to_json())


def sc_from_key(key: str) -> StructureConstraint:
    return StructureConstraint.from_json(json.loads(key))


def resolve_path(path: ObjectPath, inputs: Mapping[str, StructuredValue]):
    v = inputs.get(path.root)
    for seg in path.segments:
        if v is None:
            return None
        v = lookup_attr(v, seg)
        if v is not None:
            v = resolve_member(v)
    return v


def quad_holds(q: Quad, v: StructuredValue, lattice: TypeLattice) -> bool:
    t = v.type
    if any(not lattice.is_subtype(t, x) for x in q.t_bt):
        return False
    if any(lattice.is_subtype(t, x) for x in q.t_nbt):
        return False
    exact_name = None if t.synthesized else t.name
    if q.exact_type is not None and exact_name != q.exact_type:
        return False
    if exact_name is not None and exact_name in q.forbidden_exact:
        return False
    if any(lookup_attr(v, k) is None for k in q.a_bt):
        return False
    if any(lookup_attr(v, k) is not None for k in q.a_nbt):
        return False
    return True


def satisfied_by(sc: StructureConstraint, inputs: Mapping[str, StructuredValue],
                 lattice: TypeLattice) -> bool:
    """Literal satisfaction semantics of ``sc`` on concrete inputs."""
    for path, q in sc.mappings.items():
        v = resolve_path(path, inputs)
        if v is None:
            # a missing object is fine only when nothing is demanded of it
            if not q.is_empty() or path.parent is None:
                return False
            continue
        if not quad_holds(q, v, lattice):
            return False
    return True
