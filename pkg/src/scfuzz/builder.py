"""Build the path SC of a trace and, alongside it, the reversed SCs.

Records are matched to inputs by identity id.  The first scan applies the
rules to records on argument ids; each successful attribute extraction binds
the returned id to the attribute's path, and later scans pick up records on
those ids until a scan binds nothing new.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Sequence

from .constraints import (ObjectPath, Quad, StructureConstraint, canonical_key,
                          validate_quad)
from .errors import BuildError
from .lattice import TypeLattice
from .trace import ApiCallRecord


@dataclass
class BuildResult:
    sc: StructureConstraint
    reverses: list[StructureConstraint] = field(default_factory=list)
    applications: int = 0
    dropped: int = 0


class _Working:
    """Mutable SC under construction."""

    def __init__(self, roots: Mapping[str, int]):
        if len(set(roots.values())) != len(roots):
            raise BuildError("root ids must be distinct")
        base = StructureConstraint.for_roots(roots)
        self.mappings = dict(base.mappings)
        self.bindings = dict(base.bindings)

    def freeze(self, mappings=None) -> StructureConstraint:
        return StructureConstraint(dict(mappings or self.mappings), dict(self.bindings))

    def bind(self, obj_id: int, path: ObjectPath):
        known = self.bindings.get(obj_id)
        if known is not None and known != path:
            raise BuildError(f"id {obj_id} bound to both {known.text} and {path.text}")
        self.bindings[obj_id] = path


def _update(mappings, path, **sets):
    mappings[path] = mappings.get(path, Quad()).add(**sets)


def _opposites(rec: ApiCallRecord, path: ObjectPath):
    """Edits (as functions on a mappings dict) for each reversed branch."""
    t = rec.val_act
    if rec.is_type_check:
        if rec.exact:
            if rec.ret:
                def subtype_not_exact(m):
                    _update(m, path, t_bt=[t], forbidden_exact=[t])

                def not_subtype(m):
                    _update(m, path, t_nbt=[t])
                return [subtype_not_exact, not_subtype]

            def exactly(m):
                m[path] = replace(m[path].add(t_bt=[t]), exact_type=t)
            return [exactly]

        def flip_type(m):
            _update(m, path, **{("t_nbt" if rec.ret else "t_bt"): [t]})
        return [flip_type]

    child = path.child(t)

    def flip_attr(m):
        m.setdefault(child, Quad())
        _update(m, path, **{("a_nbt" if rec.ret is not None else "a_bt"): [t]})
    return [flip_attr]


def _apply(w: _Working, rec: ApiCallRecord, path: ObjectPath) -> int:
    """Apply the original-direction rule; returns constraints added."""
    t = rec.val_act
    m = w.mappings
    if rec.is_type_check:
        if rec.exact and rec.ret:
            m[path] = replace(m[path].add(t_bt=[t]), exact_type=t)
            return 2
        if rec.exact:
            _update(m, path, forbidden_exact=[t])
        elif rec.ret:
            _update(m, path, t_bt=[t])
        else:
            _update(m, path, t_nbt=[t])
        return 1
    child = path.child(t)
    m.setdefault(child, Quad())
    if rec.ret is not None:
        w.bind(rec.ret, child)
        _update(m, path, a_bt=[t])
    else:
        _update(m, path, a_nbt=[t])
    return 1


def _valid(mappings, lattice) -> bool:
    return all(validate_quad(q, lattice) for q in mappings.values())


def build_with_reverses(trace: Sequence[ApiCallRecord], roots: Mapping[str, int],
                        seen_keys: Optional[set] = None,
                        lattice: Optional[TypeLattice] = None,
                        reverses: bool = True) -> BuildResult:
    """Build the original SC and the reversed SCs of ``trace``.

    ``seen_keys`` is shared across calls; a reversed SC whose canonical key
    is already in it is dropped, otherwise its key is added.
    """
    if lattice is None:
        from .lattice import default_lattice
        lattice = default_lattice()
    if seen_keys is None:
        seen_keys = set()
    w = _Working(roots)
    out = BuildResult(sc=None)
    done = [False] * len(trace)
    root_ids = set(roots.values())
    first = True
    while True:
        bound_before = len(w.bindings)
        for i, rec in enumerate(trace):
            if done[i]:
                continue
            if first and rec.obj_id not in root_ids:
                continue
            path = w.bindings.get(rec.obj_id)
            if path is None:
                continue
            done[i] = True
            if reverses:
                for edit in _opposites(rec, path):
                    snap = dict(w.mappings)
                    edit(snap)
                    if not _valid(snap, lattice):
                        out.dropped += 1
                        continue
                    rev = StructureConstraint(snap, dict(w.bindings))
                    key = canonical_key(rev)
                    if key in seen_keys:
                        continue
                    seen_keys.add(key)
                    out.reverses.append(rev)
            out.applications += _apply(w, rec, path)
            if not validate_quad(w.mappings[path], lattice):
                raise BuildError(f"trace contradicts itself at record {i + 1} "
                                 f"on {path.text}")
        if not first and len(w.bindings) == bound_before:
            break
        first = False
    out.sc = w.freeze()
    return out


def build_sc(trace: Iterable[ApiCallRecord], roots: Mapping[str, int],
             lattice: Optional[TypeLattice] = None) -> StructureConstraint:
    return build_with_reverses(list(trace), roots, lattice=lattice, reverses=False).sc
