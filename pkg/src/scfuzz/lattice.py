"""Type lattice: built-in types, inheritance edges, intrinsic attributes.

The default lattice mirrors the slice of CPython's type hierarchy that the
type-check and attribute-extraction APIs can observe.  Synthesized types
(classes built by the generator) are not registered in the lattice; they are
``TypeDescriptor`` objects whose ``bases`` name registered types.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable

from .errors import ConfigError

KINDS = ("scalar", "sequence", "mapping", "synthesized", "opaque")
TOP = "object"

# Python spelling of lattice names, used when rendering class listings.
PY_NAMES = {"long": "int"}
ALIASES = {"int": "long"}


@dataclass(frozen=True)
class TypeDescriptor:
    name: str
    kind: str
    bases: tuple[str, ...] = ()
    # Resolved by the lattice at creation time so values can answer
    # attribute lookups without a lattice in hand.
    intrinsic_attrs: frozenset[str] = frozenset()
    storage: str = "opaque"

    @property
    def synthesized(self) -> bool:
        return self.kind == "synthesized"

    @property
    def is_collection(self) -> bool:
        return self.storage in ("sequence", "mapping")


@dataclass
class TypeLattice:
    types: dict[str, TypeDescriptor]
    parents: dict[str, tuple[str, ...]]
    intrinsic_attrs: dict[str, frozenset[str]] = field(default_factory=dict)
    conflicts: frozenset[frozenset[str]] = frozenset()

    def __post_init__(self):
        self._ancestors: dict[str, frozenset[str]] = {}
        self.validate()
        self.types = {
            name: self._resolve(desc) for name, desc in self.types.items()
        }

    # -- construction -------------------------------------------------

    def validate(self):
        if TOP not in self.types:
            raise ConfigError("lattice has no top type 'object'")
        for name, desc in self.types.items():
            if desc.kind not in KINDS:
                raise ConfigError(f"type {name!r}: unknown kind {desc.kind!r}")
            ps = self.parents.get(name, ())
            if name == TOP:
                if ps:
                    raise ConfigError("'object' cannot have parents")
                continue
            if not ps:
                raise ConfigError(f"type {name!r} has no parent")
            for p in ps:
                if p not in self.types:
                    raise ConfigError(f"type {name!r}: unknown parent {p!r}")
        for name in self.parents:
            if name not in self.types:
                raise ConfigError(f"edge from unknown type {name!r}")
        for name in self.intrinsic_attrs:
            if name not in self.types:
                raise ConfigError(f"attributes for unknown type {name!r}")
        for pair in self.conflicts:
            if len(pair) != 2:
                raise ConfigError(f"reflexive conflict pair {sorted(pair)}")
            for t in pair:
                if t not in self.types:
                    raise ConfigError(f"conflict names unknown type {t!r}")
        # cycle detection doubles as ancestor precomputation
        for name in sorted(self.types):
            self._ancestors_of(name, ())
        for name, desc in self.types.items():
            if desc.kind == "synthesized":
                self._check_bases(desc.bases or self.parents[name])

    def _ancestors_of(self, name, stack):
        if name in self._ancestors:
            return self._ancestors[name]
        if name in stack:
            cycle = " -> ".join(stack + (name,))
            raise ConfigError(f"inheritance cycle: {cycle}")
        out = {name}
        for p in self.parents.get(name, ()):
            out |= self._ancestors_of(p, stack + (name,))
        self._ancestors[name] = frozenset(out)
        return self._ancestors[name]

    def _storage_of(self, names):
        kinds = set()
        for n in names:
            for a in self._ancestors[n]:
                k = self.types[a].kind
                if k in ("sequence", "mapping", "scalar"):
                    kinds.add(k)
        for k in ("mapping", "sequence", "scalar"):
            if k in kinds:
                return k
        return "opaque"

    def _resolve(self, desc):
        attrs = set()
        for a in self._ancestors[desc.name]:
            attrs |= self.intrinsic_attrs.get(a, frozenset())
        return TypeDescriptor(
            name=desc.name,
            kind=desc.kind,
            bases=desc.bases or self.parents.get(desc.name, ()),
            intrinsic_attrs=frozenset(attrs),
            storage=self._storage_of([desc.name]),
        )

    # -- queries ------------------------------------------------------

    def __contains__(self, name):
        return name in self.types

    def descriptor(self, name: str) -> TypeDescriptor:
        name = ALIASES.get(name, name) if name not in self.types else name
        try:
            return self.types[name]
        except KeyError:
            raise ConfigError(f"unknown type name {name!r}") from None

    def ancestors(self, t) -> frozenset[str]:
        """All registered types ``t`` is a subtype of (reflexive)."""
        if isinstance(t, TypeDescriptor):
            if t.synthesized and t.name not in self.types:
                out = set()
                for b in t.bases:
                    out |= self.ancestors(b)
                return frozenset(out)
            t = t.name
        return self._ancestors[self.descriptor(t).name]

    def is_subtype(self, t1, t2) -> bool:
        """``t1 ⪯ t2``; ``t1`` may be a synthesized descriptor."""
        return self.descriptor(t2).name in self.ancestors(t1)

    @cached_property
    def builtins(self) -> tuple[str, ...]:
        return tuple(
            sorted(n for n, d in self.types.items() if d.kind != "synthesized")
        )

    def conflicting(self, a: str, b: str) -> bool:
        """Whether a class may not inherit from both ``a`` and ``b``."""
        for x in self.ancestors(a):
            for y in self.ancestors(b):
                if x != y and frozenset((x, y)) in self.conflicts:
                    return True
        return False

    def _check_bases(self, bases):
        for i, a in enumerate(bases):
            for b in bases[i + 1:]:
                if self.conflicting(a, b):
                    raise ConfigError(f"bases {a!r} and {b!r} conflict")

    def synthesize(self, bases: Iterable[str], name="self_class") -> TypeDescriptor:
        bases = tuple(self.descriptor(b).name for b in bases)
        if not bases:
            raise ConfigError("a synthesized type needs at least one base")
        self._check_bases(bases)
        attrs = set()
        for b in bases:
            attrs |= self.types[b].intrinsic_attrs
        return TypeDescriptor(
            name=name,
            kind="synthesized",
            bases=bases,
            intrinsic_attrs=frozenset(attrs),
            storage=self._storage_of(bases),
        )

    def python_name(self, name: str) -> str:
        return PY_NAMES.get(name, name)

    # -- extension ----------------------------------------------------

    def extended(self, lines: Iterable[str]) -> TypeLattice:
        """Return a new lattice with override-file directives applied."""
        types = {n: TypeDescriptor(d.name, d.kind, d.bases if d.synthesized else ())
                 for n, d in self.types.items()}
        parents = dict(self.parents)
        attrs = {n: set(a) for n, a in self.intrinsic_attrs.items()}
        conflicts = set(self.conflicts)
        for lineno, raw in enumerate(lines, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            words = line.split()
            head = words[0]
            try:
                if head == "type":
                    # type <name> <kind> : <p1>[,<p2>...]
                    rest = line[len("type"):].strip()
                    left, _, right = rest.partition(":")
                    name, kind = left.split()
                    ps = tuple(p.strip() for p in right.split(",") if p.strip())
                    ps = tuple(ALIASES.get(p, p) for p in ps)
                    types[name] = TypeDescriptor(
                        name, kind, ps if kind == "synthesized" else ())
                    parents[name] = ps
                elif head == "attr" and len(words) == 3:
                    t = ALIASES.get(words[1], words[1])
                    attrs.setdefault(t, set()).add(words[2])
                elif head == "conflict" and len(words) == 3:
                    a, b = (ALIASES.get(w, w) for w in words[1:])
                    if a == b:
                        raise ConfigError(f"type {a!r} cannot conflict with itself")
                    conflicts.add(frozenset((a, b)))
                else:
                    raise ValueError(line)
            except ValueError:
                raise ConfigError(
                    f"lattice file line {lineno}: cannot parse {raw.strip()!r}"
                ) from None
        return TypeLattice(
            types=types,
            parents=parents,
            intrinsic_attrs={n: frozenset(a) for n, a in attrs.items()},
            conflicts=frozenset(conflicts),
        )


_LAYOUT_TYPES = ("long", "float", "str", "bytes", "list", "tuple", "dict", "set")


def default_lattice() -> TypeLattice:
    kinds = {
        "object": "opaque",
        "long": "scalar",
        "bool": "scalar",
        "float": "scalar",
        "complex": "scalar",
        "str": "scalar",
        "bytes": "scalar",
        "list": "sequence",
        "tuple": "sequence",
        "dict": "mapping",
        "set": "sequence",
    }
    parents = {n: ((TOP,) if n != TOP else ()) for n in kinds}
    parents["bool"] = ("long",)
    container = {"__len__", "__contains__", "__iter__"}
    attrs = {
        "long": {"__index__", "__float__", "__int__"},
        "float": {"__float__", "__int__"},
        "complex": {"__complex__"},
        "str": container | {"__getitem__"},
        "bytes": container | {"__getitem__"},
        "list": container | {"__getitem__"},
        "tuple": container | {"__getitem__"},
        "dict": container | {"__getitem__", "keys"},
        "set": set(container),
    }
    conflicts = {
        frozenset((a, b))
        for i, a in enumerate(_LAYOUT_TYPES)
        for b in _LAYOUT_TYPES[i + 1:]
    }
    return TypeLattice(
        types={n: TypeDescriptor(n, k) for n, k in kinds.items()},
        parents=parents,
        intrinsic_attrs={n: frozenset(a) for n, a in attrs.items()},
        conflicts=frozenset(conflicts),
    )


def load_lattice(path: str | Path | None) -> TypeLattice:
    base = default_lattice()
    if path is None:
        return base
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read lattice file {path}: {e}") from None
    return base.extended(text.splitlines())


def is_subtype(lattice: TypeLattice, t1, t2) -> bool:
    return lattice.is_subtype(t1, t2)
