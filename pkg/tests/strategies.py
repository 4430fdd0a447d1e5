"""Hypothesis strategies shared by the property tests."""

from __future__ import annotations

import itertools

from hypothesis import strategies as st

from scfuzz.lattice import TypeDescriptor, TypeLattice, default_lattice
from scfuzz.trace import attr_get, type_check
from scfuzz.values import StructuredValue, ValueFactory

LATTICE = default_lattice()
BUILTINS = LATTICE.builtins

ints = st.integers(min_value=-1000, max_value=1000)
floats = st.floats(allow_nan=False, allow_infinity=False, width=32)
texts = st.text(alphabet="abcxyz_ 'é", max_size=6)
byte_strings = st.binary(max_size=4)

# payload strategy per scalar lattice type
PAYLOADS = {
    "long": ints,
    "bool": st.booleans(),
    "float": floats,
    "complex": st.builds(complex, st.integers(-5, 5), st.integers(-5, 5)),
    "str": texts,
    "bytes": byte_strings,
}

scalar_payloads = st.one_of(*PAYLOADS.values())

member_names = st.from_regex(r"[a-z][a-z0-9]{0,4}", fullmatch=True)
method_names = st.sampled_from(["__index__", "__len__", "__float__", "__call__", "__foo__"])

# identifier-safe attribute keys for traces and programs
trace_keys = st.one_of(
    st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,8}", fullmatch=True),
    st.integers(0, 20).map(lambda i: f"[{i}]"),
    st.from_regex(r"[a-z]{1,5}", fullmatch=True).map(lambda k: f"['{k}']"),
)


def _conflict_free_bases():
    singles = [(b,) for b in BUILTINS if b != "object"]
    pairs = [(a, b) for a, b in itertools.combinations(sorted(BUILTINS), 2)
             if "object" not in (a, b) and not LATTICE.conflicting(a, b)
             and not LATTICE.is_subtype(a, b) and not LATTICE.is_subtype(b, a)]
    return singles + pairs


BASE_CHOICES = _conflict_free_bases()


@st.composite
def values(draw, factory: ValueFactory | None = None, depth: int = 2):
    """Structured values: scalars, collections and synthesized classes."""
    f = factory or ValueFactory(LATTICE)
    kinds = ["scalar"] if depth == 0 else ["scalar", "list", "tuple", "set", "dict", "class"]
    kind = draw(st.sampled_from(kinds))
    if kind == "scalar":
        t = draw(st.sampled_from(sorted(PAYLOADS)))
        return f.scalar(t, draw(PAYLOADS[t]))
    if kind in ("list", "tuple", "set"):
        n = draw(st.integers(0, 2))
        items = [draw(values(f, depth - 1)) for _ in range(n)]
        return f.collection(kind, enumerate(items))
    if kind == "dict":
        keys = draw(st.lists(st.one_of(ints, texts), max_size=2,
                             unique_by=lambda k: (type(k), k)))
        return f.collection("dict", [(k, draw(values(f, depth - 1))) for k in keys])
    bases = draw(st.sampled_from(BASE_CHOICES))
    desc = LATTICE.synthesize(bases)
    attrs = {}
    for name in draw(st.lists(st.one_of(member_names, method_names), max_size=2, unique=True)):
        child = draw(values(f, depth - 1))
        attrs[name] = f.method(child) if name.startswith("__") else child
    payload = None
    elements = None
    if desc.storage == "scalar":
        scalar_bases = [b for b in bases if b in PAYLOADS]
        payload = draw(PAYLOADS[scalar_bases[0]]) if scalar_bases else None
    elif desc.storage == "mapping":
        keys = draw(st.lists(st.one_of(ints, texts), max_size=2,
                             unique_by=lambda k: (type(k), k)))
        elements = [(k, draw(values(f, depth - 1))) for k in keys]
    elif desc.storage == "sequence":
        elements = list(enumerate(draw(st.lists(values(f, depth - 1), max_size=2))))
    return f.make(desc, attrs, elements, payload)


@st.composite
def records(draw, ids=st.integers(0, 10**9)):
    if draw(st.booleans()):
        return type_check(draw(ids), draw(st.sampled_from(BUILTINS)),
                          draw(st.booleans()), draw(st.booleans()))
    ret = draw(st.one_of(st.none(), ids))
    return attr_get(draw(ids), draw(trace_keys), ret, draw(st.booleans()))


def sample_records(rng, n):
    """``n`` records from the same space as ``records``, drawn with ``rng``."""
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_"

    def key():
        kind = rng.randrange(3)
        if kind == 0:
            return rng.choice(letters) + "".join(
                rng.choice(letters + "0123456789") for _ in range(rng.randrange(9)))
        if kind == 1:
            return f"[{rng.randrange(21)}]"
        return "['" + "".join(rng.choice(letters[:26]) for _ in range(rng.randint(1, 5))) + "']"

    out = []
    for _ in range(n):
        obj = rng.randrange(10**9 + 1)
        if rng.random() < 0.5:
            out.append(type_check(obj, rng.choice(BUILTINS), rng.random() < 0.5,
                                  rng.random() < 0.5))
        else:
            ret = None if rng.random() < 0.5 else rng.randrange(10**9 + 1)
            out.append(attr_get(obj, key(), ret, rng.random() < 0.5))
    return out


@st.composite
def traces(draw, roots=(1000, 1001), max_len=12):
    """Random traces over the given root ids, consistent with some inputs.

    Every id stands for a hidden object (a built-in base, maybe subclassed);
    type checks answer from it and repeated lookups of one key agree.
    Attribute gets return fresh ids, so no id is bound to two paths.
    """
    known = list(roots)
    fresh = itertools.count(5000)
    hidden, lookups = {}, {}

    def obj_type(i):
        if i not in hidden:
            hidden[i] = (draw(st.sampled_from(BUILTINS)), draw(st.booleans()))
        return hidden[i]

    out = []
    for _ in range(draw(st.integers(0, max_len))):
        obj = draw(st.one_of(st.sampled_from(known), st.integers(9000, 9005)))
        if draw(st.booleans()):
            t = draw(st.sampled_from(BUILTINS))
            exact = draw(st.booleans())
            base, subclassed = obj_type(obj)
            ok = (base == t and not subclassed) if exact else LATTICE.is_subtype(base, t)
            out.append(type_check(obj, t, ok, exact))
        else:
            key = draw(st.sampled_from(["__index__", "names", "x", "[0]", "__len__"]))
            if (obj, key) not in lookups:
                ret = next(fresh) if draw(st.booleans()) else None
                lookups[obj, key] = ret
                if ret is not None:
                    known.append(ret)
            out.append(attr_get(obj, key, lookups[obj, key], draw(st.booleans())))
    return out


@st.composite
def lattices(draw):
    """Random valid lattices: a DAG under ``object`` with optional conflicts."""
    n = draw(st.integers(1, 7))
    names = [f"t{i}" for i in range(n)]
    types = {"object": TypeDescriptor("object", "opaque")}
    parents = {"object": ()}
    for i, name in enumerate(names):
        earlier = ["object"] + names[:i]
        ps = draw(st.lists(st.sampled_from(earlier), min_size=1, max_size=3, unique=True))
        types[name] = TypeDescriptor(name, draw(st.sampled_from(["scalar", "sequence", "opaque"])))
        parents[name] = tuple(ps)
    pairs = list(itertools.combinations(names, 2))
    conflicts = draw(st.lists(st.sampled_from(pairs), max_size=3, unique=True)) if pairs else []
    return TypeLattice(types, parents, {}, frozenset(frozenset(p) for p in conflicts))


# -- random target programs ----------------------------------------------

PROGRAM_KEYS = ["__index__", "__len__", "names", "x", "[0]", "[1]"]
EQ_LITERALS = ["0", "1", "1.5", '"abc"']
PROGRAM_TYPES = ["long", "bool", "float", "str", "list", "dict", "tuple", "object"]


@st.composite
def program_texts(draw, params=("a", "b"), depth=3):
    counter = itertools.count()

    def block(vars_, d):
        stmts = []
        for _ in range(draw(st.integers(0, 2))):
            choice = draw(st.sampled_from(["extract", "ref", "if"] if d > 0 else ["extract", "ref"]))
            v = draw(st.sampled_from(vars_))
            if choice == "extract":
                op = draw(st.sampled_from(["getattr", "getattr_incref", "invoke_incref"]))
                key = draw(st.sampled_from(PROGRAM_KEYS))
                target = f"v{next(counter)}"
                stmts.append(f'{target} = {op}({v}, "{key}")')
                vars_ = vars_ + [target]
            elif choice == "ref":
                stmts.append(f"{draw(st.sampled_from(['incref', 'decref']))} {v}")
            else:
                stmts.append(f"if {cond(v)} {{ {block(vars_, d - 1)} }} "
                             f"else {{ {block(vars_, d - 1)} }}")
        end = draw(st.sampled_from(["return", "crash", "abort", "none"]))
        if end == "return":
            stmts.append(f"return {draw(st.sampled_from(vars_))}")
        elif end == "crash":
            stmts.append("crash")
        elif end == "abort":
            stmts.append('abort "stop"')
        return " ".join(stmts)

    def cond(v):
        kind = draw(st.sampled_from(["tc", "tce", "has", "hasi", "eq"]))
        if kind == "tc":
            return f"typecheck({v}, {draw(st.sampled_from(PROGRAM_TYPES))})"
        if kind == "tce":
            return f"typecheck({v}, {draw(st.sampled_from(PROGRAM_TYPES))}, exact)"
        if kind in ("has", "hasi"):
            flag = ", incref" if kind == "hasi" else ""
            return f'hasattr({v}, "{draw(st.sampled_from(PROGRAM_KEYS))}"{flag})'
        return f"eq({v}, {draw(st.sampled_from(EQ_LITERALS))})"

    body = block(list(params), depth)
    return f"method rnd({', '.join(params)}) {{ {body} }}"


__all__ = ["LATTICE", "values", "records", "traces", "lattices", "program_texts",
           "scalar_payloads", "trace_keys", "StructuredValue"]
