"""Interpreter for target programs: emits the API-call trace and keeps the
reference-count ledger."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .dsl import (Abort, Crash, EqCond, Extract, HasAttrCond, If, Lit, RefOp,
                  Return, TargetProgram, TypeCheckCond, Var)
from .lattice import TypeLattice
from .trace import ApiCallRecord, attr_get, type_check
from .values import (StructuredValue, StubCache, ValueFactory, lookup_attr,
                     resolve_member)

RETURNED = "returned"
CRASHED = "crashed"
ABORTED = "aborted"


@dataclass
class ExecutionResult:
    trace: list[ApiCallRecord]
    outcome: str
    message: str = ""
    leaks: dict[int, int] = field(default_factory=dict)
    returned_id: Optional[int] = None
    ledger: dict[int, int] = field(default_factory=dict)


class _Abort(Exception):
    def __init__(self, message):
        self.message = message


class _Crash(Exception):
    pass


class _Return(Exception):
    def __init__(self, value):
        self.value = value


class _Frame:
    def __init__(self, program, inputs, lattice):
        self.lattice = lattice
        self.env: dict[str, Optional[StructuredValue]] = dict(zip(program.params, inputs))
        top = max((v.id for root in inputs for v in root.walk()), default=0)
        # locals and intrinsic stubs get ids above every input id
        self.alloc = itertools.count(top + 1).__next__
        self.stubs = StubCache(self.alloc)
        self.trace: list[ApiCallRecord] = []
        self.ledger: dict[int, int] = {}
        self.literals = ValueFactory(lattice, alloc=self.alloc)

    def value(self, e) -> StructuredValue:
        if isinstance(e, Lit):
            return self.literals.from_python(e.value)
        v = self.env[e.name]
        if v is None:
            raise _Abort(f"{e.name} is NULL")
        return v

    def bump(self, v: StructuredValue, delta: int):
        self.ledger[v.id] = self.ledger.get(v.id, 0) + delta

    def lookup(self, obj: StructuredValue, key: str):
        return lookup_attr(obj, key, self.stubs)

    def cond(self, c) -> bool:
        obj = self.value(c.expr)
        if isinstance(c, TypeCheckCond):
            if c.exact:
                ok = not obj.type.synthesized and obj.type.name == self.lattice.descriptor(c.type_name).name
            else:
                ok = self.lattice.is_subtype(obj.type, c.type_name)
            self.trace.append(type_check(obj.id, c.type_name, ok, c.exact))
            return ok
        if isinstance(c, HasAttrCond):
            attr = self.lookup(obj, c.key)
            ret = None if attr is None else resolve_member(attr)
            # the existence check releases whatever it looked up: no ledger change
            self.trace.append(attr_get(obj.id, c.key, None if ret is None else ret.id, c.incref))
            return attr is not None
        if isinstance(c, EqCond):
            return obj.payload is not None and obj.payload == c.literal
        raise TypeError(c)

    def extract(self, s: Extract):
        obj = self.value(s.expr)
        attr = self.lookup(obj, s.key)
        incref = s.op != "getattr"
        if s.op == "invoke_incref":
            if attr is None:
                self.trace.append(attr_get(obj.id, s.key, None, True))
                raise _Abort(f"'{s.key}' is not an attribute")
            if not attr.is_method:
                self.trace.append(attr_get(obj.id, s.key, attr.id, True))
                raise _Abort(f"'{s.key}' is not callable")
        result = None if attr is None else resolve_member(attr)
        self.trace.append(attr_get(obj.id, s.key, None if result is None else result.id, incref))
        if result is not None and incref:
            self.bump(result, +1)
        self.env[s.target] = result

    def run(self, stmts):
        for s in stmts:
            if isinstance(s, If):
                self.run(s.then if self.cond(s.cond) else s.orelse)
            elif isinstance(s, Extract):
                self.extract(s)
            elif isinstance(s, RefOp):
                self.bump(self.value(s.expr), s.delta)
            elif isinstance(s, Return):
                raise _Return(self.value(s.expr))
            elif isinstance(s, Crash):
                raise _Crash()
            elif isinstance(s, Abort):
                raise _Abort(s.message)
            else:
                raise TypeError(s)


def execute(program: TargetProgram, inputs: Sequence[StructuredValue],
            lattice: TypeLattice) -> ExecutionResult:
    """Run ``program`` once; ids of ``inputs`` must be pre-assigned."""
    if len(inputs) != len(program.params):
        raise ValueError(f"{program.name} takes {len(program.params)} inputs, "
                         f"got {len(inputs)}")
    f = _Frame(program, list(inputs), lattice)
    returned = None
    try:
        f.run(program.body)
    except _Return as r:
        returned = r.value
    except _Crash:
        return ExecutionResult(f.trace, CRASHED, "crash", ledger=f.ledger)
    except _Abort as a:
        return ExecutionResult(f.trace, ABORTED, a.message, ledger=f.ledger)
    rid = None if returned is None else returned.id
    leaks = {i: d for i, d in sorted(f.ledger.items()) if d > 0 and i != rid}
    return ExecutionResult(f.trace, RETURNED, "", leaks, rid, f.ledger)
