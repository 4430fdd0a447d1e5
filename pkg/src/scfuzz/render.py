"""Class-definition listings for structured values, and their parser.

A listing is ordinary Python source: optional class definitions for
synthesized types, then assignments that build the value into ``obj``::

    class self_class(dict):
      index = 1.5
      def __index__(self): return self.index
    obj = self_class()
    obj['names'] = []

Listings double as the corpus/input file format, so :func:`parse_listing`
accepts everything :func:`render_value` emits.
"""

from __future__ import annotations

import ast

from .errors import ParseError
from .lattice import TOP, TypeLattice
from .values import StructuredValue, ValueFactory, is_method_key

INDENT = "  "


class _Renderer:
    def __init__(self):
        self.lines: list[str] = []
        self.n_classes = 0
        self.n_objects = 0

    def _fresh(self, top, stem, counter):
        if top:
            return stem
        n = getattr(self, counter) + 1
        setattr(self, counter, n)
        return f"{stem}_{n}"

    def expr(self, v: StructuredValue, top=False) -> str:
        """Expression evaluating to ``v``; emits helper lines as needed."""
        t = v.type
        if t.synthesized:
            return self.instance(v, top)
        if t.storage == "scalar":
            return _lit(v.payload)
        if t.name == TOP and not v.attrs:
            return "object()"
        items = [(k, self.expr(e)) for k, e in v.elements or ()]
        if t.storage == "mapping":
            return "{" + ", ".join(f"{_lit(k)}: {e}" for k, e in items) + "}"
        es = [e for _, e in items]
        if t.name == "tuple":
            return "(" + ", ".join(es) + ("," if len(es) == 1 else "") + ")"
        if t.name == "set":
            return "{" + ", ".join(es) + "}" if es else "set()"
        return "[" + ", ".join(es) + "]"

    def instance(self, v: StructuredValue, top: bool) -> str:
        t = v.type
        body = []
        taken = set(v.attrs)
        for key, attr in v.attrs.items():
            if attr.returns is not None:
                var = _member_name(key, taken)
                taken.add(var)
                body.append(f"{var} = {self.expr(attr.returns)}")
                body.append(f"def {key}(self): return self.{var}")
            else:
                body.append(f"{key} = {self.expr(attr)}")
        elements = [(k, self.expr(e)) for k, e in v.elements or ()]
        cls = self._fresh(top, "self_class", "n_classes")
        bases = ", ".join(_py_base(b) for b in t.bases)
        self.lines.append(f"class {cls}({bases}):")
        for line in body or ["pass"]:
            self.lines.append(INDENT + line)
        var = self._fresh(top, "obj", "n_objects")
        if t.name == "tuple" or "tuple" in t.bases:
            arg = "(" + ", ".join(e for _, e in elements) + ("," if len(elements) == 1 else "") + ")"
            self.lines.append(f"{var} = {cls}({arg})")
            return var
        arg = "" if v.payload is None else _lit(v.payload)
        self.lines.append(f"{var} = {cls}({arg})")
        for k, e in elements:
            if t.storage == "mapping":
                self.lines.append(f"{var}[{_lit(k)}] = {e}")
            elif "set" in t.bases:
                self.lines.append(f"{var}.add({e})")
            else:
                self.lines.append(f"{var}.append({e})")
        return var


def _lit(x) -> str:
    # repr(-1j) is "(-0-1j)", which reads back with the wrong zero sign
    if isinstance(x, complex):
        return f"complex({x.real!r}, {x.imag!r})"
    return repr(x)


def _py_base(name):
    return {"long": "int"}.get(name, name)


def _member_name(key, taken):
    stem = key.strip("_") or "value"
    name, n = stem, 0
    while name in taken:
        n += 1
        name = f"{stem}_{n}"
    return name


def render_value(value: StructuredValue) -> str:
    """Deterministic class-definition listing for ``value`` (ids omitted)."""
    r = _Renderer()
    e = r.expr(value, top=True)
    if e != "obj":
        r.lines.append(f"obj = {e}")
    return "\n".join(r.lines)


# -- parsing -----------------------------------------------------------

class _ListingReader:
    def __init__(self, factory: ValueFactory, lattice: TypeLattice):
        self.f = factory
        self.lattice = lattice
        self.classes: dict[str, tuple] = {}
        # name -> [desc, attrs, elements, payload]; frozen on first use
        self.pending: dict[str, list] = {}
        self.env: dict[str, StructuredValue] = {}
        self.last = None

    def fail(self, node, msg):
        raise ParseError(msg, getattr(node, "lineno", None),
                         getattr(node, "col_offset", -1) + 1)

    def run(self, tree: ast.Module):
        for stmt in tree.body:
            if isinstance(stmt, ast.ClassDef):
                self.classdef(stmt)
            elif isinstance(stmt, ast.Assign) and len(stmt.targets) == 1:
                self.assign(stmt)
            elif isinstance(stmt, ast.Expr) and isinstance(stmt.value, ast.Call):
                self.mutate_call(stmt.value)
            else:
                self.fail(stmt, "unsupported statement in value listing")
        if self.last is None:
            raise ParseError("listing assigns no value")
        return self.value(self.last)

    def classdef(self, node: ast.ClassDef):
        bases = []
        for b in node.bases:
            if not isinstance(b, ast.Name):
                self.fail(b, "class bases must be plain names")
            if b.id in self.classes:
                self.fail(b, "subclassing a listing class is not supported")
            bases.append(b.id)
        variables, methods, members = {}, {}, []
        for item in node.body:
            if isinstance(item, ast.Pass):
                continue
            if (isinstance(item, ast.Assign) and len(item.targets) == 1
                    and isinstance(item.targets[0], ast.Name)):
                variables[item.targets[0].id] = item.value
                members.append(item.targets[0].id)
            elif isinstance(item, ast.FunctionDef):
                ret = item.body[-1] if item.body else None
                if not (len(item.body) == 1 and isinstance(ret, ast.Return)
                        and isinstance(ret.value, ast.Attribute)
                        and isinstance(ret.value.value, ast.Name)
                        and ret.value.value.id == "self"):
                    self.fail(item, "methods must be 'return self.<member>'")
                methods[item.name] = ret.value.attr
                members.append(item.name)
            else:
                self.fail(item, "unsupported class body statement")
        try:
            desc = self.lattice.synthesize(bases)
        except Exception as e:
            self.fail(node, str(e))
        returned = set(methods.values())
        attr_nodes = []
        for name in members:
            if name in methods:
                target = methods[name]
                if target not in variables:
                    self.fail(node, f"method {name} returns undefined member {target}")
                attr_nodes.append((name, True, variables[target]))
            elif name not in returned:
                attr_nodes.append((name, False, variables[name]))
        self.classes[node.name] = (desc, attr_nodes)

    def value(self, name):
        """Materialize a pending instance the first time it is used."""
        if name in self.pending:
            desc, attrs, elements, payload = self.pending.pop(name)
            self.env[name] = self.f.make(desc, attrs, elements, payload)
        return self.env[name]

    def assign(self, node: ast.Assign):
        target = node.targets[0]
        if isinstance(target, ast.Name):
            self.pending.pop(target.id, None)
            v = node.value
            if (isinstance(v, ast.Call) and isinstance(v.func, ast.Name)
                    and v.func.id in self.classes):
                self.pending[target.id] = self.instantiate(v)
            else:
                self.env[target.id] = self.eval(v)
            self.last = target.id
        elif isinstance(target, ast.Subscript) and isinstance(target.value, ast.Name):
            slot = self._pending(target.value)
            key = self.literal(target.slice)
            item = self.eval(node.value)
            elements = slot[2]
            for i, (k, _) in enumerate(elements):
                if k == key and type(k) is type(key):
                    elements[i] = (key, item)
                    break
            else:
                elements.append((key, item))
        else:
            self.fail(node, "unsupported assignment target")

    def _pending(self, name_node):
        if name_node.id not in self.pending:
            self.fail(name_node, f"{name_node.id} is not a mutable listing instance")
        return self.pending[name_node.id]

    def mutate_call(self, call: ast.Call):
        func = call.func
        if not (isinstance(func, ast.Attribute) and isinstance(func.value, ast.Name)
                and func.attr in ("append", "add") and len(call.args) == 1):
            self.fail(call, "only obj.append(x) / obj.add(x) calls are allowed")
        slot = self._pending(func.value)
        elements = slot[2]
        elements.append((len(elements), self.eval(call.args[0])))

    def instantiate(self, call: ast.Call):
        desc, attr_nodes = self.classes[call.func.id]
        attrs = {}
        for name, is_method, node in attr_nodes:
            v = self.eval(node)
            attrs[name] = self.f.method(v) if is_method else v
        payload, elements = None, []
        if call.args:
            if len(call.args) > 1 or call.keywords:
                self.fail(call, "constructors take at most one argument")
            arg = self.eval(call.args[0])
            if desc.storage == "scalar":
                payload = arg.payload
            elif desc.is_collection and arg.elements is not None:
                elements = list(arg.elements)
            else:
                self.fail(call, "constructor argument does not fit the base type")
        return [desc, attrs, elements, payload]

    def literal(self, node):
        try:
            if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                    and node.func.id == "complex" and not node.keywords
                    and len(node.args) == 2):
                re_, im = (ast.literal_eval(a) for a in node.args)
                if not all(isinstance(x, float) for x in (re_, im)):
                    raise ValueError
                return complex(re_, im)
            return ast.literal_eval(node)
        except ValueError:
            self.fail(node, "expected a literal")

    def eval(self, node) -> StructuredValue:
        if isinstance(node, ast.Name):
            if node.id in self.pending or node.id in self.env:
                # references copy, so no two paths share an identity
                return self.f.clone(self.value(node.id))
            self.fail(node, f"undefined name {node.id}")
        if isinstance(node, (ast.Constant, ast.UnaryOp, ast.BinOp)):
            return self.f.from_python(self.literal(node))
        if isinstance(node, ast.List):
            return self.f.collection("list", enumerate(map(self.eval, node.elts)))
        if isinstance(node, ast.Tuple):
            return self.f.collection("tuple", enumerate(map(self.eval, node.elts)))
        if isinstance(node, ast.Set):
            return self.f.collection("set", enumerate(map(self.eval, node.elts)))
        if isinstance(node, ast.Dict):
            return self.f.collection("dict", [
                (self.literal(k), self.eval(v)) for k, v in zip(node.keys, node.values)])
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name):
            if node.func.id == "complex":
                return self.f.from_python(self.literal(node))
            if node.func.id == "object" and not node.args:
                return self.f.obj()
            if node.func.id == "set" and not node.args:
                return self.f.collection("set")
            if node.func.id in self.classes:
                desc, attrs, elements, payload = self.instantiate(node)
                return self.f.make(desc, attrs, elements, payload)
        self.fail(node, "unsupported expression in value listing")


def parse_listing(text: str, factory: ValueFactory) -> StructuredValue:
    """Build a value from a listing produced by :func:`render_value`."""
    try:
        tree = ast.parse(text)
    except SyntaxError as e:
        raise ParseError(e.msg, e.lineno, e.offset) from None
    return _ListingReader(factory, factory.lattice).run(tree)


def split_blocks(text: str) -> list[str]:
    blocks, cur = [], []
    for line in text.splitlines():
        if line.strip():
            cur.append(line)
        elif cur:
            blocks.append("\n".join(cur))
            cur = []
    if cur:
        blocks.append("\n".join(cur))
    return blocks


__all__ = ["render_value", "parse_listing", "split_blocks", "is_method_key"]
