"""Parser for ``.nlib`` target programs (simulated native methods).

Grammar::

    program  := "method" NAME "(" [NAME ("," NAME)*] ")" block
    block    := "{" stmt* "}"
    stmt     := "if" cond block ["else" (block | if-stmt)]
              | NAME "=" extract "(" expr "," STRING ")"
              | "incref" expr | "decref" expr
              | "return" expr | "crash" | "abort" STRING
    extract  := "getattr" | "getattr_incref" | "invoke_incref"
    cond     := "typecheck" "(" expr "," NAME ["," "exact"] ")"
              | "hasattr" "(" expr "," STRING ["," "incref"] ")"
              | "eq" "(" expr "," literal ")"
    expr     := NAME | literal
    literal  := INT | FLOAT | STRING | BYTES | "true" | "false"

``#`` starts a comment.  Statements may share a line.
"""

from __future__ import annotations

import ast
import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import ParseError

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<bytes>b"(?:[^"\\\n]|\\.)*")
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<float>-?\d+\.\d*(?:[eE][-+]?\d+)?|-?\d+[eE][-+]?\d+)
  | (?P<int>-?\d+)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<punct>[{}(),=;])
""", re.VERBOSE)

EXTRACTORS = ("getattr", "getattr_incref", "invoke_incref")
KEYWORDS = {"method", "if", "else", "incref", "decref", "return", "crash",
            "abort", "typecheck", "hasattr", "eq", "true", "false", "exact",
            *EXTRACTORS}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    value: object
    line: int
    col: int


# -- AST ---------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class Lit:
    value: object


Expr = Union[Var, Lit]


@dataclass(frozen=True)
class TypeCheckCond:
    expr: Expr
    type_name: str
    exact: bool = False


@dataclass(frozen=True)
class HasAttrCond:
    expr: Expr
    key: str
    incref: bool = False


@dataclass(frozen=True)
class EqCond:
    expr: Expr
    literal: object


Cond = Union[TypeCheckCond, HasAttrCond, EqCond]


@dataclass(frozen=True)
class If:
    cond: Cond
    then: tuple
    orelse: tuple = ()


@dataclass(frozen=True)
class Extract:
    target: str
    op: str
    expr: Expr
    key: str


@dataclass(frozen=True)
class RefOp:
    delta: int
    expr: Expr


@dataclass(frozen=True)
class Return:
    expr: Expr


@dataclass(frozen=True)
class Crash:
    pass


@dataclass(frozen=True)
class Abort:
    message: str


TERMINAL = (Return, Crash, Abort)


@dataclass(frozen=True)
class TargetProgram:
    name: str
    params: tuple[str, ...]
    body: tuple
    literals: tuple = field(default=())
    source: str = ""

    def path_count(self) -> int:
        return _count_paths(list(self.body))

    def type_names(self) -> set[str]:
        out = set()
        for node in _walk(self.body):
            if isinstance(node, If) and isinstance(node.cond, TypeCheckCond):
                out.add(node.cond.type_name)
        return out


def _walk(stmts):
    for s in stmts:
        yield s
        if isinstance(s, If):
            yield from _walk(s.then)
            yield from _walk(s.orelse)


def _count_paths(stmts: list) -> int:
    for i, s in enumerate(stmts):
        if isinstance(s, If):
            rest = stmts[i + 1:]
            return (_count_paths(list(s.then) + rest)
                    + _count_paths(list(s.orelse) + rest))
        if isinstance(s, TERMINAL):
            return 1
    return 1


# -- parser ------------------------------------------------------------

def _unescape(text):
    return ast.literal_eval(text)


def tokenize(text: str) -> list[Token]:
    out, pos, line, line_start = [], 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        tok = m.group(kind)
        if kind != "ws":
            value = tok
            if kind in ("string", "bytes"):
                value = _unescape(tok)
            elif kind == "int":
                value = int(tok)
            elif kind == "float":
                value = float(tok)
            out.append(Token(kind, tok, value, line, col))
        nl = tok.count("\n")
        if nl:
            line += nl
            line_start = m.start() + tok.rindex("\n") + 1
        pos = m.end()
    out.append(Token("eof", "", None, line, pos - line_start + 1))
    return out


class _Parser:
    def __init__(self, text):
        self.toks = tokenize(text)
        self.i = 0
        self.literals: list = []

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        raise ParseError(msg, tok.line, tok.col)

    def take(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def accept(self, text) -> bool:
        if self.tok.text == text and self.tok.kind in ("punct", "name"):
            self.i += 1
            return True
        return False

    def expect(self, text) -> Token:
        if not (self.tok.text == text and self.tok.kind in ("punct", "name")):
            shown = self.tok.text or "end of input"
            self.error(f"expected {text!r}, found {shown!r}")
        return self.take()

    def name(self, what="name") -> Token:
        if self.tok.kind != "name" or self.tok.text in KEYWORDS:
            self.error(f"expected {what}, found {self.tok.text or 'end of input'!r}")
        return self.take()

    def string(self) -> str:
        if self.tok.kind != "string":
            self.error("expected a string literal")
        value = self.take().value
        self.literals.append(value)
        return value

    def key(self) -> str:
        tok = self.tok
        key = self.string()
        if not key or re.search(r"\s", key):
            self.error("attribute keys must be nonempty and contain no whitespace", tok)
        if not key.startswith("[") and ("." in key or "[" in key):
            self.error("plain attribute keys cannot contain '.' or '['", tok)
        return key

    def literal(self):
        tok = self.tok
        if tok.kind in ("int", "float", "string", "bytes"):
            self.take()
            self.literals.append(tok.value)
            return tok.value
        if tok.kind == "name" and tok.text in ("true", "false"):
            self.take()
            self.literals.append(tok.text == "true")
            return tok.text == "true"
        self.error(f"expected a literal, found {tok.text or 'end of input'!r}")

    def expr(self) -> Expr:
        tok = self.tok
        if tok.kind == "name" and tok.text not in ("true", "false"):
            t = self.name("variable")
            return Var(t.text, t.line, t.col)
        return Lit(self.literal())

    def program(self) -> TargetProgram:
        self.expect("method")
        name = self.name("method name").text
        self.expect("(")
        params = []
        if not self.accept(")"):
            while True:
                t = self.name("parameter")
                if t.text in params:
                    self.error(f"duplicate parameter {t.text!r}", t)
                params.append(t.text)
                if self.accept(")"):
                    break
                self.expect(",")
        body = self.block()
        if self.tok.kind != "eof":
            self.error(f"unexpected {self.tok.text!r} after method body")
        return TargetProgram(name, tuple(params), body)

    def block(self) -> tuple:
        self.expect("{")
        out = []
        while not self.accept("}"):
            if self.tok.kind == "eof":
                self.error("unterminated block")
            if self.accept(";"):
                continue
            out.append(self.stmt())
        return tuple(out)

    def stmt(self):
        tok = self.tok
        if self.accept("if"):
            return self.if_rest()
        if self.accept("incref"):
            return RefOp(+1, self.expr())
        if self.accept("decref"):
            return RefOp(-1, self.expr())
        if self.accept("return"):
            return Return(self.expr())
        if self.accept("crash"):
            return Crash()
        if self.accept("abort"):
            return Abort(self.string())
        if tok.kind == "name" and tok.text not in KEYWORDS:
            target = self.take().text
            self.expect("=")
            op = self.tok.text
            if op not in EXTRACTORS:
                self.error("expected getattr, getattr_incref or invoke_incref")
            self.take()
            self.expect("(")
            e = self.expr()
            self.expect(",")
            key = self.key()
            self.expect(")")
            return Extract(target, op, e, key)
        self.error(f"unexpected {tok.text or 'end of input'!r}")

    def if_rest(self) -> If:
        cond = self.cond()
        then = self.block()
        orelse = ()
        if self.accept("else"):
            if self.accept("if"):
                orelse = (self.if_rest(),)
            else:
                orelse = self.block()
        return If(cond, then, orelse)

    def cond(self) -> Cond:
        if self.accept("typecheck"):
            self.expect("(")
            e = self.expr()
            self.expect(",")
            t = self.name("type name").text
            exact = False
            if self.accept(","):
                self.expect("exact")
                exact = True
            self.expect(")")
            return TypeCheckCond(e, t, exact)
        if self.accept("hasattr"):
            self.expect("(")
            e = self.expr()
            self.expect(",")
            key = self.key()
            incref = False
            if self.accept(","):
                self.expect("incref")
                incref = True
            self.expect(")")
            return HasAttrCond(e, key, incref)
        if self.accept("eq"):
            self.expect("(")
            e = self.expr()
            self.expect(",")
            lit = self.literal()
            self.expect(")")
            return EqCond(e, lit)
        self.error("expected typecheck(...), hasattr(...) or eq(...)")


def _cond_expr(c):
    return c.expr


def _check_defined(stmts, defined: frozenset, params) -> Optional[frozenset]:
    """Definite-assignment check; returns names defined after ``stmts``
    or ``None`` when every path through them terminates."""

    def use(e):
        if isinstance(e, Var) and e.name not in defined:
            what = "unknown parameter or unassigned variable"
            raise ParseError(f"{what} {e.name!r} used before assignment", e.line, e.col)

    for s in stmts:
        if isinstance(s, If):
            use(_cond_expr(s.cond))
            a = _check_defined(s.then, defined, params)
            b = _check_defined(s.orelse, defined, params)
            if a is None and b is None:
                return None
            defined = a if b is None else b if a is None else a & b
        elif isinstance(s, Extract):
            use(s.expr)
            if s.target in params:
                raise ParseError(f"cannot assign to parameter {s.target!r}")
            defined = defined | {s.target}
        elif isinstance(s, (RefOp, Return)):
            use(s.expr)
            if isinstance(s, Return):
                return None
        elif isinstance(s, TERMINAL):
            return None
    return defined


def parse_program(text: str) -> TargetProgram:
    p = _Parser(text)
    prog = p.program()
    _check_defined(prog.body, frozenset(prog.params), set(prog.params))
    return TargetProgram(prog.name, prog.params, prog.body,
                         tuple(p.literals), text)


def collect_literals(program: TargetProgram) -> set:
    """Every literal token of the source, typed (``True`` and ``1`` differ)."""
    return {(type(v).__name__, v) for v in program.literals}
