"""Surface syntax: tokenizer, parsers for types, expressions and source units, printer."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .core import (
    CLOSED, OPEN, TYPE, KindError, Node, Store, deref, dnf_node,
)


class ParseError(Exception):
    def __init__(self, msg, line=0, col=0):
        super().__init__(f"{line}:{col}: {msg}")
        self.line = line
        self.col = col


TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<tvar>'[A-Za-z_][A-Za-z0-9_]*)
  | (?P<fvar>\?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<rvar>@[A-Za-z_][A-Za-z0-9_]*)
  | (?P<num>-?[0-9]+)
  | (?P<string>"[^"\n]*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<sym>->|<=|>=|==|\.\.|[|&!(){},:.\\=])
""", re.VERBOSE)

TYPE_KEYWORDS = {"int", "str", "bool", "true", "false", "any", "none", "undef", "rec"}
STATEMENTS = {"def", "sub", "equiv", "constraint", "mono", "eval"}


@dataclass
class Tok:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list:
    out = []
    pos = 0
    line, col = 1, 1
    while pos < len(text):
        m = TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        s = m.group()
        if kind != "ws":
            out.append(Tok(kind, s, line, col))
        nl = s.count("\n")
        if nl:
            line += nl
            col = len(s) - s.rfind("\n")
        else:
            col += len(s)
        pos = m.end()
    out.append(Tok("eof", "", line, col))
    return out


class Parser:
    def __init__(self, store: Store, toks: list, recvars: Optional[dict] = None):
        self.s = store
        self.toks = toks
        self.i = 0
        self.recvars = dict(recvars or {})

    # -- helpers -----------------------------------------------------------
    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def peek(self, k=1) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text) -> bool:
        t = self.tok
        return t.text == text and t.kind in ("sym", "ident")

    def next(self) -> Tok:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text) -> Tok:
        if not self.at(text):
            self.fail(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.next()

    def fail(self, msg, tok=None):
        t = tok or self.tok
        raise ParseError(msg, t.line, t.col)

    def ident(self) -> str:
        t = self.tok
        if t.kind != "ident":
            self.fail(f"expected an identifier, found {t.text or 'end of input'!r}")
        self.i += 1
        return t.text

    def guard(self, fn, *args):
        t = self.tok
        try:
            return fn(*args)
        except KindError as e:
            raise KindError(f"{t.line}:{t.col}: {e}") from None

    # -- types -------------------------------------------------------------
    def type(self) -> Node:
        left = self.union()
        if self.at("->"):
            self.next()
            right = self.type()
            return self.guard(self.s.arrow, left, right)
        return left

    def union(self) -> Node:
        n = self.inter()
        while self.at("|") and not self._tail_ahead():
            self.next()
            rhs = self.inter()
            n = self.guard(self.s.or_, n, rhs)
        return n

    def _tail_ahead(self) -> bool:
        nxt = self.peek()
        return nxt.text == ".." or nxt.kind == "rvar"

    def inter(self) -> Node:
        n = self.negation()
        while self.at("&"):
            self.next()
            rhs = self.negation()
            n = self.guard(self.s.and_, n, rhs)
        return n

    def negation(self) -> Node:
        if self.at("!"):
            self.next()
            arg = self.negation()
            return self.guard(self.s.neg, arg)
        return self.atom()

    def atom(self) -> Node:
        t = self.tok
        s = self.s
        if t.kind == "tvar":
            self.next()
            return s.var(self.guard(s.tvar, t.text[1:]))
        if t.kind == "fvar":
            self.next()
            return s.var(self.guard(s.fvar, t.text[1:]))
        if t.kind == "rvar":
            self.fail("a row variable may only appear as a record tail")
        if self.at("("):
            self.next()
            n = self.type()
            self.expect(")")
            return n
        if self.at("{"):
            return self.record()
        if t.kind == "ident":
            word = t.text
            if word in ("int", "str", "bool", "true", "false"):
                self.next()
                return s.basic(word)
            if word == "any":
                self.next()
                return s.any
            if word == "none":
                self.next()
                return s.bot_type
            if word == "undef":
                self.next()
                return s.undef
            if word == "rec":
                self.next()
                name = self.ident()
                self.expect(".")
                ph = s.placeholder(TYPE)
                saved = self.recvars.get(name)
                self.recvars[name] = ph
                body = self.type()
                if saved is None:
                    del self.recvars[name]
                else:
                    self.recvars[name] = saved
                if body is ph:
                    self.fail("recursive type is not contractive", t)
                try:
                    return s.bind(ph, body)
                except Exception as e:
                    self.fail(str(e), t)
            if word in self.recvars:
                self.next()
                return self.recvars[word]
        self.fail(f"unexpected {t.text or 'end of input'!r} in type")

    def record(self) -> Node:
        self.expect("{")
        fields = {}
        tail = CLOSED
        if self.at(".."):
            self.next()
            self.expect("}")
            return self.s.record((), OPEN)
        while not self.at("}") and not self.at("|"):
            lt = self.tok
            label = self.ident()
            self.expect(":")
            if label in fields:
                self.fail(f"duplicate label {label}", lt)
            fields[label] = self.type()
            if self.at(","):
                self.next()
            elif not (self.at("}") or self.at("|")):
                self.fail("expected ',', '|' or '}' in record")
        if self.at("|"):
            self.next()
            if self.at(".."):
                self.next()
                tail = OPEN
            elif self.tok.kind == "rvar":
                name = self.next().text[1:]
                tail = self.guard(self.s.rvar, name, frozenset(fields))
            else:
                self.fail("expected '..' or a row variable after '|'")
        self.expect("}")
        return self.guard(self.s.record, fields, tail)

    # -- expressions -------------------------------------------------------
    def expr(self):
        from .typing import Abs
        if self.at("lam"):
            self.next()
            x = self.ident()
            self.expect(":")
            annot = self.type()
            self.expect(".")
            body = self.expr()
            return Abs(split_arrows(annot, self), x, body)
        return self.with_expr()

    def with_expr(self):
        from .typing import Ext
        e = self.app()
        while self.at("with"):
            self.next()
            label = self.ident()
            self.expect("=")
            rhs = self.app()
            e = Ext(e, label, rhs)
        return e

    def _starts_prim(self) -> bool:
        t = self.tok
        if t.kind in ("num", "string"):
            return True
        if t.kind == "ident":
            return t.text not in ("with", "lam") and t.text not in STATEMENTS
        return t.text in ("(", "{")

    def app(self):
        from .typing import App
        if not self._starts_prim():
            self.fail(f"unexpected {self.tok.text or 'end of input'!r} in expression")
        e = self.postfix()
        while self._starts_prim():
            e = App(e, self.postfix())
        return e

    def postfix(self):
        from .typing import Del, Sel
        e = self.prim()
        while self.at(".") or self.at("\\"):
            op = self.next().text
            label = self.ident()
            e = Sel(e, label) if op == "." else Del(e, label)
        return e

    def prim(self):
        from .typing import Const, EmptyRec, Name
        t = self.next()
        if t.kind == "num":
            return Const(int(t.text))
        if t.kind == "string":
            return Const(t.text[1:-1])
        if t.text == "true":
            return Const(True)
        if t.text == "false":
            return Const(False)
        if t.text == "(":
            if self.at(")"):
                self.fail("empty parentheses")
            e = self.expr()
            self.expect(")")
            return e
        if t.text == "{":
            self.expect("}")
            return EmptyRec()
        if t.kind == "ident":
            return Name(t.text)
        self.fail(f"unexpected {t.text!r} in expression", t)


def split_arrows(t: Node, parser=None) -> tuple:
    """Flatten an intersection of arrows into a list of (domain, codomain) pairs."""
    t = deref(t)
    if t.tag == "arrow":
        return ((t.args[0], t.args[1]),)
    if t.tag == "and":
        return split_arrows(t.args[0], parser) + split_arrows(t.args[1], parser)
    msg = "function annotation must be an intersection of arrows"
    if parser is not None:
        parser.fail(msg)
    raise ParseError(msg)


def parse_type(store: Store, text: str) -> Node:
    p = Parser(store, tokenize(text))
    n = p.type()
    if p.tok.kind != "eof":
        p.fail(f"unexpected {p.tok.text!r} after type")
    return n


def parse_expr(store: Store, text: str):
    p = Parser(store, tokenize(text))
    e = p.expr()
    if p.tok.kind != "eof":
        p.fail(f"unexpected {p.tok.text!r} after expression")
    return e


@dataclass
class Decl:
    name: str
    annot: Optional[Node]
    expr: object
    line: int = 0


@dataclass
class Query:
    kind: str  # "sub", "equiv", "constraint", "mono", "eval"
    args: tuple
    line: int = 0


@dataclass
class SourceUnit:
    declarations: list = field(default_factory=list)
    queries: list = field(default_factory=list)


def parse_unit(store: Store, text: str) -> SourceUnit:
    """Parse a ``.rlc`` file.

    Statements start with a keyword: ``def name [: type] = expr``,
    ``sub t1 <= t2``, ``equiv t1 == t2``, ``constraint t1 <= t2`` (or ``>=``),
    ``mono 'a @r ...`` and ``eval expr``.
    """
    p = Parser(store, tokenize(text))
    unit = SourceUnit()
    names = set()
    while p.tok.kind != "eof":
        t = p.tok
        if t.kind != "ident" or t.text not in STATEMENTS:
            p.fail(f"expected a statement keyword, found {t.text!r}")
        p.next()
        if t.text == "def":
            name = p.ident()
            if name in names:
                p.fail(f"duplicate definition {name}", t)
            names.add(name)
            annot = None
            if p.at(":"):
                p.next()
                annot = p.type()
            p.expect("=")
            unit.declarations.append(Decl(name, annot, p.expr(), t.line))
        elif t.text == "eval":
            unit.queries.append(Query("eval", (p.expr(),), t.line))
        elif t.text in ("sub", "equiv", "constraint"):
            lhs = p.type()
            allowed = {"sub": ("<=",), "equiv": ("==",), "constraint": ("<=", ">=")}[t.text]
            op = p.tok.text
            if op not in allowed:
                p.fail(f"expected {' or '.join(repr(a) for a in allowed)}")
            p.next()
            rhs = p.type()
            unit.queries.append(Query(t.text, (lhs, op, rhs), t.line))
        elif t.text == "mono":
            vs = []
            while p.tok.kind in ("tvar", "fvar", "rvar"):
                tk = p.next()
                tag = {"tvar": "type", "fvar": "field", "rvar": "row"}[tk.kind]
                v = store.lookup_var(tk.text[1:], tag)
                if v is None:
                    if tag == "row":
                        p.fail(f"row variable {tk.text} must be used before being declared monomorphic", tk)
                    v = store.tvar(tk.text[1:]) if tag == "type" else store.fvar(tk.text[1:])
                vs.append(v)
            unit.queries.append(Query("mono", tuple(vs), t.line))
    return unit


# -- printing ---------------------------------------------------------------

PREC_ARROW, PREC_UNION, PREC_INTER, PREC_NEG, PREC_ATOM = range(5)


def show(n: Node) -> str:
    return _Printer().run(n)


class _Printer:
    def __init__(self):
        self.names = {}
        self.active = set()
        self.used = set()
        self.counter = 0

    def run(self, n):
        return self.p(n, PREC_ARROW)

    def p(self, n: Node, prec: int) -> str:
        s = n.store
        if n.tag == "ph":
            if n.target is None:
                return "<unbound>"
            if n.id in self.active:
                self.used.add(n.id)
                return self.names[n.id]
            if n.id not in self.names:
                self.counter += 1
                self.names[n.id] = f"X{self.counter}"
            self.active.add(n.id)
            body = self.p(n.target, PREC_ARROW)
            self.active.discard(n.id)
            if n.id in self.used:
                return _paren(f"rec {self.names[n.id]}. {body}", prec > PREC_ARROW)
            return _paren(body, prec > PREC_ARROW) if _needs(n.target, prec) else body
        t = n.tag
        if n is s.any:
            return "any"
        if n is s.field_top:
            return _paren("any | undef", prec > PREC_UNION)
        if t == "bot":
            return "none" if n.kind.tag != "row" else "<none>"
        if t == "undef":
            return "undef"
        if t == "basic":
            return n.args[0]
        if t == "var":
            return repr(n.args[0])
        if t == "arrow":
            d = self.p(n.args[0], PREC_UNION)
            c = self.p(n.args[1], PREC_ARROW)
            return _paren(f"{d} -> {c}", prec > PREC_ARROW)
        if t == "or":
            a, b = n.args
            if {x.tag for x in (a, b)} == {"basic"} and {a.args[0], b.args[0]} == {"true", "false"}:
                return "bool"
            return _paren(f"{self.p(a, PREC_UNION)} | {self.p(b, PREC_UNION)}", prec > PREC_UNION)
        if t == "and":
            a, b = n.args
            return _paren(f"{self.p(a, PREC_INTER)} & {self.p(b, PREC_INTER)}", prec > PREC_INTER)
        if t == "not":
            return _paren("!" + self.p(n.args[0], PREC_NEG), prec > PREC_NEG)
        if t == "rec":
            return "{" + self.fields(n.fields, n.tail) + "}"
        if t == "row":
            return "<" + self.fields(n.fields, n.tail) + ">"
        if t == "rowx":
            body = ", ".join(f"{l}: {self.p(f, PREC_ARROW)}" for l, f in n.fields)
            return f"<{body} | {self.p(n.args[1], PREC_ARROW)}>"
        if t == "lift":
            if n.args[2] is None:
                return self.p(dnf_node(n), prec)
            return f"lift[{','.join(sorted(n.args[1]))}]({self.p(n.args[0], PREC_ARROW)})"
        return f"<{t}>"

    def fields(self, fields, tail) -> str:
        parts = [f"{l}: {self.p(f, PREC_ARROW)}" for l, f in fields]
        body = ", ".join(parts)
        if tail == CLOSED:
            return body
        tl = ".." if tail == OPEN else repr(tail)
        return f"{body} | {tl}" if body else f"| {tl}"


def _paren(s, cond):
    return f"({s})" if cond else s


def _needs(n, prec):
    return n.tag in ("or", "and", "not", "arrow") and prec > PREC_ARROW
