"""Recursive-descent parser for the coordinate expression language.

Grammar (``^`` binds tightest and is right-associative, then unary minus,
then ``* /``, then ``+ -``)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | 'pi' | coord | FUNC '(' expr ')' | '(' expr ')'
    coord  := 't' '[' INT ']' | 'x' '[' INT ']' | 'p' '[' INT ']' '[' INT ']'
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from ..errors import ArityError, DomainError, ExprSyntaxError, UnknownCoordinate
from . import dual

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<id>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()\[\],]))"
)

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


@dataclass(frozen=True)
class Token:
    kind: str  # 'num', 'id', an operator character, or 'end'
    text: str
    pos: int  # 0-based


def tokenize(text: str) -> list[Token]:
    tokens = []
    i = 0
    while i < len(text):
        if text[i].isspace():
            i += 1
            continue
        mt = _TOKEN.match(text, i)
        if not mt or mt.end() == i:
            raise ExprSyntaxError(text, i + 1, {"number", "identifier", "operator"}, text[i])
        start = mt.start(mt.lastgroup)
        kind = mt.lastgroup
        tok = mt.group(kind)
        tokens.append(Token(tok if kind == "op" else kind, tok, start))
        i = mt.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


# ---------------------------------------------------------------------------
# AST

class Node:
    prec = 5

    def ev(self, c):
        raise NotImplementedError

    def coords(self) -> set:
        return set()

    def text(self) -> str:
        raise NotImplementedError

    def substitute(self, mapping: dict) -> "Node":
        return self

    def __str__(self):
        return self.text()


@dataclass(frozen=True, eq=False)
class Const(Node):
    value: float

    def ev(self, c):
        return self.value

    def text(self):
        r = repr(float(self.value))
        return f"({r})" if self.value < 0 or r.startswith("-") else r

    @property
    def prec(self):
        return 5


@dataclass(frozen=True, eq=False)
class Coord(Node):
    block: str  # 't', 'x' or 'p'
    index: tuple  # 1-based
    flat: int  # position in the flat (t, x, p) coordinate vector

    def ev(self, c):
        return c[self.flat]

    def coords(self):
        return {self.flat}

    def text(self):
        return self.block + "".join(f"[{k}]" for k in self.index)

    def substitute(self, mapping):
        return mapping.get(self.flat, self)


@dataclass(frozen=True, eq=False)
class Neg(Node):
    arg: Node

    prec = _PREC["neg"]

    def ev(self, c):
        return -self.arg.ev(c)

    def coords(self):
        return self.arg.coords()

    def text(self):
        inner = self.arg.text()
        if self.arg.prec <= self.prec:
            inner = f"({inner})"
        return "-" + inner

    def substitute(self, mapping):
        return Neg(self.arg.substitute(mapping))


_BINOPS = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": lambda a, b: _divide(a, b),
    "^": lambda a, b: _power(a, b),
}


def _divide(a, b):
    if isinstance(a, dual.Dual3) or isinstance(b, dual.Dual3):
        return dual.Dual3.lift(a) / b
    if b == 0:
        raise DomainError("division", 0.0)
    return a / b


def _power(a, b):
    if isinstance(a, dual.Dual3) or isinstance(b, dual.Dual3):
        return dual.Dual3.lift(a) ** b
    return (dual.Dual3.lift(a) ** b).value.item()


@dataclass(frozen=True, eq=False)
class Bin(Node):
    op: str
    left: Node
    right: Node

    @property
    def prec(self):
        return _PREC[self.op]

    def ev(self, c):
        try:
            return _BINOPS[self.op](self.left.ev(c), self.right.ev(c))
        except DomainError as e:
            if e.node is None:
                e.node = self.text()
                e.args = (f"{e.op} undefined at {e.value!r} in {e.node}",)
            raise

    def coords(self):
        return self.left.coords() | self.right.coords()

    def text(self):
        p = self.prec
        left, right = self.left.text(), self.right.text()
        if self.op == "^":
            # right-associative: only the left operand needs guarding at equal precedence
            if self.left.prec <= p:
                left = f"({left})"
            if self.right.prec < p and not isinstance(self.right, Neg):
                right = f"({right})"
            elif isinstance(self.right, Neg):
                right = f"({right})"
            return f"{left}^{right}"
        if self.left.prec < p:
            left = f"({left})"
        if self.right.prec <= p:
            right = f"({right})"
        return f"{left} {self.op} {right}"

    def substitute(self, mapping):
        return Bin(self.op, self.left.substitute(mapping), self.right.substitute(mapping))


@dataclass(frozen=True, eq=False)
class Call(Node):
    func: str
    arg: Node

    def ev(self, c):
        try:
            return _call(self.func, self.arg.ev(c))
        except DomainError as e:
            if e.node is None:
                e.node = self.text()
                e.args = (f"{e.op} undefined at {e.value!r} in {e.node}",)
            raise

    def coords(self):
        return self.arg.coords()

    def text(self):
        return f"{self.func}({self.arg.text()})"

    def substitute(self, mapping):
        return Call(self.func, self.arg.substitute(mapping))


def _call(func, v):
    out = dual.FUNCTIONS[func](v)
    if isinstance(out, dual.Dual3):
        return out
    return float(out)


# ---------------------------------------------------------------------------
# parser

def flat_index(block: str, index: tuple, dims) -> int:
    m, n = dims
    if block == "t":
        return index[0] - 1
    if block == "x":
        return m + index[0] - 1
    i, a = index
    return m + n + (i - 1) * m + (a - 1)


def coordinate_name(flat: int, dims) -> str:
    m, n = dims
    if flat < m:
        return f"t[{flat + 1}]"
    if flat < m + n:
        return f"x[{flat - m + 1}]"
    k = flat - m - n
    return f"p[{k // m + 1}][{k % m + 1}]"


class _Parser:
    def __init__(self, text, dims):
        self.text = text
        self.dims = dims
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def fail(self, expected):
        t = self.tok
        raise ExprSyntaxError(self.text, t.pos + 1, expected, t.text or "end of input")

    def eat(self, kind):
        if self.tok.kind != kind:
            self.fail({repr(kind) if kind not in ("num", "end") else {"num": "number", "end": "end of input"}[kind]})
        t = self.tok
        self.i += 1
        return t

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            self.fail({"'+'", "'-'", "'*'", "'/'", "'^'", "end of input"})
        return node

    def expr(self):
        node = self.term()
        while self.tok.kind in ("+", "-"):
            op = self.eat(self.tok.kind).kind
            node = Bin(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok.kind in ("*", "/"):
            op = self.eat(self.tok.kind).kind
            node = Bin(op, node, self.unary())
        return node

    def unary(self):
        if self.tok.kind == "-":
            self.i += 1
            return Neg(self.unary())
        if self.tok.kind == "+":
            self.i += 1
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok.kind == "^":
            self.i += 1
            return Bin("^", base, self.unary())
        return base

    _ATOM_START = {"number", "coordinate", "function", "'('", "'-'", "pi"}

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return Const(float(t.text))
        if t.kind == "(":
            self.i += 1
            node = self.expr()
            if self.tok.kind != ")":
                self.fail({"')'", "'+'", "'-'", "'*'", "'/'", "'^'"})
            self.i += 1
            return node
        if t.kind == "id":
            name = t.text
            self.i += 1
            if name == "pi":
                return Const(math.pi)
            if name in dual.FUNCTIONS:
                return self.call(name, t)
            if self.tok.kind == "(":
                self.i -= 1
                self.fail(set(dual.FUNCTIONS))
            return self.coord(name, t)
        self.fail(self._ATOM_START)

    def call(self, name, t):
        if self.tok.kind != "(":
            self.fail({"'('"})
        self.i += 1
        if self.tok.kind == ")":
            raise ArityError(name, 1, 0, t.pos + 1)
        arg = self.expr()
        nargs = 1
        while self.tok.kind == ",":
            self.i += 1
            self.expr()
            nargs += 1
        if nargs != 1:
            raise ArityError(name, 1, nargs, t.pos + 1)
        if self.tok.kind != ")":
            self.fail({"')'", "','"})
        self.i += 1
        return Call(name, arg)

    def coord(self, name, t):
        nidx = {"t": 1, "x": 1, "p": 2}.get(name)
        if nidx is None:
            raise UnknownCoordinate(name, tuple(self.dims), t.pos + 1)
        index = []
        for _ in range(nidx):
            if self.tok.kind != "[":
                self.fail({"'['"})
            self.i += 1
            num = self.tok
            if num.kind != "num" or not num.text.isdigit():
                self.fail({"integer index"})
            self.i += 1
            if self.tok.kind != "]":
                self.fail({"']'"})
            self.i += 1
            index.append(int(num.text))
        m, n = self.dims
        limits = {"t": (m,), "x": (n,), "p": (n, m)}[name]
        label = name + "".join(f"[{k}]" for k in index)
        if any(not 1 <= k <= lim for k, lim in zip(index, limits)):
            raise UnknownCoordinate(label, tuple(self.dims), t.pos + 1)
        return Coord(name, tuple(index), flat_index(name, tuple(index), self.dims))


def parse_ast(text: str, dims) -> Node:
    if not isinstance(text, str):
        raise ExprSyntaxError(str(text), 1, {"expression string"}, type(text).__name__)
    return _Parser(text, dims).parse()


def parse_coordinate(label, dims) -> int:
    """Flat index of a coordinate given as ``"p[2][1]"`` or ``("p", 2, 1)``."""
    if isinstance(label, tuple):
        label = label[0] + "".join(f"[{k}]" for k in label[1:])
    node = parse_ast(label, dims)
    if not isinstance(node, Coord):
        raise UnknownCoordinate(str(label), tuple(dims))
    return node.flat
