"""Minimal arithmetic expression language for field and state files.

Grammar (whitespace is ignored between tokens)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("+" | "-") unary | power
    power  := atom (("^" | "**") unary)?
    atom   := NUMBER | NAME | FUNC "(" expr ("," expr)* ")" | "(" expr ")"
    NAME   := "x" | "y" | "r" | "pi" | "i"
    FUNC   := "sin" | "cos" | "exp" | "log" | "sqrt" | "pow"

``r`` is sqrt(x^2 + y^2) and ``i`` the imaginary unit.  Expressions are
evaluated on numpy arrays and can be differentiated symbolically in x and y.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

__all__ = ["ExprParseError", "Expr", "parse"]


class ExprParseError(ValueError):
    def __init__(self, message: str, position: int, source: str):
        super().__init__(f"{message} at position {position}: {source!r}")
        self.position = position
        self.source = source


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>\*\*|[-+*/^(),]))"
)
_FUNCS = {"sin": 1, "cos": 1, "exp": 1, "log": 1, "sqrt": 1, "pow": 2}
_NAMES = {"x", "y", "r", "pi", "i"}


class Expr:
    def __call__(self, x, y):
        raise NotImplementedError

    def diff(self, var: str) -> "Expr":
        raise NotImplementedError

    @property
    def is_zero(self) -> bool:
        return isinstance(self, Num) and self.value == 0

    def uses_imag(self) -> bool:
        return any(c.uses_imag() for c in self.children())

    def children(self) -> tuple["Expr", ...]:
        return ()


@dataclass(frozen=True)
class Num(Expr):
    value: complex

    def __call__(self, x, y):
        v = self.value
        if isinstance(v, complex) and v.imag == 0:
            v = v.real
        return v + 0.0 * np.asarray(x, dtype=float)

    def diff(self, var):
        return Num(0)

    def uses_imag(self):
        return isinstance(self.value, complex) and self.value.imag != 0


@dataclass(frozen=True)
class Var(Expr):
    name: str

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.name == "x":
            return x + 0.0 * y
        if self.name == "y":
            return y + 0.0 * x
        return np.hypot(x, y)

    def diff(self, var):
        if self.name == "r":
            return _div(Var(var), Var("r"))
        return Num(1 if self.name == var else 0)


@dataclass(frozen=True)
class Bin(Expr):
    op: str
    a: Expr
    b: Expr

    def children(self):
        return (self.a, self.b)

    def __call__(self, x, y):
        u, v = self.a(x, y), self.b(x, y)
        if self.op == "+":
            return u + v
        if self.op == "-":
            return u - v
        if self.op == "*":
            return u * v
        if self.op == "/":
            return u / v
        return _power(u, v)

    def diff(self, var):
        a, b = self.a, self.b
        da, db = a.diff(var), b.diff(var)
        if self.op == "+":
            return _add(da, db)
        if self.op == "-":
            return _sub(da, db)
        if self.op == "*":
            return _add(_mul(da, b), _mul(a, db))
        if self.op == "/":
            return _div(_sub(_mul(da, b), _mul(a, db)), _mul(b, b))
        if db.is_zero:
            return _mul(_mul(b, _pow(a, _sub(b, Num(1)))), da)
        return _mul(self, _add(_mul(db, Fn("log", a)), _div(_mul(b, da), a)))


@dataclass(frozen=True)
class Neg(Expr):
    a: Expr

    def children(self):
        return (self.a,)

    def __call__(self, x, y):
        return -self.a(x, y)

    def diff(self, var):
        d = self.a.diff(var)
        return Num(0) if d.is_zero else Neg(d)


@dataclass(frozen=True)
class Fn(Expr):
    name: str
    a: Expr

    def children(self):
        return (self.a,)

    def __call__(self, x, y):
        u = self.a(x, y)
        if self.name == "log":
            return np.log(u)
        if self.name == "sqrt":
            return np.sqrt(u)
        return getattr(np, self.name)(u)

    def diff(self, var):
        a = self.a
        da = a.diff(var)
        if da.is_zero:
            return Num(0)
        if self.name == "sin":
            outer = Fn("cos", a)
        elif self.name == "cos":
            outer = Neg(Fn("sin", a))
        elif self.name == "exp":
            outer = self
        elif self.name == "log":
            outer = _div(Num(1), a)
        else:
            outer = _div(Num(0.5), self)
        return _mul(outer, da)


def _power(u, v):
    if np.iscomplexobj(u) or np.iscomplexobj(v):
        return np.power(np.asarray(u, dtype=complex), v)
    return np.power(u, v)


def _add(a, b):
    if a.is_zero:
        return b
    if b.is_zero:
        return a
    return Bin("+", a, b)


def _sub(a, b):
    if b.is_zero:
        return a
    if a.is_zero:
        return Neg(b)
    return Bin("-", a, b)


def _mul(a, b):
    if a.is_zero or b.is_zero:
        return Num(0)
    if isinstance(a, Num) and a.value == 1:
        return b
    if isinstance(b, Num) and b.value == 1:
        return a
    return Bin("*", a, b)


def _div(a, b):
    if a.is_zero:
        return Num(0)
    return Bin("/", a, b)


def _pow(a, b):
    if isinstance(b, Num) and b.value == 1:
        return a
    if isinstance(b, Num) and b.value == 0:
        return Num(1)
    return Bin("^", a, b)


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(src):
            if src[pos:].strip() == "":
                break
            m = _TOKEN.match(src, pos)
            if m is None or m.end() == pos:
                stripped = pos + len(src[pos:]) - len(src[pos:].lstrip())
                raise ExprParseError(f"unexpected character {src[stripped]!r}", stripped, src)
            kind = m.lastgroup
            start = m.start(kind)
            self.toks.append((kind, m.group(kind), start))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else ("end", "", len(self.src))

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def expect(self, value: str):
        kind, v, p = self.take()
        if v != value:
            raise ExprParseError(f"expected {value!r}, found {v or 'end of input'!r}", p, self.src)

    def parse(self) -> Expr:
        if not self.toks:
            raise ExprParseError("empty expression", 0, self.src)
        e = self.expr()
        kind, v, p = self.peek()
        if kind != "end":
            raise ExprParseError(f"unexpected token {v!r}", p, self.src)
        return e

    def expr(self):
        e = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            e = Bin(op, e, self.term())
        return e

    def term(self):
        e = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            e = Bin(op, e, self.unary())
        return e

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            return Neg(self.unary())
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] in ("^", "**"):
            self.take()
            return Bin("^", base, self.unary())
        return base

    def atom(self):
        kind, v, p = self.take()
        if kind == "num":
            return Num(float(v))
        if kind == "name":
            if v in _FUNCS:
                self.expect("(")
                args = [self.expr()]
                while self.peek()[1] == ",":
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                if len(args) != _FUNCS[v]:
                    raise ExprParseError(f"{v} takes {_FUNCS[v]} argument(s), got {len(args)}", p, self.src)
                if v == "pow":
                    return Bin("^", args[0], args[1])
                return Fn(v, args[0])
            if v not in _NAMES:
                raise ExprParseError(f"unknown name {v!r}", p, self.src)
            if v == "pi":
                return Num(math.pi)
            if v == "i":
                return Num(1j)
            return Var(v)
        if v == "(":
            e = self.expr()
            self.expect(")")
            return e
        raise ExprParseError(f"unexpected token {v or 'end of input'!r}", p, self.src)


def parse(src: str) -> Expr:
    """Parse ``src`` into an expression tree; errors carry the position."""
    return _Parser(src).parse()
