"""Closed-form scalar expressions in chart coordinates.

The grammar is ordinary infix with the precedence ``^`` > unary ``-`` >
``* /`` > ``+ -``.  Variables are ``x0 .. x(n-1)`` (the variable prefix is
configurable so fiber expressions can be written with ``y0 ..``), exponents
are constant integers, and the callable functions are ``exp``, ``log``,
``sin``, ``cos`` and ``sqrt``.

Expressions are immutable trees.  :func:`differentiate` returns exact
symbolic partial derivatives with constant folding applied on construction.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

__all__ = [
    "ExprError",
    "ExprSyntaxError",
    "ExprArityError",
    "ExprDomainError",
    "ScalarExpr",
    "parse",
    "differentiate",
    "evaluate",
    "constant",
    "variable",
]

FUNCTIONS = ("exp", "log", "sin", "cos", "sqrt")


class ExprError(ValueError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, text: str, offset: int):
        self.message = message
        self.text = text
        self.offset = offset
        super().__init__(f"{message} at offset {offset}: {text!r}")


class ExprNameError(ExprError):
    """Unknown function or identifier, located like a syntax error."""

    def __init__(self, what: str, name: str, text: str, offset: int):
        self.name = name
        self.text = text
        self.offset = offset
        super().__init__(f"unknown {what} '{name}' at offset {offset}: {text!r}")


class ExprArityError(ExprError):
    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        super().__init__(message)


class ExprDomainError(ExprError, ArithmeticError):
    def __init__(self, subexpr: str, point: Sequence[float], reason: str):
        self.subexpr = subexpr
        self.point = tuple(point)
        self.reason = reason
        super().__init__(f"{reason} in '{subexpr}' at {self.point}")


# ---------------------------------------------------------------------------
# AST nodes


class Node:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Const(Node):
    value: float


@dataclass(frozen=True, slots=True)
class Var(Node):
    index: int


@dataclass(frozen=True, slots=True)
class Neg(Node):
    arg: Node


@dataclass(frozen=True, slots=True)
class BinOp(Node):
    op: str  # one of + - * /
    left: Node
    right: Node


@dataclass(frozen=True, slots=True)
class Pow(Node):
    base: Node
    exponent: int


@dataclass(frozen=True, slots=True)
class Call(Node):
    func: str
    arg: Node


ZERO = Const(0.0)
ONE = Const(1.0)


def _is_const(node: Node, value: float | None = None) -> bool:
    return isinstance(node, Const) and (value is None or node.value == value)


# Smart constructors: fold constant subtrees and the identities
# 0*t -> 0, t+0 -> t, 1*t -> t.  Nothing beyond that.


def _add(a: Node, b: Node) -> Node:
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return BinOp("+", a, b)


def _sub(a: Node, b: Node) -> Node:
    if _is_const(a) and _is_const(b):
        return Const(a.value - b.value)
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return _neg(b)
    return BinOp("-", a, b)


def _mul(a: Node, b: Node) -> Node:
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    return BinOp("*", a, b)


def _div(a: Node, b: Node) -> Node:
    if _is_const(a) and _is_const(b) and b.value != 0.0:
        return Const(a.value / b.value)
    if _is_const(a, 0.0):
        return ZERO
    if _is_const(b, 1.0):
        return a
    return BinOp("/", a, b)


def _neg(a: Node) -> Node:
    if _is_const(a):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def _pow(a: Node, n: int) -> Node:
    if n == 0:
        return ONE
    if n == 1:
        return a
    if _is_const(a) and not (a.value == 0.0 and n < 0):
        return Const(float(a.value) ** n)
    return Pow(a, n)


def _call(func: str, a: Node) -> Node:
    return Call(func, a)


# ---------------------------------------------------------------------------
# Parser

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


class _Parser:
    def __init__(self, text: str, arity: int, prefix: str):
        self.text = text
        self.arity = arity
        self.prefix = prefix
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                raise ExprSyntaxError("unexpected character", text, _skip_ws(text, pos))
            kind = m.lastgroup
            start = m.start(kind)
            self.tokens.append((kind, m.group(kind), start))
            pos = m.end()
        self.i = 0

    # byte offset of the current token (end of text if exhausted)
    def _offset(self) -> int:
        if self.i < len(self.tokens):
            return self.tokens[self.i][2]
        return len(self.text)

    def _peek(self) -> tuple[str, str, int] | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def _accept(self, op: str) -> bool:
        tok = self._peek()
        if tok is not None and tok[0] == "op" and tok[1] == op:
            self.i += 1
            return True
        return False

    def _expect(self, op: str) -> None:
        if not self._accept(op):
            raise ExprSyntaxError(f"expected '{op}'", self.text, self._offset())

    def parse(self) -> Node:
        if not self.tokens:
            raise ExprSyntaxError("empty expression", self.text, 0)
        node = self._sum()
        if self.i != len(self.tokens):
            raise ExprSyntaxError("unexpected token", self.text, self._offset())
        return node

    def _sum(self) -> Node:
        node = self._product()
        while True:
            if self._accept("+"):
                node = BinOp("+", node, self._product())
            elif self._accept("-"):
                node = BinOp("-", node, self._product())
            else:
                return node

    def _product(self) -> Node:
        node = self._unary()
        while True:
            if self._accept("*"):
                node = BinOp("*", node, self._unary())
            elif self._accept("/"):
                node = BinOp("/", node, self._unary())
            else:
                return node

    def _unary(self) -> Node:
        if self._accept("-"):
            return Neg(self._unary())
        return self._power()

    def _power(self) -> Node:
        node = self._atom()
        while self._accept("^"):
            node = Pow(node, self._exponent())
        return node

    def _exponent(self) -> int:
        start = self._offset()
        parens = 0
        while self._accept("("):
            parens += 1
        sign = -1 if self._accept("-") else 1
        tok = self._peek()
        if tok is None or tok[0] != "num" or not re.fullmatch(r"\d+", tok[1]):
            raise ExprSyntaxError("exponent must be a constant integer", self.text, self._offset() if tok else start)
        self.i += 1
        for _ in range(parens):
            self._expect(")")
        return sign * int(tok[1])

    def _atom(self) -> Node:
        tok = self._peek()
        if tok is None:
            raise ExprSyntaxError("unexpected end of input", self.text, len(self.text))
        kind, value, offset = tok
        if kind == "num":
            self.i += 1
            return Const(float(value))
        if kind == "name":
            self.i += 1
            if self._accept("("):
                if value not in FUNCTIONS:
                    raise ExprNameError("function", value, self.text, offset)
                arg = self._sum()
                self._expect(")")
                return Call(value, arg)
            m = re.fullmatch(re.escape(self.prefix) + r"(\d+)", value)
            if m is None:
                raise ExprNameError("identifier", value, self.text, offset)
            index = int(m.group(1))
            if index >= self.arity:
                raise ExprArityError(
                    f"variable '{value}' at offset {offset} out of range for arity {self.arity}", offset
                )
            return Var(index)
        if kind == "op" and value == "(":
            self.i += 1
            node = self._sum()
            self._expect(")")
            return node
        raise ExprSyntaxError("unexpected token", self.text, offset)


def _skip_ws(text: str, pos: int) -> int:
    while pos < len(text) and text[pos].isspace():
        pos += 1
    return pos


# ---------------------------------------------------------------------------
# Printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _fmt_const(v: float) -> str:
    s = repr(float(v))
    return f"({s})" if v < 0 or s.startswith("-") else s


def _to_str(node: Node, prefix: str) -> str:
    if isinstance(node, Const):
        return _fmt_const(node.value)
    if isinstance(node, Var):
        return f"{prefix}{node.index}"
    if isinstance(node, Neg):
        return f"-({_to_str(node.arg, prefix)})"
    if isinstance(node, Pow):
        base = _to_str(node.base, prefix)
        if not isinstance(node.base, (Var, Call)) and not _is_const(node.base):
            base = f"({base})"
        exp = str(node.exponent) if node.exponent >= 0 else f"({node.exponent})"
        return f"{base}^{exp}"
    if isinstance(node, Call):
        return f"{node.func}({_to_str(node.arg, prefix)})"
    assert isinstance(node, BinOp)
    p = _PREC[node.op]
    left = _to_str(node.left, prefix)
    right = _to_str(node.right, prefix)
    if isinstance(node.left, BinOp) and _PREC[node.left.op] < p:
        left = f"({left})"
    # right operand of a left-associative operator needs parens at equal precedence
    if isinstance(node.right, BinOp) and _PREC[node.right.op] <= p:
        right = f"({right})"
    return f"{left} {node.op} {right}"


# ---------------------------------------------------------------------------
# Evaluation


def _py(node: Node) -> str:
    """Python source for the compiled evaluator."""
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, Var):
        return f"x[{node.index}]"
    if isinstance(node, Neg):
        return f"(-{_py(node.arg)})"
    if isinstance(node, Pow):
        return f"({_py(node.base)} ** {node.exponent})"
    if isinstance(node, Call):
        return f"_{node.func}({_py(node.arg)})"
    return f"({_py(node.left)} {node.op} {_py(node.right)})"


_MATH = {f"_{name}": getattr(math, name) for name in FUNCTIONS}


def _walk(node: Node, x: Sequence[float], prefix: str) -> float:
    """Reference tree walk; pinpoints the failing subexpression."""
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return float(x[node.index])
    if isinstance(node, Neg):
        return -_walk(node.arg, x, prefix)
    if isinstance(node, Pow):
        b = _walk(node.base, x, prefix)
        if b == 0.0 and node.exponent < 0:
            raise ExprDomainError(_to_str(node, prefix), x, "division by zero")
        try:
            return b ** node.exponent
        except OverflowError:
            raise ExprDomainError(_to_str(node, prefix), x, "overflow") from None
    if isinstance(node, Call):
        a = _walk(node.arg, x, prefix)
        if node.func == "log" and a <= 0.0:
            raise ExprDomainError(_to_str(node, prefix), x, "log of non-positive value")
        if node.func == "sqrt" and a < 0.0:
            raise ExprDomainError(_to_str(node, prefix), x, "sqrt of negative value")
        try:
            return getattr(math, node.func)(a)
        except OverflowError:
            raise ExprDomainError(_to_str(node, prefix), x, "overflow") from None
    a = _walk(node.left, x, prefix)
    b = _walk(node.right, x, prefix)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if b == 0.0:
        raise ExprDomainError(_to_str(node, prefix), x, "division by zero")
    return a / b


# ---------------------------------------------------------------------------
# Differentiation


def _diff(node: Node, i: int) -> Node:
    if isinstance(node, Const):
        return ZERO
    if isinstance(node, Var):
        return ONE if node.index == i else ZERO
    if isinstance(node, Neg):
        return _neg(_diff(node.arg, i))
    if isinstance(node, Pow):
        du = _diff(node.base, i)
        n = node.exponent
        return _mul(_mul(Const(float(n)), _pow(node.base, n - 1)), du)
    if isinstance(node, Call):
        u = node.arg
        du = _diff(u, i)
        if _is_const(du, 0.0):
            return ZERO
        if node.func == "exp":
            outer = node
        elif node.func == "log":
            return _div(du, u)
        elif node.func == "sin":
            outer = _call("cos", u)
        elif node.func == "cos":
            outer = _neg(_call("sin", u))
        else:  # sqrt
            return _div(du, _mul(Const(2.0), node))
        return _mul(outer, du)
    assert isinstance(node, BinOp)
    a, b = node.left, node.right
    da, db = _diff(a, i), _diff(b, i)
    if node.op == "+":
        return _add(da, db)
    if node.op == "-":
        return _sub(da, db)
    if node.op == "*":
        return _add(_mul(da, b), _mul(a, db))
    # quotient rule
    return _div(_sub(_mul(da, b), _mul(a, db)), _pow(b, 2))


def _fold(node: Node) -> Node:
    if isinstance(node, (Const, Var)):
        return node
    if isinstance(node, Neg):
        return _neg(_fold(node.arg))
    if isinstance(node, Pow):
        return _pow(_fold(node.base), node.exponent)
    if isinstance(node, Call):
        return _call(node.func, _fold(node.arg))
    a, b = _fold(node.left), _fold(node.right)
    return {"+": _add, "-": _sub, "*": _mul, "/": _div}[node.op](a, b)


def _max_var(node: Node) -> int:
    if isinstance(node, Var):
        return node.index
    if isinstance(node, Const):
        return -1
    if isinstance(node, (Neg, Call)):
        return _max_var(node.arg)
    if isinstance(node, Pow):
        return _max_var(node.base)
    return max(_max_var(node.left), _max_var(node.right))


def _shift(node: Node, offset: int) -> Node:
    if isinstance(node, Var):
        return Var(node.index + offset)
    if isinstance(node, Const):
        return node
    if isinstance(node, Neg):
        return Neg(_shift(node.arg, offset))
    if isinstance(node, Call):
        return Call(node.func, _shift(node.arg, offset))
    if isinstance(node, Pow):
        return Pow(_shift(node.base, offset), node.exponent)
    return BinOp(node.op, _shift(node.left, offset), _shift(node.right, offset))


# ---------------------------------------------------------------------------
# Public type


class ScalarExpr:
    """An immutable, differentiable expression of ``arity`` coordinates."""

    def __init__(self, node: Node, arity: int, prefix: str = "x"):
        if arity < 1:
            raise ExprArityError(f"arity must be >= 1, got {arity}")
        top = _max_var(node)
        if top >= arity:
            raise ExprArityError(f"variable index {top} out of range for arity {arity}")
        self.node = node
        self.arity = arity
        self.prefix = prefix
        self._fn = eval(f"lambda x: {_py(node)}", dict(_MATH))  # noqa: S307 - source is generated from the AST
        self._partials: dict[int, ScalarExpr] = {}

    def __call__(self, p: Sequence[float]) -> float:
        return self.evaluate(p)

    def evaluate(self, p: Sequence[float]) -> float:
        if len(p) != self.arity:
            raise ExprArityError(f"point has dimension {len(p)}, expression arity is {self.arity}")
        # plain floats so that division by zero raises instead of warning
        p = [float(v) for v in p]
        try:
            value = self._fn(p)
        except (ArithmeticError, ValueError):
            _walk(self.node, p, self.prefix)
            raise  # pragma: no cover - the walk raises first
        return float(value)

    def diff(self, i: int) -> ScalarExpr:
        if not 0 <= i < self.arity:
            raise ExprArityError(f"coordinate index {i} out of range for arity {self.arity}")
        d = self._partials.get(i)
        if d is None:
            d = ScalarExpr(_diff(self.node, i), self.arity, self.prefix)
            self._partials[i] = d
        return d

    @cached_property
    def is_constant(self) -> bool:
        return _max_var(self.node) < 0

    def shifted(self, offset: int, arity: int, prefix: str = "x") -> ScalarExpr:
        """Re-index variables ``v -> v + offset`` into a wider coordinate space."""
        return ScalarExpr(_shift(self.node, offset), arity, prefix)

    def folded(self) -> ScalarExpr:
        return ScalarExpr(_fold(self.node), self.arity, self.prefix)

    def __str__(self) -> str:
        return _to_str(self.node, self.prefix)

    def __repr__(self) -> str:
        return f"ScalarExpr({str(self)!r}, arity={self.arity})"

    # Arithmetic helpers used to build derived expressions.
    def _coerce(self, other) -> Node:
        if isinstance(other, ScalarExpr):
            if other.arity != self.arity:
                raise ExprArityError("arity mismatch")
            return other.node
        return Const(float(other))

    def __add__(self, other):
        return ScalarExpr(_add(self.node, self._coerce(other)), self.arity, self.prefix)

    __radd__ = __add__

    def __sub__(self, other):
        return ScalarExpr(_sub(self.node, self._coerce(other)), self.arity, self.prefix)

    def __rsub__(self, other):
        return ScalarExpr(_sub(self._coerce(other), self.node), self.arity, self.prefix)

    def __mul__(self, other):
        return ScalarExpr(_mul(self.node, self._coerce(other)), self.arity, self.prefix)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return ScalarExpr(_div(self.node, self._coerce(other)), self.arity, self.prefix)

    def __neg__(self):
        return ScalarExpr(_neg(self.node), self.arity, self.prefix)


def parse(text: str, arity: int, prefix: str = "x") -> ScalarExpr:
    """Parse ``text`` into an expression over ``arity`` coordinates.

    Raises :class:`ExprSyntaxError` (carrying the byte offset),
    :class:`ExprArityError` for out-of-range variables, and
    :class:`ExprNameError` for unknown identifiers. All three carry ``offset``.
    """
    if arity < 1:
        raise ExprArityError(f"arity must be >= 1, got {arity}")
    if not isinstance(text, str) or not text.strip():
        raise ExprSyntaxError("empty expression", str(text), 0)
    node = _Parser(text, arity, prefix).parse()
    return ScalarExpr(node, arity, prefix)


def differentiate(e: ScalarExpr, i: int) -> ScalarExpr:
    return e.diff(i)


def evaluate(e: ScalarExpr, p: Sequence[float]) -> float:
    return e.evaluate(p)


def constant(value: float, arity: int) -> ScalarExpr:
    return ScalarExpr(Const(float(value)), arity)


def variable(index: int, arity: int) -> ScalarExpr:
    return ScalarExpr(Var(index), arity)
