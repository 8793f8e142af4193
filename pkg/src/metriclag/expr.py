"""A small expression language for potentials and Lagrangian terms.

Grammar (lowest to highest binding)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?          # right-associative
    atom   := NUMBER | NAME | FUNC "(" expr ")" | "(" expr ")"

Functions: sin, cos, exp, log, sqrt. Evaluation works on floats and numpy
arrays alike and raises :class:`~metriclag.errors.EvaluationError` on domain
faults instead of returning NaN.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import EvaluationError, ExprSyntaxError, UnknownIdentifierError

__all__ = [
    "Expr",
    "Const",
    "Var",
    "Neg",
    "Call",
    "Binary",
    "FUNCTIONS",
    "parse",
    "evaluate",
    "diff",
    "free_vars",
    "to_string",
    "to_callable",
]

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt")


class Expr:
    """Base class of expression nodes. Nodes are immutable."""

    pos: int

    def __str__(self) -> str:
        return to_string(self)

    def __call__(self, **bindings):
        return evaluate(self, bindings)


@dataclass(frozen=True)
class Const(Expr):
    value: float
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Var(Expr):
    name: str
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Call(Expr):
    fn: str
    arg: Expr
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr
    pos: int = field(default=-1, compare=False)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str):
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        m = _TOKEN.match(text, i)
        if m is None or m.end() == i:
            if text[i:].strip() == "":
                break
            j = i + (len(text[i:]) - len(text[i:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {text[j]!r}", _byte_offset(text, j))
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), _byte_offset(text, start)))
        i = m.end()
    tokens.append(("end", "", _byte_offset(text, n)))
    return tokens


def _byte_offset(text: str, idx: int) -> int:
    return len(text[:idx].encode("utf-8"))


class _Parser:
    def __init__(self, text: str, symbols: Iterable[str] | None):
        self.tokens = _tokenize(text)
        self.i = 0
        self.symbols = None if symbols is None else set(symbols)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.take()
        if val != value or kind != "op":
            what = "end of input" if kind == "end" else repr(val)
            raise ExprSyntaxError(f"expected {value!r}, found {what}", pos)

    def parse(self) -> Expr:
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {val!r}", pos)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            _, op, pos = self.take()
            node = Binary(op, node, self.term(), pos)
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            _, op, pos = self.take()
            node = Binary(op, node, self.unary(), pos)
        return node

    def unary(self) -> Expr:
        kind, val, pos = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return Neg(self.unary(), pos)
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        kind, val, pos = self.peek()
        if kind == "op" and val == "^":
            self.take()
            return Binary("^", base, self.unary(), pos)
        return base

    def atom(self) -> Expr:
        kind, val, pos = self.take()
        if kind == "num":
            return Const(float(val), pos)
        if kind == "name":
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(val, arg, pos)
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                raise UnknownIdentifierError(val, pos)
            if self.symbols is not None and val not in self.symbols:
                raise UnknownIdentifierError(val, pos)
            return Var(val, pos)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        what = "end of input" if kind == "end" else repr(val)
        raise ExprSyntaxError(f"expected an operand, found {what}", pos)


def parse(text: str, symbols: Iterable[str] | None = None) -> Expr:
    """Parse ``text`` into an :class:`Expr`.

    If ``symbols`` is given, any other variable name is rejected.
    """
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    return _Parser(text, symbols).parse()


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def _fault(msg: str, node: Expr):
    raise EvaluationError(msg, node.pos if node.pos >= 0 else None)


def _finite(val, node: Expr, what: str):
    if not np.all(np.isfinite(val)):
        _fault(f"{what} produced a non-finite value", node)
    return val


def evaluate(e: Expr, bindings: Mapping[str, object]):
    """Evaluate ``e`` with variables taken from ``bindings`` (floats or arrays)."""
    with np.errstate(all="ignore"):
        return _eval(e, bindings)


def _eval(e: Expr, b: Mapping[str, object]):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        try:
            val = b[e.name]
        except KeyError:
            _fault(f"unbound variable {e.name!r}", e)
        return np.asarray(val, dtype=float) if np.ndim(val) else float(val)
    if isinstance(e, Neg):
        return -_eval(e.arg, b)
    if isinstance(e, Call):
        u = _eval(e.arg, b)
        if e.fn == "log":
            if np.any(np.asarray(u) <= 0.0):
                _fault("log of a non-positive value", e)
            return np.log(u) if np.ndim(u) else math.log(u)
        if e.fn == "sqrt":
            if np.any(np.asarray(u) < 0.0):
                _fault("sqrt of a negative value", e)
            return np.sqrt(u) if np.ndim(u) else math.sqrt(u)
        fn = getattr(np, e.fn)
        out = fn(u)
        return _finite(out, e, e.fn) if np.ndim(out) else float(_finite(out, e, e.fn))
    if isinstance(e, Binary):
        lhs = _eval(e.left, b)
        rhs = _eval(e.right, b)
        op = e.op
        if op == "+":
            out = lhs + rhs
        elif op == "-":
            out = lhs - rhs
        elif op == "*":
            out = lhs * rhs
        elif op == "/":
            if np.any(np.asarray(rhs) == 0.0):
                _fault("division by zero", e)
            out = lhs / rhs
        else:
            base = np.asarray(lhs, dtype=float)
            expo = np.asarray(rhs, dtype=float)
            integral = expo == np.round(expo)
            if np.any((base < 0.0) & ~integral):
                _fault("non-integer power of a negative base", e)
            if np.any((base == 0.0) & (expo < 0.0)):
                _fault("zero raised to a negative power", e)
            out = np.power(base, expo)
            if out.ndim == 0:
                out = float(out)
        return _finite(out, e, "arithmetic")
    raise TypeError(f"not an expression node: {e!r}")


def free_vars(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Const):
        return set()
    if isinstance(e, (Neg, Call)):
        return free_vars(e.arg)
    return free_vars(e.left) | free_vars(e.right)


def to_callable(e: Expr, var: str = "x", **params):
    """Return ``f(value) = evaluate(e, {var: value, **params})``."""

    def f(value):
        return evaluate(e, {**params, var: value})

    return f


# ---------------------------------------------------------------------------
# simplifying constructors and differentiation
# ---------------------------------------------------------------------------


def _is(e: Expr, value: float) -> bool:
    return isinstance(e, Const) and e.value == value


def _fold(op: str, a: float, b: float):
    try:
        with np.errstate(all="raise"):
            val = {"+": a + b, "-": a - b, "*": a * b}.get(op)
            if val is None:
                val = a / b if op == "/" else float(np.power(a, b))
    except (FloatingPointError, ZeroDivisionError):
        return None
    if not math.isfinite(val) or (op == "^" and a < 0 and b != round(b)):
        return None
    return Const(float(val))


def add(a: Expr, b: Expr) -> Expr:
    if _is(a, 0.0):
        return b
    if _is(b, 0.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold("+", a.value, b.value) or Binary("+", a, b)
    return Binary("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if _is(b, 0.0):
        return a
    if _is(a, 0.0):
        return neg(b)
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold("-", a.value, b.value) or Binary("-", a, b)
    return Binary("-", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if _is(a, 0.0) or _is(b, 0.0):
        return Const(0.0)
    if _is(a, 1.0):
        return b
    if _is(b, 1.0):
        return a
    if _is(a, -1.0):
        return neg(b)
    if _is(b, -1.0):
        return neg(a)
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold("*", a.value, b.value) or Binary("*", a, b)
    if isinstance(b, Const) and not isinstance(a, Const):
        a, b = b, a
    return Binary("*", a, b)


def div(a: Expr, b: Expr) -> Expr:
    if _is(a, 0.0):
        return Const(0.0)
    if _is(b, 1.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold("/", a.value, b.value) or Binary("/", a, b)
    return Binary("/", a, b)


def power(a: Expr, b: Expr) -> Expr:
    if _is(b, 0.0):
        return Const(1.0)
    if _is(b, 1.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return _fold("^", a.value, b.value) or Binary("^", a, b)
    return Binary("^", a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def call(fn: str, a: Expr) -> Expr:
    return Call(fn, a)


def diff(e: Expr, var: str) -> Expr:
    """Exact symbolic derivative of ``e`` with respect to ``var``."""
    if isinstance(e, Const):
        return Const(0.0)
    if isinstance(e, Var):
        return Const(1.0 if e.name == var else 0.0)
    if isinstance(e, Neg):
        return neg(diff(e.arg, var))
    if isinstance(e, Call):
        u = e.arg
        du = diff(u, var)
        if _is(du, 0.0):
            return Const(0.0)
        if e.fn == "sin":
            outer = call("cos", u)
        elif e.fn == "cos":
            outer = neg(call("sin", u))
        elif e.fn == "exp":
            outer = call("exp", u)
        elif e.fn == "log":
            return div(du, u)
        else:
            return div(du, mul(Const(2.0), call("sqrt", u)))
        return mul(outer, du)
    u, v = e.left, e.right
    du, dv = diff(u, var), diff(v, var)
    if e.op == "+":
        return add(du, dv)
    if e.op == "-":
        return sub(du, dv)
    if e.op == "*":
        return add(mul(du, v), mul(u, dv))
    if e.op == "/":
        return div(sub(mul(du, v), mul(u, dv)), power(v, Const(2.0)))
    # u ^ v
    if var not in free_vars(v):
        if var not in free_vars(u):
            return Const(0.0)
        return mul(mul(v, power(u, sub(v, Const(1.0)))), du)
    if var not in free_vars(u):
        return mul(mul(power(u, v), call("log", u)), dv)
    return mul(power(u, v), add(mul(dv, call("log", u)), div(mul(v, du), u)))


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _prec(e: Expr) -> int:
    if isinstance(e, Binary):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return 3
    return 5


def _fmt_const(value: float) -> str:
    if value.is_integer() and abs(value) < 1e15:
        text = str(int(value))
    else:
        text = repr(value)
    if value < 0 or (value == 0 and math.copysign(1.0, value) < 0):
        return f"(-{text.lstrip('-')})"
    return text


def to_string(e: Expr) -> str:
    """Render ``e`` with the minimal parentheses needed to re-parse it to the
    same tree (and hence the same floating-point evaluation order)."""
    if isinstance(e, Const):
        return _fmt_const(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.fn}({to_string(e.arg)})"
    if isinstance(e, Neg):
        inner = to_string(e.arg)
        return f"-{inner}" if _prec(e.arg) >= 4 else f"-({inner})"
    p = _PREC[e.op]
    left, right = to_string(e.left), to_string(e.right)
    lp, rp = _prec(e.left), _prec(e.right)
    if lp < p or (e.op == "^" and lp <= p):
        left = f"({left})"
    if rp < p or (e.op != "^" and rp == p):
        right = f"({right})"
    return f"{left}{e.op}{right}"
