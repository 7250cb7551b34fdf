"""Scalar functions of arclength: a small infix expression language and
sampled functions, both evaluable and differentiable.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' factor)?
    base   := number | 's' | func '(' expr ')' | '(' expr ')' | '-' base
    func   := sin | cos | tan | exp | log | sqrt | abs
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.interpolate import CubicSpline

__all__ = [
    "Const", "Var", "Unary", "Binary", "Node",
    "ExprError", "ExprSyntaxError", "ExprDomainError",
    "ScalarFunc", "ExprFunc", "SampledFunc",
    "parse_expr", "to_text", "differentiate", "evaluate_ast",
    "as_func", "const", "evaluate", "diff", "combine", "fd_weights",
]

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "abs")


class ExprError(ValueError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class ExprDomainError(ExprError):
    pass


# --------------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Unary:
    op: str  # 'neg' or one of FUNCTIONS
    arg: "Node"


@dataclass(frozen=True)
class Binary:
    op: str  # one of + - * / ^
    left: "Node"
    right: "Node"


Node = Union[Const, Var, Unary, Binary]
S = Var()


# --------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(text: str):
    raw = text.encode("utf-8")
    # offsets are reported in bytes; the grammar itself is pure ASCII
    if len(raw) != len(text):
        for i, ch in enumerate(text):
            if ord(ch) > 127:
                raise ExprSyntaxError(f"unexpected character {ch!r}",
                                      len(text[:i].encode("utf-8")))
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {text[bad]!r}", bad)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, off = self.take()
        if val != value or kind != "op":
            what = "end of input" if kind == "end" else repr(val)
            raise ExprSyntaxError(f"expected {value!r}, found {what}", off)

    def parse(self):
        node = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {val!r}", off)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Binary(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Binary(op, node, self.factor())
        return node

    def factor(self):
        node = self.base()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            node = Binary("^", node, self.factor())
        return node

    def base(self):
        kind, val, off = self.take()
        if kind == "num":
            return Const(float(val))
        if kind == "name":
            if val == "s":
                return S
            if val not in FUNCTIONS:
                raise ExprError(f"unknown identifier {val!r} at offset {off}")
            self.expect("(")
            arg = self.expr()
            k2, v2, o2 = self.peek()
            if k2 == "op" and v2 == ",":
                raise ExprError(f"arity mismatch: {val} takes one argument "
                                f"(offset {o2})")
            self.expect(")")
            return Unary(val, arg)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "op" and val == "-":
            return Unary("neg", self.base())
        what = "end of input" if kind == "end" else repr(val)
        raise ExprSyntaxError(f"unexpected {what}", off)


def parse_expr(text: str) -> Node:
    """Parse `text` into an AST. Raises ExprSyntaxError (with byte offset)
    or ExprError for unknown identifiers and arity mismatches."""
    return _Parser(text).parse()


def to_text(node: Node) -> str:
    """Pretty-print; ``parse_expr(to_text(n)) == n`` for parsed trees."""
    if isinstance(node, Const):
        if node.value < 0:
            return f"-{_num(-node.value)}"
        return _num(node.value)
    if isinstance(node, Var):
        return "s"
    if isinstance(node, Unary):
        if node.op == "neg":
            return f"-({to_text(node.arg)})"
        return f"{node.op}({to_text(node.arg)})"
    return f"({to_text(node.left)} {node.op} {to_text(node.right)})"


def _num(x):
    text = repr(float(x))
    if text.endswith(".0"):
        text = text[:-2]
    return text


# --------------------------------------------------------------------------
# evaluation

def _check(mask, message):
    if np.any(mask):
        raise ExprDomainError(message)


def evaluate_ast(node: Node, s):
    """Evaluate on a scalar or numpy array of s; raises ExprDomainError."""
    if isinstance(node, Const):
        return np.full(np.shape(s), node.value, dtype=float)
    if isinstance(node, Var):
        return np.asarray(s, dtype=float).copy()
    if isinstance(node, Unary):
        x = evaluate_ast(node.arg, s)
        op = node.op
        if op == "neg":
            return -x
        if op == "log":
            _check(x <= 0, "log of non-positive value")
            return np.log(x)
        if op == "sqrt":
            _check(x < 0, "sqrt of negative value")
            return np.sqrt(x)
        if op == "tan":
            _check(np.abs(np.cos(x)) < 1e-300, "tan at a pole")
            return np.tan(x)
        with np.errstate(over="ignore"):
            out = getattr(np, op)(x)
        _check(~np.isfinite(out), f"{op} overflow")
        return out
    a = evaluate_ast(node.left, s)
    b = evaluate_ast(node.right, s)
    op = node.op
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        _check(b == 0, "division by zero")
        return a / b
    # power
    integral = np.all(b == np.round(b))
    if not integral:
        _check(a <= 0, "non-integer power of non-positive base")
    else:
        _check((a == 0) & (b < 0), "division by zero")
    with np.errstate(over="ignore"):
        out = np.power(a, b)
    _check(~np.isfinite(out), "power overflow")
    return out


# --------------------------------------------------------------------------
# construction helpers with constant folding

def _is(node, value):
    return isinstance(node, Const) and node.value == value


def _const(value):
    value = float(value)
    if value < 0:
        return Unary("neg", Const(-value))
    return Const(value)


def _value(node):
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Unary) and node.op == "neg" and isinstance(node.arg, Const):
        return -node.arg.value
    return None


def neg(a):
    v = _value(a)
    if v is not None:
        return _const(-v)
    if isinstance(a, Unary) and a.op == "neg":
        return a.arg
    return Unary("neg", a)


def add(a, b):
    va, vb = _value(a), _value(b)
    if va is not None and vb is not None:
        return _const(va + vb)
    if va == 0:
        return b
    if vb == 0:
        return a
    return Binary("+", a, b)


def sub(a, b):
    va, vb = _value(a), _value(b)
    if va is not None and vb is not None:
        return _const(va - vb)
    if vb == 0:
        return a
    if va == 0:
        return neg(b)
    return Binary("-", a, b)


def mul(a, b):
    va, vb = _value(a), _value(b)
    if va is not None and vb is not None:
        return _const(va * vb)
    if va == 0 or vb == 0:
        return Const(0.0)
    if va == 1:
        return b
    if vb == 1:
        return a
    if va == -1:
        return neg(b)
    if vb == -1:
        return neg(a)
    return Binary("*", a, b)


def div(a, b):
    va, vb = _value(a), _value(b)
    if va is not None and vb is not None and vb != 0:
        return _const(va / vb)
    if va == 0 and vb != 0:
        return Const(0.0)
    if vb == 1:
        return a
    return Binary("/", a, b)


def power(a, b):
    vb = _value(b)
    if vb == 0:
        return Const(1.0)
    if vb == 1:
        return a
    va = _value(a)
    if va is not None and vb is not None:
        try:
            return _const(float(evaluate_ast(Binary("^", a, b), 0.0)))
        except ExprDomainError:
            pass
    return Binary("^", a, b)


def func(name, a):
    return Unary(name, a)


def _depends_on_s(node):
    if isinstance(node, Var):
        return True
    if isinstance(node, Const):
        return False
    if isinstance(node, Unary):
        return _depends_on_s(node.arg)
    return _depends_on_s(node.left) or _depends_on_s(node.right)


def differentiate(node: Node) -> Node:
    """Symbolic d/ds."""
    if isinstance(node, Const):
        return Const(0.0)
    if isinstance(node, Var):
        return Const(1.0)
    if isinstance(node, Unary):
        u = node.arg
        du = differentiate(u)
        op = node.op
        if op == "neg":
            return neg(du)
        if _value(du) == 0:
            return Const(0.0)
        if op == "sin":
            return mul(func("cos", u), du)
        if op == "cos":
            return neg(mul(func("sin", u), du))
        if op == "tan":
            return div(du, power(func("cos", u), Const(2.0)))
        if op == "exp":
            return mul(node, du)
        if op == "log":
            return div(du, u)
        if op == "sqrt":
            return div(du, mul(Const(2.0), node))
        if op == "abs":
            return mul(div(u, node), du)
        raise ExprError(f"unknown function {op}")
    a, b = node.left, node.right
    op = node.op
    if op == "+":
        return add(differentiate(a), differentiate(b))
    if op == "-":
        return sub(differentiate(a), differentiate(b))
    if op == "*":
        return add(mul(differentiate(a), b), mul(a, differentiate(b)))
    if op == "/":
        return div(sub(mul(differentiate(a), b), mul(a, differentiate(b))),
                   power(b, Const(2.0)))
    # power
    if not _depends_on_s(b):
        n = b
        return mul(mul(n, power(a, sub(n, Const(1.0)))), differentiate(a))
    # general exponent: u^v (v' log u + v u'/u), base must be positive
    return mul(node, add(mul(differentiate(b), func("log", a)),
                         div(mul(b, differentiate(a)), a)))


# --------------------------------------------------------------------------
# scalar functions

class ScalarFunc:
    """A real function of arclength. Subclasses are immutable."""

    def __call__(self, s):
        raise NotImplementedError

    def diff(self) -> "ScalarFunc":
        raise NotImplementedError

    @property
    def domain(self):
        return (-math.inf, math.inf)


class ExprFunc(ScalarFunc):
    def __init__(self, ast: Node):
        self.ast = ast

    @classmethod
    def parse(cls, text):
        return cls(parse_expr(text))

    def __call__(self, s):
        out = evaluate_ast(self.ast, s)
        return float(out) if np.ndim(out) == 0 else out

    def diff(self):
        return ExprFunc(differentiate(self.ast))

    @property
    def text(self):
        return to_text(self.ast)

    def __eq__(self, other):
        return isinstance(other, ExprFunc) and self.ast == other.ast

    def __hash__(self):
        return hash(self.ast)

    def __repr__(self):
        return f"ExprFunc({self.text!r})"


def fd_weights(x0, xs, order=1):
    """Fornberg finite-difference weights for derivative `order` at x0."""
    n = len(xs)
    c = np.zeros((n, order + 1))
    c1 = 1.0
    c4 = xs[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = xs[i] - x0
        for j in range(i):
            c3 = xs[i] - xs[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def _stencil(n, i):
    if n >= 5 and 2 <= i <= n - 3:
        return slice(i - 2, i + 3)
    if i == 0:
        return slice(0, 3)
    if i == n - 1:
        return slice(n - 3, n)
    return slice(i - 1, i + 2)


def derivative_samples(knots, values):
    """d/ds at every knot: 5-point central stencils where they fit, 3-point
    (central next to the ends, one-sided at the ends) elsewhere. Works along
    axis 0, so `values` may carry trailing dimensions."""
    knots = np.asarray(knots, dtype=float)
    values = np.asarray(values, dtype=float)
    n = len(knots)
    out = np.empty_like(values)
    h = np.diff(knots)
    uniform = np.allclose(h, h[0], rtol=1e-12, atol=0.0)
    if uniform and n >= 5:
        step = h[0]
        out[2:-2] = (values[:-4] - 8 * values[1:-3] + 8 * values[3:-1]
                     - values[4:]) / (12 * step)
        todo = [0, 1, n - 2, n - 1]
    else:
        todo = range(n)
    for i in todo:
        sl = _stencil(n, i)
        w = fd_weights(knots[i], knots[sl])
        out[i] = np.tensordot(w, values[sl], axes=(0, 0))
    return out


class SampledFunc(ScalarFunc):
    """Cubic-spline interpolant through (knot, value) samples."""

    def __init__(self, knots, values):
        knots = np.array(knots, dtype=float)
        values = np.array(values, dtype=float)
        if knots.ndim != 1 or knots.shape != values.shape:
            raise ValueError("knots and values must be 1-d arrays of equal length")
        if len(knots) < 4:
            raise ValueError("at least 4 samples are required")
        if np.any(np.diff(knots) <= 0):
            raise ValueError("sample knots must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("sample values must be finite")
        knots.setflags(write=False)
        values.setflags(write=False)
        self.knots = knots
        self.values = values
        self._spline = CubicSpline(knots, values)

    @property
    def domain(self):
        return (float(self.knots[0]), float(self.knots[-1]))

    def __call__(self, s):
        arr = np.asarray(s, dtype=float)
        lo, hi = self.domain
        span = hi - lo
        tol = 1e-12 * max(span, 1.0)
        if np.any(arr < lo - tol) or np.any(arr > hi + tol):
            raise ExprDomainError(f"s outside sample range [{lo}, {hi}]")
        out = self._spline(np.clip(arr, lo, hi))
        # exact at knots
        idx = np.searchsorted(self.knots, arr)
        idx = np.clip(idx, 0, len(self.knots) - 1)
        hit = self.knots[idx] == arr
        out = np.where(hit, self.values[idx], out)
        return float(out) if out.ndim == 0 else out

    def diff(self):
        return SampledFunc(self.knots, derivative_samples(self.knots, self.values))

    def __repr__(self):
        return f"SampledFunc(n={len(self.knots)}, domain={self.domain})"


def const(value: float) -> ExprFunc:
    return ExprFunc(_const(value))


def as_func(obj) -> ScalarFunc:
    """Coerce a number, expression string, AST or ScalarFunc."""
    if isinstance(obj, ScalarFunc):
        return obj
    if isinstance(obj, str):
        return ExprFunc.parse(obj)
    if isinstance(obj, (Const, Var, Unary, Binary)):
        return ExprFunc(obj)
    if isinstance(obj, (int, float, np.floating, np.integer)):
        return const(float(obj))
    raise TypeError(f"cannot make a scalar function from {type(obj).__name__}")


def evaluate(f, s):
    """Value of `f` at `s` (scalar or array)."""
    return as_func(f)(s)


def diff(f) -> ScalarFunc:
    return as_func(f).diff()


def combine(fn: Callable, build: Callable, *funcs: ScalarFunc) -> ScalarFunc:
    """Pointwise combination of scalar functions.

    If every input is expression-backed the result is built symbolically by
    `build(*asts)`; otherwise it is sampled with `fn` on the knots of the
    first sampled input.
    """
    funcs = [as_func(f) for f in funcs]
    if all(isinstance(f, ExprFunc) for f in funcs):
        return ExprFunc(build(*[f.ast for f in funcs]))
    sampled = [f for f in funcs if isinstance(f, SampledFunc)]
    knots = sampled[0].knots
    lo = max(f.domain[0] for f in sampled)
    hi = min(f.domain[1] for f in sampled)
    knots = knots[(knots >= lo) & (knots <= hi)]
    return SampledFunc(knots, fn(*[np.broadcast_to(f(knots), knots.shape)
                                   for f in funcs]))
