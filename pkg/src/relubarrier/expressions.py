"""Dynamics expressions: parsing, evaluation, interval enclosure.

The grammar covers variables x1..xn, decimal constants, + - * /, integer
powers via ^, and the functions sin, cos, tanh, exp, ln.  Precedence is
^ > unary minus > * / > + - with left-associative binary operators; the
exponent of ^ must be a non-negative integer literal.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import (DomainError, ExpressionSyntaxError, UnknownIdentifier,
                     VariableOutOfRange)

FUNCTIONS = ("sin", "cos", "tanh", "exp", "ln")


class Expr:
    """Base class for expression nodes."""
    __slots__ = ()


@dataclass(frozen=True)
class Var(Expr):
    index: int          # zero-based


@dataclass(frozen=True)
class Const(Expr):
    value: float


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True)
class Func(Expr):
    name: str
    arg: Expr


# -- parsing -------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
  | (?P<ws>\s+)
""", re.VERBOSE)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, dim):
        self.text = text
        self.dim = dim
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, val, pos = self.peek()
        if kind != "op" or val != op:
            raise ExpressionSyntaxError(f"expected {op!r}", pos)
        return self.advance()

    def parse(self):
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected {val!r}", pos)
        return e

    def expr(self):
        e = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.advance()
                rhs = self.term()
                e = Add(e, rhs) if val == "+" else Sub(e, rhs)
            else:
                return e

    def term(self):
        e = self.unary()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.advance()
                rhs = self.unary()
                e = Mul(e, rhs) if val == "*" else Div(e, rhs)
            else:
                return e

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        e = self.atom()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val == "^":
                self.advance()
                nkind, nval, npos = self.peek()
                if nkind != "num" or not re.fullmatch(r"\d+", nval):
                    raise ExpressionSyntaxError(
                        "exponent must be a non-negative integer literal", npos)
                self.advance()
                e = Pow(e, int(nval))
            else:
                return e

    def atom(self):
        kind, val, pos = self.advance()
        if kind == "num":
            return Const(float(val))
        if kind == "ident":
            nkind, nval, _ = self.peek()
            if nkind == "op" and nval == "(":
                if val not in FUNCTIONS:
                    raise UnknownIdentifier(f"unknown function {val!r} at position {pos}")
                self.advance()
                arg = self.expr()
                self.expect_op(")")
                return Func(val, arg)
            m = re.fullmatch(r"x(\d+)", val)
            if m is None:
                raise UnknownIdentifier(f"unknown identifier {val!r} at position {pos}")
            idx = int(m.group(1))
            if not 1 <= idx <= self.dim:
                raise VariableOutOfRange(
                    f"variable {val} outside x1..x{self.dim} at position {pos}")
            return Var(idx - 1)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        raise ExpressionSyntaxError(f"unexpected {val!r}", pos)


def parse_expression(text: str, dim: int) -> Expr:
    """Parse expression text over variables x1..x<dim>."""
    return _Parser(text, dim).parse()


# -- evaluation ----------------------------------------------------------------

def evaluate(e: Expr, x):
    """Evaluate at a point (n,) -> float, or at rows of (m, n) -> (m,)."""
    x = np.asarray(x, dtype=float)
    batched = x.ndim == 2
    val = _eval(e, x, batched)
    return val if batched else float(val)


def _eval(e, x, batched):
    if isinstance(e, Var):
        return x[:, e.index] if batched else x[e.index]
    if isinstance(e, Const):
        return np.full(x.shape[0], e.value) if batched else e.value
    if isinstance(e, Neg):
        return -_eval(e.arg, x, batched)
    if isinstance(e, Add):
        return _eval(e.left, x, batched) + _eval(e.right, x, batched)
    if isinstance(e, Sub):
        return _eval(e.left, x, batched) - _eval(e.right, x, batched)
    if isinstance(e, Mul):
        return _eval(e.left, x, batched) * _eval(e.right, x, batched)
    if isinstance(e, Div):
        num = _eval(e.left, x, batched)
        den = _eval(e.right, x, batched)
        if np.any(np.asarray(den) == 0.0):
            raise DomainError("division by zero")
        return num / den
    if isinstance(e, Pow):
        return _eval(e.base, x, batched) ** e.exponent
    if isinstance(e, Func):
        v = _eval(e.arg, x, batched)
        if e.name == "ln":
            if np.any(np.asarray(v) <= 0.0):
                raise DomainError("ln of a non-positive value")
            return np.log(v)
        return {"sin": np.sin, "cos": np.cos, "tanh": np.tanh, "exp": np.exp}[e.name](v)
    raise TypeError(f"not an expression node: {e!r}")


# -- interval arithmetic ---------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo <= self.hi):
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    def contains(self, v, slack: float = 0.0) -> bool:
        return self.lo - slack <= v <= self.hi + slack

    def __iter__(self):
        return iter((self.lo, self.hi))


_TWO_PI = 2.0 * math.pi


def _has_multiple_of(period_offset, lo, hi):
    """Is there an integer k with period_offset + 2*pi*k in [lo, hi]?"""
    k_lo = math.ceil((lo - period_offset) / _TWO_PI)
    return period_offset + _TWO_PI * k_lo <= hi


def _iv_sin(lo, hi):
    if hi - lo >= _TWO_PI:
        return (-1.0, 1.0)
    out_hi = 1.0 if _has_multiple_of(math.pi / 2.0, lo, hi) else max(math.sin(lo), math.sin(hi))
    out_lo = -1.0 if _has_multiple_of(-math.pi / 2.0, lo, hi) else min(math.sin(lo), math.sin(hi))
    return (out_lo, out_hi)


def _iv_cos(lo, hi):
    if hi - lo >= _TWO_PI:
        return (-1.0, 1.0)
    out_hi = 1.0 if _has_multiple_of(0.0, lo, hi) else max(math.cos(lo), math.cos(hi))
    out_lo = -1.0 if _has_multiple_of(math.pi, lo, hi) else min(math.cos(lo), math.cos(hi))
    return (out_lo, out_hi)


def _iv_pow(lo, hi, k):
    if k == 0:
        return (1.0, 1.0)
    if k % 2 == 1:
        return (lo ** k, hi ** k)
    top = max(lo ** k, hi ** k)
    if lo <= 0.0 <= hi:
        return (0.0, top)
    return (min(lo ** k, hi ** k), top)


def _iv(e, box):
    if isinstance(e, Var):
        return (box[e.index, 0], box[e.index, 1])
    if isinstance(e, Const):
        return (e.value, e.value)
    if isinstance(e, Neg):
        lo, hi = _iv(e.arg, box)
        return (-hi, -lo)
    if isinstance(e, Add):
        a, b = _iv(e.left, box), _iv(e.right, box)
        return (a[0] + b[0], a[1] + b[1])
    if isinstance(e, Sub):
        a, b = _iv(e.left, box), _iv(e.right, box)
        return (a[0] - b[1], a[1] - b[0])
    if isinstance(e, Mul):
        (al, ah), (bl, bh) = _iv(e.left, box), _iv(e.right, box)
        prods = (al * bl, al * bh, ah * bl, ah * bh)
        return (min(prods), max(prods))
    if isinstance(e, Div):
        (al, ah), (bl, bh) = _iv(e.left, box), _iv(e.right, box)
        if bl <= 0.0 <= bh:
            raise DomainError("interval division by an interval containing zero")
        quots = (al / bl, al / bh, ah / bl, ah / bh)
        return (min(quots), max(quots))
    if isinstance(e, Pow):
        lo, hi = _iv(e.base, box)
        return _iv_pow(lo, hi, e.exponent)
    if isinstance(e, Func):
        lo, hi = _iv(e.arg, box)
        if e.name == "sin":
            return _iv_sin(lo, hi)
        if e.name == "cos":
            return _iv_cos(lo, hi)
        if e.name == "tanh":
            return (math.tanh(lo), math.tanh(hi))
        if e.name == "exp":
            return (math.exp(lo), math.exp(hi))
        if e.name == "ln":
            if lo <= 0.0:
                raise DomainError("ln over an interval reaching <= 0")
            return (math.log(lo), math.log(hi))
    raise TypeError(f"not an expression node: {e!r}")


def interval_evaluate(e: Expr, box) -> Interval:
    """Natural interval extension of e over a box given as an (n, 2) array.

    Monotone functions use exact endpoint images; sin/cos detect interior
    extrema; even powers account for the minimum at zero.
    """
    box = np.asarray(box, dtype=float)
    lo, hi = _iv(e, box)
    return Interval(float(lo), float(hi))


# -- structure ----------------------------------------------------------------

def _linear_form(e, dim):
    """(coeffs, const) when e is degree <= 1, else None."""
    if isinstance(e, Var):
        c = np.zeros(dim)
        c[e.index] = 1.0
        return c, 0.0
    if isinstance(e, Const):
        return np.zeros(dim), e.value
    if isinstance(e, Neg):
        f = _linear_form(e.arg, dim)
        return None if f is None else (-f[0], -f[1])
    if isinstance(e, (Add, Sub)):
        a = _linear_form(e.left, dim)
        b = _linear_form(e.right, dim)
        if a is None or b is None:
            return None
        sign = 1.0 if isinstance(e, Add) else -1.0
        return a[0] + sign * b[0], a[1] + sign * b[1]
    if isinstance(e, Mul):
        a = _linear_form(e.left, dim)
        b = _linear_form(e.right, dim)
        if a is None or b is None:
            return None
        if not a[0].any():
            return a[1] * b[0], a[1] * b[1]
        if not b[0].any():
            return b[1] * a[0], b[1] * a[1]
        return None
    if isinstance(e, Div):
        a = _linear_form(e.left, dim)
        b = _linear_form(e.right, dim)
        if a is None or b is None or b[0].any() or b[1] == 0.0:
            return None
        return a[0] / b[1], a[1] / b[1]
    if isinstance(e, Pow):
        if e.exponent == 1:
            return _linear_form(e.base, dim)
        f = _linear_form(e.base, dim)
        if e.exponent == 0:
            return np.zeros(dim), 1.0
        if f is not None and not f[0].any():
            return np.zeros(dim), f[1] ** e.exponent
        return None
    if isinstance(e, Func):
        f = _linear_form(e.arg, dim)
        if f is None or f[0].any():
            return None
        try:
            value = evaluate(e, np.zeros(dim))
        except DomainError:
            return None
        return np.zeros(dim), value
    raise TypeError(f"not an expression node: {e!r}")


def to_text(e: Expr) -> str:
    """Canonical text that reparses to a structurally identical tree."""
    return _print(e)


_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}


def _prec(e):
    return _PREC.get(type(e), 5)


def _print(e):
    if isinstance(e, Var):
        return f"x{e.index + 1}"
    if isinstance(e, Const):
        return repr(e.value)
    if isinstance(e, Neg):
        inner = _print(e.arg)
        return f"-({inner})" if _prec(e.arg) < 3 else f"-{inner}"
    if isinstance(e, (Add, Sub, Mul, Div)):
        op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(e)]
        mine = _prec(e)
        left = _print(e.left)
        if _prec(e.left) < mine:
            left = f"({left})"
        right = _print(e.right)
        if _prec(e.right) <= mine:
            right = f"({right})"
        return f"{left} {op} {right}"
    if isinstance(e, Pow):
        base = _print(e.base)
        if _prec(e.base) < 4:
            base = f"({base})"
        return f"{base}^{e.exponent}"
    if isinstance(e, Func):
        return f"{e.name}({_print(e.arg)})"
    raise TypeError(f"not an expression node: {e!r}")


# -- systems -------------------------------------------------------------------

@dataclass(frozen=True)
class DynamicsSystem:
    """x' = f(x) with one expression per component."""

    exprs: tuple[Expr, ...]
    dim: int
    texts: tuple[str, ...]

    @classmethod
    def parse(cls, components, dim: int | None = None) -> "DynamicsSystem":
        components = list(components)
        if dim is None:
            dim = len(components)
        exprs = tuple(parse_expression(t, dim) for t in components)
        return cls(exprs=exprs, dim=dim, texts=tuple(components))

    def __call__(self, x) -> np.ndarray:
        return np.array([evaluate(e, x) for e in self.exprs])

    def eval_interval(self, box) -> np.ndarray:
        """(len(exprs), 2) array of component enclosures."""
        out = np.empty((len(self.exprs), 2))
        for i, e in enumerate(self.exprs):
            iv = interval_evaluate(e, box)
            out[i] = (iv.lo, iv.hi)
        return out


def is_affine(sys: DynamicsSystem):
    """(F, c) with f(x) = F x + c when every component is degree <= 1,
    otherwise None."""
    rows, consts = [], []
    for e in sys.exprs:
        f = _linear_form(e, sys.dim)
        if f is None:
            return None
        rows.append(f[0])
        consts.append(f[1])
    return np.array(rows), np.array(consts)
