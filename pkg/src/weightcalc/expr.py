"""Weight expressions over the radius variable ``r``.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := base ('^' factor)?
    base   := number | 'r' | '(' expr ')' | ('exp' | 'log') '(' expr ')'

Expressions are evaluated in the log domain: every node produces a pair
``(sign, log|value|)`` so that weights such as ``exp(r^2)`` stay finite far
beyond the range of a double.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "Num",
    "Var",
    "BinOp",
    "Call",
    "Expr",
    "WeightSyntaxError",
    "UnknownIdentifierError",
    "parse_weight_expr",
    "eval_signed_log",
    "eval_value",
]


class WeightSyntaxError(ValueError):
    """Malformed weight expression; ``offset`` is the 0-based character index."""

    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}")


class UnknownIdentifierError(WeightSyntaxError):
    pass


@dataclass(frozen=True)
class Num:
    value: float
    text: str

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True)
class Var:
    def __str__(self) -> str:
        return "r"


@dataclass(frozen=True)
class BinOp:
    op: str  # add, sub, mul, div, pow
    left: "Expr"
    right: "Expr"

    def __str__(self) -> str:
        return f"{self.op}({self.left}, {self.right})"


@dataclass(frozen=True)
class Call:
    name: str  # exp, log
    arg: "Expr"

    def __str__(self) -> str:
        return f"{self.name}({self.arg})"


Expr = Union[Num, Var, BinOp, Call]

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)

_FUNCTIONS = ("exp", "log")
_BINOPS = {"+": "add", "-": "sub", "*": "mul", "/": "div"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise WeightSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def _fail(self, what: str = None):
        kind, value, pos = self.tok
        if what is None:
            what = "unexpected end of input" if kind == "end" else f"unexpected {value!r}"
        raise WeightSyntaxError(what, pos, self.text)

    def _expect(self, value: str):
        if self.tok[1] != value or self.tok[0] != "op":
            self._fail(f"expected {value!r}")
        self.i += 1

    def parse(self) -> Expr:
        node = self.expr()
        if self.tok[0] != "end":
            self._fail()
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = _BINOPS[self.tok[1]]
            self.i += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = _BINOPS[self.tok[1]]
            self.i += 1
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        node = self.base()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.i += 1
            node = BinOp("pow", node, self.factor())
        return node

    def base(self) -> Expr:
        kind, value, pos = self.tok
        if kind == "num":
            self.i += 1
            return Num(float(value), value)
        if kind == "name":
            if value == "r":
                self.i += 1
                return Var()
            if value in _FUNCTIONS:
                self.i += 1
                self._expect("(")
                arg = self.expr()
                self._expect(")")
                return Call(value, arg)
            raise UnknownIdentifierError(f"unknown identifier {value!r}", pos, self.text)
        if kind == "op" and value == "(":
            self.i += 1
            node = self.expr()
            self._expect(")")
            return node
        self._fail()


def parse_weight_expr(text: str) -> Expr:
    """Parse ``text`` into an expression tree.

    >>> str(parse_weight_expr("exp(1/(1-r))"))
    'exp(div(1, sub(1, r)))'
    """
    return _Parser(text).parse()


# -- log-domain evaluation ---------------------------------------------------


def _signed_add(s1, l1, s2, l2):
    hi = np.maximum(l1, l2)
    lo = np.minimum(l1, l2)
    first = l1 >= l2
    s_hi = np.where(first, s1, s2)
    s_lo = np.where(first, s2, s1)
    d = np.where(np.isneginf(lo), -np.inf, lo - hi)
    same = (s_hi == s_lo) | (s_lo == 0)
    # -expm1 keeps 1 - r accurate when r is within a few ulps of 1
    out = hi + np.where(same, np.log1p(np.exp(d)), np.log(-np.expm1(d)))
    out = np.where(np.isneginf(hi), -np.inf, out)
    sign = np.where(np.isneginf(out), 0.0, s_hi)
    return sign, out


def _eval(node: Expr, r: np.ndarray):
    if isinstance(node, Num):
        v = np.full_like(r, node.value)
        return np.sign(v), np.log(np.abs(v))
    if isinstance(node, Var):
        return np.sign(r), np.log(np.abs(r))
    if isinstance(node, Call):
        s, l = _eval(node.arg, r)
        if node.name == "exp":
            value = s * np.exp(l)
            return np.ones_like(r), value
        # log: defined for positive arguments only
        l = np.where(s > 0, l, np.nan)
        return np.sign(l), np.log(np.abs(l))
    s1, l1 = _eval(node.left, r)
    if node.op == "pow" and isinstance(node.right, Num):
        return _pow(s1, l1, np.full_like(r, node.right.value))
    s2, l2 = _eval(node.right, r)
    if node.op == "add":
        return _signed_add(s1, l1, s2, l2)
    if node.op == "sub":
        return _signed_add(s1, l1, -s2, l2)
    if node.op == "mul":
        out = l1 + l2
        return np.where(np.isneginf(out), 0.0, s1 * s2), out
    if node.op == "div":
        out = np.where(s2 == 0, np.inf, l1 - l2)
        return np.where(np.isneginf(out), 0.0, s1 * s2), out
    e = s2 * np.exp(l2)
    # the exponent went through exp(log); snap values that are integers up to rounding
    near = np.round(e)
    e = np.where(np.abs(e - near) <= 8 * np.finfo(float).eps * np.abs(e), near, e)
    return _pow(s1, l1, e)


def _pow(s1, l1, e):
    out = np.where(s1 == 0, np.where(e > 0, -np.inf, np.where(e == 0, 0.0, np.inf)), e * l1)
    integral = np.floor(e) == e
    odd = integral & (np.mod(e, 2.0) == 1.0)
    sign = np.where(s1 > 0, 1.0, np.where(s1 == 0, np.where(e == 0, 1.0, 0.0), np.where(odd, -1.0, 1.0)))
    out = np.where((s1 < 0) & ~integral, np.nan, out)
    sign = np.where(np.isneginf(out), 0.0, sign)
    return sign, out


def eval_signed_log(node: Expr, r) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate ``node`` at radii ``r`` as ``(sign, log|value|)``.

    Zero values have sign 0 and log-magnitude ``-inf``; domain errors give NaN.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    with np.errstate(all="ignore"):
        s, l = _eval(node, r)
    s = np.broadcast_to(s, r.shape).astype(float)
    l = np.broadcast_to(l, r.shape).astype(float)
    return s, l


def eval_value(node: Expr, r) -> np.ndarray:
    """Plain-valued evaluation (overflows to ``inf`` where the log form does not)."""
    s, l = eval_signed_log(node, r)
    with np.errstate(all="ignore"):
        return s * np.exp(l)
