"""Expression front end: metric components and potentials as plain text.

Grammar (EBNF), with standard precedence power > unary minus > mul/div >
add/sub, left association for the binary four, right association for '^':

    expr    = term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = "-" unary | power ;
    power   = atom [ "^" unary ] ;
    atom    = NUMBER | VARIABLE | FUNCTION "(" expr ")" | "(" expr ")" ;

    VARIABLE = "x0" | "x1" | "x2" | "x3" ;
    FUNCTION = "exp" | "log" | "sin" | "cos" | "sqrt" | "atan" ;
    NUMBER   = decimal literal, optional fraction and exponent ;

Exponents must be constant subexpressions; they may be rational (``x0^(1/3)``
parses and evaluates, with the usual positive-base requirement for
fractional powers).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from ..errors import (EvaluationDomainError, ExpressionSyntaxError,
                      UnknownIdentifierError)
from . import algebra

FUNCTIONS = ("exp", "log", "sin", "cos", "sqrt", "atan")
VARIABLES = ("x0", "x1", "x2", "x3")


class Expression:
    """Base class of AST nodes; dataclass subclasses compare structurally."""

    __slots__ = ()


@dataclass(frozen=True)
class Num(Expression):
    value: float


@dataclass(frozen=True)
class Var(Expression):
    index: int


@dataclass(frozen=True)
class Neg(Expression):
    arg: Expression


@dataclass(frozen=True)
class Add(Expression):
    left: Expression
    right: Expression


@dataclass(frozen=True)
class Sub(Expression):
    left: Expression
    right: Expression


@dataclass(frozen=True)
class Mul(Expression):
    left: Expression
    right: Expression


@dataclass(frozen=True)
class Div(Expression):
    left: Expression
    right: Expression


@dataclass(frozen=True)
class Pow(Expression):
    base: Expression
    exponent: Expression


@dataclass(frozen=True)
class Call(Expression):
    func: str
    arg: Expression


_TOKEN = re.compile(r"""
    (?P<num>(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
  | (?P<ws>\s+)
""", re.VERBOSE)


def _tokenize(src):
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ExpressionSyntaxError(f"unexpected character {src[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src):
        self.src = src
        self.tokens = _tokenize(src)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op):
        kind, text, off = self.peek()
        if kind != "op" or text != op:
            raise ExpressionSyntaxError(f"unexpected token {text or 'end of input'!r}",
                                        off, expected=(repr(op),))
        return self.advance()

    def parse(self):
        node = self.expr()
        kind, text, off = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected token {text!r}", off,
                                        expected=("operator", "end of input"))
        return node

    def expr(self):
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                rhs = self.term()
                node = Add(node, rhs) if text == "+" else Sub(node, rhs)
            else:
                return node

    def term(self):
        node = self.unary()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                rhs = self.unary()
                node = Mul(node, rhs) if text == "*" else Div(node, rhs)
            else:
                return node

    def unary(self):
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            return Pow(base, self.unary())
        return base

    def atom(self):
        kind, text, off = self.advance()
        if kind == "num":
            return Num(float(text))
        if kind == "ident":
            if text in VARIABLES:
                return Var(int(text[1]))
            if text in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(text, arg)
            raise UnknownIdentifierError(text, off)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExpressionSyntaxError(
            f"unexpected token {text or 'end of input'!r}", off,
            expected=("number", "variable", "function", "'('"))


def parse_expression(src: str) -> Expression:
    """Parse UTF-8 source text into an AST."""
    return _Parser(src).parse()


# --------------------------------------------------------------------------
# printing (inverse of parsing up to structural equality)

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4, Num: 5, Var: 5, Call: 5}


def to_source(e: Expression) -> str:
    return _print(e, 0)


def _print(e, parent_prec):
    prec = _PREC[type(e)]
    if isinstance(e, Num):
        s = repr(e.value)
        if s.endswith(".0"):
            s = s[:-2]
        text = s
        prec = 5 if e.value >= 0 else 3
    elif isinstance(e, Var):
        text = f"x{e.index}"
    elif isinstance(e, Call):
        text = f"{e.func}({_print(e.arg, 0)})"
    elif isinstance(e, Neg):
        text = f"-{_print(e.arg, prec)}"
    elif isinstance(e, Pow):
        # exponent printed at unary precedence: '^' binds its right side tightly
        text = f"{_print(e.base, prec + 1)}^{_print(e.exponent, prec)}"
    else:
        op = {Add: " + ", Sub: " - ", Mul: "*", Div: "/"}[type(e)]
        # left-associative: right child needs parens at equal precedence
        text = f"{_print(e.left, prec)}{op}{_print(e.right, prec + 1)}"
    if prec < parent_prec:
        return f"({text})"
    return text


# --------------------------------------------------------------------------
# evaluation

def constant_value(e: Expression):
    """Fold a variable-free expression to a float, or return None."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return None
    if isinstance(e, Neg):
        v = constant_value(e.arg)
        return None if v is None else -v
    if isinstance(e, (Add, Sub, Mul, Div)):
        a = constant_value(e.left)
        b = constant_value(e.right)
        if a is None or b is None:
            return None
        return {Add: lambda: a + b, Sub: lambda: a - b,
                Mul: lambda: a * b, Div: lambda: a / b}[type(e)]()
    if isinstance(e, Pow):
        a = constant_value(e.base)
        b = constant_value(e.exponent)
        if a is None or b is None:
            return None
        return a ** b
    if isinstance(e, Call):
        v = constant_value(e.arg)
        if v is None:
            return None
        return {"exp": np.exp, "log": np.log, "sin": np.sin, "cos": np.cos,
                "sqrt": np.sqrt, "atan": np.arctan}[e.func](v)
    raise TypeError(f"not an expression node: {e!r}")


def eval_jets(e: Expression, points: np.ndarray, order: int) -> np.ndarray:
    """Evaluate an expression as jets at a batch of chart points.

    Parameters
    ----------
    points : (..., 4) array of chart coordinates
    order  : jet truncation order

    Returns
    -------
    (..., ncoef(order)) coefficient array.
    """
    tab = algebra.tables(order)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    return _eval(e, points, tab)


def _eval(e, pts, tab):
    if isinstance(e, Num):
        return algebra.const(e.value, tab.order, shape=pts.shape[:-1])
    if isinstance(e, Var):
        return algebra.variable(pts, e.index, tab.order)
    if isinstance(e, Neg):
        return -_eval(e.arg, pts, tab)
    if isinstance(e, Add):
        return _eval(e.left, pts, tab) + _eval(e.right, pts, tab)
    if isinstance(e, Sub):
        return _eval(e.left, pts, tab) - _eval(e.right, pts, tab)
    if isinstance(e, Mul):
        return algebra.mul(_eval(e.left, pts, tab), _eval(e.right, pts, tab), tab)
    if isinstance(e, Div):
        return algebra.div(_eval(e.left, pts, tab), _eval(e.right, pts, tab), tab)
    if isinstance(e, Pow):
        r = constant_value(e.exponent)
        if r is None:
            raise EvaluationDomainError(
                "power exponents must be constant expressions")
        return algebra.jet_pow(_eval(e.base, pts, tab), r, tab)
    if isinstance(e, Call):
        arg = _eval(e.arg, pts, tab)
        fn = {"exp": algebra.jet_exp, "log": algebra.jet_log,
              "sin": algebra.jet_sin, "cos": algebra.jet_cos,
              "sqrt": algebra.jet_sqrt, "atan": algebra.jet_atan}[e.func]
        return fn(arg, tab)
    raise TypeError(f"not an expression node: {e!r}")
