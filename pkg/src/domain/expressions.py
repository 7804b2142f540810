"""Scalar expression language over chart coordinates.

Grammar (whitespace insignificant)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | power
    power  := base ('^' ['-'] integer)?
    base   := number | 'x' digit+ | func '(' expr ')' | '(' expr ')'
    func   := sin | cos | exp | log | sqrt

Parsed trees are sympy expressions, so differentiation is exact and evaluation
goes through ``sympy.lambdify``. Unary minus and signed exponents extend the
published grammar so that printed expressions parse back.
"""

import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, NamedTuple, Sequence, Tuple

import numpy as np
import sympy as sp
from sympy.printing.precedence import PRECEDENCE
from sympy.printing.str import StrPrinter

from .exceptions import ChartError, ExpressionSyntaxError, UnknownIdentifierError

FUNCTIONS = {
    "sin": sp.sin,
    "cos": sp.cos,
    "exp": sp.exp,
    "log": sp.log,
    "sqrt": sp.sqrt,
}

TOKEN_PATTERN = re.compile(
    r"(?P<number>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r"|(?P<space>\s+)"
)


@lru_cache(maxsize=None)
def coordinate_symbols(dim: int) -> Tuple[sp.Symbol, ...]:
    """x1..x_dim as real sympy symbols (shared across the package)."""
    return tuple(sp.Symbol(f"x{i}", real=True) for i in range(1, dim + 1))


# =========================================================================
# TOKENIZER AND PARSER
# =========================================================================


class Token(NamedTuple):
    kind: str
    text: str
    offset: int


def tokenize(text: str) -> List[Token]:
    tokens = []
    position = 0
    while position < len(text):
        match = TOKEN_PATTERN.match(text, position)
        if match is None:
            raise ExpressionSyntaxError(f"unexpected character '{text[position]}'", position)
        kind = match.lastgroup
        if kind != "space":
            tokens.append(Token(kind, match.group(), position))
        position = match.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class _Parser:
    """Recursive-descent parser producing sympy trees."""

    def __init__(self, text: str, dim: int):
        self.tokens = tokenize(text)
        self.position = 0
        self.symbols = coordinate_symbols(dim)

    @property
    def current(self) -> Token:
        return self.tokens[self.position]

    def _advance(self) -> Token:
        token = self.current
        self.position += 1
        return token

    def _expect(self, text: str) -> Token:
        token = self.current
        if token.text != text:
            found = "end of input" if token.kind == "end" else f"'{token.text}'"
            raise ExpressionSyntaxError(f"expected '{text}' but found {found}", token.offset)
        return self._advance()

    def parse(self) -> sp.Expr:
        expression = self.expr()
        if self.current.kind != "end":
            raise ExpressionSyntaxError(f"unexpected '{self.current.text}'", self.current.offset)
        return expression

    def expr(self) -> sp.Expr:
        result = self.term()
        while self.current.text in ("+", "-"):
            operator = self._advance().text
            right = self.term()
            result = result + right if operator == "+" else result - right
        return result

    def term(self) -> sp.Expr:
        result = self.factor()
        while self.current.text in ("*", "/"):
            operator = self._advance().text
            right = self.factor()
            result = result * right if operator == "*" else result / right
        return result

    def factor(self) -> sp.Expr:
        if self.current.text == "-":
            self._advance()
            return -self.factor()
        return self.power()

    def power(self) -> sp.Expr:
        base = self.base()
        if self.current.text != "^":
            return base
        self._advance()
        sign = 1
        if self.current.text == "-":
            self._advance()
            sign = -1
        token = self.current
        if token.kind != "number" or not token.text.isdigit():
            raise ExpressionSyntaxError("exponent must be an integer", token.offset)
        self._advance()
        return base ** (sign * int(token.text))

    def base(self) -> sp.Expr:
        token = self.current
        if token.kind == "number":
            self._advance()
            if re.fullmatch(r"\d+", token.text):
                return sp.Integer(int(token.text))
            return sp.Float(float(token.text))
        if token.kind == "name":
            self._advance()
            if token.text in FUNCTIONS:
                self._expect("(")
                argument = self.expr()
                self._expect(")")
                return FUNCTIONS[token.text](argument)
            coordinate = re.fullmatch(r"x(\d+)", token.text)
            if coordinate:
                index = int(coordinate.group(1))
                if 1 <= index <= len(self.symbols):
                    return self.symbols[index - 1]
            raise UnknownIdentifierError(token.text, token.offset)
        if token.text == "(":
            self._advance()
            inner = self.expr()
            self._expect(")")
            return inner
        found = "end of input" if token.kind == "end" else f"'{token.text}'"
        raise ExpressionSyntaxError(f"unexpected {found}", token.offset)


# =========================================================================
# PRINTER
# =========================================================================


class ExpressionPrinter(StrPrinter):
    """Prints sympy trees back into the expression grammar."""

    def _print_Pow(self, expr, rational=False):
        base, exponent = expr.as_base_exp()
        if exponent == sp.S.Half:
            return f"sqrt({self._print(base)})"
        if exponent == -sp.S.Half:
            return f"1/sqrt({self._print(base)})"
        if exponent.is_Integer:
            if exponent < 0:
                return f"1/{self._print(sp.Pow(base, -exponent))}"
            return f"{self.parenthesize(base, PRECEDENCE['Pow'], strict=True)}^{exponent}"
        if exponent.is_Rational and exponent.q == 2:
            return f"sqrt({self._print(base)})^{exponent.p}"
        return f"exp({self._print(exponent * sp.log(base))})"

    def _print_Exp1(self, expr):
        return "exp(1)"

    def _print_Float(self, expr):
        return repr(float(expr))

    def _print_Symbol(self, expr):
        return expr.name


_PRINTER = ExpressionPrinter()


def print_expression(expression: sp.Expr) -> str:
    return _PRINTER.doprint(sp.sympify(expression))


# =========================================================================
# SCALAR EXPRESSIONS
# =========================================================================


@lru_cache(maxsize=8192)
def compile_expressions(expressions: Tuple[sp.Expr, ...], dim: int) -> Callable:
    """Vectorised evaluator: points (N, dim) -> array (N, len(expressions))."""
    symbols = coordinate_symbols(dim)
    function = sp.lambdify(symbols, list(expressions), modules="numpy")

    def evaluate(points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        count = points.shape[0]
        with np.errstate(all="ignore"):
            values = function(*points.T)
        columns = [np.broadcast_to(np.asarray(v, dtype=float), (count,)) for v in values]
        if not columns:
            return np.zeros((count, 0))
        return np.stack(columns, axis=1)

    return evaluate


@dataclass(frozen=True)
class ScalarExpression:
    """An expression tree over the coordinates x1..x_dim of a chart."""

    expr: sp.Expr
    dim: int

    def differentiate(self, i: int) -> "ScalarExpression":
        return differentiate(self, i)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        return compile_expressions((self.expr,), self.dim)(points)[:, 0]

    def at(self, point: Sequence[float]) -> float:
        return float(self.evaluate(np.asarray(point, dtype=float)[None, :])[0])

    @property
    def is_constant(self) -> bool:
        return not self.expr.free_symbols

    def __str__(self) -> str:
        return print_expression(self.expr)


def parse_expression(text: str, chart) -> ScalarExpression:
    """Parse `text` over the coordinates of `chart` (a Chart or a dimension)."""
    dim = chart if isinstance(chart, int) else chart.dim
    return ScalarExpression(_Parser(text, dim).parse(), dim)


def differentiate(e: ScalarExpression, i: int) -> ScalarExpression:
    """Exact partial derivative with respect to x_i (1-based)."""
    if not 1 <= i <= e.dim:
        raise ChartError(f"coordinate index {i} outside 1..{e.dim}")
    return ScalarExpression(sp.diff(e.expr, coordinate_symbols(e.dim)[i - 1]), e.dim)


def finite_difference(e: ScalarExpression, i: int, x: Sequence[float], chart=None) -> float:
    """Central difference with one Richardson refinement.

    Step h = max(1e-6, 1e-6 |x_i|); the result is (4 D(h/2) - D(h)) / 3.
    """
    point = np.asarray(x, dtype=float)
    if chart is not None and not chart.contains(point):
        raise ChartError(f"point {point.tolist()} lies outside the chart")
    if not 1 <= i <= e.dim:
        raise ChartError(f"coordinate index {i} outside 1..{e.dim}")
    step = max(1e-6, 1e-6 * abs(point[i - 1]))
    direction = np.zeros_like(point)
    direction[i - 1] = 1.0

    def central(h: float) -> float:
        stencil = np.stack([point + h * direction, point - h * direction])
        forward, backward = e.evaluate(stencil)
        return (forward - backward) / (2.0 * h)

    coarse = central(step)
    fine = central(step / 2.0)
    result = (4.0 * fine - coarse) / 3.0
    if not math.isfinite(result):
        raise ChartError(f"non-finite derivative at {point.tolist()}")
    return float(result)
