"""Recursive-descent parser and evaluator for target-function expressions.

Grammar (whitespace-insensitive)::

    expr   := term (("+" | "-") term)*
    term   := factor (("*" | "/") factor)*
    factor := "-" factor | power
    power  := atom ("^" factor)?          # right-associative
    atom   := NUMBER | "pi" | "x" | ident "(" expr ("," expr)* ")" | "(" expr ")"

``^`` binds tighter than unary minus applied to its base, so ``-x^2``
is ``-(x^2)``.  Functions: sin, cos, exp, ln, tanh, abs, softplus,
relu, reluN for integer N >= 1 (e.g. relu2), and indicator(lo, hi)
which is 1 where lo <= x <= hi.  Errors carry source positions.
"""

from __future__ import annotations

import difflib
import math
import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from kram.space import TargetFunction

__all__ = [
    "Expr",
    "Num",
    "Pi",
    "Var",
    "Neg",
    "Bin",
    "Call",
    "ExprSyntaxError",
    "DomainEvalError",
    "parse",
    "to_source",
    "eval_expr",
    "eval_expr_array",
    "expression_target",
]

_FUNCTION_ARITY = {
    "sin": 1,
    "cos": 1,
    "exp": 1,
    "ln": 1,
    "tanh": 1,
    "abs": 1,
    "softplus": 1,
    "relu": 1,
    "indicator": 2,
}
_RELU_K = re.compile(r"relu([1-9][0-9]*)\Z")
_KNOWN_NAMES = sorted(_FUNCTION_ARITY) + ["pi", "x", "relu2", "relu3", "relu4"]


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        self.line = line
        self.col = col
        super().__init__(f"{message} (line {line}, column {col})")


class DomainEvalError(ValueError):
    """Evaluation hit a point where the expression is undefined."""

    def __init__(self, message: str, span: tuple[int, int], fragment: str):
        self.span = span
        self.fragment = fragment
        super().__init__(f"{message} in '{fragment}' (columns {span[0] + 1}..{span[1]})")


@dataclass(frozen=True)
class Expr:
    span: tuple[int, int] = field(default=(0, 0), compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Num(Expr):
    value: float = 0.0


@dataclass(frozen=True)
class Pi(Expr):
    pass


@dataclass(frozen=True)
class Var(Expr):
    pass


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr = None  # type: ignore[assignment]


@dataclass(frozen=True)
class Bin(Expr):
    op: str = ""
    left: Expr = None  # type: ignore[assignment]
    right: Expr = None  # type: ignore[assignment]


@dataclass(frozen=True)
class Call(Expr):
    name: str = ""
    args: tuple[Expr, ...] = ()


@dataclass(frozen=True)
class _Token:
    kind: str  # NUMBER, IDENT, OP, EOF
    text: str
    pos: int
    line: int
    col: int


_NUMBER_RE = re.compile(r"(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_OPS = set("+-*/^(),")


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    i, line, col = 0, 1, 1
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        m = _NUMBER_RE.match(source, i)
        if m:
            tokens.append(_Token("NUMBER", m.group(), i, line, col))
            col += m.end() - i
            i = m.end()
            continue
        m = _IDENT_RE.match(source, i)
        if m:
            tokens.append(_Token("IDENT", m.group(), i, line, col))
            col += m.end() - i
            i = m.end()
            continue
        if ch in _OPS:
            tokens.append(_Token("OP", ch, i, line, col))
            i += 1
            col += 1
            continue
        raise ExprSyntaxError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("EOF", "", n, line, col))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0

    @property
    def cur(self) -> _Token:
        return self.tokens[self.i]

    def _advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def _expect(self, text: str) -> _Token:
        tok = self.cur
        if tok.kind != "OP" or tok.text != text:
            raise ExprSyntaxError(
                f"expected {text!r} but found {tok.text or 'end of input'!r}",
                tok.line,
                tok.col,
            )
        return self._advance()

    def _fail_unknown(self, tok: _Token):
        hints = difflib.get_close_matches(tok.text, _KNOWN_NAMES, n=3)
        extra = f"; did you mean {', '.join(hints)}?" if hints else ""
        raise ExprSyntaxError(f"unknown identifier {tok.text!r}{extra}", tok.line, tok.col)

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.cur
        if tok.kind != "EOF":
            raise ExprSyntaxError(
                f"unexpected trailing input {tok.text!r}", tok.line, tok.col
            )
        return e

    def expr(self) -> Expr:
        node = self.term()
        while self.cur.kind == "OP" and self.cur.text in "+-":
            op = self._advance().text
            right = self.term()
            node = Bin(op=op, left=node, right=right, span=(node.span[0], right.span[1]))
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.cur.kind == "OP" and self.cur.text in "*/":
            op = self._advance().text
            right = self.factor()
            node = Bin(op=op, left=node, right=right, span=(node.span[0], right.span[1]))
        return node

    def factor(self) -> Expr:
        if self.cur.kind == "OP" and self.cur.text == "-":
            tok = self._advance()
            operand = self.factor()
            return Neg(operand=operand, span=(tok.pos, operand.span[1]))
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.cur.kind == "OP" and self.cur.text == "^":
            self._advance()
            exponent = self.factor()
            return Bin(op="^", left=base, right=exponent, span=(base.span[0], exponent.span[1]))
        return base

    def atom(self) -> Expr:
        tok = self.cur
        if tok.kind == "NUMBER":
            self._advance()
            return Num(value=float(tok.text), span=(tok.pos, tok.pos + len(tok.text)))
        if tok.kind == "IDENT":
            self._advance()
            name = tok.text
            if self.cur.kind == "OP" and self.cur.text == "(":
                arity = _FUNCTION_ARITY.get(name)
                if arity is None and _RELU_K.match(name):
                    arity = 1
                if arity is None:
                    self._fail_unknown(tok)
                self._expect("(")
                args = [self.expr()]
                while self.cur.kind == "OP" and self.cur.text == ",":
                    self._advance()
                    args.append(self.expr())
                close = self._expect(")")
                if len(args) != arity:
                    raise ExprSyntaxError(
                        f"{name} takes {arity} argument(s), got {len(args)}",
                        tok.line,
                        tok.col,
                    )
                return Call(name=name, args=tuple(args), span=(tok.pos, close.pos + 1))
            if name == "pi":
                return Pi(span=(tok.pos, tok.pos + 2))
            if name == "x":
                return Var(span=(tok.pos, tok.pos + 1))
            self._fail_unknown(tok)
        if tok.kind == "OP" and tok.text == "(":
            self._advance()
            node = self.expr()
            self._expect(")")
            return node
        raise ExprSyntaxError(
            f"expected a value but found {tok.text or 'end of input'!r}",
            tok.line,
            tok.col,
        )


def parse(source: str) -> Expr:
    """Parse a source string into an expression tree."""
    return _Parser(source).parse()


_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 10, 20, 30, 40, 100


def _prec(e: Expr) -> int:
    if isinstance(e, Bin):
        return {"+": _PREC_ADD, "-": _PREC_ADD, "*": _PREC_MUL, "/": _PREC_MUL, "^": _PREC_POW}[e.op]
    if isinstance(e, Neg):
        return _PREC_NEG
    return _PREC_ATOM


def to_source(e: Expr) -> str:
    """Pretty-print with minimal parentheses; reparsing gives an equal tree."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Pi):
        return "pi"
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Neg):
        inner = to_source(e.operand)
        if _prec(e.operand) < _PREC_NEG:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, Call):
        return f"{e.name}({', '.join(to_source(a) for a in e.args)})"
    if isinstance(e, Bin):
        if e.op == "^":
            left = to_source(e.left)
            if _prec(e.left) < _PREC_ATOM:
                left = f"({left})"
            right = to_source(e.right)
            if _prec(e.right) < _PREC_NEG:
                right = f"({right})"
            return f"{left}^{right}"
        mine = _prec(e)
        left = to_source(e.left)
        if _prec(e.left) < mine:
            left = f"({left})"
        right = to_source(e.right)
        if _prec(e.right) <= mine:
            right = f"({right})"
        return f"{left}{e.op}{right}"
    raise TypeError(f"not an expression node: {e!r}")


def _softplus(x: float) -> float:
    return max(x, 0.0) + math.log1p(math.exp(-abs(x)))


def _domain(e: Expr, message: str) -> DomainEvalError:
    return DomainEvalError(message, e.span, to_source(e))


def eval_expr(e: Expr, x: float) -> float:
    """IEEE double evaluation at a point; domain errors carry the span."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Pi):
        return math.pi
    if isinstance(e, Var):
        return float(x)
    if isinstance(e, Neg):
        return -eval_expr(e.operand, x)
    if isinstance(e, Bin):
        a = eval_expr(e.left, x)
        b = eval_expr(e.right, x)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            if b == 0.0:
                raise _domain(e, "division by zero")
            return a / b
        if e.op == "^":
            try:
                r = a**b
            except (OverflowError, ZeroDivisionError) as exc:
                if isinstance(exc, ZeroDivisionError):
                    raise _domain(e, "zero raised to a negative power") from None
                return math.inf if a > 1 or (a < -1 and b % 2 == 0) else -math.inf
            if isinstance(r, complex):
                raise _domain(e, "negative base with non-integer exponent") from None
            return r
    if isinstance(e, Call):
        return _eval_call(e, x)
    raise TypeError(f"not an expression node: {e!r}")


def _eval_call(e: Call, x: float) -> float:
    name = e.name
    if name == "indicator":
        lo = eval_expr(e.args[0], x)
        hi = eval_expr(e.args[1], x)
        return 1.0 if lo <= x <= hi else 0.0
    v = eval_expr(e.args[0], x)
    if name == "sin":
        return math.sin(v)
    if name == "cos":
        return math.cos(v)
    if name == "exp":
        try:
            return math.exp(v)
        except OverflowError:
            return math.inf
    if name == "ln":
        if v <= 0.0:
            raise _domain(e, "ln of a nonpositive argument")
        return math.log(v)
    if name == "tanh":
        return math.tanh(v)
    if name == "abs":
        return abs(v)
    if name == "softplus":
        return _softplus(v)
    if name == "relu":
        return max(v, 0.0)
    m = _RELU_K.match(name)
    if m:
        return max(v, 0.0) ** int(m.group(1))
    raise TypeError(f"unknown function {name!r}")


def eval_expr_array(e: Expr, xs: np.ndarray) -> np.ndarray:
    """Vectorized evaluation; raises on any domain violation in the batch."""
    xs = np.asarray(xs, dtype=np.float64)
    if isinstance(e, Num):
        return np.full_like(xs, e.value)
    if isinstance(e, Pi):
        return np.full_like(xs, math.pi)
    if isinstance(e, Var):
        return xs.copy()
    if isinstance(e, Neg):
        return -eval_expr_array(e.operand, xs)
    if isinstance(e, Bin):
        a = eval_expr_array(e.left, xs)
        b = eval_expr_array(e.right, xs)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            if np.any(b == 0.0):
                raise _domain(e, "division by zero")
            return a / b
        if e.op == "^":
            with np.errstate(all="ignore"):
                r = np.power(a, b)
            bad = np.isnan(r) & ~(np.isnan(a) | np.isnan(b))
            if np.any(bad):
                raise _domain(e, "negative base with non-integer exponent")
            return r
    if isinstance(e, Call):
        return _eval_call_array(e, xs)
    raise TypeError(f"not an expression node: {e!r}")


def _eval_call_array(e: Call, xs: np.ndarray) -> np.ndarray:
    name = e.name
    if name == "indicator":
        lo = eval_expr_array(e.args[0], xs)
        hi = eval_expr_array(e.args[1], xs)
        return np.where((xs >= lo) & (xs <= hi), 1.0, 0.0)
    v = eval_expr_array(e.args[0], xs)
    if name == "sin":
        return np.sin(v)
    if name == "cos":
        return np.cos(v)
    if name == "exp":
        with np.errstate(over="ignore"):
            return np.exp(v)
    if name == "ln":
        if np.any(v <= 0.0):
            raise _domain(e, "ln of a nonpositive argument")
        return np.log(v)
    if name == "tanh":
        return np.tanh(v)
    if name == "abs":
        return np.abs(v)
    if name == "softplus":
        return np.maximum(v, 0.0) + np.log1p(np.exp(-np.abs(v)))
    if name == "relu":
        return np.maximum(v, 0.0)
    m = _RELU_K.match(name)
    if m:
        return np.maximum(v, 0.0) ** int(m.group(1))
    raise TypeError(f"unknown function {name!r}")


def expression_target(
    source: str | Expr,
    k: int = 1,
    support: Optional[tuple[float, float]] = None,
) -> TargetFunction:
    """Wrap an expression as a TargetFunction for the norm/approx engines."""
    e = parse(source) if isinstance(source, str) else source
    return TargetFunction(
        evaluator=lambda x: eval_expr(e, x),
        order_hint=k,
        support_hint=support,
        array_evaluator=lambda xs: eval_expr_array(e, xs),
    )
