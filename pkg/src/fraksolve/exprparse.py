"""Arithmetic expressions in the variables t and u.

Recursive-descent parser with reported error offsets, a numpy-aware
evaluator that refuses to produce non-finite values silently, and a
printer whose output re-parses to an evaluation-equivalent tree.

Grammar (whitespace-insensitive)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | power
    power  := atom ('^' factor)?
    atom   := NUMBER | 't' | 'u' | NAME '(' expr (',' expr)? ')' | '(' expr ')'

'^' is right-associative and binds tighter than unary minus, so
"2^3^2" is 512 and "-2^2" is -4.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "Expression",
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "ParseError",
    "EvalDomainError",
    "parse",
    "evaluate",
    "to_text",
]

MAX_SOURCE_BYTES = 64 * 1024

_FUNCTIONS = {"sqrt": 1, "ln": 1, "exp": 1, "atan": 1, "abs": 1, "pow": 2}
_VARIABLES = ("t", "u")


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.position = position


class EvalDomainError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expression"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple["Expression", ...]


Expression = Union[Num, Var, Neg, BinOp, Call]

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            rest = text[pos:].lstrip()
            if not rest:
                break
            at = len(text) - len(rest)
            raise ParseError(f"unexpected character {rest[0]!r}", at)
        if m.lastgroup is None:  # trailing whitespace only
            break
        tokens.append((m.lastgroup, m.group(m.lastgroup), m.start(m.lastgroup)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, tokens: list[tuple[str, str, int]]):
        self.tokens = tokens
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def advance(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str) -> None:
        kind, val, pos = self.peek()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}", pos)
        self.advance()

    def parse_expr(self) -> Expression:
        node = self.parse_term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.advance()
                node = BinOp(val, node, self.parse_term())
            else:
                return node

    def parse_term(self) -> Expression:
        node = self.parse_factor()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.advance()
                node = BinOp(val, node, self.parse_factor())
            else:
                return node

    def parse_factor(self) -> Expression:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.advance()
            return Neg(self.parse_factor())
        return self.parse_power()

    def parse_power(self) -> Expression:
        node = self.parse_atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.advance()
            # exponent goes through factor: right-associative, and a unary
            # minus in the exponent ("2^-3") parses naturally
            return BinOp("^", node, self.parse_factor())
        return node

    def parse_atom(self) -> Expression:
        kind, val, pos = self.advance()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val in _VARIABLES:
                return Var(val)
            if val in _FUNCTIONS:
                self.expect_op("(")
                args = [self.parse_expr()]
                while True:
                    k, v, p = self.peek()
                    if k == "op" and v == ",":
                        self.advance()
                        args.append(self.parse_expr())
                    else:
                        break
                self.expect_op(")")
                arity = _FUNCTIONS[val]
                if len(args) != arity:
                    raise ParseError(
                        f"{val} takes {arity} argument{'s' if arity > 1 else ''}, got {len(args)}",
                        pos,
                    )
                return Call(val, tuple(args))
            raise ParseError(f"unknown identifier {val!r}", pos)
        if kind == "op" and val == "(":
            node = self.parse_expr()
            self.expect_op(")")
            return node
        if kind == "end":
            raise ParseError("unexpected end of input", pos)
        raise ParseError(f"unexpected {val!r}", pos)


def parse(text: str) -> Expression:
    """Parse expression text over variables t and u.

    Raises ParseError (with character offset) on malformed input and on
    identifiers other than t, u and the supported functions.
    """
    if not text or not text.strip():
        raise ParseError("empty expression", 0)
    if len(text.encode()) > MAX_SOURCE_BYTES:
        raise ParseError(f"expression longer than {MAX_SOURCE_BYTES} bytes", MAX_SOURCE_BYTES)
    p = _Parser(_tokenize(text))
    node = p.parse_expr()
    kind, val, pos = p.peek()
    if kind != "end":
        raise ParseError(f"unexpected {val!r}", pos)
    return node


def _fmt_args(*vals) -> str:
    return ", ".join(np.format_float_positional(float(v), trim="-") if np.ndim(v) == 0
                     else f"array(min={np.min(v):.6g})" for v in vals)


def _first_bad(mask, *vals):
    """Representative offending argument values where mask is False."""
    idx = np.argmin(mask)  # first False in flat order
    return tuple(
        float(np.broadcast_to(v, np.shape(mask)).ravel()[idx]) if np.ndim(mask) else float(v)
        for v in vals
    )


def _require(mask, what: str, *vals) -> None:
    mask = np.asarray(mask)
    if not mask.all():
        bad = _first_bad(mask, *vals)
        raise EvalDomainError(f"{what}({_fmt_args(*bad)})")


def _finite(result, what: str, *vals):
    ok = np.isfinite(result)
    if not np.all(ok):
        bad = _first_bad(np.asarray(ok), *vals)
        raise EvalDomainError(f"non-finite result from {what}({_fmt_args(*bad)})")
    return result


def _eval(node: Expression, t, u):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return t if node.name == "t" else u
    if isinstance(node, Neg):
        return -_eval(node.operand, t, u)
    if isinstance(node, BinOp):
        a = _eval(node.left, t, u)
        b = _eval(node.right, t, u)
        if node.op == "+":
            return _finite(np.add(a, b), "add", a, b)
        if node.op == "-":
            return _finite(np.subtract(a, b), "subtract", a, b)
        if node.op == "*":
            return _finite(np.multiply(a, b), "multiply", a, b)
        if node.op == "/":
            _require(np.asarray(b) != 0.0, "division by zero: divide", a, b)
            return _finite(np.divide(a, b), "divide", a, b)
        return _pow(a, b)
    if isinstance(node, Call):
        vals = [_eval(arg, t, u) for arg in node.args]
        return _apply_fn(node.fn, vals)
    raise TypeError(f"not an expression node: {node!r}")


def _pow(a, b):
    a_arr, b_arr = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    is_int_exp = b_arr == np.floor(b_arr)
    _require(~((a_arr < 0.0) & ~is_int_exp), "fractional power of negative base: pow", a, b)
    _require(~((a_arr == 0.0) & (b_arr < 0.0)), "zero base with negative exponent: pow", a, b)
    return _finite(np.power(a_arr, b_arr), "pow", a, b)


def _apply_fn(fn: str, vals):
    if fn == "sqrt":
        (a,) = vals
        _require(np.asarray(a) >= 0.0, "sqrt of negative argument: sqrt", a)
        return np.sqrt(a)
    if fn == "ln":
        (a,) = vals
        _require(np.asarray(a) > 0.0, "ln of non-positive argument: ln", a)
        return np.log(a)
    if fn == "exp":
        (a,) = vals
        return _finite(np.exp(a), "exp", a)
    if fn == "atan":
        (a,) = vals
        return np.arctan(a)
    if fn == "abs":
        (a,) = vals
        return np.abs(a)
    if fn == "pow":
        a, b = vals
        return _pow(a, b)
    raise TypeError(f"unknown function {fn!r}")


def evaluate(expr: Expression, t, u):
    """Evaluate at (t, u); scalars or broadcastable numpy arrays.

    Out-of-domain intermediates (ln of a non-positive value, division by
    zero, overflow to infinity) raise EvalDomainError naming the
    operation and the offending arguments.
    """
    with np.errstate(all="ignore"):
        out = _eval(expr, t, u)
    if np.ndim(t) == 0 and np.ndim(u) == 0:
        return float(out)
    return np.broadcast_to(np.asarray(out, dtype=float), np.broadcast_shapes(np.shape(t), np.shape(u))).copy() if np.ndim(out) == 0 else np.asarray(out, dtype=float)


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _print(node: Expression, parent_prec: int, right_of_pow: bool = False) -> str:
    if isinstance(node, Num):
        s = np.format_float_positional(node.value, trim="-") if abs(node.value) < 1e16 else repr(node.value)
        return s
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        inner = _print(node.operand, _PREC["neg"])
        s = f"-{inner}"
        return f"({s})" if parent_prec > _PREC["neg"] else s
    if isinstance(node, BinOp):
        prec = _PREC[node.op]
        if node.op == "^":
            # right-assoc; the right child re-enters at factor level
            left = _print(node.left, prec + 1)
            right = _print(node.right, _PREC["neg"])
            s = f"{left}^{right}"
        else:
            left = _print(node.left, prec)
            right = _print(node.right, prec + 1)
            s = f"{left} {node.op} {right}"
        return f"({s})" if parent_prec > prec else s
    if isinstance(node, Call):
        return f"{node.fn}({', '.join(_print(a, 0) for a in node.args)})"
    raise TypeError(f"not an expression node: {node!r}")


def to_text(expr: Expression) -> str:
    """Render to text that re-parses to an evaluation-equivalent tree."""
    return _print(expr, 0)
