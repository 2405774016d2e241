"""Recursive-descent parser and vectorised evaluator for test functions f(t).

Grammar (whitespace-insensitive)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := unary ('^' factor)?          # right-associative
    unary  := '-'? atom
    atom   := number | 't' | ident '(' args ')' | '(' expr ')'

Note that unary minus binds tighter than '^', so ``-t^2`` is ``(-t)^2``.
Exponents must be constant. Only whitelisted functions may be called.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ExprEvalError, ExprSyntaxError

FUNCTIONS = {
    "exp": (1, np.exp),
    "sin": (1, np.sin),
    "cos": (1, np.cos),
    "abs": (1, np.abs),
    "sqrt": (1, np.sqrt),
    "min": (2, np.minimum),
    "max": (2, np.maximum),
}


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


Node = Union[Const, Var, Neg, BinOp, Call]

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
""", re.VERBOSE)

_ATOM_START = {"number", "'t'", "identifier", "'('"}


@dataclass(frozen=True)
class _Tok:
    kind: str      # number, ident, op, eof
    text: str
    offset: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), pos))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def _fail(self, expected, what=None):
        tok = self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ExprSyntaxError(what or f"unexpected {found}", tok.offset, expected)

    def _is_op(self, *ops) -> bool:
        return self.tok.kind == "op" and self.tok.text in ops

    def _expect_op(self, op):
        if not self._is_op(op):
            self._fail({f"'{op}'"})
        self.i += 1

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "eof":
            self._fail({"'+'", "'-'", "'*'", "'/'", "'^'", "end of input"})
        return node

    def expr(self) -> Node:
        node = self.term()
        while self._is_op("+", "-"):
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self._is_op("*", "/"):
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Node:
        base = self.unary()
        if self._is_op("^"):
            at = self.tok.offset
            self.i += 1
            exponent = self.factor()
            if _has_var(exponent):
                raise ExprSyntaxError("exponent must be constant", at)
            return BinOp("^", base, exponent)
        return base

    def unary(self) -> Node:
        if self._is_op("-"):
            self.i += 1
            return Neg(self.atom())
        return self.atom()

    def atom(self) -> Node:
        tok = self.tok
        if tok.kind == "number":
            self.i += 1
            return Const(float(tok.text))
        if tok.kind == "ident":
            if tok.text == "t":
                self.i += 1
                return Var()
            if tok.text not in FUNCTIONS:
                raise ExprSyntaxError(f"unknown identifier {tok.text!r}", tok.offset)
            self.i += 1
            self._expect_op("(")
            args = [self.expr()]
            while self._is_op(","):
                self.i += 1
                args.append(self.expr())
            self._expect_op(")")
            arity = FUNCTIONS[tok.text][0]
            if len(args) != arity:
                raise ExprSyntaxError(
                    f"{tok.text} takes {arity} argument(s), got {len(args)}", tok.offset)
            return Call(tok.text, tuple(args))
        if self._is_op("("):
            self.i += 1
            node = self.expr()
            self._expect_op(")")
            return node
        self._fail(_ATOM_START)


def _has_var(node: Node) -> bool:
    if isinstance(node, Var):
        return True
    if isinstance(node, Neg):
        return _has_var(node.operand)
    if isinstance(node, BinOp):
        return _has_var(node.left) or _has_var(node.right)
    if isinstance(node, Call):
        return any(_has_var(a) for a in node.args)
    return False


def parse_expr(text: str) -> Node:
    """Parse ``text`` into an expression tree."""
    return _Parser(text).parse()


# --------------------------------------------------------------------------
# evaluation
# --------------------------------------------------------------------------

def _eval(node: Node, t: np.ndarray) -> np.ndarray:
    if isinstance(node, Const):
        return np.full_like(t, node.value)
    if isinstance(node, Var):
        return t
    if isinstance(node, Neg):
        return -_eval(node.operand, t)
    if isinstance(node, Call):
        return FUNCTIONS[node.name][1](*(_eval(a, t) for a in node.args))
    left = _eval(node.left, t)
    right = _eval(node.right, t)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if node.op == "/":
        if np.any(right == 0):
            bad = float(np.asarray(t)[np.nonzero(right == 0)][0]) if np.ndim(t) else float(t)
            raise ExprEvalError(f"division by zero at t={bad!r}")
        return left / right
    return np.power(left, right)


def evaluate(node: Node, t) -> np.ndarray:
    """Evaluate the tree at the points ``t`` (scalar or array)."""
    arr = np.asarray(t, dtype=float)
    with np.errstate(all="ignore"):
        out = _eval(node, arr.ravel() if arr.ndim else arr.reshape(1))
    out = np.asarray(out, dtype=float)
    if not np.all(np.isfinite(out)):
        idx = int(np.nonzero(~np.isfinite(out))[0][0])
        where = (arr.ravel() if arr.ndim else arr.reshape(1))[idx]
        raise ExprEvalError(f"expression is not finite at t={float(where)!r}")
    return out.reshape(arr.shape)


# --------------------------------------------------------------------------
# printing
# --------------------------------------------------------------------------

def _num(value: float) -> str:
    if math.isfinite(value) and value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def _atom(node: Node) -> str:
    if isinstance(node, (Const, Var, Call)):
        return to_text(node)
    return f"({to_text(node)})"


def _unary(node: Node) -> str:
    if isinstance(node, Neg):
        return to_text(node)
    return _atom(node)


def _factor(node: Node) -> str:
    if isinstance(node, BinOp) and node.op == "^":
        return to_text(node)
    return _unary(node)


def _term(node: Node) -> str:
    if isinstance(node, BinOp) and node.op in "*/^":
        return to_text(node)
    return _unary(node)


def to_text(node: Node) -> str:
    """Render a tree so that ``parse_expr(to_text(node)) == node``."""
    if isinstance(node, Const):
        return _num(node.value)
    if isinstance(node, Var):
        return "t"
    if isinstance(node, Neg):
        return "-" + _atom(node.operand)
    if isinstance(node, Call):
        return f"{node.name}({', '.join(to_text(a) for a in node.args)})"
    if node.op in "+-":
        return f"{to_text(node.left)} {node.op} {_term(node.right)}"
    if node.op in "*/":
        return f"{_term(node.left)} {node.op} {_factor(node.right)}"
    return f"{_unary(node.left)}^{_factor(node.right)}"
