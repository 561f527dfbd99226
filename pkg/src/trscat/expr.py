"""Recursive-descent parser for potential expressions in one variable ``x``.

Grammar (``^`` binds tighter than unary minus and is right-associative)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | "+" unary | power
    power  := atom ("^" unary)?
    atom   := NUMBER | "x" | "pi" | FUNC "(" expr ")" | "(" expr ")"

The AST evaluates with numpy and can be flattened to a postfix program that the
compiled integrator interprets.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, UnknownIdentifierError

FUNCTIONS = {
    "cos": np.cos,
    "sin": np.sin,
    "tanh": np.tanh,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "abs": np.abs,
}

# Opcodes shared with the compiled evaluator in _kernels.
OP_CONST, OP_X = 0, 1
OP_ADD, OP_SUB, OP_MUL, OP_DIV, OP_POW, OP_NEG = 2, 3, 4, 5, 6, 7
OP_FUNC = {"cos": 8, "sin": 9, "tanh": 10, "exp": 11, "sqrt": 12, "abs": 13}
OP_SPLINE = 20
_BINOPS = {"+": OP_ADD, "-": OP_SUB, "*": OP_MUL, "/": OP_DIV, "^": OP_POW}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Pi:
    pass


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    func: str
    arg: object


_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[start]!r}", _byte_offset(text, start))
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


def _byte_offset(text, index):
    return len(text[:index].encode("utf-8"))


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, message, tok=None):
        tok = tok or self.peek()
        raise ParseError(message, _byte_offset(self.text, tok[2]))

    def expect(self, value):
        tok = self.peek()
        if tok[1] != value or tok[0] == "num":
            self.fail(f"expected {value!r}")
        self.take()

    def parse(self):
        node = self.expr()
        if self.peek()[0] != "end":
            self.fail(f"unexpected token {self.peek()[1]!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.take()
            return Neg(self.unary())
        if tok[0] == "op" and tok[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        tok = self.peek()
        kind, value, _ = tok
        if kind == "num":
            self.take()
            return Num(float(value))
        if kind == "name":
            self.take()
            if value == "x":
                return Var()
            if value == "pi":
                return Pi()
            if value in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(value, arg)
            raise UnknownIdentifierError(
                f"unknown identifier {value!r}", _byte_offset(self.text, tok[2])
            )
        if kind == "op" and value == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            self.fail("unexpected end of input")
        self.fail(f"unexpected token {value!r}")


def parse(text):
    """Parse ``text`` into an AST. Raises :class:`ParseError` with a byte offset."""
    if not text or not text.strip():
        raise ParseError("empty expression", 0)
    return _Parser(text).parse()


def evaluate(node, x):
    """Evaluate an AST at ``x`` (scalar or array) with numpy semantics."""
    if isinstance(node, Num):
        return node.value + 0.0 * np.asarray(x, dtype=float)
    if isinstance(node, Var):
        return np.asarray(x, dtype=float)
    if isinstance(node, Pi):
        return math.pi + 0.0 * np.asarray(x, dtype=float)
    if isinstance(node, Neg):
        return -evaluate(node.operand, x)
    if isinstance(node, Call):
        return FUNCTIONS[node.func](evaluate(node.arg, x))
    a = evaluate(node.left, x)
    b = evaluate(node.right, x)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        return a / b
    return np.power(a, b)


def to_string(node):
    """Fully parenthesised rendering that reparses to an equivalent AST."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Pi):
        return "pi"
    if isinstance(node, Neg):
        return f"(-{to_string(node.operand)})"
    if isinstance(node, Call):
        return f"{node.func}({to_string(node.arg)})"
    return f"({to_string(node.left)} {node.op} {to_string(node.right)})"


def compile_postfix(node):
    """Flatten an AST into ``(code, consts)`` for the compiled evaluator.

    ``code`` holds (opcode, argument) pairs; the argument indexes ``consts``
    for constants and is unused otherwise.
    """
    code = []
    consts = []

    def emit(n):
        if isinstance(n, Num):
            consts.append(n.value)
            code.extend((OP_CONST, len(consts) - 1))
        elif isinstance(n, Pi):
            consts.append(math.pi)
            code.extend((OP_CONST, len(consts) - 1))
        elif isinstance(n, Var):
            code.extend((OP_X, 0))
        elif isinstance(n, Neg):
            emit(n.operand)
            code.extend((OP_NEG, 0))
        elif isinstance(n, Call):
            emit(n.arg)
            code.extend((OP_FUNC[n.func], 0))
        else:
            emit(n.left)
            emit(n.right)
            code.extend((_BINOPS[n.op], 0))

    emit(node)
    return np.asarray(code, dtype=np.int64), np.asarray(consts or [0.0], dtype=np.float64)


def stack_depth(node):
    if isinstance(node, (Num, Var, Pi)):
        return 1
    if isinstance(node, (Neg, Call)):
        return stack_depth(node.operand if isinstance(node, Neg) else node.arg)
    return max(stack_depth(node.left), 1 + stack_depth(node.right))
