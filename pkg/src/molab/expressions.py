"""Arithmetic expression grammar for exponent and weight functions.

Grammar (precedence high to low): ^ , unary - , * / , + - ; all binary
operators associate to the left, parentheses group, and functions use
call syntax ``f(a, b)``.  Coordinates are ``x1 .. xn``; ``e`` and ``pi``
are named constants.

Constant subtrees are folded at parse time and partial functions
(log, /, ^) are rejected right there when the folded argument leaves
their domain, so a parsed expression evaluates totally on any box it is
later probed on (field constructors re-validate on the actual bounding
box).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ExpressionError",
    "Num",
    "Var",
    "Unary",
    "Bin",
    "Call",
    "parse_expression",
    "eval_expression",
    "print_expression",
]

_CONSTANTS = {"e": math.e, "pi": math.pi}

# name -> (min arity, max arity); None = unbounded
_FUNCTIONS = {
    "log": (1, 1),
    "exp": (1, 1),
    "abs": (1, 1),
    "sin": (1, 1),
    "cos": (1, 1),
    "sqrt": (1, 1),
    "min": (2, None),
    "max": (2, None),
    "pow": (2, 2),
    "dist_to_point": (1, None),
    "dist_to_plane": (2, None),
}


class ExpressionError(ValueError):
    """Parse or domain error, carrying the byte offset of the culprit."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    index: int  # 0-based coordinate index


@dataclass(frozen=True)
class Unary:
    op: str  # "-"
    arg: "Node"


@dataclass(frozen=True)
class Bin:
    op: str  # one of + - * / ^
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


Node = Num | Var | Unary | Bin | Call


# ---------------------------------------------------------------------------
# tokenizer

_TOKEN_OPS = set("+-*/^(),")


def _tokenize(text: str):
    tokens = []  # (kind, value, offset)
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in _TOKEN_OPS:
            tokens.append(("op", c, i))
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            seen_exp = False
            while j < n:
                d = text[j]
                if d.isdigit() or d == ".":
                    j += 1
                elif d in "eE" and j + 1 < n and (text[j + 1].isdigit() or text[j + 1] in "+-") and not seen_exp:
                    # only treat as exponent marker when it continues a digit run
                    if j > i and text[j - 1].isdigit():
                        seen_exp = True
                        j += 2 if text[j + 1] in "+-" else 1
                    else:
                        break
                else:
                    break
            try:
                value = float(text[i:j])
            except ValueError:
                raise ExpressionError(f"bad number literal {text[i:j]!r}", i)
            tokens.append(("num", value, i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j], i))
            i = j
            continue
        raise ExpressionError(f"unexpected character {c!r}", i)
    tokens.append(("end", "", n))
    return tokens


# ---------------------------------------------------------------------------
# parser (precedence climbing, all binary ops left-associative)

_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
_UNARY_PREC = 3  # binds tighter than * / but looser than ^


class _Parser:
    def __init__(self, tokens, n_coords):
        self.tokens = tokens
        self.pos = 0
        self.n_coords = n_coords

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op):
        kind, value, offset = self.peek()
        if kind != "op" or value != op:
            raise ExpressionError(f"expected {op!r}", offset)
        return self.advance()

    def parse(self):
        node = self.parse_expr(0)
        kind, value, offset = self.peek()
        if kind != "end":
            raise ExpressionError(f"unexpected trailing input {value!r}", offset)
        return node

    def parse_expr(self, min_prec):
        node = self.parse_prefix()
        while True:
            kind, value, offset = self.peek()
            if kind != "op" or value not in _PRECEDENCE:
                return node
            prec = _PRECEDENCE[value]
            if prec < min_prec:
                return node
            self.advance()
            right = self.parse_expr(prec + 1)  # +1 => left associative
            node = _fold_bin(value, node, right, offset)

    def parse_prefix(self):
        kind, value, offset = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            arg = self.parse_expr(_UNARY_PREC + 1)
            if isinstance(arg, Num):
                return Num(-arg.value)
            return Unary("-", arg)
        return self.parse_atom()

    def parse_atom(self):
        kind, value, offset = self.advance()
        if kind == "num":
            return Num(value)
        if kind == "op" and value == "(":
            node = self.parse_expr(0)
            self.expect_op(")")
            self.advance()
            return node
        if kind == "name":
            nk, nv, noff = self.peek()
            if nk == "op" and nv == "(":
                return self.parse_call(value, offset)
            if value in _CONSTANTS:
                return Num(_CONSTANTS[value])
            if len(value) >= 2 and value[0] == "x" and value[1:].isdigit():
                index = int(value[1:]) - 1
                if not 0 <= index < self.n_coords:
                    raise ExpressionError(
                        f"coordinate {value!r} out of range for dimension {self.n_coords}", offset
                    )
                return Var(index)
            raise ExpressionError(f"unknown identifier {value!r}", offset)
        raise ExpressionError("expected a value", offset)

    def parse_call(self, name, name_offset):
        if name not in _FUNCTIONS:
            raise ExpressionError(f"unknown function {name!r}", name_offset)
        self.expect_op("(")
        self.advance()
        args = []
        kind, value, offset = self.peek()
        if not (kind == "op" and value == ")"):
            while True:
                args.append(self.parse_expr(0))
                kind, value, offset = self.peek()
                if kind == "op" and value == ",":
                    self.advance()
                    continue
                break
        kind, value, offset = self.peek()
        if not (kind == "op" and value == ")"):
            raise ExpressionError("expected ')' in call", offset)
        self.advance()
        lo, hi = _FUNCTIONS[name]
        if len(args) < lo or (hi is not None and len(args) > hi):
            raise ExpressionError(
                f"{name} expects {lo}{'' if hi == lo else '+' if hi is None else f'..{hi}'} args, got {len(args)}",
                offset,
            )
        return _fold_call(name, tuple(args), offset)


def _fold_bin(op, left, right, offset):
    if isinstance(left, Num) and isinstance(right, Num):
        a, b = left.value, right.value
        if op == "/" and b == 0.0:
            raise ExpressionError("division by constant zero", offset)
        if op == "^":
            if a < 0 and b != round(b):
                raise ExpressionError("fractional power of negative constant", offset)
            value = a**b
        else:
            value = {"+": a + b, "-": a - b, "*": a * b, "/": a / b if b != 0 else math.nan}[op]
        if not math.isfinite(value):
            raise ExpressionError("constant subexpression is not finite", offset)
        return Num(value)
    return Bin(op, left, right)


def _fold_call(name, args, offset):
    if name in ("dist_to_point", "dist_to_plane"):
        return Call(name, args)  # geometric helpers stay symbolic
    if all(isinstance(a, Num) for a in args):
        values = [a.value for a in args]
        if name == "log" and values[0] <= 0:
            raise ExpressionError("log of a non-positive constant", offset)
        if name == "sqrt" and values[0] < 0:
            raise ExpressionError("sqrt of a negative constant", offset)
        if name == "pow" and values[0] < 0 and values[1] != round(values[1]):
            raise ExpressionError("fractional power of negative constant", offset)
        fn = {
            "log": math.log,
            "exp": math.exp,
            "abs": abs,
            "sin": math.sin,
            "cos": math.cos,
            "sqrt": math.sqrt,
            "min": min,
            "max": max,
            "pow": lambda a, b: a**b,
        }[name]
        value = fn(*values)
        if not math.isfinite(value):
            raise ExpressionError("constant call does not evaluate to a finite value", offset)
        return Num(value)
    return Call(name, args)


def parse_expression(text: str, n_coords: int = 3) -> Node:
    """Parse ``text`` into an AST over coordinates x1..x{n_coords}."""
    if not text or not text.strip():
        raise ExpressionError("empty expression", 0)
    return _Parser(_tokenize(text), n_coords).parse()


# ---------------------------------------------------------------------------
# evaluation

def eval_expression(node: Node, points: np.ndarray) -> np.ndarray:
    """Evaluate over points of shape (M, n); returns shape (M,)."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise ValueError("points must have shape (M, n)")
    out = _eval(node, points)
    if np.isscalar(out) or out.shape == ():
        out = np.full(points.shape[0], float(out))
    return out


def _eval(node, pts):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return pts[:, node.index]
    if isinstance(node, Unary):
        return -_eval(node.arg, pts)
    if isinstance(node, Bin):
        a, b = _eval(node.left, pts), _eval(node.right, pts)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            return a / b
        return np.power(a, b)
    if isinstance(node, Call):
        if node.name == "dist_to_point":
            target = np.array([_const_value(a) for a in node.args])
            if target.shape[0] != pts.shape[1]:
                raise ValueError("dist_to_point needs one coordinate per dimension")
            return np.sqrt(((pts - target[None, :]) ** 2).sum(axis=1))
        if node.name == "dist_to_plane":
            coeffs = np.array([_const_value(a) for a in node.args])
            normal, offset = coeffs[:-1], coeffs[-1]
            if normal.shape[0] != pts.shape[1]:
                raise ValueError("dist_to_plane needs n normal coefficients plus an offset")
            return np.abs(pts @ normal - offset) / math.sqrt(float(normal @ normal))
        args = [_eval(a, pts) for a in node.args]
        if node.name == "log":
            return np.log(args[0])
        if node.name == "exp":
            return np.exp(args[0])
        if node.name == "abs":
            return np.abs(args[0])
        if node.name == "sin":
            return np.sin(args[0])
        if node.name == "cos":
            return np.cos(args[0])
        if node.name == "sqrt":
            return np.sqrt(args[0])
        if node.name == "min":
            out = args[0]
            for a in args[1:]:
                out = np.minimum(out, a)
            return out
        if node.name == "max":
            out = args[0]
            for a in args[1:]:
                out = np.maximum(out, a)
            return out
        if node.name == "pow":
            return np.power(args[0], args[1])
    raise TypeError(f"unknown node {node!r}")


def _const_value(node):
    if not isinstance(node, Num):
        raise ValueError("dist_to_* arguments must be constants")
    return node.value


# ---------------------------------------------------------------------------
# printing (minimal parentheses; print->parse round-trips to the same AST)

def print_expression(node: Node) -> str:
    return _print(node, 0)


def _print(node, parent_prec):
    if isinstance(node, Num):
        if node.value < 0:
            text = repr(node.value)
            return f"({text})" if parent_prec > 0 else text
        return repr(node.value)
    if isinstance(node, Var):
        return f"x{node.index + 1}"
    if isinstance(node, Unary):
        inner = _print(node.arg, _UNARY_PREC + 1)
        text = f"-{inner}"
        return f"({text})" if parent_prec > _UNARY_PREC else text
    if isinstance(node, Bin):
        prec = _PRECEDENCE[node.op]
        left = _print(node.left, prec)
        right = _print(node.right, prec + 1)  # left associative
        text = f"{left} {node.op} {right}"
        return f"({text})" if prec < parent_prec else text
    if isinstance(node, Call):
        args = ", ".join(_print(a, 0) for a in node.args)
        return f"{node.name}({args})"
    raise TypeError(f"unknown node {node!r}")
