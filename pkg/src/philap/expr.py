"""Tiny grammar for time coefficients: numbers, ``t``, ``pi``, + - * / ^, sin, cos, abs.

Expressions compile to vectorized numpy callables and keep their source text
so configs round-trip.
"""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass
from typing import Callable

import numpy as np

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_FUNCS = {"sin": np.sin, "cos": np.cos, "abs": np.abs}
_NAMES = {"pi": math.pi}


class ExpressionError(ValueError):
    pass


def _compile(node: ast.AST) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(node, ast.Expression):
        return _compile(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
            and not isinstance(node.value, bool):
        c = float(node.value)
        return lambda t: np.full_like(t, c)
    if isinstance(node, ast.Name):
        if node.id == "t":
            return lambda t: t
        if node.id in _NAMES:
            c = _NAMES[node.id]
            return lambda t: np.full_like(t, c)
        raise ExpressionError(f"unknown name {node.id!r}")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _compile(node.operand)
        if isinstance(node.op, ast.USub):
            return lambda t: -inner(t)
        return inner
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        op = _BINOPS[type(node.op)]
        left, right = _compile(node.left), _compile(node.right)
        return lambda t: op(left(t), right(t))
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS \
            and len(node.args) == 1 and not node.keywords:
        fn, arg = _FUNCS[node.func.id], _compile(node.args[0])
        return lambda t: fn(arg(t))
    raise ExpressionError(f"unsupported syntax: {ast.dump(node)}")


@dataclass(frozen=True)
class TimeExpr:
    """Vectorized coefficient ``a(t)`` parsed from text."""

    source: str

    def __post_init__(self):
        text = self.source.replace("^", "**")
        try:
            tree = ast.parse(text.strip(), mode="eval")
        except SyntaxError as exc:
            raise ExpressionError(f"cannot parse {self.source!r}: {exc.msg}") from None
        object.__setattr__(self, "_fn", _compile(tree))

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self._fn(np.atleast_1d(arr)).astype(float)
        return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)

    def __str__(self) -> str:
        return self.source


def constant(c: float) -> TimeExpr:
    return TimeExpr(repr(float(c)))
