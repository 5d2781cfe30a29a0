"""Vectorised complex evaluation of expression DAGs."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from . import nodes
from .nodes import ADD, CONST, DIV, FUNC, MUL, NEG, NUM, POW, VAR, Expr


class EvaluationError(ArithmeticError):
    """Pole, overflow or invalid value at an evaluation point.

    ``point`` maps each bound identifier to its value at the first failing
    sample.
    """

    def __init__(self, message: str, point: dict | None = None, index=None):
        if point:
            coords = ", ".join(f"{k}={_fmt(v)}" for k, v in point.items())
            message = f"{message} at ({coords})"
        super().__init__(message)
        self.point = point or {}
        self.index = index


class UnboundIdentifierError(KeyError):
    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self):
        return f"unbound identifier {self.name!r}"


def _fmt(v) -> str:
    v = complex(v)
    if v.imag == 0:
        return repr(v.real)
    return repr(v)


def _int_power(a, n: int):
    if n == 0:
        return np.ones_like(a)
    if n < 0:
        return 1.0 / _int_power(a, -n)
    result = None
    base = a
    while n:
        if n & 1:
            result = base if result is None else result * base
        n >>= 1
        if n:
            base = base * base
    return result


def _power(a, q: Fraction):
    if q.denominator == 1:
        return _int_power(a, q.numerator)
    if q.denominator == 2:
        return _int_power(np.sqrt(a), q.numerator)
    return np.power(a, float(q))


_FUNCS = {
    "sqrt": np.sqrt,
    "exp": np.exp,
    "ln": np.log,
    "sin": np.sin,
    "cos": np.cos,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "coth": lambda a: np.cosh(a) / np.sinh(a),
}

_DESCRIBE = {
    DIV: "division by zero",
    POW: "pole in power",
    FUNC: "pole or overflow in function",
}


def _fail(n: Expr, value, binding: dict):
    bad = ~np.isfinite(value)
    idx = np.argwhere(bad)[0] if np.ndim(value) else None
    point = {}
    for k, v in binding.items():
        arr = np.asarray(v)
        if idx is not None and arr.ndim:
            point[k] = arr[tuple(idx)] if arr.ndim == len(idx) else arr.flat[0]
        else:
            point[k] = arr.item() if arr.ndim == 0 else arr.flat[0]
    what = _DESCRIBE.get(n.kind, "non-finite value")
    if n.kind == FUNC:
        what = f"pole or overflow in {n.payload}"
    index = tuple(int(i) for i in idx) if idx is not None else None
    raise EvaluationError(what, point, index)


def evaluate_many(roots, binding: dict) -> list:
    """Evaluate several expressions over shared bindings.

    Binding values may be scalars or equally-shaped arrays; results are
    complex arrays (or complex scalars). Shared subexpressions are evaluated
    once.
    """
    roots = [nodes.as_expr(r) for r in roots]
    env = {k: np.asarray(v, dtype=complex) for k, v in binding.items()}
    vals: dict = {}
    with np.errstate(all="ignore"):
        for n in nodes.postorder(*roots):
            k = n.kind
            if k == NUM:
                v = np.complex128(n.payload if not isinstance(n.payload, Fraction) else float(n.payload))
            elif k in (VAR, CONST):
                try:
                    v = env[n.payload]
                except KeyError:
                    raise UnboundIdentifierError(n.payload) from None
            else:
                a = [vals[id(c)] for c in n.args]
                if k == ADD:
                    v = a[0]
                    for t in a[1:]:
                        v = v + t
                elif k == MUL:
                    v = a[0]
                    for t in a[1:]:
                        v = v * t
                elif k == DIV:
                    v = a[0] / a[1]
                    if np.any(a[1] == 0):
                        v = np.where(a[1] == 0, np.nan, v)
                elif k == NEG:
                    v = -a[0]
                elif k == POW:
                    if n.payload < 0 and np.any(a[0] == 0):
                        v = np.where(a[0] == 0, np.nan, _power(a[0], n.payload))
                    else:
                        v = _power(a[0], n.payload)
                elif k == FUNC:
                    if n.payload == "ln" and np.any(a[0] == 0):
                        v = np.where(a[0] == 0, np.nan, np.log(a[0]))
                    elif n.payload == "coth" and np.any(np.sinh(a[0]) == 0):
                        v = np.where(np.sinh(a[0]) == 0, np.nan, _FUNCS["coth"](a[0]))
                    else:
                        v = _FUNCS[n.payload](a[0])
                else:  # pragma: no cover
                    raise ValueError(f"unknown node kind {k}")
                if not np.all(np.isfinite(v)):
                    _fail(n, v, binding)
            vals[id(n)] = v
    shape = _shape(env)
    out = []
    for r in roots:
        v = vals[id(r)]
        out.append(complex(v) if shape == () else np.broadcast_to(v, shape).astype(complex))
    return out


def _shape(env: dict):
    shapes = [np.shape(v) for v in env.values()]
    return np.broadcast_shapes(*shapes) if shapes else ()


def evaluate(e: Expr, binding: dict):
    """Evaluate ``e`` at ``binding`` (complex double precision, principal
    branches). Raises ``UnboundIdentifierError`` or ``EvaluationError``."""
    return evaluate_many([e], binding)[0]
