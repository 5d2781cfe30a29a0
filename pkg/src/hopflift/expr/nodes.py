"""Hash-consed expression nodes.

Every node is interned: two structurally equal trees are the same Python
object, so ``a is b`` (and ``a == b``) is structural equality and shared
subtrees are stored once. Nodes are immutable.
"""

from __future__ import annotations

import threading
import weakref
import zlib
from fractions import Fraction
from numbers import Number

NUM = "num"
VAR = "var"
CONST = "const"
ADD = "add"
MUL = "mul"
DIV = "div"
POW = "pow"
NEG = "neg"
FUNC = "func"

FUNCTIONS = ("sqrt", "exp", "ln", "sin", "cos", "sinh", "cosh", "tanh", "coth")

COORDINATES = ("x", "y", "z")

_KIND_CODE = {NUM: 1, VAR: 2, CONST: 3, ADD: 4, MUL: 5, DIV: 6, POW: 7, NEG: 8, FUNC: 9}

_table: weakref.WeakValueDictionary = weakref.WeakValueDictionary()
_lock = threading.Lock()


def _text_digest(s: str) -> int:
    return zlib.crc32(s.encode())


class Expr:
    """Immutable expression node.

    ``kind`` is one of the module-level kind tags, ``payload`` holds the
    number, identifier, exponent (a ``Fraction``) or function name, and
    ``args`` the child nodes.
    """

    __slots__ = ("kind", "payload", "args", "digest", "label", "_size", "__weakref__")

    kind: str
    payload: object
    args: tuple

    def __setattr__(self, name, value):
        raise AttributeError("Expr is immutable")

    # -- operator sugar (canonical algebra, no domain assumptions) --------
    def __add__(self, other):
        return _alg().add(self, as_expr(other))

    def __radd__(self, other):
        return _alg().add(as_expr(other), self)

    def __sub__(self, other):
        return _alg().sub(self, as_expr(other))

    def __rsub__(self, other):
        return _alg().sub(as_expr(other), self)

    def __mul__(self, other):
        return _alg().mul(self, as_expr(other))

    def __rmul__(self, other):
        return _alg().mul(as_expr(other), self)

    def __truediv__(self, other):
        return _alg().div(self, as_expr(other))

    def __rtruediv__(self, other):
        return _alg().div(as_expr(other), self)

    def __pow__(self, other):
        return _alg().pow(self, other)

    def __neg__(self):
        return _alg().neg(self)

    def __repr__(self):
        from .printer import to_text
        text = to_text(self)
        if len(text) > 120:
            text = text[:117] + "..."
        return f"Expr({text!r})"

    def __str__(self):
        from .printer import to_text
        return to_text(self)

    def __reduce__(self):
        return (_rebuild, (self.kind, self.payload, self.args))

    @property
    def is_number(self) -> bool:
        return self.kind == NUM

    @property
    def value(self):
        if self.kind != NUM:
            raise TypeError("not a numeric constant")
        return self.payload


def _alg():
    from .algebra import Algebra
    return Algebra()


def _rebuild(kind, payload, args):
    return make(kind, payload, args)


def _payload_key(kind, payload):
    if kind == NUM:
        return (type(payload).__name__, payload)
    return payload


def _payload_digest(kind, payload) -> int:
    if kind == NUM:
        return hash((type(payload).__name__ == "float", payload))
    if isinstance(payload, str):
        return _text_digest(payload)
    if payload is None:
        return 0
    return hash(payload)


def _label_of(kind, payload, args) -> str:
    if kind in (VAR, CONST):
        return payload
    if kind == NUM:
        return ""
    if kind == FUNC:
        return args[0].label
    if kind == MUL:
        for a in args:
            if a.kind != NUM:
                return a.label
        return ""
    return args[0].label if args else ""


def make(kind: str, payload=None, args: tuple = ()) -> Expr:
    """Return the interned node with the given kind, payload and children."""
    args = tuple(args)
    key = (kind, _payload_key(kind, payload), args)
    with _lock:
        node = _table.get(key)
        if node is not None:
            return node
        node = object.__new__(Expr)
        object.__setattr__(node, "kind", kind)
        object.__setattr__(node, "payload", payload)
        object.__setattr__(node, "args", args)
        # Deterministic across processes: no str hashing (PYTHONHASHSEED).
        digest = hash((_KIND_CODE[kind], _payload_digest(kind, payload),
                       tuple(a.digest for a in args)))
        object.__setattr__(node, "digest", digest)
        object.__setattr__(node, "label", _label_of(kind, payload, args))
        object.__setattr__(node, "_size", None)
        _table[key] = node
        return node


def _normalize_number(v):
    if isinstance(v, bool):
        v = int(v)
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else v
    if isinstance(v, int):
        return v
    if isinstance(v, float):
        return v
    raise TypeError(f"unsupported numeric constant {v!r}")


def num(v) -> Expr:
    return make(NUM, _normalize_number(v))


def var(name: str) -> Expr:
    return make(VAR, name)


def const(name: str) -> Expr:
    return make(CONST, name)


def as_expr(v) -> Expr:
    if isinstance(v, Expr):
        return v
    if isinstance(v, Number) and not isinstance(v, complex):
        return num(v)
    raise TypeError(f"cannot convert {v!r} to Expr")


def sort_key(e: Expr):
    """Deterministic ordering key used for canonical argument order."""
    if e.kind == NUM:
        return (0, "", float(e.payload), e.digest)
    return (1, e.label, 0.0, e.digest)


def postorder(*roots: Expr, skip=None) -> list:
    """Distinct nodes reachable from ``roots``, children before parents.

    Nodes for which ``skip(node)`` is true are neither visited nor emitted.
    """
    seen = set()
    order = []
    stack = [(r, False) for r in reversed(roots)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        if skip is not None and skip(node):
            continue
        stack.append((node, True))
        for child in reversed(node.args):
            if id(child) not in seen:
                stack.append((child, False))
    return order


def node_count(e: Expr) -> int:
    """Number of nodes of ``e`` viewed as a tree (shared subtrees counted
    once per occurrence)."""
    if e._size is not None:
        return e._size
    for n in postorder(e):
        if n._size is None:
            object.__setattr__(n, "_size", 1 + sum(a._size for a in n.args))
    return e._size


def dag_size(*roots: Expr) -> int:
    """Number of distinct nodes reachable from ``roots``."""
    return len(postorder(*roots))


def free_symbols(e: Expr) -> set:
    return {n.payload for n in postorder(e) if n.kind in (VAR, CONST)}


def substitute(e: Expr, mapping: dict) -> Expr:
    """Replace variables/constants by name with expressions (raw rebuild)."""
    out = {}
    for n in postorder(e):
        if n.kind in (VAR, CONST) and n.payload in mapping:
            out[id(n)] = as_expr(mapping[n.payload])
        elif n.args:
            out[id(n)] = make(n.kind, n.payload, tuple(out[id(a)] for a in n.args))
        else:
            out[id(n)] = n
    return out[id(e)]
