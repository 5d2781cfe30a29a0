"""Text output in the parser's grammar.

``to_text`` first converts canonical nodes (products with negative or
fractional exponents, rational coefficients) into a display tree made of
quotients, negations and ``sqrt`` calls, then prints that tree so that
parsing the output and printing again reproduces the same text.
"""

from __future__ import annotations

from fractions import Fraction

from . import nodes
from .nodes import ADD, CONST, DIV, FUNC, MUL, NEG, NUM, POW, VAR, Expr

SUM, PROD, UNARY, POWER, ATOM = 1, 2, 3, 4, 5

_HALF = Fraction(1, 2)


def _num_text(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _prec(e: Expr) -> int:
    k = e.kind
    if k == NUM:
        v = e.payload
        if isinstance(v, Fraction):
            return PROD
        return UNARY if v < 0 else ATOM
    if k in (VAR, CONST, FUNC):
        return ATOM
    if k == ADD:
        return SUM
    if k in (MUL, DIV):
        return PROD
    if k == NEG:
        return UNARY
    return POWER


def _wrap(e: Expr, need: int, out: list, paren_negative: bool = False):
    p = _prec(e)
    if p < need:
        out.append("(")
        _emit(e, out)
        out.append(")")
        return
    if paren_negative:
        sub: list = []
        _emit(e, sub)
        if sub and sub[0].startswith("-"):
            out.append("(")
            out.extend(sub)
            out.append(")")
        else:
            out.extend(sub)
        return
    _emit(e, out)


def _exponent_text(q: Fraction) -> str:
    if q.denominator == 1 and q >= 0:
        return str(q.numerator)
    return f"({q.numerator}/{q.denominator})" if q.denominator != 1 else f"({q.numerator})"


def _emit(e: Expr, out: list):
    k = e.kind
    if k == NUM:
        out.append(_num_text(e.payload))
    elif k in (VAR, CONST):
        out.append(e.payload)
    elif k == FUNC:
        out.append(e.payload + "(")
        _emit(e.args[0], out)
        out.append(")")
    elif k == ADD:
        for i, t in enumerate(e.args):
            if i == 0:
                _wrap(t, PROD, out)
            elif t.kind == NEG:
                out.append(" - ")
                _wrap(t.args[0], PROD, out, paren_negative=True)
            else:
                out.append(" + ")
                _wrap(t, PROD, out, paren_negative=True)
    elif k == MUL:
        for i, f in enumerate(e.args):
            if i == 0:
                if f.kind == DIV:
                    _emit(f, out)
                else:
                    _wrap(f, UNARY, out)
            else:
                out.append("*")
                _wrap(f, UNARY, out, paren_negative=True)
    elif k == DIV:
        a, b = e.args
        if a.kind in (MUL, DIV):
            _emit(a, out)
        else:
            _wrap(a, UNARY, out)
        out.append("/")
        if b.kind in (MUL, DIV):
            out.append("(")
            _emit(b, out)
            out.append(")")
        else:
            _wrap(b, UNARY, out, paren_negative=True)
    elif k == NEG:
        t = e.args[0]
        out.append("-")
        if t.kind == NUM:
            out.append("(")
            _emit(t, out)
            out.append(")")
        else:
            _wrap(t, UNARY, out, paren_negative=True)
    elif k == POW:
        base = e.args[0]
        if _prec(base) < ATOM:
            out.append("(")
            _emit(base, out)
            out.append(")")
        else:
            _emit(base, out)
        out.append("^" + _exponent_text(e.payload))
    else:  # pragma: no cover
        raise ValueError(f"unknown node kind {k}")


def to_raw_text(e: Expr) -> str:
    """Print a tree exactly as structured (no display conversion)."""
    out: list = []
    _emit(e, out)
    return "".join(out)


# -- display conversion ---------------------------------------------------

def _display_number(v) -> Expr:
    if isinstance(v, Fraction):
        return nodes.make(DIV, None, (nodes.num(v.numerator), nodes.num(v.denominator)))
    return nodes.num(v)


def _product(items: list) -> Expr:
    if not items:
        return nodes.num(1)
    if len(items) == 1:
        return items[0]
    return nodes.make(MUL, None, tuple(items))


def _display_pow(base: Expr, q: Fraction, memo) -> Expr:
    b = _display(base, memo)
    if q == _HALF:
        return nodes.make(FUNC, "sqrt", (b,))
    if q == 1:
        return b
    return nodes.make(POW, q, (b,))


def _display_mul(e: Expr, memo, negate: bool = False) -> Expr:
    """Display a canonical product; ``negate`` flips the overall sign."""
    factors = list(e.args) if e.kind == MUL else [e]
    coef = 1
    if factors and factors[0].kind == NUM:
        coef = factors[0].payload
        factors = factors[1:]
    if negate:
        coef = -coef
    numer, denom = [], []
    for f in factors:
        if f.kind == POW and f.payload < 0:
            denom.append(_display_pow(f.args[0], -f.payload, memo))
        else:
            numer.append(_display(f, memo))
    if isinstance(coef, Fraction):
        p, q = coef.numerator, coef.denominator
        if q != 1:
            denom.insert(0, nodes.num(q))
        coef = p
    if coef == -1 and numer:
        first = numer[0]
        numer[0] = nodes.make(NEG, None, (first,))
    elif coef != 1 or not numer:
        numer.insert(0, nodes.num(coef))
    top = _product(numer)
    if not denom:
        return top
    return nodes.make(DIV, None, (top, _product(denom)))


def _split_sign(t: Expr):
    """Return (is_negative, term) for a canonical sum term."""
    if t.kind == NUM and not isinstance(t.payload, Fraction):
        return t.payload < 0, t
    if t.kind == NUM:
        return t.payload < 0, t
    if t.kind == MUL and t.args[0].kind == NUM and t.args[0].payload < 0:
        return True, t
    return False, t


def _display(e: Expr, memo: dict) -> Expr:
    key = id(e)
    if key in memo:
        return memo[key]
    k = e.kind
    if k == NUM:
        out = _display_number(e.payload)
    elif k in (VAR, CONST):
        out = e
    elif k == FUNC:
        out = nodes.make(FUNC, e.payload, (_display(e.args[0], memo),))
    elif k == POW:
        if e.payload < 0:
            out = _display_mul(e, memo)
        else:
            out = _display_pow(e.args[0], e.payload, memo)
    elif k == MUL:
        out = _display_mul(e, memo)
    elif k == ADD:
        terms = []
        for i, t in enumerate(e.args):
            neg, t = _split_sign(t)
            if not neg or i == 0:
                terms.append(_display(t, memo) if t.kind != MUL else _display_mul(t, memo))
            elif t.kind == NUM:
                terms.append(nodes.make(NEG, None, (_display_number(-t.payload),)))
            else:
                terms.append(nodes.make(NEG, None, (_display_mul(t, memo, negate=True),)))
        out = nodes.make(ADD, None, tuple(terms))
    else:
        out = nodes.make(k, e.payload, tuple(_display(a, memo) for a in e.args))
    memo[key] = out
    return out


def _is_canonical_shape(e: Expr) -> bool:
    return not any(n.kind in (DIV, NEG) or (n.kind == FUNC and n.payload == "sqrt")
                   for n in nodes.postorder(e))


def to_text(e: Expr) -> str:
    """Print ``e`` in the expression grammar.

    Raw parse trees print as written; canonical (simplified) trees are first
    rewritten into quotient form.
    """
    if _is_canonical_shape(e):
        e = _display(e, {})
    return to_raw_text(e)


# -- shared subexpressions --------------------------------------------------

def to_text_shared(roots, prefix: str = "_t", min_size: int = 6, inline_limit: int = 400):
    """Print several expressions with repeated subtrees factored out.

    Returns ``(bindings, texts)`` where ``bindings`` is a list of
    ``(name, text)`` pairs; each text may use names bound before it. When the
    combined tree size is at most ``inline_limit`` nodes nothing is factored.
    """
    roots = [nodes.as_expr(r) for r in roots]
    if sum(nodes.node_count(r) for r in roots) <= inline_limit:
        return [], [to_text(r) for r in roots]
    refs: dict = {}
    order = list(nodes.postorder(*roots))
    for n in order:
        for a in n.args:
            refs[id(a)] = refs.get(id(a), 0) + 1
    for r in roots:
        refs[id(r)] = refs.get(id(r), 0) + 1
    bound: dict = {}
    for n in order:
        if (n.kind in (ADD, MUL, FUNC) and refs.get(id(n), 0) > 1
                and nodes.node_count(n) >= min_size):
            bound[id(n)] = nodes.var(f"{prefix}{len(bound) + 1}")

    short: dict = {}

    def abbreviate(e: Expr, top: bool) -> Expr:
        if not top and id(e) in bound:
            return bound[id(e)]
        hit = short.get(id(e))
        if hit is not None:
            return hit
        if not e.args:
            return e
        out = nodes.make(e.kind, e.payload, tuple(abbreviate(a, False) for a in e.args))
        short[id(e)] = out
        return out

    bindings = []
    for n in order:
        if id(n) in bound:
            short.clear()
            bindings.append((bound[id(n)].payload, to_text(abbreviate(n, True))))
    short.clear()
    texts = [to_text(abbreviate(r, False)) for r in roots]
    return bindings, texts
