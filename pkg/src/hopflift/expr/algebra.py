"""Canonicalizing constructors, simplification and differentiation.

Canonical form:

* sums are flat, carry at most one numeric term (first) and collect like
  terms ``c*m``;
* products are flat, carry at most one numeric coefficient (first) and
  merge equal bases by adding exponents;
* quotients, negations and ``sqrt`` are rewritten as products and rational
  powers;
* ``(u^a)^b`` collapses to ``u^(a*b)`` when ``b`` is an integer, or when
  ``u`` is provably positive on the positive domain. A provably negative
  ``u`` under an even power gives ``(-u)^(a*b)``, which is how
  ``sqrt(u^2)`` becomes ``u`` or ``-u``.

With ``positive_domain`` set, every variable and named constant is taken to
be strictly positive; sign reasoning is used only for the power rules.
"""

from __future__ import annotations

from fractions import Fraction

from . import nodes
from .nodes import ADD, CONST, DIV, FUNC, MUL, NEG, NUM, POW, VAR, Expr

ZERO = nodes.num(0)
ONE = nodes.num(1)
MINUS_ONE = nodes.num(-1)
HALF = Fraction(1, 2)

_ODD = {"sinh", "tanh", "coth", "sin"}
_EVEN = {"cosh", "cos"}


def _exact(v) -> bool:
    return isinstance(v, (int, Fraction))


def _as_fraction(e) -> Fraction:
    if isinstance(e, Fraction):
        return e
    if isinstance(e, int):
        return Fraction(e)
    if isinstance(e, float):
        return Fraction(repr(e))
    if isinstance(e, Expr) and e.kind == NUM:
        return _as_fraction(e.payload)
    raise TypeError(f"exponent must be a rational constant, got {e!r}")


def _norm(v):
    if isinstance(v, Fraction) and v.denominator == 1:
        return int(v)
    return v


def _iroot(n: int, k: int):
    """Exact integer k-th root of n >= 0, or None."""
    if n < 0:
        return None
    r = round(n ** (1.0 / k))
    for c in (r - 1, r, r + 1):
        if c >= 0 and c ** k == n:
            return c
    return None


class WorkLimitExceeded(RuntimeError):
    """Raised when an Algebra instance memoises more results than allowed."""


class Algebra:
    """Canonical expression builder.

    An instance carries memo tables (signs, simplification, derivatives);
    reuse one instance across related operations to share work.
    ``work_limit`` caps the number of simplified/differentiated nodes, which
    bounds the time spent on expressions that are growing out of control.
    """

    def __init__(self, positive_domain: bool = False, work_limit: int | None = None):
        self.positive = positive_domain
        self.work_limit = work_limit
        self.work = 0
        self._signs: dict = {}
        self._nonneg: dict = {}
        self._simplified: dict = {}
        self._derivs: dict = {}

    def _tick(self):
        self.work += 1
        if self.work_limit is not None and self.work > self.work_limit:
            raise WorkLimitExceeded(f"more than {self.work_limit} nodes processed")

    # -- numbers ----------------------------------------------------------
    def _pow_number(self, v, e: Fraction) -> Expr:
        if v == 1:
            return ONE
        if e.denominator == 1:
            n = int(e)
            if v == 0 and n < 0:
                return nodes.make(POW, e, (nodes.num(v),))
            if _exact(v):
                return nodes.num(_norm(Fraction(v) ** n))
            try:
                return nodes.num(float(v) ** n)
            except (OverflowError, ZeroDivisionError):
                return nodes.make(POW, e, (nodes.num(v),))
        if v == 0:
            return ZERO if e > 0 else nodes.make(POW, e, (ZERO,))
        if v < 0:
            return nodes.make(POW, e, (nodes.num(v),))
        if _exact(v):
            fv = Fraction(v)
            rn, rd = _iroot(fv.numerator, e.denominator), _iroot(fv.denominator, e.denominator)
            if rn is not None and rd is not None:
                return nodes.num(_norm(Fraction(rn, rd) ** e.numerator))
            return nodes.make(POW, e, (nodes.num(v),))
        return nodes.num(float(v) ** float(e))

    # -- sign analysis ----------------------------------------------------
    def sign(self, e: Expr):
        """+1, -1, 0 when provable, else None."""
        memo = self._signs
        hit = memo.get(id(e))
        if hit is not None:
            return hit[1]
        for n in nodes.postorder(e, skip=lambda m: id(m) in memo):
            memo[id(n)] = (n, self._sign_of(n))
        return memo[id(e)][1]

    def _sign_of(self, n: Expr):
        memo = self._signs
        k = n.kind
        if k == NUM:
            v = n.payload
            return (v > 0) - (v < 0)
        if k in (VAR, CONST):
            return 1 if self.positive else None
        s = [memo[id(a)][1] for a in n.args]
        if k == ADD:
            if None in s:
                return None
            if all(t >= 0 for t in s):
                return 1 if any(t > 0 for t in s) else 0
            if all(t <= 0 for t in s):
                return -1 if any(t < 0 for t in s) else 0
            return None
        if k == MUL:
            if None in s:
                return None
            out = 1
            for t in s:
                out *= t
            return out
        if k == NEG:
            return None if s[0] is None else -s[0]
        if k == DIV:
            if None in s or s[1] == 0:
                return None
            return s[0] * s[1]
        if k == POW:
            sb, e = s[0], n.payload
            if sb is None:
                return None
            if sb == 1:
                return 1
            if sb == 0:
                return 0 if e > 0 else None
            if e.denominator == 1:
                return 1 if e.numerator % 2 == 0 else -1
            return None
        if k == FUNC:
            sa, name = s[0], n.payload
            if sa is None:
                return None
            if name in ("exp", "cosh"):
                return 1
            if name in ("sinh", "tanh"):
                return sa
            if name == "coth":
                return sa if sa != 0 else None
            if name == "sqrt":
                return sa if sa >= 0 else None
            return None
        return None

    def nonneg(self, e: Expr) -> bool:
        """True when ``e`` is provably real and >= 0 wherever it is defined."""
        memo = self._nonneg
        hit = memo.get(id(e))
        if hit is not None:
            return hit[1]
        for n in nodes.postorder(e, skip=lambda m: id(m) in memo):
            memo[id(n)] = (n, self._nonneg_of(n))
        return memo[id(e)][1]

    def _nonneg_of(self, n: Expr) -> bool:
        k = n.kind
        if k == NUM:
            return n.payload >= 0
        if k in (VAR, CONST):
            return self.positive
        a = [self._nonneg[id(c)][1] for c in n.args]
        if k in (ADD, MUL):
            return all(a)
        if k == POW:
            e = n.payload
            return a[0] or (e.denominator == 1 and e.numerator % 2 == 0)
        if k == FUNC:
            return n.payload in ("exp", "cosh") or (n.payload in ("sinh", "tanh") and a[0])
        return False

    # -- constructors -----------------------------------------------------
    @staticmethod
    def _split_term(t: Expr):
        if t.kind == MUL and t.args[0].kind == NUM:
            rest = t.args[1:]
            return t.args[0].payload, (rest[0] if len(rest) == 1 else nodes.make(MUL, None, rest))
        return 1, t

    @staticmethod
    def _scaled(c, mono: Expr) -> Expr:
        if c == 1:
            return mono
        if mono.kind == MUL:
            return nodes.make(MUL, None, (nodes.num(c),) + mono.args)
        return nodes.make(MUL, None, (nodes.num(c), mono))

    def add(self, *terms) -> Expr:
        constant = 0
        acc: dict = {}
        stack = [nodes.as_expr(t) for t in reversed(terms)]
        while stack:
            t = stack.pop()
            if t.kind == NUM:
                constant = _norm(constant + t.payload)
            elif t.kind == ADD:
                stack.extend(reversed(t.args))
            else:
                c, mono = self._split_term(t)
                slot = acc.get(id(mono))
                if slot is None:
                    acc[id(mono)] = [mono, c]
                else:
                    slot[1] = _norm(slot[1] + c)
        out = [self._scaled(c, mono) for mono, c in acc.values() if c != 0]
        out.sort(key=nodes.sort_key)
        if constant != 0:
            out.insert(0, nodes.num(constant))
        if not out:
            return ZERO
        if len(out) == 1:
            return out[0]
        return nodes.make(ADD, None, tuple(out))

    def mul(self, *factors) -> Expr:
        coef = 1
        bases: dict = {}
        stack = [nodes.as_expr(f) for f in reversed(factors)]
        while stack:
            f = stack.pop()
            if f.kind == NUM:
                coef = _norm(coef * f.payload)
                continue
            if f.kind == MUL:
                stack.extend(reversed(f.args))
                continue
            if f.kind == POW:
                base, e = f.args[0], f.payload
            else:
                base, e = f, Fraction(1)
            slot = bases.get(id(base))
            if slot is None:
                bases[id(base)] = [base, e]
            else:
                slot[1] += e
        if coef == 0:
            return ZERO
        self._pair_squares(bases)
        out, redo = [], []
        for base, e in bases.values():
            if e == 0:
                continue
            p = self.pow(base, e) if (e != 1 or base.kind == NUM) else base
            if p.kind == NUM:
                coef = _norm(coef * p.payload)
            elif p.kind == MUL:
                redo.append(p)
            else:
                out.append(p)
        if redo:
            return self.mul(nodes.num(coef), *out, *redo)
        if coef == 0:
            return ZERO
        if self._needs_remerge(out):
            # a power came back with a base that is already present
            return self.mul(nodes.num(coef), *out)
        out.sort(key=nodes.sort_key)
        if coef != 1 or not out:
            out.insert(0, nodes.num(coef))
        if len(out) == 1:
            return out[0]
        return nodes.make(MUL, None, tuple(out))

    @staticmethod
    def _needs_remerge(out: list) -> bool:
        exps = {}
        for p in out:
            base, e = (p.args[0], p.payload) if p.kind == POW else (p, Fraction(1))
            if id(base) in exps:
                return True
            exps[id(base)] = e
        for p in out:
            if p.kind == POW and p.args[0].kind == POW and p.args[0].payload == 2:
                n = exps.get(id(p.args[0].args[0]))
                if n is not None and n.denominator == 1 and n not in (0, 1):
                    return True
        return False

    @staticmethod
    def _pair_squares(bases: dict):
        """Fold u^n into (u^2)^q: u^n (u^2)^q = u^(n mod 2) (u^2)^(q + n div 2)."""
        for key, slot in list(bases.items()):
            base, q = slot
            if not (base.kind == POW and base.payload == 2 and q.denominator != 1):
                continue
            plain = bases.get(id(base.args[0]))
            if plain is None or plain[1].denominator != 1 or plain[1] == 0:
                continue
            half, r = divmod(plain[1].numerator, 2)
            q2 = q + half
            if q2.denominator == 1:
                plain[1] = Fraction(r + 2 * q2.numerator)
                slot[1] = Fraction(0)
            else:
                plain[1] = Fraction(r)
                slot[1] = q2

    def pow(self, base, exponent) -> Expr:
        base = nodes.as_expr(base)
        e = _as_fraction(exponent)
        if e == 0:
            return ONE
        if e == 1:
            return base
        k = base.kind
        if k == NUM:
            return self._pow_number(base.payload, e)
        if k == POW:
            b, a = base.args[0], base.payload
            if e.denominator == 1 or self.sign(b) == 1 or self.nonneg(b):
                return self.pow(b, a * e)
            even = a.denominator == 1 and a.numerator % 2 == 0
            if self.sign(b) == -1 and even:
                return self.pow(self.neg(b), a * e)
            if even and a != 2:
                # (u^(2m))^e = (u^2)^(m e), valid since u^(2m) >= 0
                return self.pow(self.pow(b, 2), a * e / 2)
            return nodes.make(POW, e, (base,))
        if k == MUL:
            if e.denominator == 1:
                return self.mul(*[self.pow(f, e) for f in base.args])
            coef, safe, rest = 1, [], []
            for f in base.args:
                if f.kind == NUM:
                    if f.payload < 0:
                        coef = -f.payload
                        rest.append(MINUS_ONE)
                    else:
                        coef = f.payload
                elif self.sign(f) == 1 or self.nonneg(f):
                    safe.append(f)
                else:
                    rest.append(f)
            if not safe and coef == 1:
                return nodes.make(POW, e, (base,))
            parts = [self._pow_number(coef, e)] + [self.pow(f, e) for f in safe]
            if rest:
                parts.append(self.pow(self.mul(*rest), e))
            return self.mul(*parts)
        if k == FUNC and base.payload == "exp" and (e.denominator == 1 or self.sign(base.args[0]) is not None):
            return self.func("exp", self.mul(nodes.num(_norm(e)), base.args[0]))
        return nodes.make(POW, e, (base,))

    def neg(self, a) -> Expr:
        return self.mul(MINUS_ONE, a)

    def sub(self, a, b) -> Expr:
        return self.add(a, self.neg(b))

    def div(self, a, b) -> Expr:
        return self.mul(a, self.pow(b, -1))

    def sqrt(self, a) -> Expr:
        return self.pow(a, HALF)

    def func(self, name: str, arg) -> Expr:
        arg = nodes.as_expr(arg)
        if name == "sqrt":
            return self.sqrt(arg)
        if name not in nodes.FUNCTIONS:
            raise ValueError(f"unknown function {name!r}")
        if arg.kind == NUM:
            v = arg.payload
            if v == 0 and name in ("sin", "sinh", "tanh"):
                return ZERO
            if v == 0 and name in ("cos", "cosh", "exp"):
                return ONE
            if v == 1 and name == "ln":
                return ZERO
        negative = (arg.kind == NUM and arg.payload < 0) or (
            arg.kind == MUL and arg.args[0].kind == NUM and arg.args[0].payload < 0)
        if negative and name in _ODD:
            return self.neg(self.func(name, self.neg(arg)))
        if negative and name in _EVEN:
            return self.func(name, self.neg(arg))
        if name == "ln" and arg.kind == FUNC and arg.payload == "exp" and self.positive \
                and self.sign(arg.args[0]) is not None:
            return arg.args[0]
        return nodes.make(FUNC, name, (arg,))

    # -- whole-tree operations -------------------------------------------
    def simplify(self, e: Expr) -> Expr:
        memo = self._simplified
        hit = memo.get(id(e))
        if hit is not None:
            return hit[1]
        for n in nodes.postorder(e, skip=lambda m: id(m) in memo):
            self._tick()
            memo[id(n)] = (n, self._rebuild(n, [memo[id(a)][1] for a in n.args]))
        return memo[id(e)][1]

    def _rebuild(self, n: Expr, args: list) -> Expr:
        k = n.kind
        if k in (NUM, VAR, CONST):
            return n
        if k == ADD:
            return self.add(*args)
        if k == MUL:
            return self.mul(*args)
        if k == DIV:
            return self.div(args[0], args[1])
        if k == NEG:
            return self.neg(args[0])
        if k == POW:
            return self.pow(args[0], n.payload)
        if k == FUNC:
            return self.func(n.payload, args[0])
        raise ValueError(f"unknown node kind {k}")

    def diff(self, e: Expr, name: str) -> Expr:
        """Derivative of ``e`` with respect to the variable ``name``.

        ``e`` is simplified first so that the result is canonical.
        """
        e = self.simplify(e)
        memo = self._derivs.setdefault(name, {})
        hit = memo.get(id(e))
        if hit is not None:
            return hit[1]
        for n in nodes.postorder(e, skip=lambda m: id(m) in memo):
            self._tick()
            memo[id(n)] = (n, self._diff_node(n, name, [memo[id(a)][1] for a in n.args]))
        return memo[id(e)][1]

    def _diff_node(self, n: Expr, name: str, d: list) -> Expr:
        k = n.kind
        if k == VAR:
            return ONE if n.payload == name else ZERO
        if k in (NUM, CONST):
            return ZERO
        if all(di is ZERO for di in d):
            return ZERO
        if k == ADD:
            return self.add(*d)
        if k == NEG:
            return self.neg(d[0])
        if k == MUL:
            terms = []
            for i, di in enumerate(d):
                if di is ZERO:
                    continue
                others = n.args[:i] + n.args[i + 1:]
                terms.append(self.mul(*others, di))
            return self.add(*terms)
        if k == DIV:
            a, b = n.args
            da, db = d
            return self.sub(self.div(da, b), self.mul(a, db, self.pow(b, -2)))
        if k == POW:
            e = n.payload
            return self.mul(nodes.num(_norm(e)), self.pow(n.args[0], e - 1), d[0])
        if k == FUNC:
            u, du, f = n.args[0], d[0], n.payload
            if f == "sqrt":
                return self.mul(nodes.num(HALF), self.pow(u, -HALF), du)
            if f == "exp":
                return self.mul(n, du)
            if f == "ln":
                return self.mul(self.pow(u, -1), du)
            if f == "sin":
                return self.mul(self.func("cos", u), du)
            if f == "cos":
                return self.mul(MINUS_ONE, self.func("sin", u), du)
            if f == "sinh":
                return self.mul(self.func("cosh", u), du)
            if f == "cosh":
                return self.mul(self.func("sinh", u), du)
            if f == "tanh":
                return self.mul(self.pow(self.func("cosh", u), -2), du)
            if f == "coth":
                return self.mul(MINUS_ONE, self.pow(self.func("sinh", u), -2), du)
        raise ValueError(f"cannot differentiate node kind {k}")


def simplify(e: Expr, positive_domain: bool = False) -> Expr:
    """Value-preserving rewrite to canonical form.

    ``positive_domain`` declares every variable and named constant positive,
    which licenses ``sqrt(u^2) -> u`` for provably positive ``u``.
    """
    return Algebra(positive_domain).simplify(e)


def differentiate(e: Expr, var: str, positive_domain: bool = False) -> Expr:
    """Exact symbolic derivative of ``e`` with respect to ``var``."""
    return Algebra(positive_domain).diff(e, var)
