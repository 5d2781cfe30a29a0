"""Planar solutions of 4 d_z d_zbar omega = exp(2 omega) and their 3D embedding.

Analytic maps are expressions in the reserved variable ``zeta`` (``ζ`` is
accepted on input). They are evaluated with principal complex branches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .expr import (Algebra, EvaluationError, Expr, as_expr, differentiate, evaluate_many, num,
                   parse_expression, substitute, var)
from .expr.nodes import POW, postorder
from .fields import COORDS, VectorField, write_csv
from .verify import ResidualStats

ZETA = "zeta"
REALITY_TOL = 1e-9
LIOUVILLE_THRESHOLD = 1e-5


class RealityError(ValueError):
    """omega is not a finite real number at some point."""

    def __init__(self, message: str, point=None):
        if point is not None:
            message = f"{message} at (u={point[0]!r}, v={point[1]!r})"
        super().__init__(message)
        self.point = point


class BranchCutError(EvaluationError):
    pass


class UnsupportedPlaneMapError(ValueError):
    pass


@dataclass(frozen=True)
class AnalyticMap:
    """g(zeta) together with its symbolic derivative."""

    expr: Expr
    deriv: Expr

    @classmethod
    def of(cls, g) -> "AnalyticMap":
        if isinstance(g, AnalyticMap):
            return g
        if isinstance(g, str):
            g = parse_expression(g.replace("ζ", ZETA))
        g = as_expr(g)
        return cls(g, differentiate(g, ZETA))

    def __call__(self, z) -> tuple:
        """(g(z), g'(z)) as complex arrays."""
        z = np.asarray(z, dtype=complex)
        _check_branch_cuts(self.expr, z)
        g, dg = evaluate_many([self.expr, self.deriv], {ZETA: z})
        return np.asarray(g), np.asarray(dg)


def _check_branch_cuts(e: Expr, z: np.ndarray, rel: float = 1e-12):
    """Reject points where a fractional power's base sits on the negative real axis."""
    bases = [n.args[0] for n in postorder(e)
             if n.kind == POW and Fraction(n.payload).denominator != 1]
    if not bases:
        return
    for b, val in zip(bases, evaluate_many(bases, {ZETA: z})):
        val = np.asarray(val)
        on_cut = (val.real < 0) & (np.abs(val.imag) <= rel * np.abs(val))
        if np.any(on_cut):
            i = tuple(np.argwhere(on_cut)[0]) if on_cut.ndim else ()
            zi = complex(z[i]) if z.ndim else complex(z)
            raise BranchCutError("point on a branch cut", {"u": zi.real, "v": zi.imag})


def _as_z(points) -> np.ndarray:
    p = np.asarray(points, dtype=float)
    return p[..., 0] + 1j * p[..., 1]


def _pole(mask, z, what):
    if np.any(mask):
        i = tuple(np.argwhere(mask)[0]) if np.ndim(mask) else ()
        zi = complex(np.asarray(z)[i])
        raise EvaluationError(what, {"u": zi.real, "v": zi.imag})


def _real_or_raise(w: np.ndarray, z) -> np.ndarray:
    bad = ~np.isfinite(w) | (np.abs(w.imag) >= REALITY_TOL)
    if np.any(bad):
        i = tuple(np.argwhere(bad)[0]) if np.ndim(bad) else ()
        zi = complex(np.asarray(z)[i])
        raise RealityError(f"omega is not real (value {complex(w[i])!r})", (zi.real, zi.imag))
    return w.real


def omega_general_complex(g, h, points) -> np.ndarray:
    """Principal-branch omega for the pair (g, h) with h evaluated at conj(z).

    Returns complex values (real part and branch phase) without the reality
    check. ``g' h' = 0`` gives ``-inf``.
    """
    g, h = AnalyticMap.of(g), AnalyticMap.of(h)
    z = _as_z(points)
    gz, dg = g(z)
    hz, dh = h(np.conj(z))
    denom = (1 - gz * hz) ** 2
    _pole(denom == 0, z, "pole: g h = 1")
    with np.errstate(all="ignore"):
        return 0.5 * np.log(4 * dg * dh / denom)


def omega_general(g, h, points) -> np.ndarray:
    """omega = 1/2 ln(4 g'(z) h'(zbar) / (1 - g(z) h(zbar))^2), checked real."""
    z = _as_z(points)
    return _real_or_raise(np.asarray(omega_general_complex(g, h, points)), z)


def omega_ns(g, points) -> np.ndarray:
    """The h = conj(g) choice: 1/2 ln(4 |g'|^2 / (1 - |g|^2)^2)."""
    g = AnalyticMap.of(g)
    z = _as_z(points)
    gz, dg = g(z)
    one_minus = 1 - np.abs(gz) ** 2
    _pole(one_minus == 0, z, "pole: |g| = 1")
    _pole(dg == 0, z, "pole: g' = 0")
    return 0.5 * np.log(4 * np.abs(dg) ** 2 / one_minus ** 2)


def omega_alt(g, points) -> np.ndarray:
    """The h = 1/conj(g) choice: 1/2 ln(|g'|^2 / (Im g)^2)."""
    g = AnalyticMap.of(g)
    z = _as_z(points)
    gz, dg = g(z)
    _pole(gz.imag == 0, z, "pole: Im g = 0 (singular line)")
    _pole(dg == 0, z, "pole: g' = 0")
    return 0.5 * np.log(np.abs(dg) ** 2 / gz.imag ** 2)


def conjugate_power(g, nu: int) -> AnalyticMap:
    """h with h(zbar) = conj(g(z))^nu, for g with real coefficients."""
    g = AnalyticMap.of(g)
    return AnalyticMap.of(Algebra().pow(g.expr, nu))


def reality_fraction(g, nu: int, points) -> float:
    """Share of points where omega_general(g, conj(g)^nu) is finite and real."""
    w = np.asarray(omega_general_complex(g, conjugate_power(g, nu), points))
    ok = np.isfinite(w) & (np.abs(w.imag) < REALITY_TOL)
    return float(np.mean(ok))


# -- the z^n family -------------------------------------------------------------

def half_integer(n) -> Fraction:
    """Validate n with 2n a nonzero integer."""
    q = Fraction(n).limit_denominator(1000) if isinstance(n, float) else Fraction(n)
    if isinstance(n, float) and abs(float(q) - n) > 1e-12:
        q = Fraction(n)
    if q == 0 or (2 * q).denominator != 1:
        raise ValueError(f"n must be a nonzero multiple of 1/2 for a single-valued B, got {n}")
    return q


def zn_family(n, rho, phi) -> np.ndarray:
    """B = n^2 / (rho^2 sin^2(n phi))."""
    n = half_integer(n)
    rho = np.asarray(rho, dtype=float)
    phi = np.asarray(phi, dtype=float)
    s = np.sin(float(n) * phi)
    if np.any(np.abs(s) < 1e-12) or np.any(rho == 0):
        raise EvaluationError("singular ray of the z^n family",
                              {"rho": float(np.ravel(rho)[0]), "phi": float(np.ravel(phi)[0])})
    return float(n) ** 2 / (rho ** 2 * s ** 2)


def zn_map(n) -> AnalyticMap:
    return AnalyticMap.of(Algebra().pow(var(ZETA), half_integer(n)))


def principal_sector(n) -> tuple:
    """0 < phi < pi/|n|: free of branch cuts of z^n and of singular rays."""
    return (0.0, math.pi / abs(float(half_integer(n))))


def sector_grid(n, size: int = 20, rho=(0.5, 1.5), margin: float = 0.05) -> np.ndarray:
    """size x size polar grid in the principal sector, as (u, v) points."""
    lo, hi = principal_sector(n)
    span = hi - lo
    phis = np.linspace(lo + margin * span, hi - margin * span, size)
    rhos = np.linspace(rho[0], rho[1], size)
    R, P = np.meshgrid(rhos, phis, indexing="ij")
    return np.stack([R * np.cos(P), R * np.sin(P)], axis=-1).reshape(-1, 2)


# -- planar solutions -------------------------------------------------------------

@dataclass(frozen=True)
class PlanarSolution:
    omega: Callable
    singular_locus: str

    def B(self, points) -> np.ndarray:
        return np.exp(2 * self.omega(points))


def planar_alt(g) -> PlanarSolution:
    g = AnalyticMap.of(g)
    return PlanarSolution(lambda p: omega_alt(g, p), "Im g(z) = 0")


def planar_ns(g) -> PlanarSolution:
    g = AnalyticMap.of(g)
    return PlanarSolution(lambda p: omega_ns(g, p), "|g(z)| = 1")


def planar_zn(n) -> PlanarSolution:
    n = half_integer(n)
    g = zn_map(n)
    rays = abs(2 * n)
    return PlanarSolution(lambda p: omega_alt(g, p),
                          f"singular along {rays} rays through the roots of unity of order {rays}")


def laplacian(omega: Callable, points, h: float = 1e-4) -> np.ndarray:
    """5-point central-difference Laplacian in (u, v)."""
    p = np.asarray(points, dtype=float)
    du = np.array([h, 0.0])
    dv = np.array([0.0, h])
    c = omega(p)
    return (omega(p + du) + omega(p - du) + omega(p + dv) + omega(p - dv) - 4 * c) / h ** 2


def liouville_residual(omega: Callable, samples, h: float = 1e-4, scale: float = 1.0,
                       threshold: float = LIOUVILLE_THRESHOLD) -> ResidualStats:
    """|Laplacian(omega) - exp(2 omega)| / exp(2 omega) with a finite-difference stencil."""
    pts = np.asarray(samples, dtype=float)
    step = h * scale
    rhs = np.exp(2 * omega(pts))
    res = np.abs(laplacian(omega, pts, step) - rhs) / rhs
    return ResidualStats.from_values("liouville", res, pts, threshold)


def symbolic_laplacian_residual(g, points) -> np.ndarray:
    """Alternative-ansatz residual with exact derivatives, for polynomial g.

    Uses omega = 1/2 ln(|g'|^2) - ln|Im g| with z = u + i v expanded
    symbolically in u, v; only meaningful when g is a polynomial in zeta.
    """
    g = AnalyticMap.of(g)
    alg = Algebra()
    u, v = var("u"), var("v")
    # split g(u + i v) into real and imaginary parts by expanding powers of (u + i v)
    re_g, im_g = _real_imag(g.expr, u, v, alg)
    re_d, im_d = _real_imag(g.deriv, u, v, alg)
    omega = alg.sub(alg.mul(Fraction(1, 2), alg.func("ln", alg.add(alg.pow(re_d, 2), alg.pow(im_d, 2)))),
                    alg.mul(Fraction(1, 2), alg.func("ln", alg.pow(im_g, 2))))
    lap = alg.add(alg.diff(alg.diff(omega, "u"), "u"), alg.diff(alg.diff(omega, "v"), "v"))
    p = np.asarray(points, dtype=float)
    w, L = evaluate_many([omega, lap], {"u": p[:, 0], "v": p[:, 1]})
    rhs = np.exp(2 * w.real)
    return np.abs(L.real - rhs) / rhs


def _real_imag(e: Expr, u: Expr, v: Expr, alg: Algebra) -> tuple:
    """(Re, Im) of a polynomial in zeta at zeta = u + i v."""
    out = {}
    for n in postorder(e):
        k = n.kind
        if k == "num":
            val = complex(n.payload if not isinstance(n.payload, Fraction) else float(n.payload))
            out[id(n)] = (num(n.payload) if val.imag == 0 else num(val.real), num(0))
        elif k == "var" and n.payload == ZETA:
            out[id(n)] = (u, v)
        elif k == "add":
            parts = [out[id(a)] for a in n.args]
            out[id(n)] = (alg.add(*(p[0] for p in parts)), alg.add(*(p[1] for p in parts)))
        elif k == "mul":
            acc = (num(1), num(0))
            for a in n.args:
                acc = _cmul(acc, out[id(a)], alg)
            out[id(n)] = acc
        elif k == "pow" and Fraction(n.payload).denominator == 1 and n.payload > 0:
            base = out[id(n.args[0])]
            acc = (num(1), num(0))
            for _ in range(int(n.payload)):
                acc = _cmul(acc, base, alg)
            out[id(n)] = acc
        else:
            raise ValueError("symbolic Laplacian path needs a polynomial in zeta")
    return out[id(e)]


def _cmul(a, b, alg):
    return (alg.sub(alg.mul(a[0], b[0]), alg.mul(a[1], b[1])),
            alg.add(alg.mul(a[0], b[1]), alg.mul(a[1], b[0])))


def liouville_table(sol: PlanarSolution, samples, h: float = 1e-4) -> list:
    """Rows (u, v, omega, B, residual)."""
    pts = np.asarray(samples, dtype=float)
    w = sol.omega(pts)
    B = np.exp(2 * w)
    res = np.abs(laplacian(sol.omega, pts, h) - B) / B
    return [(p[0], p[1], wi, bi, ri) for p, wi, bi, ri in zip(pts, w, B, res)]


def write_liouville_csv(path, rows) -> None:
    write_csv(path, ["u", "v", "omega", "B", "residual"], rows)


# -- embedding -------------------------------------------------------------------

PLANE_MAPS = {"x": ("y", "z"), "y": ("z", "x"), "z": ("x", "y")}
_AXES = {(1, 0, 0): "x", (0, 1, 0): "y", (0, 0, 1): "z"}


def _axis_name(axis) -> str:
    if isinstance(axis, str):
        name = axis.lower().removeprefix("e_").removeprefix("e")
        if name in PLANE_MAPS:
            return name
    else:
        key = tuple(int(round(float(c))) for c in axis)
        if key in _AXES and np.allclose(axis, key):
            return _AXES[key]
    raise UnsupportedPlaneMapError(f"axis must be one of e_x, e_y, e_z, got {axis!r}")


def embed_planar(b2d, axis="x", plane_map=None, sign: int = 1) -> VectorField:
    """H = sign * B2d(u, v) * axis with (u, v) mapped to the two other coordinates.

    The default plane map is cyclic: e_x -> (y, z), e_y -> (z, x), e_z -> (x, y).
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    a = _axis_name(axis)
    if plane_map is None:
        plane_map = PLANE_MAPS[a]
    plane_map = tuple(plane_map)
    if len(plane_map) != 2 or set(plane_map) != set(PLANE_MAPS[a]):
        raise UnsupportedPlaneMapError(
            f"plane map {plane_map!r} does not span the plane orthogonal to e_{a}")
    b = parse_expression(b2d) if isinstance(b2d, str) else as_expr(b2d)
    b = substitute(b, {"u": var(plane_map[0]), "v": var(plane_map[1])})
    alg = Algebra()
    b = alg.simplify(b if sign == 1 else alg.neg(b))
    return VectorField(*(b if c == a else num(0) for c in COORDS))
