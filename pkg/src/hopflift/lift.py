"""Spinor and gauge-potential lift of a vector field.

Pauli matrices follow the standard convention (sigma1 sigma2 = i sigma3)::

    sigma1 = [[0, 1], [1, 0]]
    sigma2 = [[0, -i], [i, 0]]
    sigma3 = [[1, 0], [0, -1]]

so the bilinear of psi = (psi1, psi2) is
``(2 Re(conj(psi1) psi2), 2 Im(conj(psi1) psi2), |psi1|^2 - |psi2|^2)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .expr import Algebra, Expr, as_expr, evaluate_many, to_text
from .fields import COORDS, VectorField, curl, magnitude, point_binding

SIGMA = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)

NEG_HALF = Fraction(-1, 2)


class Section(enum.Enum):
    """Choice of spinor per field direction.

    NORTH is singular where H + H3 = 0 (field along -e3), SOUTH where
    H - H3 = 0 (field along +e3).
    """

    NORTH = "north"
    SOUTH = "south"


@dataclass(frozen=True)
class SpinorField:
    """Two complex components, each stored as (real part, imaginary part)."""

    re1: Expr
    im1: Expr
    re2: Expr
    im2: Expr

    def __post_init__(self):
        for name in ("re1", "im1", "re2", "im2"):
            object.__setattr__(self, name, as_expr(getattr(self, name)))

    @property
    def parts(self) -> tuple:
        return (self.re1, self.im1, self.re2, self.im2)

    def map(self, fn) -> "SpinorField":
        return SpinorField(*(fn(p) for p in self.parts))

    def values(self, points, constants=None) -> np.ndarray:
        """Complex array of shape (N, 2)."""
        r1, i1, r2, i2 = evaluate_many(self.parts, point_binding(points, constants))
        return np.stack([r1 + 1j * i1, r2 + 1j * i2], axis=-1)

    def texts(self) -> list:
        return [to_text(p) for p in self.parts]


def lift_spinor(H: VectorField, section: Section = Section.NORTH,
                positive_domain: bool = False, alg: Algebra | None = None) -> SpinorField:
    """Spinor whose Pauli bilinear is ``H`` (gauge phase fixed to zero)."""
    alg = alg or Algebra(positive_domain)
    h1, h2, h3 = (alg.simplify(c) for c in H)
    mag = magnitude(VectorField(h1, h2, h3), alg=alg)
    if Section(section) is Section.NORTH:
        d = alg.add(mag, h3)
        norm = alg.pow(alg.mul(2, d), NEG_HALF)
        return SpinorField(alg.mul(d, norm), 0, alg.mul(h1, norm), alg.mul(h2, norm))
    d = alg.sub(mag, h3)
    norm = alg.pow(alg.mul(2, d), NEG_HALF)
    return SpinorField(alg.mul(h1, norm), alg.neg(alg.mul(h2, norm)), alg.mul(d, norm), 0)


def lift_potential(H: VectorField, positive_domain: bool = False,
                   alg: Algebra | None = None) -> VectorField:
    """Abelian potential A[H] with the gauge term dropped.

    A_k = -(H1 d_k H2 - H2 d_k H1) / (2 |H| (|H| + H3)) - (curl H)_k / (2 |H|)
    """
    alg = alg or Algebra(positive_domain)
    H = H.simplify(alg=alg)
    h1, h2, h3 = H.components
    mag = magnitude(H, alg=alg)
    inv_mag = alg.pow(mag, -1)
    first = alg.mul(as_expr(NEG_HALF), inv_mag, alg.pow(alg.add(mag, h3), -1))
    second = alg.mul(as_expr(NEG_HALF), inv_mag)
    J = curl(H, alg=alg)
    comps = []
    for k, x in enumerate(COORDS):
        w = alg.sub(alg.mul(h1, alg.diff(h2, x)), alg.mul(h2, alg.diff(h1, x)))
        comps.append(alg.add(alg.mul(first, w), alg.mul(second, J[k])))
    return VectorField(*comps)


def bilinear(psi: SpinorField, positive_domain: bool = False,
             alg: Algebra | None = None) -> VectorField:
    """Pauli bilinear <psi|sigma^k|psi> as expressions."""
    alg = alg or Algebra(positive_domain)
    a1, b1, a2, b2 = (alg.simplify(p) for p in psi.parts)
    re = alg.add(alg.mul(a1, a2), alg.mul(b1, b2))
    im = alg.sub(alg.mul(a1, b2), alg.mul(b1, a2))
    n1 = alg.add(alg.pow(a1, 2), alg.pow(b1, 2))
    n2 = alg.add(alg.pow(a2, 2), alg.pow(b2, 2))
    return VectorField(alg.mul(2, re), alg.mul(2, im), alg.sub(n1, n2))


def norm_squared(psi: SpinorField, alg: Algebra | None = None) -> Expr:
    alg = alg or Algebra()
    return alg.add(*(alg.pow(alg.simplify(p), 2) for p in psi.parts))


def density_matrix(psi: SpinorField, point, constants=None) -> np.ndarray:
    """|psi><psi| at a single point (2x2 complex)."""
    v = psi.values(np.asarray(point, dtype=float)[None, :], constants)[0]
    return np.outer(v, v.conj())


def density_from_field(h: np.ndarray) -> np.ndarray:
    """(|H| 1 + H^k sigma_k) / 2 for a real 3-vector ``h``."""
    h = np.asarray(h, dtype=float)
    return 0.5 * (np.linalg.norm(h) * IDENTITY + np.einsum("k,kij->ij", h, SIGMA))


def compute_current(H: VectorField, positive_domain: bool = False,
                    alg: Algebra | None = None) -> VectorField:
    """J = curl H."""
    return curl(H, positive_domain, alg)
