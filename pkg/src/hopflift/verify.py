"""Pointwise residual certification of candidate solution tuples."""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .expr import Algebra, as_expr, evaluate_many, num, parse_expression
from .fields import (COORDS, EPS_MAG, SampleConfig, SampleSet, VectorField, curl, point_binding,
                     sample_points, write_csv)
from .iterate import EquationSystem
from .lift import SIGMA, Section, SpinorField, lift_potential, lift_spinor

DEFAULT_THRESHOLD = 1e-8
EQUATIONS = ("bilinear", "weyl", "field_strength", "constraint", "divergence_free", "pauli_form")


@dataclass
class ResidualStats:
    name: str
    max: float
    mean: float
    point_count: int
    threshold: float
    worst_point: tuple
    values: np.ndarray = field(repr=False, default=None)

    @property
    def passed(self) -> bool:
        return bool(self.max < self.threshold)

    @classmethod
    def from_values(cls, name: str, values, points, threshold: float) -> "ResidualStats":
        values = np.asarray(values, dtype=float)
        if values.size == 0:
            raise ValueError("no sample points")
        i = int(np.argmax(values))
        return cls(name, float(values[i]), math.fsum(values) / values.size, int(values.size),
                   threshold, tuple(float(c) for c in np.atleast_2d(points)[i]), values)

    def to_dict(self) -> dict:
        return {"max": self.max, "mean": self.mean, "point_count": self.point_count,
                "threshold": self.threshold, "pass": self.passed,
                "worst_point": list(self.worst_point)}


@dataclass
class VerificationReport:
    system: EquationSystem
    stats: dict
    points: np.ndarray = field(repr=False, default=None)

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.stats.values())

    def failing(self) -> list:
        return [k for k, s in self.stats.items() if not s.passed]

    def to_dict(self) -> dict:
        return {"system": self.system.value, "pass": self.passed,
                "equations": {k: s.to_dict() for k, s in self.stats.items()}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_table(self) -> str:
        rows = [f"{'equation':<16}{'max':>12}{'mean':>12}{'threshold':>12}  result"]
        for k, s in self.stats.items():
            rows.append(f"{k:<16}{s.max:>12.3e}{s.mean:>12.3e}{s.threshold:>12.1e}  "
                        f"{'pass' if s.passed else 'FAIL'}")
        rows.append(f"overall: {'PASS' if self.passed else 'FAIL'} ({self.system.value})")
        return "\n".join(rows)

    def to_csv(self, path) -> None:
        names = list(self.stats)
        rows = [list(p) + [self.stats[n].values[i] for n in names] for i, p in enumerate(self.points)]
        write_csv(path, ["x", "y", "z"] + names, rows)


@dataclass
class VerifyConfig:
    positive_domain: bool = False
    sample: SampleConfig = field(default_factory=SampleConfig)
    constants: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=dict)
    eps_mag: float = EPS_MAG

    def threshold(self, name: str) -> float:
        return self.thresholds.get(name, DEFAULT_THRESHOLD)


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("HOPFLIFT_THREADS", "1")))
    except ValueError:
        return 1


def _points(S) -> np.ndarray:
    return S.points if isinstance(S, SampleSet) else np.atleast_2d(np.asarray(S, dtype=float))


def _norm(v) -> np.ndarray:
    return np.sqrt(np.sum(np.abs(v) ** 2, axis=-1))


def _real(values: np.ndarray) -> np.ndarray:
    return values.real


# -- residuals ---------------------------------------------------------------

def weyl_residual(psi: SpinorField, A: VectorField, S, constants=None,
                  threshold: float = DEFAULT_THRESHOLD, eps_mag: float = EPS_MAG,
                  alg: Algebra | None = None) -> ResidualStats:
    """|sigma^k (d_k + i A_k) psi| relative to its two terms."""
    alg = alg or Algebra()
    pts = _points(S)
    parts = [alg.simplify(p) for p in psi.parts]
    exprs = list(parts)
    for x in COORDS:
        exprs += [alg.diff(p, x) for p in parts]
    exprs += list(A.components)
    vals = evaluate_many(exprs, point_binding(pts, constants))

    def spinor(i):
        r1, i1, r2, i2 = vals[i:i + 4]
        return np.stack([r1 + 1j * i1, r2 + 1j * i2], axis=-1)

    p = spinor(0)
    dpsi = [spinor(4 + 4 * k) for k in range(3)]
    a = [vals[16 + k].real for k in range(3)]
    kinetic = sum(np.einsum("ij,nj->ni", SIGMA[k], dpsi[k]) for k in range(3))
    gauge = sum(a[k][:, None] * np.einsum("ij,nj->ni", SIGMA[k], p) for k in range(3))
    res = _norm(kinetic + 1j * gauge) / (_norm(kinetic) + _norm(gauge) + eps_mag)
    return ResidualStats.from_values("weyl", res, pts, threshold)


def bilinear_residual(psi: SpinorField, H: VectorField, S, constants=None,
                      threshold: float = DEFAULT_THRESHOLD, eps_mag: float = EPS_MAG) -> ResidualStats:
    """|<psi|sigma|psi> - H| / max(|H|, eps)."""
    pts = _points(S)
    p = psi.values(pts, constants)
    h = H.values(pts, constants).real
    b = np.einsum("ni,kij,nj->nk", p.conj(), SIGMA, p).real
    res = _norm(b - h) / np.maximum(_norm(h), eps_mag)
    return ResidualStats.from_values("bilinear", res, pts, threshold)


def field_strength_residual(A: VectorField, B: VectorField, S, constants=None,
                            threshold: float = DEFAULT_THRESHOLD, eps_mag: float = EPS_MAG,
                            alg: Algebra | None = None) -> ResidualStats:
    """|curl A - B| / max(|B|, eps)."""
    pts = _points(S)
    c = curl(A, alg=alg or Algebra()).values(pts, constants)
    b = B.values(pts, constants)
    res = _norm(c - b) / np.maximum(_norm(b), eps_mag)
    return ResidualStats.from_values("field_strength", res, pts, threshold)


def constraint_residual(H: VectorField, B: VectorField, system, S, constants=None,
                        threshold: float = DEFAULT_THRESHOLD, eps_mag: float = EPS_MAG) -> ResidualStats:
    """|H - s B| / max(|H|, eps) with s = +1 (Seiberg-Witten) or -1 (Freund)."""
    s = EquationSystem.parse(system).sign
    pts = _points(S)
    h = H.values(pts, constants)
    b = B.values(pts, constants)
    res = _norm(h - s * b) / np.maximum(_norm(h), eps_mag)
    return ResidualStats.from_values("constraint", res, pts, threshold)


def _jacobian(H: VectorField, pts, constants, alg: Algebra):
    """Array J[n, k, j] = d_k H^j at each point."""
    exprs = [alg.diff(H[j], x) for x in COORDS for j in range(3)]
    vals = evaluate_many(exprs, point_binding(pts, constants))
    return np.stack(vals, axis=-1).reshape(len(pts), 3, 3).real


def divergence_residual(H: VectorField, S, constants=None, threshold: float = DEFAULT_THRESHOLD,
                        eps_mag: float = EPS_MAG, alg: Algebra | None = None) -> ResidualStats:
    """|div H| / (sum_k |d_k H^k| + eps)."""
    pts = _points(S)
    jac = _jacobian(H, pts, constants, alg or Algebra())
    diag = np.stack([jac[:, k, k] for k in range(3)], axis=-1)
    res = np.abs(diag.sum(axis=-1)) / (np.abs(diag).sum(axis=-1) + eps_mag)
    return ResidualStats.from_values("divergence_free", res, pts, threshold)


def pauli_form_residual(H: VectorField, S, constants=None, threshold: float = DEFAULT_THRESHOLD,
                        eps_mag: float = EPS_MAG, alg: Algebra | None = None) -> ResidualStats:
    """Entrywise residual of sigma^k d_k (H^j sigma_j) - i J^j sigma_j, J = curl H."""
    alg = alg or Algebra()
    pts = _points(S)
    jac = _jacobian(H, pts, constants, alg)
    J = curl(H, alg=alg).values(pts, constants).real
    lhs = np.einsum("nkj,kab,jbc->nac", jac, SIGMA, SIGMA)
    rhs = 1j * np.einsum("nj,jab->nab", J, SIGMA)
    diff = np.sqrt(np.sum(np.abs(lhs - rhs) ** 2, axis=(-2, -1)))
    # each sigma product has Frobenius norm sqrt(2); scale by the sum of term norms
    scale = np.sqrt(2) * (np.abs(jac).sum(axis=(-2, -1)) + np.abs(J).sum(axis=-1))
    res = diff / (scale + eps_mag)
    return ResidualStats.from_values("pauli_form", res, pts, threshold)


# -- holonomy ------------------------------------------------------------------

class Holonomy(NamedTuple):
    value: float
    error: float
    nodes: int


def circle_loop(radius: float = 1.0, height: float = 0.0, center=(0.0, 0.0)) -> tuple:
    """Counter-clockwise horizontal circle as expressions in t in [0, 1]."""
    t = parse_expression("t")
    w = num(2 * math.pi) * t
    alg = Algebra()
    return (alg.add(center[0], alg.mul(radius, alg.func("cos", w))),
            alg.add(center[1], alg.mul(radius, alg.func("sin", w))),
            as_expr(float(height)) if height else num(0))


def _loop_integral(A: VectorField, loop, n: int, constants, alg: Algebra) -> float:
    t = np.arange(n) / n
    binding = {"t": t}
    for k, v in (constants or {}).items():
        binding[k] = np.full(n, v)
    r_exprs = [as_expr(c) for c in loop]
    dr_exprs = [alg.diff(c, "t") for c in r_exprs]
    vals = evaluate_many(r_exprs + dr_exprs, binding)
    pts = np.stack([v.real for v in vals[:3]], axis=-1)
    dr = np.stack([v.real for v in vals[3:]], axis=-1)
    a = A.values(pts, constants).real
    return math.fsum(np.sum(a * dr, axis=-1)) / n


def holonomy(A: VectorField, loop, n: int = 1024, constants=None) -> Holonomy:
    """Closed-loop integral of A . dr by the periodic trapezoid rule.

    ``loop`` is three expressions in ``t`` over one period [0, 1]. The error
    estimate is the change from ``n/2`` to ``n`` nodes.
    """
    if n < 64:
        raise ValueError("holonomy needs at least 64 quadrature nodes")
    alg = Algebra()
    full = _loop_integral(A, loop, n, constants, alg)
    half = _loop_integral(A, loop, n // 2, constants, alg)
    return Holonomy(full, abs(full - half), n)


# -- whole-tuple verification -------------------------------------------------

class DegenerateFieldError(ValueError):
    pass


@dataclass(frozen=True)
class SolutionTuple:
    H: VectorField
    psi: SpinorField
    A: VectorField
    B: VectorField


TUPLE_GROUPS = (("H", 3), ("psi", 4), ("A", 3), ("B", 3))


def tuple_components(sol: SolutionTuple) -> list:
    """[(name, expr)] for H1..H3, psi1..psi4, A1..A3, B1..B3."""
    groups = {"H": sol.H.components, "psi": sol.psi.parts, "A": sol.A.components, "B": sol.B.components}
    return [(f"{g}{i + 1}", groups[g][i]) for g, n in TUPLE_GROUPS for i in range(n)]


def perturb_component(sol: SolutionTuple, target: str, eps: float) -> SolutionTuple:
    """Copy of ``sol`` with one component (e.g. "A2", "psi3") scaled by 1 + eps."""
    t = target.strip()
    group = t.rstrip("0123456789")
    sizes = dict(TUPLE_GROUPS)
    idx = t[len(group):]
    if group not in sizes or not idx or not 1 <= int(idx) <= sizes[group]:
        raise ValueError(f"bad tuple component {target!r}")
    i = int(idx) - 1
    if group == "psi":
        parts = list(sol.psi.parts)
        parts[i] = parts[i] * (1 + eps)
        return replace(sol, psi=SpinorField(*parts))
    vec = list(getattr(sol, group).components)
    vec[i] = vec[i] * (1 + eps)
    return replace(sol, **{group: VectorField(*vec)})


def solution_from_field(H: VectorField, system, positive_domain: bool = False,
                        section: Section = Section.NORTH) -> SolutionTuple:
    """(psi, A, B) reconstructed from H: psi = lift(H), A = A[H], B = s H."""
    s = EquationSystem.parse(system).sign
    alg = Algebra(positive_domain)
    H = H.simplify(alg=alg)
    return SolutionTuple(H, lift_spinor(H, section, alg=alg), lift_potential(H, alg=alg),
                         H if s == 1 else H.map(alg.neg))


def verify_tuple(sol: SolutionTuple, system, cfg: VerifyConfig | None = None,
                 samples: SampleSet | None = None) -> VerificationReport:
    """Run every residual on a fully specified tuple."""
    cfg = cfg or VerifyConfig()
    system = EquationSystem.parse(system)
    if samples is None:
        samples = sample_points(cfg.sample, sol.H, cfg.constants)
    c, eps = cfg.constants, cfg.eps_mag
    th = cfg.threshold
    jobs = {
        "bilinear": lambda: bilinear_residual(sol.psi, sol.H, samples, c, th("bilinear"), eps),
        "weyl": lambda: weyl_residual(sol.psi, sol.A, samples, c, th("weyl"), eps),
        "field_strength": lambda: field_strength_residual(sol.A, sol.B, samples, c, th("field_strength"), eps),
        "constraint": lambda: constraint_residual(sol.H, sol.B, system, samples, c, th("constraint"), eps),
        "divergence_free": lambda: divergence_residual(sol.H, samples, c, th("divergence_free"), eps),
        "pauli_form": lambda: pauli_form_residual(sol.H, samples, c, th("pauli_form"), eps),
    }
    workers = thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {k: pool.submit(fn) for k, fn in jobs.items()}
            stats = {k: futures[k].result() for k in EQUATIONS}
    else:
        stats = {k: jobs[k]() for k in EQUATIONS}
    return VerificationReport(system, stats, samples.points)


def verify_solution(H: VectorField, system, cfg: VerifyConfig | None = None,
                    samples: SampleSet | None = None) -> VerificationReport:
    """Certify that H, together with psi, A, B derived from it, solves the
    chosen system on the sample set."""
    cfg = cfg or VerifyConfig()
    if all(c.kind == "num" and c.payload == 0 for c in H.simplify().components):
        raise DegenerateFieldError("field is identically zero")
    sol = solution_from_field(H, system, cfg.positive_domain, Section(cfg.sample.section))
    return verify_tuple(sol, system, cfg, samples)
