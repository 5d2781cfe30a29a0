"""Symbolic Cartesian vector fields, vector calculus and sample sets."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .expr import Algebra, EvaluationError, Expr, as_expr, evaluate_many, parse_expression, to_text

COORDS = ("x", "y", "z")

DEFAULT_BOX = ((0.3, 1.7), (0.3, 1.7), (0.3, 1.7))
EPS_MAG = 1e-8
EPS_SEC = 1e-6


@dataclass(frozen=True)
class VectorField:
    """Three Cartesian components as expressions in x, y, z."""

    c1: Expr
    c2: Expr
    c3: Expr

    def __post_init__(self):
        for name in ("c1", "c2", "c3"):
            object.__setattr__(self, name, as_expr(getattr(self, name)))

    @classmethod
    def parse(cls, components, constants=()) -> "VectorField":
        comps = [c if isinstance(c, Expr) else parse_expression(str(c), constants) for c in components]
        if len(comps) != 3:
            raise ValueError(f"a vector field needs 3 components, got {len(comps)}")
        return cls(*comps)

    @property
    def components(self) -> tuple:
        return (self.c1, self.c2, self.c3)

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i: int) -> Expr:
        return self.components[i]

    def map(self, fn) -> "VectorField":
        return VectorField(*(fn(c) for c in self.components))

    def scale(self, s) -> "VectorField":
        return self.map(lambda c: c * s)

    def simplify(self, positive_domain: bool = False, alg: Algebra | None = None) -> "VectorField":
        alg = alg or Algebra(positive_domain)
        return self.map(alg.simplify)

    def texts(self) -> list:
        return [to_text(c) for c in self.components]

    def values(self, points, constants=None) -> np.ndarray:
        """Complex array of shape (N, 3) at the given (N, 3) points."""
        vals = evaluate_many(self.components, point_binding(points, constants))
        return np.stack(vals, axis=-1)

    def __str__(self):
        return "(" + ", ".join(self.texts()) + ")"


def point_binding(points, constants=None) -> dict:
    pts = np.asarray(points, dtype=float)
    binding = {c: pts[..., i] for i, c in enumerate(COORDS)}
    for k, v in (constants or {}).items():
        binding[k] = np.full(pts.shape[:-1], v, dtype=float)
    return binding


def _alg(alg, positive_domain):
    return alg if alg is not None else Algebra(positive_domain)


def gradient(f: Expr, positive_domain: bool = False, alg: Algebra | None = None) -> VectorField:
    alg = _alg(alg, positive_domain)
    return VectorField(*(alg.diff(f, c) for c in COORDS))


def curl(F: VectorField, positive_domain: bool = False, alg: Algebra | None = None) -> VectorField:
    alg = _alg(alg, positive_domain)
    d = alg.diff
    f1, f2, f3 = F.components
    return VectorField(
        alg.sub(d(f3, "y"), d(f2, "z")),
        alg.sub(d(f1, "z"), d(f3, "x")),
        alg.sub(d(f2, "x"), d(f1, "y")),
    )


def divergence(F: VectorField, positive_domain: bool = False, alg: Algebra | None = None) -> Expr:
    alg = _alg(alg, positive_domain)
    return alg.add(*(alg.diff(c, x) for c, x in zip(F.components, COORDS)))


def magnitude(F: VectorField, positive_domain: bool = False, alg: Algebra | None = None) -> Expr:
    alg = _alg(alg, positive_domain)
    return alg.sqrt(alg.add(*(alg.pow(alg.simplify(c), 2) for c in F.components)))


# -- sample sets ------------------------------------------------------------

class SamplingError(RuntimeError):
    pass


@dataclass(frozen=True)
class SampleConfig:
    box: tuple = DEFAULT_BOX
    count: int = 100
    seed: int = 0
    eps_mag: float = EPS_MAG
    eps_sec: float = EPS_SEC
    section: str = "north"

    def __post_init__(self):
        box = self.box
        if len(box) == 2 and not hasattr(box[0], "__len__"):
            box = (tuple(box),) * 3
        box = tuple((float(lo), float(hi)) for lo, hi in box)
        object.__setattr__(self, "box", box)
        if len(box) != 3 or any(hi <= lo for lo, hi in box):
            raise ValueError(f"sample box must have positive volume, got {box}")
        if self.count <= 0:
            raise ValueError("sample count must be positive")
        if self.section not in ("north", "south"):
            raise ValueError(f"unknown section {self.section!r}")


@dataclass
class SampleSet:
    points: np.ndarray
    config: SampleConfig = field(default_factory=SampleConfig)
    rejected: int = 0

    def __len__(self):
        return len(self.points)

    def binding(self, constants=None) -> dict:
        return point_binding(self.points, constants)

    def to_csv(self, path) -> None:
        write_csv(path, ["x", "y", "z"], self.points)


def write_csv(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_g17(v) for v in row])


def _g17(v) -> str:
    if isinstance(v, str):
        return v
    return format(float(v), ".17g")


def acceptable(values: np.ndarray, eps_mag: float = EPS_MAG, eps_sec: float = EPS_SEC,
               section: str = "north") -> np.ndarray:
    """Mask of field values away from |H| = 0 and the section singularity."""
    re = values.real
    mag = np.linalg.norm(re, axis=-1)
    h3 = re[..., 2] if section == "north" else -re[..., 2]
    with np.errstate(all="ignore"):
        ratio = (mag + h3) / mag
    finite = np.all(np.isfinite(values), axis=-1)
    return finite & (mag >= eps_mag) & (ratio >= eps_sec)


def _field_values_tolerant(F: VectorField, pts: np.ndarray, constants) -> np.ndarray:
    try:
        return F.values(pts, constants)
    except EvaluationError:
        out = np.full((len(pts), 3), np.nan, dtype=complex)
        for i, p in enumerate(pts):
            try:
                out[i] = F.values(p[None, :], constants)[0]
            except EvaluationError:
                pass
        return out


def sample_points(cfg: SampleConfig = SampleConfig(), F: VectorField | None = None,
                  constants=None) -> SampleSet:
    """Uniform points in ``cfg.box`` with singular points of ``F`` removed.

    Deterministic for a fixed ``cfg.seed``. Raises ``SamplingError`` when
    more than 20% of the candidates are rejected.
    """
    rng = np.random.default_rng(cfg.seed)
    lo = np.array([b[0] for b in cfg.box])
    hi = np.array([b[1] for b in cfg.box])
    pts = lo + (hi - lo) * rng.random((cfg.count, 3))
    if F is None:
        return SampleSet(pts, cfg, 0)
    vals = _field_values_tolerant(F, pts, constants)
    keep = acceptable(vals, cfg.eps_mag, cfg.eps_sec, cfg.section)
    kept = pts[keep]
    rejected = cfg.count - len(kept)
    if len(kept) < 0.8 * cfg.count:
        raise SamplingError(
            f"{rejected} of {cfg.count} sample points rejected for field {F} "
            f"(|H| < {cfg.eps_mag:g} or section ratio < {cfg.eps_sec:g})")
    return SampleSet(kept, cfg, rejected)
