"""Fixed-point iteration H -> s * curl(A[H])."""

from __future__ import annotations

import enum
import json
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .expr import Algebra, EvaluationError, WorkLimitExceeded, dag_size, to_text_shared
from .fields import EPS_MAG, SampleConfig, SampleSet, SamplingError, VectorField, curl, sample_points
from .lift import lift_potential


class EquationSystem(enum.Enum):
    """Which constraint closes the lifted system: H = +B or H = -B."""

    SEIBERG_WITTEN = "sw"
    FREUND = "freund"

    @property
    def sign(self) -> int:
        return 1 if self is EquationSystem.SEIBERG_WITTEN else -1

    @classmethod
    def parse(cls, text) -> "EquationSystem":
        if isinstance(text, cls):
            return text
        t = str(text).strip().lower().replace("-", "").replace("_", "")
        if t in ("sw", "seibergwitten", "+", "+1"):
            return cls.SEIBERG_WITTEN
        if t in ("freund", "f", "-", "-1"):
            return cls.FREUND
        raise ValueError(f"unknown equation system {text!r} (use 'sw' or 'freund')")


class Status(enum.Enum):
    CONVERGED = "Converged"
    EXACT_FIXED_POINT = "ExactFixedPoint"
    MAX_ITERATIONS = "MaxIterations"
    SIZE_BLOWUP = "SizeBlowup"
    EVALUATION_FAILURE = "EvaluationFailure"

    @property
    def success(self) -> bool:
        return self in (Status.CONVERGED, Status.EXACT_FIXED_POINT)


class IterationConfigError(ValueError):
    pass


@dataclass
class IterationConfig:
    max_iterations: int = 10
    tolerance: float = 1e-9
    node_budget: int = 200_000
    # a step is abandoned once it has processed this many times node_budget nodes
    work_factor: int = 2
    positive_domain: bool = False
    sample: SampleConfig = field(default_factory=SampleConfig)
    constants: dict = field(default_factory=dict)

    def validate(self):
        if self.max_iterations < 1:
            raise IterationConfigError("max_iterations must be >= 1")
        if not self.tolerance > 0:
            raise IterationConfigError("tolerance must be positive")
        if self.node_budget < 1:
            raise IterationConfigError("node_budget must be >= 1")


@dataclass
class IterationTrace:
    seed: VectorField
    system: EquationSystem
    iterates: list
    distances: list
    node_counts: list
    status: Status
    samples: SampleSet | None
    wall_ms: list = field(default_factory=list)
    message: str = ""

    @property
    def final(self) -> VectorField:
        return self.iterates[-1]

    @property
    def steps(self) -> int:
        return len(self.iterates) - 1

    def to_dict(self, include_timing: bool = False) -> dict:
        bindings, texts = to_text_shared(self.final.components)
        steps = []
        for k, d in enumerate(self.distances):
            entry = {"step": k + 1, "distance": None if d != d else d,
                     "node_count": self.node_counts[k + 1]}
            if include_timing:
                entry["wall_ms"] = self.wall_ms[k]
            steps.append(entry)
        return {
            "seed": self.seed.texts(),
            "system": self.system.value,
            "status": self.status.value,
            "message": self.message,
            "seed_node_count": self.node_counts[0],
            "steps": steps,
            "sample_count": 0 if self.samples is None else len(self.samples),
            "final": {"let": [list(b) for b in bindings], "H": texts},
        }

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(self.to_dict(include_timing), indent=2, sort_keys=False)


def step(H: VectorField, system: EquationSystem, positive_domain: bool = False,
         alg: Algebra | None = None) -> VectorField:
    """One application of the map H -> s * curl(A[H])."""
    system = EquationSystem.parse(system)
    alg = alg or Algebra(positive_domain)
    B = curl(lift_potential(H, alg=alg), alg=alg)
    return B if system.sign == 1 else B.map(alg.neg)


def fixed_point_distance(Ha: VectorField, Hb: VectorField, samples: SampleSet,
                         constants=None, eps_mag: float = EPS_MAG) -> float:
    """max over samples of |Ha - Hb| / max(|Ha|, eps_mag)."""
    if len(samples) == 0:
        raise ValueError("empty sample set")
    a = Ha.values(samples.points, constants)
    b = Hb.values(samples.points, constants)
    diff = np.linalg.norm(a - b, axis=-1)
    scale = np.maximum(np.linalg.norm(a, axis=-1), eps_mag)
    return float(np.max(diff / scale))


def certify(trace: IterationTrace, sample: SampleConfig | None = None, constants=None) -> float:
    """Distance of the converging step, H_n = step(H_(n-1)) against H_(n-1),
    re-measured on points drawn with a different RNG seed."""
    if len(trace.iterates) < 2:
        raise ValueError("trace has no completed step")
    if sample is None:
        base = trace.samples.config if trace.samples is not None else SampleConfig()
        sample = replace(base, seed=base.seed + 1_000_003)
    fresh = sample_points(sample, trace.final, constants)
    return fixed_point_distance(trace.iterates[-2], trace.final, fresh, constants, sample.eps_mag)


def field_size(F: VectorField) -> int:
    """Distinct expression nodes shared across the three components."""
    return dag_size(*F.components)


def run(seed: VectorField, system: EquationSystem, cfg: IterationConfig | None = None,
        samples: SampleSet | None = None) -> IterationTrace:
    """Iterate from ``seed`` until a numerical fixed point, exact repetition,
    node-budget overflow, evaluation failure, or ``max_iterations``."""
    cfg = cfg or IterationConfig()
    cfg.validate()
    system = EquationSystem.parse(system)
    if all(c.kind == "num" and c.payload == 0 for c in seed.simplify().components):
        raise IterationConfigError("seed field is identically zero")
    alg = Algebra(cfg.positive_domain)
    H = seed.simplify(alg=alg)
    iterates, distances, counts, wall = [H], [], [field_size(H)], []

    def trace(status, message=""):
        return IterationTrace(seed, system, iterates, distances, counts, status, samples, wall, message)

    if samples is None:
        try:
            samples = sample_points(cfg.sample, H, cfg.constants)
        except SamplingError as exc:
            return trace(Status.EVALUATION_FAILURE, str(exc))

    for _ in range(cfg.max_iterations):
        t0 = time.perf_counter()
        # a fresh memo per step keeps memory bounded by the live iterates
        alg = Algebra(cfg.positive_domain, work_limit=cfg.work_factor * cfg.node_budget)
        try:
            H_next = step(H, system, alg=alg)
        except WorkLimitExceeded:
            wall.append((time.perf_counter() - t0) * 1e3)
            return trace(Status.SIZE_BLOWUP,
                         f"step {len(iterates)} abandoned after processing {alg.work} nodes "
                         f"(budget {cfg.node_budget})")
        size = field_size(H_next)
        iterates.append(H_next)
        counts.append(size)
        if size > cfg.node_budget:
            wall.append((time.perf_counter() - t0) * 1e3)
            distances.append(float("nan"))
            return trace(Status.SIZE_BLOWUP, f"iterate has {size} nodes > budget {cfg.node_budget}")
        try:
            d = fixed_point_distance(H, H_next, samples, cfg.constants, cfg.sample.eps_mag)
        except EvaluationError as exc:
            wall.append((time.perf_counter() - t0) * 1e3)
            distances.append(float("nan"))
            return trace(Status.EVALUATION_FAILURE, str(exc))
        wall.append((time.perf_counter() - t0) * 1e3)
        distances.append(d)
        if all(a is b for a, b in zip(H.components, H_next.components)):
            return trace(Status.EXACT_FIXED_POINT)
        if d < cfg.tolerance:
            return trace(Status.CONVERGED)
        H = H_next
    return trace(Status.MAX_ITERATIONS)
