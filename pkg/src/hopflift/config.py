"""Run configuration read from a plain ``key = value`` file.

Example file::

    # experiment 7
    tolerance = 1e-10
    max_iterations = 6
    box = 0.3, 1.7
    count = 200
    rng_seed = 4
    positive_domain = true
    const.kappa = 2.0

Command-line flags override file values.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .fields import DEFAULT_BOX, EPS_MAG, EPS_SEC, SampleConfig
from .iterate import IterationConfig


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    tolerance: float = 1e-9
    max_iterations: int = 10
    node_budget: int = 200_000
    box: tuple = DEFAULT_BOX
    count: int = 100
    rng_seed: int = 0
    eps_mag: float = EPS_MAG
    eps_sec: float = EPS_SEC
    section: str = "north"
    positive_domain: bool | None = None
    out: str | None = None
    constants: dict = field(default_factory=dict)

    def validate(self) -> "RunConfig":
        for name in ("tolerance", "max_iterations", "node_budget", "count", "eps_mag", "eps_sec"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.rng_seed < 0:
            raise ConfigError("rng_seed must be non-negative")
        self.sample_config()
        return self

    def sample_config(self) -> SampleConfig:
        try:
            return SampleConfig(self.box, self.count, self.rng_seed, self.eps_mag, self.eps_sec,
                                self.section)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def iteration_config(self, positive_domain: bool = False, constants=None) -> IterationConfig:
        pd = positive_domain if self.positive_domain is None else self.positive_domain
        return IterationConfig(max_iterations=self.max_iterations, tolerance=self.tolerance,
                               node_budget=self.node_budget, positive_domain=pd,
                               sample=self.sample_config(),
                               constants=dict(constants or self.constants))

    def merged(self, **overrides) -> "RunConfig":
        """Copy with every non-None override applied; constants are merged."""
        consts = dict(self.constants)
        consts.update(overrides.pop("constants", None) or {})
        clean = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, constants=consts, **clean)


def parse_box(text: str) -> tuple:
    """``lo,hi`` for a cube or ``xlo,xhi,ylo,yhi,zlo,zhi``."""
    try:
        vals = [float(t) for t in str(text).replace("(", "").replace(")", "").split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"bad box {text!r}") from None
    if len(vals) == 2:
        return (tuple(vals),) * 3
    if len(vals) == 6:
        return tuple(zip(vals[0::2], vals[1::2]))
    raise ConfigError(f"box needs 2 or 6 numbers, got {len(vals)}")


def parse_bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def parse_constant(text: str) -> tuple:
    name, sep, value = str(text).partition("=")
    name = name.strip()
    if not sep or not name.isidentifier():
        raise ConfigError(f"constant must look like name=value, got {text!r}")
    try:
        return name, float(value)
    except ValueError:
        raise ConfigError(f"constant {name} has non-numeric value {value!r}") from None


_CONVERTERS = {
    "tolerance": float, "max_iterations": int, "node_budget": int, "count": int,
    "rng_seed": int, "eps_mag": float, "eps_sec": float, "section": str,
    "positive_domain": parse_bool, "out": str, "box": parse_box,
}


def load_config(path) -> RunConfig:
    cfg = RunConfig()
    known = {f.name for f in fields(RunConfig)}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        if key.startswith("const."):
            cfg.constants[key[6:]] = parse_constant(f"{key[6:]}={value}")[1]
            continue
        if key not in known or key not in _CONVERTERS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            setattr(cfg, key, _CONVERTERS[key](value))
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from None
    return cfg
