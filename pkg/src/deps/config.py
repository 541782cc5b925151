"""Flat ``section.key = value`` configuration for simulation runs.

Example::

    # sleigh demo
    sim.system = sleigh-disc
    sim.steps = 1000
    sleigh.a = 1.0
    init.dtheta = 0.1
    init.V1 = 0.05

Blank lines and ``#`` comments are ignored. Keys are validated against the
chosen system; unknown or malformed entries raise
:class:`~deps.errors.InvalidConfiguration` naming the offending field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Mapping, Optional, Sequence, Union

from .errors import InvalidConfiguration
from .policy import BranchPolicy
from .rootfind import NewtonConfig
from .sleigh import SleighParams
from .suslov import MassTensor

__all__ = ["SYSTEMS", "Sweep", "SimConfig", "parse_config_text", "load_config", "build_config", "parse_override",
           "without_sweep", "replace_init"]

SYSTEMS = ("suslov-cont", "suslov-disc", "sleigh-cont", "sleigh-disc", "sleigh-free", "sleigh-naive")

DEFAULT_MASS = {"J11": 1.0, "J22": 2.0, "J33": 3.0, "J12": 0.1, "J13": 0.3, "J23": 0.2}
DEFAULT_SLEIGH = {"m": 1.0, "J": 1.5, "a": 1.0, "b": 0.0}

# initial-condition keys per system, with defaults; None means "no default"
INIT_KEYS = {
    "suslov-disc": {"q1": 0.2, "q2": 0.1},
    "suslov-cont": {"M1": 1.0, "M2": 0.5},
    "sleigh-disc": {"dtheta": None, "V1": None, "p_theta": None, "p1": None,
                    "theta": 0.0, "x": 0.0, "y": 0.0},
    "sleigh-naive": {"dtheta": 0.1, "V1": 0.05, "theta": 0.0, "x": 0.0, "y": 0.0},
    "sleigh-free": {"dtheta": 0.1, "V1": 0.05, "V2": 0.0, "theta": 0.0, "x": 0.0, "y": 0.0},
    "sleigh-cont": {"p_theta": 0.3, "p1": 0.0, "theta": 0.0, "x": 0.0, "y": 0.0},
}

SIM_KEYS = {"system", "steps", "dt", "policy", "output", "format", "direction", "method"}
TOL_KEYS = {"residual", "max_iter", "damping", "dedupe"}
LIMIT_KEYS = {"T", "align", "omega1", "omega2", "omega", "v1"}
SWEEP_KEYS = {"param", "start", "stop", "count"}


@dataclass(frozen=True)
class Sweep:
    param: str
    start: float
    stop: float
    count: int

    def values(self):
        if self.count == 1:
            return [self.start]
        step = (self.stop - self.start) / (self.count - 1)
        return [self.start + i * step for i in range(self.count)]


@dataclass(frozen=True)
class SimConfig:
    system: str
    params: Union[MassTensor, SleighParams]
    init: Dict[str, float]
    steps: int = 100
    dt: float = 0.01
    policy: BranchPolicy = BranchPolicy.CONTINUITY
    output: str = "trajectory.csv"
    fmt: str = "csv"
    direction: int = 1
    method: str = "algebraic"
    newton: NewtonConfig = field(default_factory=NewtonConfig)
    limit: Dict[str, object] = field(default_factory=dict)
    sweep: Optional[Sweep] = None
    raw: Dict[str, str] = field(default_factory=dict)

    @property
    def is_suslov(self) -> bool:
        return self.system.startswith("suslov")

    def with_overrides(self, overrides: Mapping[str, str]) -> "SimConfig":
        raw = dict(self.raw)
        raw.update({k: str(v) for k, v in overrides.items()})
        return build_config(raw)


def parse_config_text(text: str) -> Dict[str, str]:
    raw: Dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        if "=" not in s:
            raise InvalidConfiguration(f"line {lineno}: expected 'section.key = value'")
        key, value = (t.strip() for t in s.split("=", 1))
        if key.count(".") != 1 or not all(key.split(".")):
            raise InvalidConfiguration(f"line {lineno}: key {key!r} must have the form section.key")
        if key in raw:
            raise InvalidConfiguration(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    return raw


def parse_override(item: str):
    if "=" not in item:
        raise InvalidConfiguration(f"override {item!r} must look like section.key=value")
    k, v = item.split("=", 1)
    return k.strip(), v.strip()


def load_config(path, overrides: Sequence[str] = ()) -> SimConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidConfiguration(f"cannot read config {path}: {exc}") from exc
    raw = parse_config_text(text)
    raw.update(dict(parse_override(o) for o in overrides))
    return build_config(raw)


def _float(raw, key, default=None):
    if key not in raw:
        if default is None:
            raise InvalidConfiguration(f"missing required field {key}")
        return float(default)
    try:
        v = float(raw[key])
    except ValueError:
        raise InvalidConfiguration(f"field {key}: {raw[key]!r} is not a number") from None
    if not math.isfinite(v):
        raise InvalidConfiguration(f"field {key}: must be finite")
    return v


def _int(raw, key, default):
    if key not in raw:
        return default
    try:
        return int(raw[key])
    except ValueError:
        raise InvalidConfiguration(f"field {key}: {raw[key]!r} is not an integer") from None


def build_config(raw: Mapping[str, str]) -> SimConfig:
    raw = dict(raw)
    system = raw.get("sim.system")
    if system not in SYSTEMS:
        raise InvalidConfiguration(f"field sim.system: expected one of {', '.join(SYSTEMS)}, got {system!r}")
    allowed_init = INIT_KEYS[system]
    for key in raw:
        section, name = key.split(".", 1)
        ok = {
            "sim": name in SIM_KEYS,
            "tol": name in TOL_KEYS,
            "limit": name in LIMIT_KEYS,
            "sweep": name in SWEEP_KEYS,
            "init": name in allowed_init,
            "suslov": system.startswith("suslov") and name in DEFAULT_MASS,
            "sleigh": system.startswith("sleigh") and name in DEFAULT_SLEIGH,
        }.get(section, False)
        if not ok:
            raise InvalidConfiguration(f"field {key}: not recognised for system {system}")

    try:
        if system.startswith("suslov"):
            params = MassTensor(**{k: _float(raw, f"suslov.{k}", v) for k, v in DEFAULT_MASS.items()})
        else:
            params = SleighParams(**{k: _float(raw, f"sleigh.{k}", v) for k, v in DEFAULT_SLEIGH.items()})
    except InvalidConfiguration:
        raise
    except ValueError as exc:
        raise InvalidConfiguration(f"parameter block: {exc}") from None

    init = {}
    for name, default in allowed_init.items():
        key = f"init.{name}"
        if key in raw:
            init[name] = _float(raw, key)
        elif default is not None:
            init[name] = float(default)
    if system == "sleigh-disc":
        by_disp = "dtheta" in init or "V1" in init
        by_mom = "p_theta" in init or "p1" in init
        if by_disp and by_mom:
            raise InvalidConfiguration("field init: give either dtheta/V1 or p_theta/p1, not both")
        if by_mom:
            init.setdefault("p_theta", 0.0)
            init.setdefault("p1", 0.0)
        else:
            init.setdefault("dtheta", 0.1)
            init.setdefault("V1", 0.05)

    steps = _int(raw, "sim.steps", 100)
    if steps < 0:
        raise InvalidConfiguration("field sim.steps: must be >= 0")
    dt = _float(raw, "sim.dt", 0.01)
    if not dt > 0:
        raise InvalidConfiguration("field sim.dt: must be positive")
    try:
        policy = BranchPolicy.parse(raw.get("sim.policy", "continuity"))
    except ValueError as exc:
        raise InvalidConfiguration(f"field sim.policy: {exc}") from None
    fmt = raw.get("sim.format", "csv")
    if fmt not in ("csv", "json"):
        raise InvalidConfiguration("field sim.format: expected csv or json")
    direction = _int(raw, "sim.direction", 1)
    if direction not in (1, -1):
        raise InvalidConfiguration("field sim.direction: expected 1 or -1")
    method = raw.get("sim.method", "algebraic")
    if method not in ("algebraic", "multistart"):
        raise InvalidConfiguration("field sim.method: expected algebraic or multistart")
    output = raw.get("sim.output", "trajectory." + fmt)

    try:
        newton = NewtonConfig(residual_tol=_float(raw, "tol.residual", 1e-12),
                              max_iter=_int(raw, "tol.max_iter", 60),
                              damping=_float(raw, "tol.damping", 0.5),
                              dedupe_radius=_float(raw, "tol.dedupe", 1e-8))
    except InvalidConfiguration:
        raise
    except ValueError as exc:
        raise InvalidConfiguration(f"tolerance block: {exc}") from None

    limit = {"T": _float(raw, "limit.T", 1.0), "align": raw.get("limit.align", "velocity")}
    if limit["align"] not in ("velocity", "momentum"):
        raise InvalidConfiguration("field limit.align: expected velocity or momentum")
    if not limit["T"] > 0:
        raise InvalidConfiguration("field limit.T: must be positive")
    if system.startswith("suslov"):
        limit["omega1"] = _float(raw, "limit.omega1", 1.0)
        limit["omega2"] = _float(raw, "limit.omega2", 0.5)
    else:
        limit["omega"] = _float(raw, "limit.omega", 1.0)
        limit["v1"] = _float(raw, "limit.v1", 0.5)

    sweep = None
    if any(k.startswith("sweep.") for k in raw):
        param = raw.get("sweep.param")
        if not param or param.startswith("sweep.") or param.startswith("sim."):
            raise InvalidConfiguration("field sweep.param: must name a parameter or init field")
        count = _int(raw, "sweep.count", 2)
        if count < 1:
            raise InvalidConfiguration("field sweep.count: must be >= 1")
        sweep = Sweep(param, _float(raw, "sweep.start"), _float(raw, "sweep.stop"), count)

    return SimConfig(system, params, init, steps, dt, policy, output, fmt, direction, method,
                     newton, limit, sweep, raw)


def without_sweep(cfg: SimConfig, value: float, output: str) -> SimConfig:
    """Member configuration of a sweep with the swept field set to ``value``."""
    raw = {k: v for k, v in cfg.raw.items() if not k.startswith("sweep.")}
    raw[cfg.sweep.param] = repr(float(value))
    raw["sim.output"] = output
    return build_config(raw)


def replace_init(cfg: SimConfig, **values) -> SimConfig:
    raw = dict(cfg.raw)
    raw.update({f"init.{k}": repr(float(v)) for k, v in values.items()})
    return build_config(raw)

