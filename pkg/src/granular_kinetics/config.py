"""TOML run configuration.

Sections mirror the package modules. Unknown keys are rejected and every
validation message starts with the dotted key at fault.
"""

from __future__ import annotations

import math
import sys
from dataclasses import asdict, dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .errors import ConfigurationError

COMMANDS = ("diagram", "simulate", "verify")
SCENARIOS = ("roadworks", "traffic_light", "custom")
CHECKS = ("invariance", "mass_balance", "equicontinuity", "convergence", "dependence")


@dataclass
class CoreConfig:
    m: int = 10
    n: int = 6


@dataclass
class InteractionConfig:
    alpha: object = 0.61
    beta: float = 0.0
    eta0: float = 1.0


@dataclass
class HomogeneousConfig:
    alpha: list = field(default_factory=lambda: [0.5, 0.61, 1.0])
    rho: list | None = None
    rho_step: float = 0.01
    tol: float = 1e-10
    max_steps: int = 10_000_000
    limit_at_zero: bool = True
    allow_gaps: bool = False


@dataclass
class DynamicsConfig:
    dt: float | None = None
    T: float = 150.0
    stride: int = 1


@dataclass
class ScenarioConfig:
    name: str = "roadworks"
    rho0: float = 0.4
    variable: bool = True
    literal_formula: bool = False
    queue_cells: int = 5
    alpha: float = 0.55
    beta: float = 1.0
    period: float = 20.0
    green: float | None = None
    initial_density: object = 0.0
    inflow_density: float = 0.0
    left_limiter: float | None = None
    right_limiter: float = 1.0


@dataclass
class VerifyConfig:
    checks: list = field(default_factory=lambda: list(CHECKS))
    trials: int = 1000
    steps: int = 200
    dt_factor: float = 0.45
    pairs: int = 1000
    levels: int = 4
    convergence_T: float = 150.0
    band: list = field(default_factory=lambda: [1.7, 2.3])
    deltas: list = field(default_factory=lambda: [1e-2, 1e-3, 1e-4])
    dependence_T: float = 60.0
    dependence_band: list = field(default_factory=lambda: [5.0, 20.0])


@dataclass
class RunConfig:
    command: str
    seed: int = 0
    out: str = "out"
    jobs: int = 1
    core: CoreConfig = field(default_factory=CoreConfig)
    interaction: InteractionConfig = field(default_factory=InteractionConfig)
    homogeneous: HomogeneousConfig = field(default_factory=HomogeneousConfig)
    dynamics: DynamicsConfig = field(default_factory=DynamicsConfig)
    scenarios: ScenarioConfig = field(default_factory=ScenarioConfig)
    verify: VerifyConfig = field(default_factory=VerifyConfig)

    def to_dict(self):
        return asdict(self)


def _fail(key, msg):
    raise ConfigurationError(f"{key}: {msg}")


def _number(key, x, lo=-math.inf, hi=math.inf, lo_open=False, hi_open=False):
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        _fail(key, f"expected a finite number, got {x!r}")
    lo_ok = x > lo if lo_open else x >= lo
    hi_ok = x < hi if hi_open else x <= hi
    if not (lo_ok and hi_ok):
        lb = "(" if lo_open else "["
        rb = ")" if hi_open else "]"
        _fail(key, f"must lie in {lb}{lo}, {hi}{rb}, got {x!r}")
    return float(x)


def _integer(key, x, lo=-math.inf, hi=math.inf):
    if isinstance(x, float) and x.is_integer():
        x = int(x)
    if isinstance(x, bool) or not isinstance(x, int):
        _fail(key, f"expected an integer, got {x!r}")
    if not lo <= x <= hi:
        _fail(key, f"must lie in [{lo}, {hi}], got {x!r}")
    return x


def _boolean(key, x):
    if not isinstance(x, bool):
        _fail(key, f"expected true or false, got {x!r}")
    return x


def _string(key, x, choices=None):
    if not isinstance(x, str):
        _fail(key, f"expected a string, got {x!r}")
    if choices and x not in choices:
        _fail(key, f"must be one of {', '.join(choices)}, got {x!r}")
    return x


def _unit_list(key, x, allow_scalar=True):
    if allow_scalar and not isinstance(x, list):
        return _number(key, x, 0.0, 1.0)
    if not isinstance(x, list) or not x:
        _fail(key, "expected a non-empty list of numbers")
    return [_number(f"{key}[{i}]", v, 0.0, 1.0) for i, v in enumerate(x)]


def _positive_list(key, x):
    if not isinstance(x, list) or not x:
        _fail(key, "expected a non-empty list of numbers")
    return [_number(f"{key}[{i}]", v, 0.0, lo_open=True) for i, v in enumerate(x)]


def _band(key, x):
    if not isinstance(x, list) or len(x) != 2:
        _fail(key, "expected [low, high]")
    lo, hi = (_number(f"{key}[{i}]", v, 0.0) for i, v in enumerate(x))
    if lo > hi:
        _fail(key, "low must not exceed high")
    return [lo, hi]


P = dict(lo=0.0, lo_open=True)
VALIDATORS = {
    "core": {
        "m": lambda k, x: _integer(k, x, 1),
        "n": lambda k, x: _integer(k, x, 2),
    },
    "interaction": {
        "alpha": _unit_list,
        "beta": lambda k, x: _number(k, x, 0.0, 1.0),
        "eta0": lambda k, x: _number(k, x, **P),
    },
    "homogeneous": {
        "alpha": lambda k, x: _unit_list(k, x if isinstance(x, list) else [x], False),
        "rho": lambda k, x: _unit_list(k, x, False),
        "rho_step": lambda k, x: _number(k, x, 0.0, 1.0, lo_open=True),
        "tol": lambda k, x: _number(k, x, **P),
        "max_steps": lambda k, x: _integer(k, x, 1),
        "limit_at_zero": _boolean,
        "allow_gaps": _boolean,
    },
    "dynamics": {
        "dt": lambda k, x: _number(k, x, **P),
        "T": lambda k, x: _number(k, x, 0.0),
        "stride": lambda k, x: _integer(k, x, 1),
    },
    "scenarios": {
        "name": lambda k, x: _string(k, x, SCENARIOS),
        "rho0": lambda k, x: _number(k, x, 0.0, 1.0, lo_open=True),
        "variable": _boolean,
        "literal_formula": _boolean,
        "queue_cells": lambda k, x: _integer(k, x, 1, 5),
        "alpha": lambda k, x: _number(k, x, 0.0, 1.0),
        "beta": lambda k, x: _number(k, x, 0.0, 1.0),
        "period": lambda k, x: _number(k, x, **P),
        "green": lambda k, x: _number(k, x, 0.0),
        "initial_density": _unit_list,
        "inflow_density": lambda k, x: _number(k, x, 0.0, 1.0),
        "left_limiter": lambda k, x: _number(k, x, 0.0, 1.0),
        "right_limiter": lambda k, x: _number(k, x, 0.0, 1.0),
    },
    "verify": {
        "checks": lambda k, x: [_string(f"{k}[{i}]", c, CHECKS) for i, c in enumerate(x)]
        if isinstance(x, list) else _fail(k, "expected a list of check names"),
        "trials": lambda k, x: _integer(k, x, 0),
        "steps": lambda k, x: _integer(k, x, 0),
        "dt_factor": lambda k, x: _number(k, x, **P),
        "pairs": lambda k, x: _integer(k, x, 1),
        "levels": lambda k, x: _integer(k, x, 3),
        "convergence_T": lambda k, x: _number(k, x, **P),
        "band": _band,
        "deltas": _positive_list,
        "dependence_T": lambda k, x: _number(k, x, **P),
        "dependence_band": _band,
    },
}
TOP = {
    "command": lambda k, x: _string(k, x, COMMANDS),
    "seed": lambda k, x: _integer(k, x, 0),
    "out": _string,
    "jobs": lambda k, x: _integer(k, x, 1),
}
SECTION_TYPES = {
    "core": CoreConfig, "interaction": InteractionConfig, "homogeneous": HomogeneousConfig,
    "dynamics": DynamicsConfig, "scenarios": ScenarioConfig, "verify": VerifyConfig,
}


def parse_config(text: str) -> RunConfig:
    """Parse and validate a TOML document.

    A top-level ``alpha`` is shorthand for ``homogeneous.alpha`` in diagram
    runs and for ``interaction.alpha`` otherwise.
    """
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"syntax error: {exc}") from exc
    if "command" not in doc:
        _fail("command", f"required, one of {', '.join(COMMANDS)}")
    top = {}
    sections = {}
    shorthand_alpha = None
    for key, value in doc.items():
        if key in SECTION_TYPES:
            if not isinstance(value, dict):
                _fail(key, "expected a section")
            sections[key] = value
        elif key in TOP:
            top[key] = TOP[key](key, value)
        elif key == "alpha":
            shorthand_alpha = value
        else:
            _fail(key, "unknown key")
    cfg = RunConfig(**top)
    if shorthand_alpha is not None:
        target = "homogeneous" if cfg.command == "diagram" else "interaction"
        if "alpha" in sections.get(target, {}):
            _fail("alpha", f"given both at top level and in [{target}]")
        sections.setdefault(target, {})["alpha"] = shorthand_alpha
    for name, body in sections.items():
        values = {}
        for key, value in body.items():
            dotted = f"{name}.{key}"
            if key not in VALIDATORS[name]:
                _fail(dotted, "unknown key")
            values[key] = VALIDATORS[name][key](dotted, value)
        setattr(cfg, name, SECTION_TYPES[name](**values))
    _cross_checks(cfg)
    return cfg


def _cross_checks(cfg: RunConfig):
    alpha = cfg.interaction.alpha
    if isinstance(alpha, list) and len(alpha) != cfg.core.m:
        _fail("interaction.alpha", f"needs one value per cell ({cfg.core.m}), got {len(alpha)}")
    dens = cfg.scenarios.initial_density
    if isinstance(dens, list) and len(dens) != cfg.core.m:
        _fail("scenarios.initial_density", f"needs one value per cell ({cfg.core.m})")
    green = cfg.scenarios.green
    if green is not None and green > cfg.scenarios.period:
        _fail("scenarios.green", "must not exceed scenarios.period")
    rho = cfg.homogeneous.rho
    if rho is not None and any(b <= a for a, b in zip(rho, rho[1:])):
        _fail("homogeneous.rho", "must be strictly increasing")


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
