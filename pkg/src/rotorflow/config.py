"""Strict JSON run configuration: unknown keys are errors, defaults are filled in."""

from __future__ import annotations

import dataclasses
import inspect
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .forcing import FAMILIES, gaussian_ring, layer_ring
from .grid import BL_MIN_POINTS, DEFAULT_M, DEFAULT_R_MAX, DEFAULT_SIGMA
from .linear import DEFAULT_KAPPA


@dataclass
class GridConfig:
    R_max: float = DEFAULT_R_MAX
    M: int = DEFAULT_M
    sigma: float = DEFAULT_SIGMA
    bl_min_points: int = BL_MIN_POINTS


@dataclass
class SolverConfig:
    alpha: float = 1000.0
    N: int | None = None
    kappa: float = DEFAULT_KAPPA
    route: str = "auto"
    tol_fp: float = 1e-10
    tol_res: float = 1e-7
    max_iter: int = 60
    damping: float = 1.0
    ball_eps: float = 1.0
    ball_delta: list[float] | None = None
    start: str = "zero"


@dataclass
class SweepConfig:
    alphas: list[float] = field(default_factory=lambda: [10.0 ** (2 + k / 2) for k in range(7)])
    ns: list[int] = field(default_factory=lambda: [1])
    quantities: list[str] | None = None
    against: str = "alpha"
    expect: dict[str, list[float]] | None = None
    acceptance: bool = True
    checks: list[str] | None = None


@dataclass
class OutputConfig:
    directory: str = "rotorflow-out"
    formats: list[str] = field(default_factory=lambda: ["csv", "json"])


@dataclass
class RunConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    forcing: dict = field(default_factory=lambda: {"family": "gaussian_ring", "modes": [1], "amplitude": 1.0})
    sweep: SweepConfig = field(default_factory=SweepConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


BLOCKS = {"grid": GridConfig, "solver": SolverConfig, "sweep": SweepConfig, "output": OutputConfig}
ROUTES = ("auto", "constructive", "direct")
STARTS = ("zero", "linear")
AGAINST = ("alpha", "n", "alpha_n")
FORMATS = ("csv", "json")
FORCING_BUILDERS = {"gaussian_ring": gaussian_ring, "layer_ring": layer_ring}


def _coerce(block: str, name: str, value, kind):
    """Light type check driven by the dataclass annotation string."""
    where = f"{block}.{name}"
    base = kind.replace(" | None", "")
    if value is None:
        if "None" in kind:
            return None
        raise ConfigError(f"{where} may not be null")
    if base == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigError(f"{where} must be a finite number, got {value!r}")
        return float(value)
    if base == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where} must be an integer, got {value!r}")
        return value
    if base == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"{where} must be true or false, got {value!r}")
        return value
    if base == "str":
        if not isinstance(value, str):
            raise ConfigError(f"{where} must be a string, got {value!r}")
        return value
    if base.startswith("list"):
        if not isinstance(value, list):
            raise ConfigError(f"{where} must be a list, got {value!r}")
        inner = base[5:-1]
        return [_coerce(block, f"{name}[{i}]", v, inner) for i, v in enumerate(value)]
    if base.startswith("dict"):
        if not isinstance(value, dict):
            raise ConfigError(f"{where} must be an object, got {value!r}")
        return {k: _coerce(block, f"{name}.{k}", v, "list[float]") for k, v in value.items()}
    return value


def _parse_block(block: str, cls, raw) -> object:
    if not isinstance(raw, dict):
        raise ConfigError(f"block {block!r} must be an object")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(raw) - set(fields))
    if unknown:
        raise ConfigError(f"unknown key(s) in {block}: {', '.join(unknown)} (allowed: {', '.join(fields)})")
    values = {k: _coerce(block, k, v, str(fields[k].type)) for k, v in raw.items()}
    return cls(**values)


def _parse_forcing(raw, alpha: float) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError("block 'forcing' must be an object")
    family = raw.get("family", "gaussian_ring")
    if family not in FAMILIES:
        raise ConfigError(f"forcing.family {family!r} unknown (known: {', '.join(FAMILIES)})")
    rest = {k: v for k, v in raw.items() if k != "family"}
    if family == "zero":
        if rest:
            raise ConfigError(f"forcing family 'zero' takes no parameters, got {', '.join(sorted(rest))}")
        return {"family": "zero"}
    sig = inspect.signature(FORCING_BUILDERS[family])
    allowed = [p for p in sig.parameters if p != "grid"]
    unknown = sorted(set(rest) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown forcing key(s) for {family}: {', '.join(unknown)} (allowed: {', '.join(allowed)})")
    out = {"family": family}
    for name in allowed:
        default = sig.parameters[name].default
        value = rest.get(name, default)
        if name == "alpha" and value is inspect.Parameter.empty:
            value = alpha
        if name == "modes":
            if not isinstance(value, (list, tuple)) or not all(isinstance(m, int) and not isinstance(m, bool)
                                                             for m in value):
                raise ConfigError(f"forcing.modes must be a list of integers, got {value!r}")
            value = sorted({abs(int(m)) for m in value})
        elif value is not None:
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ConfigError(f"forcing.{name} must be a finite number, got {value!r}")
            value = float(value)
        out[name] = value
    return out


def _validate(cfg: RunConfig) -> None:
    g, s, w, o = cfg.grid, cfg.solver, cfg.sweep, cfg.output
    if not g.R_max > 1:
        raise ConfigError("grid.R_max must exceed 1")
    if g.M < 16:
        raise ConfigError("grid.M must be at least 16")
    if g.sigma < 0:
        raise ConfigError("grid.sigma must be nonnegative")
    if s.alpha == 0:
        raise ConfigError("solver.alpha must be nonzero")
    if s.N is not None and s.N < 0:
        raise ConfigError("solver.N must be nonnegative")
    if s.route not in ROUTES:
        raise ConfigError(f"solver.route must be one of {ROUTES}")
    if s.start not in STARTS:
        raise ConfigError(f"solver.start must be one of {STARTS}")
    if not 0 < s.damping <= 1:
        raise ConfigError("solver.damping must lie in (0, 1]")
    if s.ball_delta is not None and len(s.ball_delta) != 4:
        raise ConfigError("solver.ball_delta needs four exponents")
    for name in ("tol_fp", "tol_res", "kappa", "ball_eps"):
        if getattr(s, name) <= 0:
            raise ConfigError(f"solver.{name} must be positive")
    if s.max_iter < 1:
        raise ConfigError("solver.max_iter must be at least 1")
    if w.against not in AGAINST:
        raise ConfigError(f"sweep.against must be one of {AGAINST}")
    if any(a == 0 for a in w.alphas):
        raise ConfigError("sweep.alphas must be nonzero")
    if any(n == 0 for n in w.ns):
        raise ConfigError("sweep.ns must be nonzero")
    bad = [f for f in o.formats if f not in FORMATS]
    if bad:
        raise ConfigError(f"output.formats: unknown {bad} (known: {FORMATS})")


def parse_config(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    allowed = set(BLOCKS) | {"forcing"}
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(unknown)} (allowed: {', '.join(sorted(allowed))})")
    blocks = {name: _parse_block(name, cls, raw.get(name, {})) for name, cls in BLOCKS.items()}
    forcing = _parse_forcing(raw.get("forcing", RunConfig().forcing), blocks["solver"].alpha)
    cfg = RunConfig(forcing=forcing, **blocks)
    _validate(cfg)
    return cfg


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc.msg} at line {exc.lineno} column {exc.colno}") from exc
    return parse_config(raw)
