"""
Configuration loading.

Config files are flat UTF-8 text:

    # comment
    preset = rect10
    events_per_node = 5e4

Keys are the long CLI flag names with dashes replaced by underscores.
A value is taken from, in order: the CLI flag, the --config file, the
NPHC_<KEY> environment variable, then the built-in default.
"""

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional

from .cumulants import BoundaryMode, CumulantConfig
from .errors import ConfigError, ValidationError
from .estimation import SolveConfig
from .model import HawkesModel, KernelShape
from .simulation import PowerLawEngine, Preset, SimulationConfig, get_preset

ENV_PREFIX = "NPHC_"


def _parse_bool(raw: str) -> bool:
    value = raw.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _parse_int(raw: str) -> int:
    value = float(raw)
    if not value.is_integer():
        raise ValueError(f"not an integer: {raw!r}")
    return int(value)


CONFIG_KEYS: Dict[str, Callable[[str], Any]] = {
    # model / preset
    "preset": str,
    "d": _parse_int,
    "shape": str,
    "alpha": float,
    "gamma": float,
    "beta0": float,
    "mu": float,
    # simulation
    "horizon": float,
    "events_per_node": float,
    "seed": _parse_int,
    "n_seeds": _parse_int,
    "max_events": _parse_int,
    "power_law_engine": str,
    # cumulants
    "h": float,
    "boundary_mode": str,
    "symmetrize": _parse_bool,
    "workers": _parse_int,
    # solver
    "max_iters": _parse_int,
    "learning_rate": float,
    "adagrad_epsilon": float,
    "grad_tol": float,
    "kappa": float,
    "trace_stride": _parse_int,
    "threshold": float,
    # output
    "output_dir": str,
}


def load_config_file(path) -> Dict[str, str]:
    """Read `key = value` lines; `#` lines and blank lines are skipped."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}", path=str(path))
    values: Dict[str, str] = {}
    with open(path, "rb") as f:
        for line_no, raw in enumerate(f, 1):
            try:
                line = raw.decode("utf-8").strip()
            except UnicodeDecodeError:
                raise ConfigError(f"{path.name}:{line_no}: invalid UTF-8", line=line_no)
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path.name}:{line_no}: expected 'key = value'", line=line_no)
            key, value = line.split("=", 1)
            key = key.strip().replace("-", "_").lower()
            if key not in CONFIG_KEYS:
                raise ConfigError(f"{path.name}:{line_no}: unknown key {key!r}", line=line_no)
            values[key] = value.strip()
    return values


def get_config_value(key: str, args_value: Any = None,
                     file_values: Optional[Dict[str, str]] = None) -> Any:
    """Get a configuration value with priority: flag > config file > environment variable."""
    if args_value is not None:
        return args_value
    if file_values and key in file_values:
        return file_values[key]
    return os.getenv(ENV_PREFIX + key.upper())


def parse_value(key: str, raw: Any) -> Any:
    if raw is None:
        return None
    parser = CONFIG_KEYS.get(key)
    if parser is None:
        raise ConfigError(f"Unknown configuration key {key!r}")
    if not isinstance(raw, str):
        return raw
    try:
        return parser(raw)
    except ValueError as e:
        raise ConfigError(f"Invalid value for {key}: {e}", key=key, value=raw)


def resolve_values(args, keys: Iterable[str]) -> Dict[str, Any]:
    """Merge flags, config file and environment for the given keys."""
    config_path = getattr(args, "config", None)
    file_values = load_config_file(config_path) if config_path else {}
    return {
        key: parse_value(key, get_config_value(key, getattr(args, key, None), file_values))
        for key in keys
    }


def _pick(values: Dict[str, Any], key: str, default: Any) -> Any:
    value = values.get(key)
    return default if value is None else value


def _checked(build: Callable[[], Any]) -> Any:
    """Run a constructor and re-raise validation failures as ConfigError."""
    try:
        return build()
    except ConfigError:
        raise
    except ValidationError as e:
        raise ConfigError(e.message, cause=type(e).__name__, **e.details)
    except ValueError as e:
        raise ConfigError(str(e))


def solve_config_from(values: Dict[str, Any]) -> SolveConfig:
    defaults = SolveConfig()
    return _checked(lambda: SolveConfig(
        max_iters=_pick(values, "max_iters", defaults.max_iters),
        learning_rate=_pick(values, "learning_rate", defaults.learning_rate),
        adagrad_epsilon=_pick(values, "adagrad_epsilon", defaults.adagrad_epsilon),
        grad_tol=_pick(values, "grad_tol", defaults.grad_tol),
        kappa_override=values.get("kappa"),
        seed=_pick(values, "seed", defaults.seed),
        trace_stride=_pick(values, "trace_stride", defaults.trace_stride),
    ))


def boundary_mode_from(values: Dict[str, Any]) -> BoundaryMode:
    return _checked(lambda: BoundaryMode(_pick(values, "boundary_mode", BoundaryMode.TRIMMED.value)))


def cumulant_config_from(values: Dict[str, Any], default_h: Optional[float] = None) -> CumulantConfig:
    h = _pick(values, "h", default_h)
    if h is None:
        raise ConfigError("The window half-width is required (--h or NPHC_H)")
    mode = boundary_mode_from(values)
    return _checked(lambda: CumulantConfig(
        H=h,
        boundary_mode=mode,
        symmetrize=_pick(values, "symmetrize", True),
        workers=values.get("workers"),
    ))


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Everything one end-to-end run needs, validated up front.

    `preset` is one of the named presets or "custom"; custom runs must
    give d, shape and alpha, plus h once cumulants are estimated. Unset
    model values fall back to the preset.
    """
    preset: str = "rect10"
    d: Optional[int] = None
    shape: Optional[str] = None
    alpha: Optional[float] = None
    gamma: Optional[float] = None
    beta0: Optional[float] = None
    mu: Optional[float] = None
    horizon: Optional[float] = None
    events_per_node: Optional[float] = None
    seed: int = 0
    n_seeds: int = 1
    max_events: int = 50_000_000
    power_law_engine: str = PowerLawEngine.MIXTURE.value
    cumulants: Optional[CumulantConfig] = None
    solve: SolveConfig = field(default_factory=SolveConfig)
    threshold: Optional[float] = None
    workers: Optional[int] = None
    output_dir: Optional[str] = None

    def __post_init__(self):
        spec = self.preset_spec()
        if self.cumulants is None and spec.H is not None:
            object.__setattr__(self, "cumulants", _checked(lambda: CumulantConfig(H=spec.H)))
        if self.n_seeds < 1:
            raise ConfigError(f"n_seeds must be >= 1, got {self.n_seeds}")
        if self.threshold is not None and self.threshold < 0:
            raise ConfigError(f"threshold must be >= 0, got {self.threshold}")
        if self.events_per_node is not None and not self.events_per_node > 0:
            raise ConfigError(f"events_per_node must be positive, got {self.events_per_node}")
        # building every stage's config checks all downstream preconditions before any work
        self.build_model()
        horizon = self.horizon_T
        _checked(lambda: self.simulation_config())
        if self.cumulants is not None:
            _checked(lambda: self.cumulants.check_against(horizon))

    def preset_spec(self) -> Preset:
        if self.preset.lower() == "custom":
            missing = [k for k in ("d", "shape", "alpha") if getattr(self, k) is None]
            if missing:
                raise ConfigError(f"Custom preset needs {', '.join(missing)}", missing=missing)
            H = self.cumulants.H if self.cumulants is not None else None
            return _checked(lambda: Preset("custom", int(self.d), KernelShape(self.shape),
                                           float(self.alpha), H=H))
        spec = _checked(lambda: get_preset(self.preset))
        if self.d is not None and self.d != spec.d:
            raise ConfigError(f"Preset {spec.name} has d={spec.d}; use preset=custom to change d")
        if self.shape is not None and _checked(lambda: KernelShape(self.shape)) != spec.shape:
            raise ConfigError(f"Preset {spec.name} uses {spec.shape.value} kernels; "
                              f"use preset=custom to change the shape")
        return spec

    def require_cumulants(self) -> CumulantConfig:
        if self.cumulants is None:
            raise ConfigError("Custom preset needs the window half-width h")
        return self.cumulants

    def build_model(self) -> HawkesModel:
        spec = self.preset_spec()
        return _checked(lambda: spec.build(alpha=self.alpha, mu=self.mu, gamma=self.gamma,
                                           beta0=self.beta0))

    @property
    def horizon_T(self) -> float:
        if self.horizon is not None:
            return float(self.horizon)
        return self.preset_spec().horizon_for(self.events_per_node)

    @property
    def seeds(self) -> List[int]:
        return [self.seed + k for k in range(self.n_seeds)]

    def simulation_config(self, seed: Optional[int] = None) -> SimulationConfig:
        return SimulationConfig(
            horizon_T=self.horizon_T,
            seed=self.seed if seed is None else seed,
            max_events=self.max_events,
            power_law_engine=PowerLawEngine(self.power_law_engine),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "preset": self.preset,
            "model": self.build_model().to_dict(),
            "horizon_T": self.horizon_T,
            "seeds": self.seeds,
            "max_events": self.max_events,
            "power_law_engine": self.power_law_engine,
            "cumulants": None if self.cumulants is None else {
                "H": self.cumulants.H,
                "boundary_mode": self.cumulants.boundary_mode.value,
                "symmetrize": self.cumulants.symmetrize,
            },
            "solver": self.solve.to_dict(),
            "threshold": self.threshold,
        }

    @classmethod
    def from_values(cls, values: Dict[str, Any]) -> "ExperimentConfig":
        preset = _pick(values, "preset", "rect10")
        default_h = None
        if str(preset).lower() != "custom":
            default_h = _checked(lambda: get_preset(preset)).H
        cumulants = cumulant_config_from(values, default_h) if (
            values.get("h") is not None or default_h is not None) else None
        return cls(
            preset=preset,
            d=values.get("d"),
            shape=values.get("shape"),
            alpha=values.get("alpha"),
            gamma=values.get("gamma"),
            beta0=values.get("beta0"),
            mu=values.get("mu"),
            horizon=values.get("horizon"),
            events_per_node=values.get("events_per_node"),
            seed=_pick(values, "seed", 0),
            n_seeds=_pick(values, "n_seeds", 1),
            max_events=_pick(values, "max_events", 50_000_000),
            power_law_engine=_checked(
                lambda: PowerLawEngine(_pick(values, "power_law_engine", "mixture"))).value,
            cumulants=cumulants,
            solve=solve_config_from(values),
            threshold=values.get("threshold"),
            workers=values.get("workers"),
            output_dir=values.get("output_dir"),
        )
