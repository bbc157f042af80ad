"""Run configuration: built-in defaults, then a config file, then command-line flags."""
import logging
import math
import os
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import yaml

from schwinger_kernels.errors import InvalidArgumentError
from schwinger_kernels.phase_dynamics import QuadraticHamiltonian, Representation
from schwinger_kernels.reference_evolver import GridSpec
from schwinger_kernels.verification import SuiteSettings

logger = logging.getLogger(__name__)

ENGINES = ("kernel", "oracle")
_REAL_KEYS = ("mass", "omega", "kinetic", "potential", "cross", "linear_p", "linear_x", "hbar",
              "x_min", "x_max", "center_q", "center_conjugate", "width")
_COUNT_KEYS = ("n", "steps", "seed", "workers")


def config_directory() -> str:
    return os.getenv('SCHWINGER_CONFIG_DIRECTORY', 'Configs')


@dataclass(frozen=True)
class RunConfig:
    mass: float = 1.0
    omega: float = 1.0
    kinetic: Optional[float] = None
    potential: Optional[float] = None
    cross: float = 0.0
    linear_p: float = 0.0
    linear_x: float = 0.0
    hbar: float = 1.0
    rep: str = "momentum"
    times: Tuple[float, ...] = (0.7,)
    delta_times: Tuple[float, ...] = (1e-2, 1e-3, 1e-4)
    x_min: float = -20.0
    x_max: float = 20.0
    n: int = 4096
    steps: Optional[int] = None
    seed: int = 0
    workers: int = 4
    output: Optional[str] = None
    engine: str = "oracle"
    center_q: float = 1.0
    center_conjugate: float = 0.0
    width: float = 1.0

    def __post_init__(self):
        for name in _REAL_KEYS + _COUNT_KEYS:
            value = getattr(self, name)
            if value is None:
                continue
            try:
                object.__setattr__(self, name, float(value) if name in _REAL_KEYS else int(value))
            except (TypeError, ValueError):
                raise InvalidArgumentError(f"Config value '{name}' must be numeric, got {value!r}.")
        times = self.times if isinstance(self.times, (list, tuple)) else (self.times,)
        object.__setattr__(self, "times", tuple(_positive_time(t) for t in times))
        delta = self.delta_times if isinstance(self.delta_times, (list, tuple)) else (self.delta_times,)
        object.__setattr__(self, "delta_times", tuple(_positive_time(t) for t in delta))
        if not self.times:
            raise InvalidArgumentError("At least one time is required.")
        if self.engine not in ENGINES:
            raise InvalidArgumentError(f"engine must be one of {ENGINES}, got '{self.engine}'.")
        if self.mass <= 0:
            raise InvalidArgumentError("mass must be strictly positive.")
        object.__setattr__(self, "rep", Representation.parse(self.rep).value)

    @property
    def representation(self) -> Representation:
        return Representation(self.rep)

    def hamiltonian(self) -> QuadraticHamiltonian:
        """Raw coefficients win over the (mass, omega) shorthand."""
        kinetic = self.kinetic if self.kinetic is not None else 1.0 / (2.0 * self.mass)
        potential = self.potential if self.potential is not None else self.mass * self.omega ** 2 / 2.0
        return QuadraticHamiltonian(kinetic=float(kinetic), potential=float(potential), cross=float(self.cross),
                                    linear_p=float(self.linear_p), linear_x=float(self.linear_x),
                                    hbar=float(self.hbar))

    def grid(self) -> GridSpec:
        return GridSpec(q_min=float(self.x_min), q_max=float(self.x_max), n=int(self.n))

    def suite_settings(self, timing: bool = True) -> SuiteSettings:
        return SuiteSettings(rep=self.representation, times=self.times, delta_times=self.delta_times,
                             grid=self.grid(), steps=self.steps if self.steps is not None else 2048,
                             seed=int(self.seed), workers=int(self.workers), timing=timing)


def _positive_time(value: Any) -> float:
    try:
        t = float(value)
    except (TypeError, ValueError):
        raise InvalidArgumentError(f"time must be a number, got {value!r}.")
    if not math.isfinite(t) or t <= 0:
        raise InvalidArgumentError(f"time must be positive, got {value!r}.")
    return t


def config_keys() -> Tuple[str, ...]:
    return tuple(f.name for f in fields(RunConfig))


def resolve_path(name: str) -> Path:
    """Bare file names are looked up in the config directory."""
    path = Path(name)
    if path.exists() or path.parent != Path('.'):
        return path
    return Path(config_directory()) / name


def load_config_file(name: str) -> Dict[str, Any]:
    path = resolve_path(name)
    try:
        with open(path, 'r') as file:
            data = yaml.safe_load(file) or {}
    except FileNotFoundError:
        raise InvalidArgumentError(f"Config file '{path}' not found.")
    except yaml.YAMLError as error:
        raise InvalidArgumentError(f"Config file '{path}' could not be parsed: {error}")
    if not isinstance(data, dict):
        raise InvalidArgumentError(f"Config file '{path}' must hold a mapping of keys to values.")
    unknown = sorted(set(data) - set(config_keys()))
    if unknown:
        raise InvalidArgumentError(f"Config file '{path}' has unknown keys: {', '.join(unknown)}")
    logger.info(f"Loaded config from {path}")
    return data


def build_config(file_name: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Defaults < file values < overrides (flags); None overrides are ignored."""
    values: Dict[str, Any] = {}
    if file_name:
        values.update(load_config_file(file_name))
    values.update({key: value for key, value in (overrides or {}).items() if value is not None})
    try:
        return replace(RunConfig(), **values)
    except TypeError as error:
        raise InvalidArgumentError(f"Invalid configuration: {error}")
