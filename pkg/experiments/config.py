"""Experiment configuration: defaults, environment, JSON file, CLI flags.

Keys are the CLI flag names in snake_case. Later sources override earlier
ones: built-in defaults < environment < config file < flags.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, fields, replace
from typing import Optional, Tuple

from walks.errors import LabError
from walks.process import InitialHistory, RepulsionParams
from walks.rng import MAX_SEED

EXPERIMENTS = (
    "simulate",
    "equilibria",
    "flow",
    "coupling",
    "transience",
    "recurrence",
    "rate",
    "nonconvergence",
    "sweep",
)

# Environment variables consulted after the built-in defaults.
ENV_KEYS = {"RWLAB_WORKERS": "workers", "RWLAB_LOG_LEVEL": "log_level"}

# Default pass fractions for the finite-horizon proxies, per experiment.
DEFAULT_PASS_FRACTION = {"coupling": 0.95, "transience": 0.95, "recurrence": 0.90}

CRITICAL_BETA = 2.0


class ConfigError(LabError, ValueError):
    """Invalid experiment configuration; raised before any output is written."""


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "simulate"
    beta: Optional[float] = 1.0
    beta_grid: Optional[Tuple[float, ...]] = None
    steps: int = 10_000
    replicas: int = 20
    seed: int = 0
    n0_counts: Tuple[int, int, int, int] = (0, 1, 0, 1)
    start: Tuple[int, int] = (0, 0)
    record_every: int = 100
    out: str = "outputs"
    exploratory: bool = False
    t_max: float = 40.0
    dt: float = 0.01
    coupling_b: float = 0.25
    coupling_m: int = 10
    coupling_z0: int = 0
    coupling_direction: str = "lower"
    coupling_rho: float = 0.5
    epsilon_center: float = 0.05
    threshold_c: float = 1.0
    pass_fraction: Optional[float] = None
    burn_in: int = 100
    workers: int = 1
    log_level: str = "WARNING"

    @property
    def params(self) -> RepulsionParams:
        return RepulsionParams(float(self.beta))

    @property
    def history(self) -> InitialHistory:
        return InitialHistory(tuple(self.n0_counts), tuple(self.start))

    @property
    def required_fraction(self) -> float:
        """Pass fraction for the proxies: the config value, else the experiment default."""
        if self.pass_fraction is not None:
            return self.pass_fraction
        return DEFAULT_PASS_FRACTION.get(self.experiment, 0.95)

    def for_beta(self, beta: float) -> "ExperimentConfig":
        """Same config at another beta; used by the sweep."""
        return replace(self, beta=float(beta))

    def to_dict(self) -> dict:
        data = asdict(self)
        for key in ("beta_grid", "n0_counts", "start"):
            if data[key] is not None:
                data[key] = list(data[key])
        return data


KNOWN_KEYS = {f.name for f in fields(ExperimentConfig)}
INT_KEYS = {"steps", "replicas", "seed", "record_every", "coupling_m", "coupling_z0", "burn_in", "workers"}
FLOAT_KEYS = {"beta", "t_max", "dt", "coupling_b", "coupling_rho", "epsilon_center", "threshold_c", "pass_fraction"}


def _int_tuple(value, size: int, key: str) -> tuple:
    if isinstance(value, str):
        value = [part for part in value.split(",") if part.strip()]
    try:
        items = tuple(int(v) for v in value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} must be {size} comma-separated integers, got {value!r}") from exc
    if len(items) != size:
        raise ConfigError(f"{key} must have {size} entries, got {len(items)}")
    return items


def _float_tuple(value, key: str) -> tuple:
    if isinstance(value, str):
        value = [part for part in value.split(",") if part.strip()]
    try:
        return tuple(float(v) for v in value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} must be a list of reals, got {value!r}") from exc


def _coerce(key: str, value):
    if value is None:
        return None
    if key == "n0_counts":
        return _int_tuple(value, 4, key)
    if key == "start":
        return _int_tuple(value, 2, key)
    if key == "beta_grid":
        return _float_tuple(value, key)
    if key == "exploratory":
        if isinstance(value, str):
            return value.strip().lower() in ("1", "true", "yes", "on")
        return bool(value)
    try:
        if key in INT_KEYS:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if key in FLOAT_KEYS:
            return float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: cannot interpret {value!r}") from exc
    return str(value)


def read_config_file(path: str) -> dict:
    """Load a flat JSON config object; unknown keys are rejected."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    unknown = sorted(set(data) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"{path}: unknown keys {unknown}")
    return data


def environment_overrides(environ=None) -> dict:
    """Config values taken from RWLAB_* environment variables."""
    environ = os.environ if environ is None else environ
    return {key: environ[name] for name, key in ENV_KEYS.items() if environ.get(name)}


def build_config(
    experiment: str,
    file_values: Optional[dict] = None,
    flag_values: Optional[dict] = None,
    environ=None,
) -> ExperimentConfig:
    """Merge defaults, environment, file and flags, then validate."""
    merged = {}
    for source in (environment_overrides(environ), file_values or {}, flag_values or {}):
        unknown = sorted(set(source) - KNOWN_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys {unknown}")
        merged.update({k: v for k, v in source.items() if v is not None})
    merged["experiment"] = experiment
    config = ExperimentConfig(**{k: _coerce(k, v) for k, v in merged.items()})
    validate(config)
    return config


def validate(config: ExperimentConfig) -> None:
    """Raise ConfigError for any value outside its experiment's range."""
    name = config.experiment
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}; choose from {', '.join(EXPERIMENTS)}")
    if config.steps < 1:
        raise ConfigError(f"steps must be at least 1, got {config.steps}")
    if config.replicas < 1:
        raise ConfigError(f"replicas must be at least 1, got {config.replicas}")
    if config.record_every < 1:
        raise ConfigError(f"record_every must be at least 1, got {config.record_every}")
    if not 0 <= config.seed <= MAX_SEED:
        raise ConfigError(f"seed must be a 64-bit unsigned integer, got {config.seed}")
    if config.workers < 1:
        raise ConfigError(f"workers must be at least 1, got {config.workers}")
    if not 0 < config.dt <= 0.01:
        raise ConfigError(f"dt must lie in (0, 0.01], got {config.dt}")
    if not config.t_max > 0:
        raise ConfigError(f"t_max must be positive, got {config.t_max}")
    if config.burn_in < 0:
        raise ConfigError(f"burn_in must be nonnegative, got {config.burn_in}")
    if config.pass_fraction is not None and not 0 <= config.pass_fraction <= 1:
        raise ConfigError(f"pass_fraction must lie in [0, 1], got {config.pass_fraction}")
    try:
        history = config.history
    except LabError as exc:
        raise ConfigError(f"initial history: {exc}") from exc
    if history.n0 >= config.steps and name not in ("equilibria", "flow", "coupling"):
        raise ConfigError(f"steps={config.steps} must exceed the history length n0={history.n0}")

    if name == "sweep":
        if not config.beta_grid:
            raise ConfigError("sweep needs a nonempty beta_grid")
        for beta in config.beta_grid:
            _check_beta(beta)
        return
    if config.beta is None:
        raise ConfigError(f"{name} needs beta")
    beta = _check_beta(config.beta)

    if name == "transience" and not beta > CRITICAL_BETA:
        raise ConfigError(f"transience needs beta > 2, got {beta}")
    if name == "nonconvergence" and not beta > CRITICAL_BETA:
        raise ConfigError(f"nonconvergence needs beta > 2, got {beta}")
    if name == "rate" and not beta < CRITICAL_BETA:
        raise ConfigError(f"rate needs beta < 2, got {beta}")
    if name == "recurrence":
        if beta >= CRITICAL_BETA:
            raise ConfigError(f"recurrence needs beta < 2, got {beta}")
        if beta > 1 and not config.exploratory:
            raise ConfigError(f"recurrence for beta in (1, 2) is open; pass --exploratory (beta={beta})")
    if name == "coupling":
        if config.coupling_direction not in ("lower", "upper", "symmetric"):
            raise ConfigError(f"coupling_direction must be lower, upper or symmetric, got {config.coupling_direction!r}")
        if config.coupling_direction != "symmetric" and not config.coupling_b > 0:
            raise ConfigError(f"coupling_b must be positive, got {config.coupling_b}")
        if config.coupling_m < 0:
            raise ConfigError(f"coupling_m must be nonnegative, got {config.coupling_m}")
        if config.coupling_m < history.n0:
            raise ConfigError(f"coupling_m={config.coupling_m} must cover the history length n0={history.n0}")
        # Z_n is forced up to step m, so sigma_n = 0 there
        if config.coupling_direction != "symmetric" and config.steps <= config.coupling_m:
            raise ConfigError(f"coupling needs steps > coupling_m, got steps={config.steps}, coupling_m={config.coupling_m}")


def _check_beta(beta) -> float:
    beta = float(beta)
    if not (math.isfinite(beta) and beta >= 0):
        raise ConfigError(f"beta must be a finite nonnegative real, got {beta}")
    return beta
