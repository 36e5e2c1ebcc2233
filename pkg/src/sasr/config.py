"""
Configuration management for SASR runs.
Supports direct overrides, key=value config files and environment variables.
"""

import logging
import os
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from sasr.exceptions import ConfigurationError
from sasr.sasr_types import KernelKind
from sasr.shaping import ShapingConfig

logger = logging.getLogger("sasr.config")


@dataclass(frozen=True)
class SacConfig:
    gamma: float = 0.99
    buffer_size: int = 1_000_000
    batch_size: int = 256
    actor_lr: float = 3e-4
    critic_lr: float = 1e-3
    temperature_lr: float = 1e-4
    policy_frequency: int = 2
    target_frequency: int = 1
    tau: float = 5e-3
    burn_in: int = 5000
    hidden_sizes: tuple[int, ...] = (64, 64)
    initial_temperature: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        if not 0.0 <= self.gamma < 1.0:
            raise ConfigurationError("gamma must lie in [0, 1)", reason=f"got {self.gamma!r}", key="gamma")
        if not 0.0 < self.tau <= 1.0:
            raise ConfigurationError("tau must lie in (0, 1]", reason=f"got {self.tau!r}", key="tau")
        for key in ("buffer_size", "batch_size", "policy_frequency", "target_frequency"):
            if getattr(self, key) < 1:
                raise ConfigurationError(f"{key} must be a positive integer", key=key)
        for key in ("actor_lr", "critic_lr", "temperature_lr", "initial_temperature"):
            if not getattr(self, key) > 0:
                raise ConfigurationError(f"{key} must be positive", key=key)
        if self.burn_in < 0:
            raise ConfigurationError("burn_in must not be negative", key="burn_in")
        if not self.hidden_sizes or min(self.hidden_sizes) < 1:
            raise ConfigurationError(
                "hidden_sizes needs at least one positive width",
                reason=f"got {self.hidden_sizes!r}",
                key="hidden_sizes",
            )


@dataclass(frozen=True)
class RunConfig:
    """Everything one training run (or sweep of seeds) needs."""

    env: str = ""
    total_steps: int = 300_000
    seeds: tuple[int, ...] = (0,)
    shaping: ShapingConfig = field(default_factory=ShapingConfig)
    sac: SacConfig = field(default_factory=SacConfig)
    out_dir: str = "runs"
    eval_interval: int = 5000
    eval_episodes: int = 100
    log_window: int = 25_000
    log_visits: bool = True
    workers: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if not self.seeds:
            raise ConfigurationError("At least one seed is required", key="seeds")
        if min(self.seeds) < 0:
            raise ConfigurationError("Seeds must not be negative", key="seeds")
        for key, name in (
            ("total_steps", "steps"),
            ("eval_interval", "eval_interval"),
            ("eval_episodes", "eval_episodes"),
            ("log_window", "log_window"),
            ("workers", "workers"),
        ):
            if getattr(self, key) < 1:
                raise ConfigurationError(f"{name} must be a positive integer", key=name)


def _parse_bool(raw: str) -> bool:
    text = raw.strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _parse_ints(raw: str) -> tuple[int, ...]:
    return tuple(int(part) for part in raw.replace(" ", "").split(",") if part)


def _parse_optional_float(raw: str) -> float | None:
    text = raw.strip().lower()
    return None if text in ("", "none") else float(text)


# config key -> (section, attribute, parser); section None means RunConfig itself
_KEYS: dict[str, tuple[str | None, str, Callable[[str], Any]]] = {
    "env": (None, "env", str.strip),
    "steps": (None, "total_steps", int),
    "seeds": (None, "seeds", _parse_ints),
    "lambda": ("shaping", "lambda_weight", float),
    "phi": ("shaping", "retention_rate", float),
    "rff_dim": ("shaping", "feature_dim", int),
    "bandwidth": ("shaping", "bandwidth", float),
    "bandwidth_end": ("shaping", "bandwidth_end", _parse_optional_float),
    "kernel": ("shaping", "kernel", KernelKind),
    "beta_sampling": ("shaping", "sample_from_beta", _parse_bool),
    "state_action_features": ("shaping", "state_action_features", _parse_bool),
    "r_min": ("shaping", "r_min", float),
    "r_max": ("shaping", "r_max", float),
    "gamma": ("sac", "gamma", float),
    "buffer_size": ("sac", "buffer_size", int),
    "batch_size": ("sac", "batch_size", int),
    "actor_lr": ("sac", "actor_lr", float),
    "critic_lr": ("sac", "critic_lr", float),
    "temperature_lr": ("sac", "temperature_lr", float),
    "policy_frequency": ("sac", "policy_frequency", int),
    "target_frequency": ("sac", "target_frequency", int),
    "tau": ("sac", "tau", float),
    "burn_in": ("sac", "burn_in", int),
    "hidden_sizes": ("sac", "hidden_sizes", _parse_ints),
    "eval_interval": (None, "eval_interval", int),
    "eval_episodes": (None, "eval_episodes", int),
    "log_window": (None, "log_window", int),
    "log_visits": (None, "log_visits", _parse_bool),
    "workers": (None, "workers", int),
    "out": (None, "out_dir", str.strip),
}

CONFIG_KEYS = tuple(_KEYS)


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "none"
    if isinstance(value, KernelKind):
        return value.value
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values: dict[str, str] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigurationError(
                f"Malformed line {number} in {source}", reason=f"expected key = value, got {content!r}"
            )
        key, value = (part.strip() for part in content.split("=", 1))
        key = key.replace("-", "_")
        if key not in _KEYS:
            raise ConfigurationError(f"Unknown config key {key!r} in {source}", key=key)
        values[key] = value
    return values


class Config:
    """
    Configuration handler with support for multiple sources.

    Priority order (highest to lowest):
    1. Direct overrides (command-line flags)
    2. Config file (key = value lines)
    3. Environment variables (SASR_<KEY>)
    4. RunConfig defaults
    """

    ENV_PREFIX = "SASR_"

    def __init__(
        self,
        overrides: Mapping[str, Any] | None = None,
        config_file: str | Path | None = None,
        environ: Mapping[str, str] | None = None,
    ) -> None:
        self._overrides: dict[str, Any] = {}
        for key, value in (overrides or {}).items():
            name = key.replace("-", "_")
            if name not in _KEYS:
                raise ConfigurationError(f"Unknown config key {name!r}", key=name)
            if value is not None:
                self._overrides[name] = value
        self._config_file = Path(config_file) if config_file is not None else None
        self._file_values = self._read_file() if self._config_file is not None else {}
        self._environ = os.environ if environ is None else environ

    def _read_file(self) -> dict[str, str]:
        assert self._config_file is not None
        try:
            text = self._config_file.read_text()
        except OSError as e:
            raise ConfigurationError(
                f"Cannot read config file {self._config_file}", reason=str(e), key="config"
            ) from e
        return parse_config_text(text, str(self._config_file))

    def _get_from_file(self, key: str) -> str | None:
        return self._file_values.get(key)

    def _get_from_env(self, key: str) -> str | None:
        return self._environ.get(self.ENV_PREFIX + key.upper())

    def source_of(self, key: str) -> str:
        if key in self._overrides:
            return "override"
        if self._get_from_file(key) is not None:
            return "file"
        if self._get_from_env(key) is not None:
            return "env"
        return "default"

    def get(self, key: str) -> Any:
        """Resolved value of one key, or None when the default applies."""
        if key not in _KEYS:
            raise ConfigurationError(f"Unknown config key {key!r}", key=key)
        _, _, parser = _KEYS[key]

        # Priority: override > file > env
        if key in self._overrides:
            value = self._overrides[key]
            return self._parse(key, parser, value) if isinstance(value, str) else value
        raw = self._get_from_file(key)
        if raw is None:
            raw = self._get_from_env(key)
        if raw is None:
            return None
        return self._parse(key, parser, raw)

    @staticmethod
    def _parse(key: str, parser: Callable[[str], Any], raw: str) -> Any:
        try:
            return parser(raw)
        except ValueError as e:
            raise ConfigurationError(
                f"Invalid value for config key {key!r}", reason=str(e), key=key
            ) from e

    def resolve(self) -> RunConfig:
        sections: dict[str | None, dict[str, Any]] = {None: {}, "shaping": {}, "sac": {}}
        for key, (section, attribute, _) in _KEYS.items():
            value = self.get(key)
            if value is not None:
                sections[section][attribute] = value
        shaping = ShapingConfig(**sections["shaping"])
        sac = SacConfig(**sections["sac"])
        config = RunConfig(shaping=shaping, sac=sac, **sections[None])
        logger.debug(
            "Resolved config: %s",
            ", ".join(f"{k}<-{self.source_of(k)}" for k in _KEYS if self.source_of(k) != "default"),
        )
        return config

    def __repr__(self) -> str:
        return (
            f"Config(overrides={sorted(self._overrides)!r}, "
            f"config_file={str(self._config_file) if self._config_file else None!r})"
        )


def config_items(config: RunConfig) -> dict[str, str]:
    """Every config key of ``config`` formatted as file text values."""
    sections: dict[str | None, Any] = {None: config, "shaping": config.shaping, "sac": config.sac}
    return {
        key: _format_value(getattr(sections[section], attribute))
        for key, (section, attribute, _) in _KEYS.items()
    }


def format_config(config: RunConfig) -> str:
    return "".join(f"{key} = {value}\n" for key, value in config_items(config).items())


def write_config(path: str | Path, config: RunConfig) -> Path:
    target = Path(path)
    target.write_text("# sasr run config\n" + format_config(config))
    return target


def read_config(path: str | Path) -> RunConfig:
    """Read a config file on its own, ignoring environment variables."""
    return Config(config_file=path, environ={}).resolve()


def with_overrides(config: RunConfig, **overrides: Any) -> RunConfig:
    """Copy of ``config`` with config keys replaced (``lambda`` and friends accepted)."""
    sections: dict[str | None, dict[str, Any]] = {None: {}, "shaping": {}, "sac": {}}
    for key, value in overrides.items():
        name = key.replace("-", "_")
        if name not in _KEYS:
            raise ConfigurationError(f"Unknown config key {name!r}", key=name)
        section, attribute, _ = _KEYS[name]
        sections[section][attribute] = value
    return replace(
        config,
        shaping=replace(config.shaping, **sections["shaping"]),
        sac=replace(config.sac, **sections["sac"]),
        **sections[None],
    )
