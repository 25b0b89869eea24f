"""Ichnaea configuration management."""

import json
from typing import Any

from pydantic import Field
from pydantic_settings import BaseSettings


class ConfigError(ValueError):
    """Raised when an override references an unknown configuration key."""


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    # Logging
    ichnaea_log: str = Field(
        default="info",
        description="Log level: error, warn, info or debug.",
    )

    # Planner
    planner_window_w: int | None = Field(
        default=None, ge=1, description="Decision window W. None = scenario value."
    )
    planner_discrepancy_threshold: float | None = Field(
        default=None,
        ge=0,
        description="Battery discrepancy that triggers a replan. None = 2x P_RX.",
    )
    planner_variant: str | None = Field(
        default=None, description="Battery dynamics variant A or B. None = scenario value."
    )

    # Solver
    solver_backend: str = Field(
        default="auto",
        description="bnb, highs, or auto (bnb up to solver_bnb_max_columns columns).",
    )
    solver_time_limit_s: float = Field(default=60.0, gt=0)
    solver_node_limit: int = Field(default=100_000, ge=1)
    solver_bnb_max_columns: int = Field(default=400, ge=1)
    solver_relax_exploration: bool = Field(default=False)
    solver_relax_linearization: bool = Field(default=False)

    # Simulator
    simulator_sensing_range: int = Field(default=1, ge=1)
    simulator_hidden_obstacles: int = Field(
        default=0, ge=0, description="Random hidden obstacles when no truth file is given."
    )

    model_config = {
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "extra": "ignore",
    }


_settings: Settings | None = None

_SETTINGS_SECTIONS = ("solver", "planner", "simulator")
_SCENARIO_SECTIONS = ("grid", "energy", "mission")


def get_settings() -> Settings:
    """Get cached settings singleton."""
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


def reset_settings() -> None:
    """Reset settings (for testing)."""
    global _settings
    _settings = None


def _parse_value(raw: str) -> Any:
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def apply_overrides(
    settings: Settings,
    document: dict | None,
    overrides: list[str],
) -> Settings:
    """Apply dotted ``key=value`` overrides.

    ``solver.*``, ``planner.*`` and ``simulator.*`` keys update the settings;
    ``grid.*``, ``energy.*`` and ``mission.*`` keys update the raw scenario
    document in place, before it is validated. A bare settings field name
    (``ichnaea_log=debug``) sets that field directly.

    Args:
        settings: Base settings.
        document: Raw scenario document (parsed JSON) or None.
        overrides: Strings of the form ``section.key=value``.

    Returns:
        A new Settings instance with the settings overrides applied.

    Raises:
        ConfigError: On malformed overrides or unknown keys.
    """
    updates: dict[str, Any] = {}
    for item in overrides:
        key, sep, raw = item.partition("=")
        key = key.strip()
        if sep and "." not in key and key in Settings.model_fields:
            updates[key] = _parse_value(raw.strip())
            continue
        if not sep or "." not in key:
            raise ConfigError(f"Malformed override (expected section.key=value): {item}")
        section, _, rest = key.partition(".")
        value = _parse_value(raw.strip())

        if section in _SETTINGS_SECTIONS:
            field = f"{section}_{rest.replace('.', '_')}"
            if field not in Settings.model_fields:
                raise ConfigError(f"Unknown config key: {key}")
            updates[field] = value
        elif section in _SCENARIO_SECTIONS:
            if document is None:
                raise ConfigError(f"Override needs a scenario: {key}")
            node = document.setdefault(section, {})
            parts = rest.split(".")
            for part in parts[:-1]:
                if not isinstance(node.get(part), dict):
                    raise ConfigError(f"Unknown config key: {key}")
                node = node[part]
            node[parts[-1]] = value
        else:
            raise ConfigError(f"Unknown config key: {key}")

    if not updates:
        return settings
    merged = settings.model_dump()
    merged.update(updates)
    return Settings(**merged)
