"""Tests for configuration management."""

import pytest

from app.config import ConfigError, Settings, apply_overrides, get_settings, reset_settings


class TestSettings:
    def test_default_values(self, monkeypatch):
        monkeypatch.delenv("SOLVER_BACKEND", raising=False)
        settings = Settings(_env_file=None)
        assert settings.ichnaea_log == "info"
        assert settings.planner_window_w is None
        assert settings.planner_discrepancy_threshold is None
        assert settings.solver_backend == "auto"
        assert settings.solver_time_limit_s == 60.0
        assert settings.solver_node_limit == 100_000
        assert settings.simulator_sensing_range == 1
        assert settings.simulator_hidden_obstacles == 0

    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("ICHNAEA_LOG", "debug")
        monkeypatch.setenv("SOLVER_BACKEND", "highs")
        reset_settings()
        settings = Settings(_env_file=None)
        assert settings.ichnaea_log == "debug"
        assert settings.solver_backend == "highs"

    def test_singleton_pattern(self):
        reset_settings()
        s1 = get_settings()
        s2 = get_settings()
        assert s1 is s2

    def test_reset_clears_singleton(self):
        s1 = get_settings()
        reset_settings()
        s2 = get_settings()
        assert s1 is not s2


class TestApplyOverrides:
    def test_settings_keys(self):
        base = Settings(_env_file=None)
        settings = apply_overrides(
            base, None, ["solver.time_limit_s=0.5", "planner.window_w=3", "solver.backend=bnb"]
        )
        assert settings.solver_time_limit_s == 0.5
        assert settings.planner_window_w == 3
        assert settings.solver_backend == "bnb"
        assert base.solver_time_limit_s == 60.0

    def test_scenario_keys_edit_document(self):
        document = {"mission": {"horizon_t": 10}, "grid": {"width_a": 3, "height_b": 3}}
        apply_overrides(Settings(_env_file=None), document, ["mission.window_w=2", "grid.width_a=4"])
        assert document["mission"]["window_w"] == 2
        assert document["grid"]["width_a"] == 4

    def test_nested_scenario_key(self):
        document = {"mission": {"objective_weights": {"battery": 1.0}}}
        apply_overrides(
            Settings(_env_file=None), document, ["mission.objective_weights.frontier=2.5"]
        )
        assert document["mission"]["objective_weights"]["frontier"] == 2.5

    def test_string_value_falls_back(self):
        settings = apply_overrides(Settings(_env_file=None), None, ["planner.variant=B"])
        assert settings.planner_variant == "B"

    def test_bare_settings_field(self):
        settings = apply_overrides(Settings(_env_file=None), None, ["ichnaea_log=debug"])
        assert settings.ichnaea_log == "debug"

    def test_no_overrides_returns_same_instance(self):
        base = Settings(_env_file=None)
        assert apply_overrides(base, {}, []) is base

    @pytest.mark.parametrize(
        "override",
        ["solver.nonsense=1", "weather.wind=3", "window_w=3", "noequals"],
    )
    def test_rejects_unknown_or_malformed(self, override):
        with pytest.raises(ConfigError):
            apply_overrides(Settings(_env_file=None), {}, [override])

    def test_scenario_key_without_document(self):
        with pytest.raises(ConfigError, match="needs a scenario"):
            apply_overrides(Settings(_env_file=None), None, ["mission.window_w=2"])
