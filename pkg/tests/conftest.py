"""Shared test fixtures for Ichnaea."""

from pathlib import Path

import pytest

from app.config import Settings, reset_settings
from app.models import (
    ChargingStation,
    EnergyParams,
    GridMap,
    MissionSpec,
    ObjectiveWeights,
    RobotSpec,
    Scenario,
)
from app.scenario.loader import load_scenario

ROOT = Path(__file__).resolve().parent.parent
SCENARIOS = ROOT / "scenarios"


@pytest.fixture(autouse=True)
def _reset_config(monkeypatch):
    """Reset settings singleton between tests."""
    monkeypatch.delenv("ICHNAEA_LOG", raising=False)
    reset_settings()
    yield
    reset_settings()


def build_scenario(
    width: int = 3,
    height: int = 3,
    robots: list[tuple[str, tuple[int, int]]] | None = None,
    *,
    obstacles: list[tuple[int, int]] | None = None,
    stations: list[tuple[int, int]] | None = None,
    charge_rate: float = 5.0,
    capacity: float = 100.0,
    battery: float | None = None,
    horizon: int = 12,
    window: int = 4,
    variant: str = "A",
    exclusive: bool = False,
    frontier: float = 0.0,
    explore_weight: float | None = None,
    battery_weight: float = 1.0,
    terrain: dict[tuple[int, int], float] | None = None,
    **energy,
) -> Scenario:
    """Small scenario with the default energy parameters unless overridden."""
    robots = robots or [("r1", (1, 1))]
    return Scenario(
        grid=GridMap(
            width_a=width,
            height_b=height,
            obstacles=frozenset(obstacles or []),
            terrain=terrain or {},
        ),
        robots=[
            RobotSpec(
                id=rid,
                battery_capacity=capacity,
                initial_battery=capacity if battery is None else battery,
                start_cell=start,
            )
            for rid, start in robots
        ],
        stations=[ChargingStation(cell=c, charge_rate=charge_rate) for c in stations or []],
        energy=EnergyParams(**energy),
        mission=MissionSpec(
            horizon_t=horizon,
            window_w=window,
            dynamics_variant=variant,
            collision_exclusive=exclusive,
            objective_weights=ObjectiveWeights(
                explore=explore_weight, battery=battery_weight, frontier=frontier
            ),
        ),
    )


@pytest.fixture
def make_scenario():
    return build_scenario


@pytest.fixture
def tiny_scenario() -> Scenario:
    return load_scenario(SCENARIOS / "tiny_3x3.json")


@pytest.fixture
def field_scenario() -> Scenario:
    return load_scenario(SCENARIOS / "field_test_13x9.json")


@pytest.fixture
def bnb_settings() -> Settings:
    return Settings(_env_file=None, solver_backend="bnb")


@pytest.fixture
def highs_settings() -> Settings:
    return Settings(_env_file=None, solver_backend="highs")
