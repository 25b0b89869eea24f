"""Mutable mission state shared by the planner loop and the simulator."""

from dataclasses import dataclass, field

from app.milp.context import WindowState
from app.models import Cell, Plan, Scenario


@dataclass
class MissionState:
    t_now: int
    positions: dict[str, Cell]
    batteries: dict[str, float]
    explored: set[Cell]
    known_obstacles: set[Cell] = field(default_factory=set)
    terrain_estimates: dict[Cell, float] = field(default_factory=dict)
    frozen: set[str] = field(default_factory=set)
    active_plan: Plan | None = None
    cursor: int = 0

    @classmethod
    def initial(cls, scenario: Scenario) -> "MissionState":
        return cls(
            t_now=0,
            positions={r.id: r.start_cell for r in scenario.robots},
            batteries={r.id: r.initial_battery for r in scenario.robots},
            explored={r.start_cell for r in scenario.robots},
        )

    @property
    def active_robots(self) -> list[str]:
        return [r for r in self.positions if r not in self.frozen]

    def window_state(self) -> WindowState:
        return WindowState(
            positions=dict(self.positions),
            batteries=dict(self.batteries),
            explored=frozenset(self.explored),
            t_now=self.t_now,
            known_obstacles=frozenset(self.known_obstacles),
            terrain=dict(self.terrain_estimates),
            active=tuple(self.active_robots),
        )
