"""Pydantic models for Ichnaea."""

import math
from enum import Enum
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

Cell = tuple[int, int]


class DynamicsVariant(str, Enum):
    """Battery dynamics formulations."""

    A = "A"  # sensing/TX billed only on unexplored destinations
    B = "B"  # sensing/TX billed every non-charging step


class Device(str, Enum):
    """Profiled on-robot devices."""

    DRIVERS = "drivers"
    CAMERA = "camera"
    LIDAR = "lidar"
    HAT5G = "hat5g"
    OBJECT_DETECTION = "object_detection"


class EventKind(str, Enum):
    """Mission events that can trigger a replan or termination."""

    OBSTACLE_DETECTED = "obstacle_detected"
    BATTERY_DISCREPANCY = "battery_discrepancy"
    TARGET_FOUND = "target_found"
    PLAN_EXHAUSTED = "plan_exhausted"
    HORIZON_REACHED = "horizon_reached"
    AREA_COMPLETE = "area_complete"
    BATTERY_DEPLETED = "battery_depleted"
    SOLVER_FALLBACK = "solver_fallback"


def _cell_map(value):
    """Accept ``[[a, b, v], ...]`` as well as a mapping keyed by cell."""
    if value is None or isinstance(value, dict):
        return value
    return {(int(a), int(b)): float(v) for a, b, v in value}


# ---------------------------------------------------------------------------
# Scenario models
# ---------------------------------------------------------------------------


class GridMap(BaseModel):
    """Rectangular cell grid, 1-based (a, b) indices."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    width_a: int = Field(..., ge=1, description="Columns, a in 1..A")
    height_b: int = Field(..., ge=1, description="Rows, b in 1..B")
    cell_size: tuple[float, float] = Field(default=(1.0, 1.0), description="Meters per cell")
    obstacles: frozenset[Cell] = Field(default_factory=frozenset)
    terrain: dict[Cell, float] = Field(
        default_factory=dict, description="Terrain multipliers, default 1.0"
    )
    connectivity: Literal[4, 8] = Field(default=8, description="Moore (8) or von Neumann (4)")

    @field_validator("terrain", mode="before")
    @classmethod
    def parse_terrain(cls, v):
        return _cell_map(v)

    @model_validator(mode="after")
    def check_bounds(self) -> "GridMap":
        for cell in sorted(self.obstacles):
            if not self.in_bounds(cell):
                raise ValueError(f"obstacle out of bounds: {cell}")
        for cell, factor in sorted(self.terrain.items()):
            if not self.in_bounds(cell):
                raise ValueError(f"terrain cell out of bounds: {cell}")
            if factor <= 0:
                raise ValueError(f"terrain factor must be positive at {cell}")
        return self

    def in_bounds(self, cell: Cell) -> bool:
        a, b = cell
        return 1 <= a <= self.width_a and 1 <= b <= self.height_b

    def is_free(self, cell: Cell) -> bool:
        return self.in_bounds(cell) and cell not in self.obstacles

    def terrain_factor(self, cell: Cell) -> float:
        return self.terrain.get(cell, 1.0)

    def cells(self) -> list[Cell]:
        """All cells, a-major order."""
        return [
            (a, b) for a in range(1, self.width_a + 1) for b in range(1, self.height_b + 1)
        ]

    def free_cells(self) -> list[Cell]:
        return [c for c in self.cells() if c not in self.obstacles]

    def with_obstacles(self, extra: set[Cell] | frozenset[Cell]) -> "GridMap":
        return self.model_copy(update={"obstacles": frozenset(self.obstacles | set(extra))})

    def with_terrain(self, terrain: dict[Cell, float]) -> "GridMap":
        return self.model_copy(update={"terrain": {**self.terrain, **terrain}})


class RobotSpec(BaseModel):
    """A robot and its battery."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    id: str = Field(..., min_length=1)
    battery_capacity: float = Field(..., gt=0, description="B_max, energy units")
    initial_battery: float = Field(..., ge=0)
    start_cell: Cell
    sensors: list[str] = Field(default_factory=lambda: ["camera", "lidar"])

    @model_validator(mode="after")
    def check_battery(self) -> "RobotSpec":
        if self.initial_battery > self.battery_capacity:
            raise ValueError(f"initial_battery exceeds capacity for robot {self.id}")
        return self


class ChargingStation(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    cell: Cell
    charge_rate: float = Field(..., gt=0, description="CR, energy units per step")


class EnergyParams(BaseModel):
    """Per-step energy parameters."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    p_rx: float = Field(default=0.5, ge=0)
    p_sen: float = Field(default=2.0, ge=0)
    p_move_base: float = Field(default=1.0, ge=0)
    p_move_diag_factor: float = Field(default=math.sqrt(2), ge=0)
    p_tx_table: dict[Cell, float] | None = Field(
        default=None, description="Explicit P_TX per cell; overrides the generator"
    )
    p_tx0: float = Field(default=1.0, ge=0)
    kappa: float = Field(default=0.0, ge=0)
    gamma: float = Field(default=1.0, ge=0)
    base_station: Cell = (1, 1)
    p_local: float = Field(
        default=0.0, ge=0, description="On-robot object detection power (baseline only)"
    )

    @field_validator("p_tx_table", mode="before")
    @classmethod
    def parse_table(cls, v):
        return _cell_map(v)

    @field_validator("p_tx_table")
    @classmethod
    def non_negative_table(cls, v: dict[Cell, float] | None) -> dict[Cell, float] | None:
        if v is not None and any(p < 0 for p in v.values()):
            raise ValueError("p_tx_table entries must be >= 0")
        return v


class ObjectiveWeights(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    explore: float | None = Field(
        default=None, ge=0, description="None = lexicographic default"
    )
    battery: float = Field(default=1.0, ge=0)
    frontier: float = Field(
        default=0.0, ge=0, description="Penalty per cell of distance to unexplored area"
    )


class MissionSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    horizon_t: int = Field(..., ge=1, description="|T|, mission steps")
    window_w: int = Field(default=5, ge=1, description="Decision window W")
    dynamics_variant: DynamicsVariant = DynamicsVariant.A
    objective_weights: ObjectiveWeights = Field(default_factory=ObjectiveWeights)
    collision_exclusive: bool = False
    seed: int = 0

    @model_validator(mode="after")
    def check_window(self) -> "MissionSpec":
        if self.window_w > self.horizon_t:
            raise ValueError("window_w exceeds horizon_t")
        w = self.objective_weights
        if w.explore == 0 and w.battery == 0:
            raise ValueError("objective weights are both zero")
        return self


class Scenario(BaseModel):
    """World and mission configuration."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    grid: GridMap
    robots: list[RobotSpec] = Field(..., min_length=1)
    stations: list[ChargingStation] = Field(default_factory=list)
    energy: EnergyParams = Field(default_factory=EnergyParams)
    mission: MissionSpec

    @model_validator(mode="after")
    def check_consistency(self) -> "Scenario":
        grid = self.grid
        ids = [r.id for r in self.robots]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate robot id")
        for robot in self.robots:
            if not grid.in_bounds(robot.start_cell):
                raise ValueError(f"start_cell out of bounds: robot {robot.id} at {robot.start_cell}")
            if robot.start_cell in grid.obstacles:
                raise ValueError(f"start_cell blocked: robot {robot.id} at {robot.start_cell}")
        for station in self.stations:
            if not grid.in_bounds(station.cell):
                raise ValueError(f"station out of bounds: {station.cell}")
            if station.cell in grid.obstacles:
                raise ValueError(f"station cell blocked: {station.cell}")
        if len({s.charge_rate for s in self.stations}) > 1:
            raise ValueError("stations must share one charge_rate")
        if not grid.in_bounds(self.energy.base_station):
            raise ValueError(f"base station out of bounds: {self.energy.base_station}")
        table = self.energy.p_tx_table
        if table is not None:
            for cell in grid.free_cells():
                if cell not in table:
                    raise ValueError(f"p_tx_table missing cell {cell}")
        return self

    @property
    def charge_rate(self) -> float:
        return self.stations[0].charge_rate if self.stations else 0.0

    @property
    def station_cells(self) -> frozenset[Cell]:
        return frozenset(s.cell for s in self.stations)

    @property
    def robot_ids(self) -> list[str]:
        return [r.id for r in self.robots]

    def robot(self, robot_id: str) -> RobotSpec:
        for r in self.robots:
            if r.id == robot_id:
                return r
        raise KeyError(robot_id)


# ---------------------------------------------------------------------------
# Energy models
# ---------------------------------------------------------------------------


class BatteryState(BaseModel):
    model_config = ConfigDict(frozen=True)

    level: float = Field(..., ge=0)
    capacity: float = Field(..., gt=0)

    @model_validator(mode="after")
    def check_level(self) -> "BatteryState":
        if self.level > self.capacity:
            raise ValueError("battery level exceeds capacity")
        return self


class DevicePowerProfile(BaseModel):
    """Measured USB power per device state, plus the fitted battery drain."""

    device: Device
    p_idle: float = Field(..., ge=0, description="Watts")
    p_started: float = Field(..., ge=0, description="Watts")
    p_working: float = Field(..., ge=0, description="Watts")
    battery_w: float | None = Field(
        default=None, ge=0, description="Fitted drain on the laptop battery while running"
    )

    @model_validator(mode="after")
    def check_monotone(self) -> "DevicePowerProfile":
        if not (self.p_idle <= self.p_started <= self.p_working):
            raise ValueError(f"non-monotone power states for {self.device.value}")
        return self


class ProfileSet(BaseModel):
    """Contents of ``profiles/devices.json``."""

    capacity_wh: float = Field(..., gt=0)
    locomotion_w: float = Field(..., gt=0)
    devices: dict[Device, DevicePowerProfile]
    residual: float = Field(default=0.0, ge=0)


# ---------------------------------------------------------------------------
# Planning models
# ---------------------------------------------------------------------------


class Event(BaseModel):
    kind: EventKind
    t: int = Field(..., ge=0)
    robot: str | None = None
    cell: Cell | None = None
    predicted: float | None = None
    reported: float | None = None
    previous: float | None = None
    detail: str = ""


class PlanStep(BaseModel):
    t: int
    cell: Cell
    charging: bool = False
    battery: float
    sensors_on: bool = False


class Plan(BaseModel):
    """Per-robot steps for k = 0..window; step 0 is the state the plan starts from."""

    t_start: int
    window: int
    steps: dict[str, list[PlanStep]] = Field(default_factory=dict)
    status: str = "optimal"
    objective: float | None = None
    fallback: bool = False
    events: list[Event] = Field(default_factory=list)

    def step(self, robot: str, k: int) -> PlanStep:
        return self.steps[robot][k]


# ---------------------------------------------------------------------------
# Simulation models
# ---------------------------------------------------------------------------


class GroundTruth(BaseModel):
    grid: GridMap
    sensing_range: int = Field(default=1, ge=1)
    target_cell: Cell | None = None


class TraceRecord(BaseModel):
    t: int
    robot: str
    cell: Cell
    battery: float
    sensors_on: bool
    charging: bool
    events: list[str] = Field(default_factory=list)


class EnergyLedger(BaseModel):
    move: float = 0.0
    tx: float = 0.0
    rx: float = 0.0
    sen: float = 0.0
    local: float = 0.0
    charged: float = 0.0

    @property
    def drain(self) -> float:
        return self.move + self.tx + self.rx + self.sen + self.local


class SimTrace(BaseModel):
    mode: str = Field(..., description="A, B or soa")
    records: list[TraceRecord] = Field(default_factory=list)
    explored_sizes: list[int] = Field(default_factory=list)
    events: list[Event] = Field(default_factory=list)
    energy: dict[str, EnergyLedger] = Field(default_factory=dict)
    solver_invocations: int = 0
    solve_times: list[float] = Field(default_factory=list)
    explored: int = 0
    explorable: int = 0
    mission_length: int = 0

    @property
    def coverage(self) -> float:
        return self.explored / self.explorable if self.explorable else 0.0

    def robot_records(self, robot: str) -> list[TraceRecord]:
        return [r for r in self.records if r.robot == robot]

    def paths(self) -> dict[str, list[Cell]]:
        out: dict[str, list[Cell]] = {}
        for rec in self.records:
            out.setdefault(rec.robot, []).append(rec.cell)
        return out


class RobotReport(BaseModel):
    robot: str
    energy_planned: float
    energy_soa: float
    savings_pct: float


class CompareReport(BaseModel):
    robots: list[RobotReport]
    total_planned: float
    total_soa: float
    savings_pct: float
    coverage_planned: float
    coverage_soa: float
    mission_length: int
    seed: int | None = None


# ---------------------------------------------------------------------------
# CLI models
# ---------------------------------------------------------------------------


class RunConfig(BaseModel):
    subcommand: Literal["solve", "mission", "compare", "profile", "dump-model"]
    scenario_path: str | None = None
    output_dir: str = "out"
    overrides: list[str] = Field(default_factory=list)
    json_output: bool = False
    seeds: int = Field(default=1, ge=1)
    jobs: int = Field(default=1, ge=1)
    truth_path: str | None = None
    anchors_path: str | None = None
