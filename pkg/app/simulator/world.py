"""Ground-truth world: executes plan steps, reveals obstacles, drains batteries."""

import json
import logging
from pathlib import Path

import numpy as np

from app.energy.battery import (
    BatteryDepleted,
    StepEnergy,
    apply_step,
    battery_step_a,
    battery_step_b,
    battery_step_soa,
    step_energy_a,
    step_energy_b,
)
from app.models import (
    BatteryState,
    Cell,
    DynamicsVariant,
    EnergyLedger,
    Event,
    EventKind,
    GroundTruth,
    PlanStep,
    Scenario,
    SimTrace,
    TraceRecord,
)
from app.planner.state import MissionState
from app.scenario.grid import reachable_cells
from app.scenario.loader import ScenarioError

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Ground truth
# ---------------------------------------------------------------------------


def check_ground_truth(truth: GroundTruth, scenario: Scenario) -> GroundTruth:
    """Ensure the truth shares the scenario's geometry.

    Raises:
        ScenarioError: On mismatched dimensions, dropped known obstacles,
            or hidden obstacles under robots or stations.
    """
    grid, known = truth.grid, scenario.grid
    if (grid.width_a, grid.height_b) != (known.width_a, known.height_b):
        raise ScenarioError("ground truth grid size differs from scenario")
    if not known.obstacles <= grid.obstacles:
        raise ScenarioError("ground truth drops known obstacles")
    blocked = grid.obstacles & ({r.start_cell for r in scenario.robots} | scenario.station_cells)
    if blocked:
        raise ScenarioError(f"ground truth blocks a start or station cell: {sorted(blocked)}")
    if truth.target_cell is not None and not grid.in_bounds(truth.target_cell):
        raise ScenarioError(f"target out of bounds: {truth.target_cell}")
    return truth


def load_ground_truth(path: str | Path, scenario: Scenario) -> GroundTruth:
    """Read ``{"obstacles": [...], "terrain": [...], "sensing_range": n, "target_cell": [a, b]}``.

    Obstacles listed are added to the scenario's known ones; terrain entries
    override the scenario's factors.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
        hidden = {(int(a), int(b)) for a, b in doc.get("obstacles", [])}
        terrain = {(int(a), int(b)): float(f) for a, b, f in doc.get("terrain", [])}
        outside = [c for c in hidden | set(terrain) if not scenario.grid.in_bounds(c)]
        if outside:
            raise ScenarioError(f"ground truth cell out of bounds: {outside[0]}")
        grid = scenario.grid.with_obstacles(hidden).with_terrain(terrain)
        target = doc.get("target_cell")
        truth = GroundTruth(
            grid=grid,
            sensing_range=int(doc.get("sensing_range", 1)),
            target_cell=tuple(target) if target else None,
        )
    except (ValueError, TypeError) as e:
        raise ScenarioError(f"invalid ground truth {path}: {e}") from e
    return check_ground_truth(truth, scenario)


def generate_ground_truth(
    scenario: Scenario,
    hidden_obstacles: int = 0,
    seed: int | None = None,
    sensing_range: int = 1,
) -> GroundTruth:
    """Scenario geometry plus ``hidden_obstacles`` random obstacles.

    Starts and stations are never blocked. Same seed, same truth.
    """
    rng = np.random.default_rng(scenario.mission.seed if seed is None else seed)
    reserved = {r.start_cell for r in scenario.robots} | scenario.station_cells
    candidates = [c for c in scenario.grid.free_cells() if c not in reserved]
    count = min(hidden_obstacles, len(candidates))
    picked = rng.choice(len(candidates), size=count, replace=False) if count else []
    hidden = {candidates[int(i)] for i in picked}
    grid = scenario.grid.with_obstacles(hidden)
    return GroundTruth(grid=grid, sensing_range=sensing_range)


# ---------------------------------------------------------------------------
# Stepping
# ---------------------------------------------------------------------------


def _within(a: Cell, b: Cell, radius: int) -> bool:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1])) <= radius


def record_energy(ledger: EnergyLedger, energy: StepEnergy, gained: float) -> None:
    ledger.move += energy.move
    ledger.tx += energy.tx
    ledger.rx += energy.rx
    ledger.sen += energy.sen
    ledger.local += energy.local
    ledger.charged += gained


def sense(
    state: MissionState, robot: str, cell: Cell, truth: GroundTruth, t: int
) -> list[Event]:
    """Reveal true obstacles and the target within sensing range of ``cell``."""
    events = []
    for obstacle in sorted(truth.grid.obstacles - state.known_obstacles):
        if _within(cell, obstacle, truth.sensing_range):
            events.append(Event(kind=EventKind.OBSTACLE_DETECTED, t=t, robot=robot, cell=obstacle))
    if truth.target_cell is not None and _within(cell, truth.target_cell, truth.sensing_range):
        events.append(Event(kind=EventKind.TARGET_FOUND, t=t, robot=robot, cell=truth.target_cell))
    return events


def step(
    state: MissionState,
    plan_steps: dict[str, PlanStep],
    truth: GroundTruth,
    scenario: Scenario,
    *,
    variant: DynamicsVariant = DynamicsVariant.A,
    threshold: float = 0.0,
    ledgers: dict[str, EnergyLedger] | None = None,
) -> tuple[MissionState, list[Event], list[TraceRecord]]:
    """Execute one plan step for every robot against the ground truth.

    Exploration status is read from the state before the step, so robots
    entering the same unexplored cell together both sense it.

    Returns:
        The (mutated) state, the events raised, and one trace record per robot.

    Raises:
        ValueError: If a planned destination is not adjacent to the robot.
    """
    t = state.t_now + 1
    seen = frozenset(state.explored)
    grid = truth.grid
    params = scenario.energy
    events: list[Event] = []
    records: list[TraceRecord] = []
    newly_explored: set[Cell] = set()

    for robot in scenario.robots:
        r = robot.id
        cur = state.positions[r]
        robot_events: list[Event] = []
        if r in state.frozen:
            records.append(
                TraceRecord(t=t, robot=r, cell=cur, battery=state.batteries[r],
                            sensors_on=False, charging=False)
            )
            continue

        planned = plan_steps[r]
        dest = planned.cell
        if not _within(cur, dest, 1) or not grid.in_bounds(dest):
            raise ValueError(f"planned move not adjacent for {r}: {cur} -> {dest}")
        blocked = dest in grid.obstacles
        if blocked:
            if dest not in state.known_obstacles:
                robot_events.append(
                    Event(kind=EventKind.OBSTACLE_DETECTED, t=t, robot=r, cell=dest, detail="blocked")
                )
            dest = cur
        charging = planned.charging and not blocked and dest in scenario.station_cells
        explored = dest in seen
        rate = scenario.charge_rate if charging else 0.0
        if variant is DynamicsVariant.A:
            energy = step_energy_a(charging, (cur, dest), explored, params, grid, rate)
        else:
            energy = step_energy_b(charging, (cur, dest), params, grid, rate)

        before = BatteryState(level=state.batteries[r], capacity=robot.battery_capacity)
        try:
            after = apply_step(before, energy)
        except BatteryDepleted:
            state.frozen.add(r)
            event = Event(kind=EventKind.BATTERY_DEPLETED, t=t, robot=r, cell=cur,
                          previous=before.level, detail="robot frozen")
            logger.warning("Robot %s depleted at t=%d, frozen at %s", r, t, cur)
            events.extend(robot_events)
            events.append(event)
            records.append(
                TraceRecord(t=t, robot=r, cell=cur, battery=before.level, sensors_on=False,
                            charging=False, events=[e.kind.value for e in robot_events + [event]])
            )
            continue

        if ledgers is not None:
            record_energy(ledgers[r], energy, after.level - before.level + energy.drain)
        state.positions[r] = dest
        state.batteries[r] = after.level

        sensors_on = not explored
        if sensors_on:
            newly_explored.add(dest)
            robot_events.extend(
                e for e in sense(state, r, dest, truth, t)
                if not any(e.kind == o.kind and e.cell == o.cell for o in events + robot_events)
            )
        if not blocked and abs(planned.battery - after.level) > threshold:
            robot_events.append(
                Event(kind=EventKind.BATTERY_DISCREPANCY, t=t, robot=r, cell=dest,
                      predicted=planned.battery, reported=after.level, previous=before.level)
            )

        events.extend(robot_events)
        records.append(
            TraceRecord(t=t, robot=r, cell=dest, battery=after.level, sensors_on=sensors_on,
                        charging=charging, events=[e.kind.value for e in robot_events])
        )

    state.explored |= newly_explored
    state.t_now = t
    return state, events, records


# ---------------------------------------------------------------------------
# Trace assembly and replay
# ---------------------------------------------------------------------------


class TraceBuilder:
    """Accumulates records, events and the energy ledger of one run."""

    def __init__(self, scenario: Scenario, truth: GroundTruth, mode: str) -> None:
        self.scenario = scenario
        self.truth = truth
        self.trace = SimTrace(
            mode=mode,
            energy={r.id: EnergyLedger() for r in scenario.robots},
        )

    @property
    def ledgers(self) -> dict[str, EnergyLedger]:
        return self.trace.energy

    def start(self, state: MissionState, events: list[Event] | None = None) -> None:
        events = events or []
        for robot in self.scenario.robots:
            r = robot.id
            kinds = [e.kind.value for e in events if e.robot == r]
            self.trace.records.append(
                TraceRecord(t=state.t_now, robot=r, cell=state.positions[r],
                            battery=state.batteries[r], sensors_on=True, charging=False,
                            events=kinds)
            )
        self.trace.events.extend(events)
        self.trace.explored_sizes.append(len(state.explored))

    def add(self, state: MissionState, events: list[Event], records: list[TraceRecord]) -> None:
        self.trace.records.extend(records)
        self.trace.events.extend(events)
        self.trace.explored_sizes.append(len(state.explored))

    def add_events(self, events: list[Event]) -> None:
        self.trace.events.extend(events)

    def finish(self, state: MissionState) -> SimTrace:
        truth_free = set(self.truth.grid.free_cells())
        reachable = reachable_cells(self.truth.grid, [r.start_cell for r in self.scenario.robots])
        self.trace.explored = len(state.explored & truth_free)
        self.trace.explorable = len(reachable)
        self.trace.mission_length = state.t_now
        return self.trace


def replay_trace(trace: SimTrace, scenario: Scenario, truth: GroundTruth) -> dict[str, list[float]]:
    """Recompute each robot's battery series from the executed actions in ``trace``."""
    out: dict[str, list[float]] = {}
    params, grid = scenario.energy, truth.grid
    for robot in scenario.robots:
        records = trace.robot_records(robot.id)
        if not records:
            continue
        level = BatteryState(level=records[0].battery, capacity=robot.battery_capacity)
        series = [level.level]
        frozen = False
        for prev, rec in zip(records, records[1:]):
            frozen = frozen or EventKind.BATTERY_DEPLETED.value in rec.events
            if frozen:
                series.append(level.level)
                continue
            move = (prev.cell, rec.cell)
            rate = scenario.charge_rate if rec.charging else 0.0
            if trace.mode == "soa":
                level = battery_step_soa(level, move, params, grid)
            elif trace.mode == DynamicsVariant.B.value:
                level = battery_step_b(level, rec.charging, move, params, grid, rate)
            else:
                level = battery_step_a(
                    level, rec.charging, move, not rec.sensors_on, params, grid, rate
                )
            series.append(level.level)
        out[robot.id] = series
    return out
