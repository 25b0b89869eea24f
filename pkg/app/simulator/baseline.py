"""Sensors-always-on baseline: replays a path with every sensor and local detection running."""

import logging

from app.energy.battery import BatteryDepleted, apply_step, step_energy_soa
from app.models import (
    BatteryState,
    Cell,
    Event,
    EventKind,
    GroundTruth,
    Scenario,
    SimTrace,
    TraceRecord,
)
from app.planner.state import MissionState
from app.simulator.world import TraceBuilder, record_energy, sense

logger = logging.getLogger(__name__)


def run_soa_baseline(
    scenario: Scenario,
    truth: GroundTruth,
    paths: dict[str, list[Cell]],
) -> SimTrace:
    """Drive each robot along ``paths`` (one cell per step, start included).

    Every step bills RX, sensing, transmission at the destination and local
    object detection; nothing is charged. Exploration is tracked for coverage
    only, it never switches sensors off.

    Raises:
        ValueError: If the robot sets differ, path lengths differ, or a
            path does not start at the robot's start cell.
        AdjacencyError: If consecutive cells are not adjacent.
    """
    if set(paths) != set(scenario.robot_ids):
        raise ValueError(f"paths cover {sorted(paths)}, scenario has {scenario.robot_ids}")
    lengths = {len(p) for p in paths.values()}
    if len(lengths) != 1:
        raise ValueError(f"paths differ in length: {sorted(lengths)}")
    for robot in scenario.robots:
        if paths[robot.id][0] != robot.start_cell:
            raise ValueError(f"path for {robot.id} does not start at {robot.start_cell}")

    params, grid = scenario.energy, truth.grid
    state = MissionState.initial(scenario)
    trace = TraceBuilder(scenario, truth, mode="soa")
    trace.start(state)

    for k in range(1, lengths.pop()):
        t = state.t_now + 1
        events: list[Event] = []
        records: list[TraceRecord] = []
        for robot in scenario.robots:
            r = robot.id
            cur = state.positions[r]
            if r in state.frozen:
                records.append(TraceRecord(t=t, robot=r, cell=cur, battery=state.batteries[r],
                                           sensors_on=False, charging=False))
                continue
            dest = paths[r][k]
            energy = step_energy_soa((cur, dest), params, grid)
            before = BatteryState(level=state.batteries[r], capacity=robot.battery_capacity)
            try:
                after = apply_step(before, energy)
            except BatteryDepleted:
                state.frozen.add(r)
                event = Event(kind=EventKind.BATTERY_DEPLETED, t=t, robot=r, cell=cur,
                              previous=before.level, detail="robot frozen")
                logger.warning("Baseline robot %s depleted at t=%d", r, t)
                events.append(event)
                records.append(TraceRecord(t=t, robot=r, cell=cur, battery=before.level,
                                           sensors_on=False, charging=False,
                                           events=[event.kind.value]))
                continue
            record_energy(trace.ledgers[r], energy, 0.0)
            state.positions[r] = dest
            state.batteries[r] = after.level
            state.explored.add(dest)
            found = [e for e in sense(state, r, dest, truth, t) if e.kind is EventKind.TARGET_FOUND]
            events.extend(found)
            records.append(TraceRecord(t=t, robot=r, cell=dest, battery=after.level,
                                       sensors_on=True, charging=False,
                                       events=[e.kind.value for e in found]))
        state.t_now = t
        trace.add(state, events, records)

    result = trace.finish(state)
    logger.info(
        "Baseline finished: %d steps, drain %.4g",
        result.mission_length,
        sum(ledger.drain for ledger in result.energy.values()),
    )
    return result
