"""Exhaustive joint-path enumeration: the exact optimum for tiny windows."""

import itertools
import logging
import time

from app.energy.battery import BatteryBoundError, battery_step_a, battery_step_b
from app.milp.context import WindowContext, WindowState, objective_weights
from app.models import BatteryState, Cell, DynamicsVariant, Scenario
from app.solver.base import Solution, SolveStats, SolveStatus

logger = logging.getLogger(__name__)

MAX_JOINT_PATHS = 10**7


class OracleGuardError(ValueError):
    """Raised when an instance is too large to enumerate."""


def solve_exhaustive(
    scenario: Scenario,
    window: int,
    state: WindowState | None = None,
    *,
    variant: DynamicsVariant | str | None = None,
) -> Solution:
    """Enumerate every joint adjacent path and charging choice.

    Batteries follow the unclamped step recursions; branches leaving
    [0, capacity] are discarded. Leaves are scored with the model's
    objective weights. Ties keep the first assignment in enumeration order.

    Raises:
        OracleGuardError: If 9^(|R|*W) exceeds MAX_JOINT_PATHS.
    """
    start = time.perf_counter()
    ctx = WindowContext(
        scenario=scenario,
        state=state or WindowState.initial(scenario),
        window=window,
        variant=DynamicsVariant(variant) if variant is not None else None,
    )
    size = 9 ** (len(ctx.robots) * window)
    if size > MAX_JOINT_PATHS:
        raise OracleGuardError(
            f"oracle refused: 9^({len(ctx.robots)}*{window}) = {size} joint paths > {MAX_JOINT_PATHS}"
        )

    explore_w, battery_w, frontier_w = objective_weights(ctx)
    params = scenario.energy
    free = set(ctx.free)
    stations = set(ctx.stations)
    exclusive = scenario.mission.collision_exclusive
    robots = ctx.robots
    ids = [r.id for r in robots]

    def options(cell: Cell) -> list[tuple[Cell, bool]]:
        out = []
        for dest in sorted(ctx.nbrs[cell]):
            out.append((dest, False))
            if dest in stations:
                out.append((dest, True))
        return out

    def step(level: BatteryState, charging: bool, move, explored: bool) -> BatteryState:
        rate = scenario.charge_rate if charging else 0.0
        if ctx.variant is DynamicsVariant.A:
            return battery_step_a(level, charging, move, explored, params, ctx.grid, rate, clamp=False)
        return battery_step_b(level, charging, move, params, ctx.grid, rate, clamp=False)

    best: dict = {"objective": None, "moves": None}
    leaves = 0

    def score(positions: list[Cell], levels: list[BatteryState], explored: set[Cell]) -> float:
        value = explore_w * len(explored & free) + battery_w * sum(b.level for b in levels)
        if frontier_w:
            value -= frontier_w * sum(ctx.frontier.get(p, 0) for p in positions)
        return value

    def search(k: int, positions, levels, explored: set[Cell], history) -> None:
        nonlocal leaves
        if k == window:
            leaves += 1
            value = score(positions, levels, explored)
            if best["objective"] is None or value > best["objective"] + 1e-12:
                best["objective"] = value
                best["moves"] = [list(h) for h in history]
            return
        for joint in itertools.product(*(options(p) for p in positions)):
            dests = [d for d, _ in joint]
            if exclusive and len(set(dests)) < len(dests):
                continue
            new_levels = []
            try:
                for i, (dest, charging) in enumerate(joint):
                    new_levels.append(
                        step(levels[i], charging, (positions[i], dest), dest in explored)
                    )
            except BatteryBoundError:
                continue
            for i, choice in enumerate(joint):
                history[i].append(choice)
            search(k + 1, dests, new_levels, explored | set(dests), history)
            for h in history:
                h.pop()

    search(
        0,
        [ctx.state.positions[r.id] for r in robots],
        [BatteryState(level=ctx.state.batteries[r.id], capacity=r.battery_capacity) for r in robots],
        set(ctx.state.explored) & free,
        [[] for _ in robots],
    )
    stats = SolveStats(nodes=leaves, wall_time=time.perf_counter() - start, backend="exhaustive")
    logger.info("Exhaustive search: %d leaves in %.3fs", leaves, stats.wall_time)
    if best["moves"] is None:
        return Solution(status=SolveStatus.INFEASIBLE, stats=stats)
    return Solution(
        status=SolveStatus.OPTIMAL,
        objective=best["objective"],
        stats=stats,
        assignment=dict(zip(ids, best["moves"])),
    )
