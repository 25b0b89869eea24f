"""Decoding solutions into plans, with a battery replay check."""

import logging

from app.energy.battery import BatteryBoundError, battery_step_a, battery_step_b
from app.milp.context import WindowContext
from app.milp.model import MilpModel
from app.models import BatteryState, Cell, DynamicsVariant, Plan, PlanStep, Scenario
from app.solver.base import INT_TOL, Solution

logger = logging.getLogger(__name__)

# Largest gap tolerated between a solver battery level and its replay.
REPLAY_TOL = 1e-6

Moves = dict[str, list[tuple[Cell, bool]]]


class PlanIntegrityError(ValueError):
    """Raised when a solution does not decode into a consistent plan."""


def replay_plan(
    ctx: WindowContext,
    moves: Moves,
    solver_batteries: dict[str, list[float]] | None = None,
) -> dict[str, list[PlanStep]]:
    """Replay ``moves`` (k = 1..W per robot) through the battery recursions.

    Robots not planned in ``ctx`` hold position. When ``solver_batteries``
    is given, each replayed level must match it within REPLAY_TOL.
    """
    scenario = ctx.scenario
    state = ctx.state
    variant = ctx.variant
    steps: dict[str, list[PlanStep]] = {}
    levels: dict[str, BatteryState] = {}
    for robot in scenario.robots:
        pos = state.positions[robot.id]
        level = state.batteries[robot.id]
        steps[robot.id] = [PlanStep(t=ctx.t(0), cell=pos, battery=level)]
        levels[robot.id] = BatteryState(level=level, capacity=robot.battery_capacity)

    explored = set(state.explored)
    for k in range(1, ctx.window + 1):
        seen = frozenset(explored)
        for robot in scenario.robots:
            r = robot.id
            prev = steps[r][-1]
            if r not in moves:
                steps[r].append(PlanStep(t=ctx.t(k), cell=prev.cell, battery=prev.battery))
                continue
            dest, charging = moves[r][k - 1]
            rate = scenario.charge_rate if charging else 0.0
            try:
                if variant is DynamicsVariant.A:
                    nxt = battery_step_a(
                        levels[r], charging, (prev.cell, dest), dest in seen,
                        scenario.energy, ctx.grid, rate, clamp=False,
                    )
                else:
                    nxt = battery_step_b(
                        levels[r], charging, (prev.cell, dest),
                        scenario.energy, ctx.grid, rate, clamp=False,
                    )
            except BatteryBoundError as e:
                raise PlanIntegrityError(f"robot {r} step {ctx.t(k)}: {e}") from e
            if solver_batteries is not None:
                gap = abs(solver_batteries[r][k] - nxt.level)
                if gap > REPLAY_TOL:
                    raise PlanIntegrityError(
                        f"robot {r} step {ctx.t(k)}: battery {solver_batteries[r][k]:.9g} "
                        f"does not replay ({nxt.level:.9g})"
                    )
            levels[r] = nxt
            steps[r].append(
                PlanStep(
                    t=ctx.t(k),
                    cell=dest,
                    charging=charging,
                    battery=nxt.level,
                    sensors_on=dest not in seen,
                )
            )
            explored.add(dest)
    return steps


def _decode_moves(solution: Solution, model: MilpModel) -> tuple[Moves, dict[str, list[float]]]:
    ctx: WindowContext = model.context
    values = solution.values
    moves: Moves = {}
    batteries: dict[str, list[float]] = {}
    for robot in ctx.robots:
        r = robot.id
        moves[r] = []
        batteries[r] = [model.value(values, ctx.Bat(r, k)) for k in range(ctx.window + 1)]
        for k in range(1, ctx.window + 1):
            occupied = []
            for c in ctx.free:
                v = model.value(values, ctx.L(r, k, c))
                if INT_TOL < v < 1 - INT_TOL:
                    raise PlanIntegrityError(f"fractional position L={v:.6g} for {r} at {c}")
                if v >= 1 - INT_TOL:
                    occupied.append(c)
            if len(occupied) != 1:
                raise PlanIntegrityError(f"robot {r} occupies {len(occupied)} cells at t={ctx.t(k)}")
            charging = model.value(values, ctx.U(r, k)) > 0.5
            moves[r].append((occupied[0], charging))
    return moves, batteries


def extract_plan(solution: Solution, model: MilpModel, scenario: Scenario | None = None) -> Plan:
    """Decode a solved model into a Plan.

    Positions come from L, charging from U; predicted batteries are the
    replayed levels, checked against the solver's Bat values. Sensors are on
    where the destination was unexplored at the previous step.

    Raises:
        PlanIntegrityError: On missing values, fractional or multiple
            positions, or battery levels that do not replay.
    """
    ctx: WindowContext = model.context
    if scenario is not None and scenario is not ctx.scenario:
        logger.debug("extract_plan: scenario argument differs from the model's; using the model's")
    if solution.values is None:
        raise PlanIntegrityError(f"no solution values (status {solution.status.value})")
    moves, batteries = _decode_moves(solution, model)
    steps = replay_plan(ctx, moves, batteries)
    return Plan(
        t_start=ctx.t(0),
        window=ctx.window,
        steps=steps,
        status=solution.status.value,
        objective=solution.objective,
    )


def plan_from_assignment(solution: Solution, ctx: WindowContext) -> Plan:
    """Plan from an exhaustive-search assignment."""
    if solution.assignment is None:
        raise PlanIntegrityError("solution has no assignment")
    steps = replay_plan(ctx, solution.assignment)
    return Plan(
        t_start=ctx.t(0),
        window=ctx.window,
        steps=steps,
        status=solution.status.value,
        objective=solution.objective,
    )
