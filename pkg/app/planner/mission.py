"""Receding-horizon mission loop: plan a window, execute, react to events, replan."""

import logging
import math
from enum import Enum

from app.config import Settings, get_settings
from app.milp.builder import build_model
from app.milp.context import WindowContext
from app.models import (
    Cell,
    DynamicsVariant,
    Event,
    EventKind,
    GroundTruth,
    Plan,
    PlanStep,
    Scenario,
    SimTrace,
)
from app.planner.state import MissionState
from app.simulator.world import TraceBuilder, sense, step
from app.solver.factory import SolverFactory
from app.solver.plan import PlanIntegrityError, extract_plan, replay_plan

logger = logging.getLogger(__name__)

TERRAIN_MIN = 1.0
TERRAIN_MAX = 5.0


class Action(str, Enum):
    REPLAN = "replan"
    CONTINUE = "continue"
    TERMINATE = "terminate"


_PRIORITY = {Action.CONTINUE: 0, Action.REPLAN: 1, Action.TERMINATE: 2}


class MissionPlanner:
    """Runs a mission: plan_window -> simulator step -> handle_event, until done.

    Uses dependency injection for the solver factory so the loop can be
    tested against scripted solutions.
    """

    def __init__(
        self,
        scenario: Scenario,
        settings: Settings | None = None,
        solver_factory: SolverFactory | None = None,
    ) -> None:
        self.scenario = scenario
        self.settings = settings or get_settings()
        self.solver_factory = solver_factory or SolverFactory(self.settings)
        self.window_w = self.settings.planner_window_w or scenario.mission.window_w
        self.variant = DynamicsVariant(
            self.settings.planner_variant or scenario.mission.dynamics_variant
        )
        threshold = self.settings.planner_discrepancy_threshold
        self.threshold = 2 * scenario.energy.p_rx if threshold is None else threshold
        self.solve_times: list[float] = []
        self.plans: list[Plan] = []

    @property
    def solver_invocations(self) -> int:
        return len(self.solve_times)

    def initial_state(self) -> MissionState:
        return MissionState.initial(self.scenario)

    def unexplored(self, state: MissionState) -> set[Cell]:
        """Free cells of the known map that nobody has sensed yet."""
        grid = self.scenario.grid.with_obstacles(state.known_obstacles)
        return set(grid.free_cells()) - state.explored

    # ------------------------------------------------------------------
    # Planning
    # ------------------------------------------------------------------

    def plan_window(self, state: MissionState) -> Plan:
        """Solve the next min(W, T - t_now) steps from ``state``.

        Returns an empty plan carrying an ``area_complete`` or
        ``horizon_reached`` event when there is nothing left to plan, and a
        stay-in-place plan with a ``solver_fallback`` event when the solver
        returns no usable solution.
        """
        horizon = self.scenario.mission.horizon_t
        if not self.unexplored(state):
            return self._terminal_plan(state, EventKind.AREA_COMPLETE)
        window = min(self.window_w, horizon - state.t_now)
        if window <= 0:
            return self._terminal_plan(state, EventKind.HORIZON_REACHED)
        if not state.active_robots:
            return self.fallback_plan(state, window, "no active robots")

        model = build_model(
            self.scenario,
            window,
            state.window_state(),
            variant=self.variant,
            relax_exploration=self.settings.solver_relax_exploration,
            relax_linearization=self.settings.solver_relax_linearization,
        )
        solver = self.solver_factory.for_model(model)
        solution = solver.solve(model)
        self.solve_times.append(solution.stats.wall_time)

        if solution.values is None:
            logger.warning(
                "No plan at t=%d (%s); holding position", state.t_now, solution.status.value
            )
            return self.fallback_plan(state, window, solution.status.value)
        try:
            plan = extract_plan(solution, model)
        except PlanIntegrityError as e:
            logger.warning("Discarding plan at t=%d: %s", state.t_now, e)
            return self.fallback_plan(state, window, str(e))
        if solution.status.value != "optimal":
            logger.warning("Using incumbent at t=%d (%s)", state.t_now, solution.status.value)
        self.plans.append(plan)
        logger.info(
            "Planned t=%d..%d objective=%s", plan.t_start, plan.t_start + window, plan.objective
        )
        return plan

    def fallback_plan(self, state: MissionState, window: int, reason: str) -> Plan:
        """Every robot stays put with sensors off for ``window`` steps."""
        ctx = WindowContext(
            scenario=self.scenario,
            state=state.window_state(),
            window=window,
            variant=self.variant,
        )
        moves = {r.id: [(state.positions[r.id], False)] * window for r in ctx.robots}
        try:
            steps = replay_plan(ctx, moves)
        except PlanIntegrityError:
            # Battery cannot cover the hold; predict it unchanged.
            steps = {
                r: [
                    PlanStep(t=state.t_now + k, cell=state.positions[r], battery=state.batteries[r])
                    for k in range(window + 1)
                ]
                for r in state.positions
            }
        plan = Plan(
            t_start=state.t_now,
            window=window,
            steps=steps,
            status="fallback",
            fallback=True,
            events=[Event(kind=EventKind.SOLVER_FALLBACK, t=state.t_now, detail=reason)],
        )
        self.plans.append(plan)
        return plan

    def _terminal_plan(self, state: MissionState, kind: EventKind) -> Plan:
        return Plan(
            t_start=state.t_now,
            window=0,
            status=kind.value,
            events=[Event(kind=kind, t=state.t_now)],
        )

    # ------------------------------------------------------------------
    # Events
    # ------------------------------------------------------------------

    def handle_event(self, state: MissionState, event: Event) -> Action:
        """Fold ``event`` into ``state`` and decide what the loop does next."""
        if event.t > state.t_now:
            raise ValueError(f"event from the future: t={event.t} > {state.t_now}")
        kind = event.kind

        if kind is EventKind.OBSTACLE_DETECTED:
            if event.cell in state.known_obstacles:
                return Action.CONTINUE
            state.known_obstacles.add(event.cell)
            logger.info("Obstacle at %s reported by %s", event.cell, event.robot)
            return Action.REPLAN

        if kind is EventKind.BATTERY_DISCREPANCY:
            gap = abs(event.predicted - event.reported)
            if gap <= self.threshold:
                return Action.CONTINUE
            state.batteries[event.robot] = event.reported
            self._update_terrain(state, event)
            return Action.REPLAN

        if kind in (EventKind.TARGET_FOUND, EventKind.AREA_COMPLETE, EventKind.HORIZON_REACHED):
            logger.info("Mission ends at t=%d: %s", state.t_now, kind.value)
            return Action.TERMINATE

        if kind in (EventKind.PLAN_EXHAUSTED, EventKind.BATTERY_DEPLETED):
            return Action.REPLAN

        return Action.CONTINUE

    def _update_terrain(self, state: MissionState, event: Event) -> None:
        if event.previous is None or event.cell is None:
            return
        predicted_drain = event.previous - event.predicted
        reported_drain = event.previous - event.reported
        if predicted_drain <= 0:
            return
        current = state.terrain_estimates.get(
            event.cell, self.scenario.grid.terrain_factor(event.cell)
        )
        factor = min(max(current * reported_drain / predicted_drain, TERRAIN_MIN), TERRAIN_MAX)
        state.terrain_estimates[event.cell] = factor
        logger.info(
            "Battery gap for %s at %s (%.4g vs %.4g): terrain estimate %.3g",
            event.robot, event.cell, event.reported, event.predicted, factor,
        )

    def _handle_all(self, state: MissionState, events: list[Event]) -> Action:
        action = Action.CONTINUE
        for event in events:
            result = self.handle_event(state, event)
            if _PRIORITY[result] > _PRIORITY[action]:
                action = result
        return action

    # ------------------------------------------------------------------
    # Mission
    # ------------------------------------------------------------------

    def run_mission(self, truth: GroundTruth) -> SimTrace:
        """Run until the area is explored, a target is found, or the horizon ends.

        Steps:
        1. Sense from the start cells
        2. Plan a window when needed
        3. Execute one step against the ground truth
        4. Handle the step's events
        """
        scenario = self.scenario
        horizon = scenario.mission.horizon_t
        state = self.initial_state()
        trace = TraceBuilder(scenario, truth, mode=self.variant.value)

        # 1. Initial sensing
        initial: list[Event] = []
        for robot in scenario.robots:
            initial.extend(
                e for e in sense(state, robot.id, robot.start_cell, truth, 0)
                if not any(e.kind == o.kind and e.cell == o.cell for o in initial)
            )
        trace.start(state, initial)
        action = self._handle_all(state, initial)
        if action is Action.TERMINATE:
            return self._finish(trace, state)

        plan: Plan | None = None
        cursor = 0
        while True:
            # 2. Plan
            if plan is None or action is Action.REPLAN or cursor > plan.window:
                plan = self.plan_window(state)
                cursor = 1
                trace.add_events(plan.events)
                if self._handle_all(state, plan.events) is Action.TERMINATE:
                    break

            # 3. Execute
            steps = {r: plan.step(r, cursor) for r in state.active_robots}
            state, events, records = step(
                state,
                steps,
                truth,
                scenario,
                variant=self.variant,
                threshold=self.threshold,
                ledgers=trace.ledgers,
            )
            cursor += 1
            trace.add(state, events, records)

            # 4. Events
            action = self._handle_all(state, events)
            if action is Action.TERMINATE:
                break
            if state.t_now >= horizon:
                end = Event(kind=EventKind.HORIZON_REACHED, t=state.t_now)
                trace.add_events([end])
                break
            if not self.unexplored(state):
                end = Event(kind=EventKind.AREA_COMPLETE, t=state.t_now)
                trace.add_events([end])
                break
            if cursor > plan.window and action is Action.CONTINUE:
                exhausted = Event(kind=EventKind.PLAN_EXHAUSTED, t=state.t_now)
                trace.add_events([exhausted])
                action = self.handle_event(state, exhausted)

        return self._finish(trace, state)

    def _finish(self, trace: TraceBuilder, state: MissionState) -> SimTrace:
        result = trace.finish(state)
        result.solver_invocations = self.solver_invocations
        result.solve_times = list(self.solve_times)
        logger.info(
            "Mission finished at t=%d: coverage %d/%d, %d solves",
            result.mission_length,
            result.explored,
            result.explorable,
            result.solver_invocations,
        )
        return result


def replan_bound(events: int, horizon: int, window: int) -> int:
    """Upper bound on solver invocations for a mission with ``events`` events."""
    return events + math.ceil(horizon / window) + 1
