"""Branch-and-bound against exhaustive enumeration on instances small enough to enumerate."""

import numpy as np
import pytest

from app.config import Settings
from app.milp import VarKind, WindowState, build_model
from app.solver import (
    OracleGuardError,
    PlanIntegrityError,
    SolveStatus,
    extract_plan,
    plan_from_assignment,
    solve_bnb,
    solve_exhaustive,
)
from app.solver.base import FEAS_TOL

from tests.conftest import build_scenario

pytestmark = pytest.mark.oracle

INSTANCES = {
    "open_2x2_a": dict(width=2, height=2, window=2),
    "station_2x2_b": dict(width=2, height=2, window=2, variant="B", stations=[(2, 2)], battery=10.0),
    "station_2x2_a": dict(width=2, height=2, window=2, stations=[(1, 2)], battery=6.0),
    "corridor_two_robots": dict(
        width=3, height=1, window=1, robots=[("r1", (1, 1)), ("r2", (3, 1))], exclusive=True
    ),
    "frontier_3x3": dict(width=3, height=3, window=1, frontier=1.0),
    "low_battery_with_obstacle": dict(width=2, height=2, window=2, obstacles=[(2, 1)], battery=4.0),
    "rough_terrain_b": dict(width=3, height=1, window=2, variant="B", terrain={(2, 1): 3.0}),
}


def scenario_for(params: dict):
    params = dict(params)
    window = params.pop("window")
    return build_scenario(**params, window=max(window, 1)), window


def plan_objective(plan, scenario, explored) -> float:
    """Lexicographic objective recomputed from a plan's cells and final batteries."""
    cells = set(explored)
    for steps in plan.steps.values():
        cells.update(step.cell for step in steps)
    explore = sum(r.battery_capacity for r in scenario.robots) + 1
    return explore * len(cells) + sum(steps[-1].battery for steps in plan.steps.values())


class TestAgainstEnumeration:
    @pytest.mark.parametrize("name", sorted(INSTANCES))
    def test_objectives_match(self, name):
        scenario, window = scenario_for(INSTANCES[name])
        exact = solve_exhaustive(scenario, window)
        model = build_model(scenario, window)
        solved = solve_bnb(model)
        assert solved.status is SolveStatus.OPTIMAL
        assert solved.objective == pytest.approx(exact.objective, abs=1e-6)

    def test_three_by_three_four_step_window(self):
        scenario = build_scenario(3, 3, window=4)
        model = build_model(scenario, 4)
        assert model.n_cols <= Settings(_env_file=None).solver_bnb_max_columns
        exact = solve_exhaustive(scenario, 4)
        solved = solve_bnb(model)
        assert exact.objective == pytest.approx(587.0)
        assert solved.status is SolveStatus.OPTIMAL
        assert solved.objective == pytest.approx(exact.objective, abs=1e-6)

    @pytest.mark.parametrize("seed", range(3))
    @pytest.mark.parametrize("variant", ["A", "B"])
    def test_pruned_and_unpruned_agree(self, seed, variant):
        rng = np.random.default_rng(seed)
        cells = [(a, b) for a in range(1, 4) for b in range(1, 4)]
        start = cells[int(rng.integers(len(cells)))]
        station = cells[int(rng.integers(len(cells)))]
        window = int(rng.integers(1, 4))
        scenario = build_scenario(
            3,
            3,
            [("r1", start)],
            stations=[station],
            variant=variant,
            battery=float(rng.uniform(6.0, 30.0)),
            window=window,
        )
        pruned = solve_bnb(build_model(scenario, window, prune=True))
        full = solve_bnb(build_model(scenario, window, prune=False))
        assert pruned.status is full.status
        if pruned.status is SolveStatus.OPTIMAL:
            assert pruned.objective == pytest.approx(full.objective, abs=1e-6)

    def test_compact_and_pairwise_motion_agree(self):
        scenario = build_scenario(3, 1, window=2)
        compact = solve_bnb(build_model(scenario, 2, prune=True))
        pairwise = solve_bnb(build_model(scenario, 2, prune=False))
        assert compact.objective == pytest.approx(pairwise.objective, abs=1e-6)

    @pytest.mark.parametrize("prune,prefix", [(True, "move_"), (False, "jump_")])
    def test_teleport_is_infeasible(self, prune, prefix):
        model = build_model(build_scenario(3, 3), 1, prune=prune)
        ctx = model.context
        values = np.zeros(model.n_cols)
        values[model.col(ctx.L("r1", 0, (1, 1)))] = 1.0
        values[model.col(ctx.L("r1", 1, (3, 3)))] = 1.0
        assert any(name.startswith(prefix) for name in model.violations(values, FEAS_TOL))

    @pytest.mark.parametrize("variant", ["A", "B"])
    def test_relaxed_products_stay_exact(self, variant):
        scenario = build_scenario(2, 2, window=2, stations=[(2, 2)], battery=10.0, variant=variant)
        relaxed = build_model(scenario, 2, relax_linearization=True)
        solution = solve_bnb(relaxed)
        exact = solve_bnb(build_model(scenario, 2))
        assert solution.objective == pytest.approx(exact.objective, abs=1e-6)
        ctx = relaxed.context
        products = {VarKind.UPS: 0, VarKind.ALPHA: 0, VarKind.DELTA: 0}

        def value(var):
            return relaxed.value(solution.values, var)

        for var in relaxed.columns:
            k, r, c = var.t - ctx.t(0), var.robot, var.cell
            if var.kind is VarKind.UPS:
                expected = value(ctx.L(r, k, c)) * value(ctx.L(r, k + 1, var.dest))
            elif var.kind is VarKind.ALPHA:
                expected = value(ctx.E(k, c)) * value(ctx.L(r, k + 1, c))
            elif var.kind is VarKind.DELTA:
                expected = value(ctx.U(r, k)) * value(ctx.L(r, k, c))
            else:
                continue
            products[var.kind] += 1
            assert value(var) == pytest.approx(expected, abs=1e-6), var.name
        assert products[VarKind.UPS] > 0
        if variant == "A":
            assert products[VarKind.ALPHA] > 0 and products[VarKind.DELTA] == 0
        else:
            assert products[VarKind.DELTA] > 0 and products[VarKind.ALPHA] == 0

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", range(16))
    def test_random_sweep(self, seed):
        rng = np.random.default_rng(2024 + seed)
        two_robots = seed % 2 == 0
        width, height = (3, 3) if two_robots else (int(rng.integers(2, 4)), int(rng.integers(1, 4)))
        cells = [(a, b) for a in range(1, width + 1) for b in range(1, height + 1)]
        picked = rng.permutation(len(cells))
        starts = [cells[i] for i in picked[: 2 if two_robots else 1]]
        robots = [(f"r{i + 1}", cell) for i, cell in enumerate(starts)]
        rest = [cells[i] for i in picked[len(robots):]]
        obstacles = [rest.pop()] if len(rest) > 2 and rng.random() < 0.5 else []
        stations = [rest[int(rng.integers(len(rest)))]] if rest and rng.random() < 0.5 else []
        window = int(rng.integers(2, 4)) if two_robots else int(rng.integers(2, 5))
        scenario = build_scenario(
            width,
            height,
            robots,
            obstacles=obstacles,
            stations=stations,
            variant="A" if rng.random() < 0.5 else "B",
            battery=float(rng.uniform(3.0, 20.0)),
            exclusive=two_robots and rng.random() < 0.5,
            frontier=1.0 if rng.random() < 0.3 else 0.0,
            window=window,
        )
        exact = solve_exhaustive(scenario, window)
        solved = solve_bnb(build_model(scenario, window))
        if exact.status is SolveStatus.INFEASIBLE:
            assert solved.status is SolveStatus.INFEASIBLE
        else:
            assert solved.status is SolveStatus.OPTIMAL
            assert solved.objective == pytest.approx(exact.objective, abs=1e-6)


class TestExhaustive:
    def test_moves_to_the_unexplored_cell(self):
        scenario = build_scenario(2, 1, window=1)
        solution = solve_exhaustive(scenario, 1)
        assert solution.assignment == {"r1": [((2, 1), False)]}

    def test_zero_window(self):
        scenario = build_scenario(window=1)
        solution = solve_exhaustive(scenario, 0)
        assert solution.objective == pytest.approx(101 * 1 + 100.0)
        assert solve_bnb(build_model(scenario, 0)).objective == pytest.approx(solution.objective)

    def test_guard(self):
        scenario = build_scenario(robots=[("r1", (1, 1)), ("r2", (2, 2)), ("r3", (3, 3))], window=3)
        with pytest.raises(OracleGuardError, match="oracle refused"):
            solve_exhaustive(scenario, 3)

    def test_every_path_depletes(self):
        scenario = build_scenario(2, 1, battery=0.1, window=1)
        assert solve_exhaustive(scenario, 1).status is SolveStatus.INFEASIBLE

    def test_starts_from_given_state(self):
        scenario = build_scenario(3, 1, window=1)
        state = WindowState(
            positions={"r1": (2, 1)},
            batteries={"r1": 50.0},
            explored=frozenset({(1, 1), (2, 1)}),
            t_now=4,
        )
        solution = solve_exhaustive(scenario, 1, state)
        assert solution.assignment == {"r1": [((3, 1), False)]}


class TestPlans:
    def test_extracted_plan_replays_the_objective(self):
        scenario = build_scenario(2, 2, window=2, stations=[(1, 2)], battery=6.0)
        model = build_model(scenario, 2)
        plan = extract_plan(solve_bnb(model), model)
        assert plan.t_start == 0
        assert len(plan.steps["r1"]) == 3
        assert plan_objective(plan, scenario, {(1, 1)}) == pytest.approx(plan.objective, abs=1e-6)

    def test_assignment_plan(self):
        scenario = build_scenario(2, 1, window=1)
        solution = solve_exhaustive(scenario, 1)
        ctx = build_model(scenario, 1).context
        plan = plan_from_assignment(solution, ctx)
        step = plan.step("r1", 1)
        assert step.cell == (2, 1)
        assert step.sensors_on
        assert step.battery == pytest.approx(100 - 1.0 - 0.5 - 2.0 - 1.0)

    def test_sensors_off_on_explored_cell(self):
        scenario = build_scenario(2, 1, window=1)
        state = WindowState(
            positions={"r1": (1, 1)}, batteries={"r1": 100.0}, explored=frozenset({(1, 1), (2, 1)})
        )
        model = build_model(scenario, 1, state)
        plan = extract_plan(solve_bnb(model), model)
        assert not plan.step("r1", 1).sensors_on
        assert plan.step("r1", 1).battery == pytest.approx(99.5)

    def test_missing_values(self):
        model = build_model(build_scenario(2, 1, window=1), 1)
        solution = solve_bnb(model, node_limit=1)
        solution.values = None
        with pytest.raises(PlanIntegrityError, match="no solution values"):
            extract_plan(solution, model)

    def test_tampered_battery_fails_replay(self):
        model = build_model(build_scenario(2, 1, window=1), 1)
        solution = solve_bnb(model)
        solution.values[model.col(model.context.Bat("r1", 1))] += 0.25
        with pytest.raises(PlanIntegrityError, match="does not replay"):
            extract_plan(solution, model)

    def test_assignment_required(self):
        model = build_model(build_scenario(2, 1, window=1), 1)
        with pytest.raises(PlanIntegrityError):
            plan_from_assignment(solve_bnb(model), model.context)
