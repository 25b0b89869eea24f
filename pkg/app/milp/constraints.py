"""Column indexing and constraint emitters for one planning window.

Window steps are k = 0..W, with k = 0 the known current state. L, E and Bat
exist for every k; U and Delta for k >= 1; Ups and Alpha for k < W.
"""

from app.energy.battery import p_move
from app.milp.context import WindowContext, objective_weights
from app.milp.model import MilpModel, Sense
from app.models import Cell, DynamicsVariant


def index_columns(model: MilpModel, ctx: WindowContext) -> int:
    """Create every column of the window; returns the column count."""
    W = ctx.window
    cells = ctx.grid.cells()
    aux_integer = not ctx.relax_linearization

    for robot in ctx.robots:
        r = robot.id
        for k in range(W + 1):
            for c in cells:
                model.add_column(ctx.L(r, k, c), 0, 1, True)
    for k in range(W + 1):
        for c in cells:
            model.add_column(ctx.E(k, c), 0, 1, not ctx.relax_exploration)
    for robot in ctx.robots:
        r = robot.id
        for k in range(1, W + 1):
            model.add_column(ctx.U(r, k), 0, 1, True)
        for k in range(W + 1):
            model.add_column(ctx.Bat(r, k), 0, robot.battery_capacity, False)
        for k in range(W):
            for c, d in ctx.motion_pairs():
                model.add_column(ctx.Ups(r, k, c, d), 0, 1, aux_integer)
        if ctx.variant is DynamicsVariant.A:
            for k in range(W):
                for c in ctx.free:
                    model.add_column(ctx.Alpha(r, k, c), 0, 1, aux_integer)
        else:
            for k in range(1, W + 1):
                for c in ctx.free:
                    model.add_column(ctx.Delta(r, k, c), 0, 1, aux_integer)
    return model.n_cols


def emit_position_constraints(model: MilpModel, ctx: WindowContext) -> int:
    """One cell per robot per step; obstacles and the current position fixed."""
    rows = 0
    obstacles = ctx.grid.obstacles
    for robot in ctx.robots:
        r = robot.id
        start = ctx.state.positions[r]
        for c in ctx.grid.cells():
            model.fix(model.col(ctx.L(r, 0, c)), 1.0 if c == start else 0.0)
            if c in obstacles:
                for k in range(1, ctx.window + 1):
                    model.fix(model.col(ctx.L(r, k, c)), 0.0)
        for k in range(1, ctx.window + 1):
            model.add_row(
                {model.col(ctx.L(r, k, c)): 1.0 for c in ctx.free},
                Sense.EQ,
                1.0,
                f"pos_{r}_t{ctx.t(k)}",
            )
            rows += 1

    if ctx.scenario.mission.collision_exclusive:
        for k in range(1, ctx.window + 1):
            for c in ctx.free:
                model.add_row(
                    {model.col(ctx.L(robot.id, k, c)): 1.0 for robot in ctx.robots},
                    Sense.LE,
                    1.0,
                    f"excl_t{ctx.t(k)}_a{c[0]}_b{c[1]}",
                )
                rows += 1
    return rows


def emit_motion_constraints(
    model: MilpModel, ctx: WindowContext, form: str | None = None
) -> int:
    """Adjacency between consecutive steps.

    ``compact``: L(t+1, c') <= sum of L(t, c) over neighbors c of c'.
    ``pairwise``: L(t, c) + L(t+1, c') <= 1 for every non-adjacent pair.
    Defaults to compact for the pruned model and pairwise otherwise.
    """
    form = form or ("compact" if ctx.prune else "pairwise")
    if form not in ("compact", "pairwise"):
        raise ValueError(f"unknown motion form: {form}")
    rows = 0
    for robot in ctx.robots:
        r = robot.id
        for k in range(ctx.window):
            if form == "compact":
                for d in ctx.free:
                    coeffs = {model.col(ctx.L(r, k + 1, d)): 1.0}
                    for c in ctx.nbrs[d]:
                        coeffs[model.col(ctx.L(r, k, c))] = -1.0
                    model.add_row(coeffs, Sense.LE, 0.0, f"move_{r}_t{ctx.t(k)}_a{d[0]}_b{d[1]}")
                    rows += 1
            else:
                for c in ctx.free:
                    for d in ctx.free:
                        if d in ctx.nbrs[c]:
                            continue
                        model.add_row(
                            {model.col(ctx.L(r, k, c)): 1.0, model.col(ctx.L(r, k + 1, d)): 1.0},
                            Sense.LE,
                            1.0,
                            f"jump_{r}_t{ctx.t(k)}_a{c[0]}_b{c[1]}_a{d[0]}_b{d[1]}",
                        )
                        rows += 1
    return rows


def _product_rows(model: MilpModel, prod: int, x: int, y: int, name: str) -> int:
    """prod <= x, prod <= y, prod >= x + y - 1."""
    model.add_row({prod: 1.0, x: -1.0}, Sense.LE, 0.0, f"{name}_x")
    model.add_row({prod: 1.0, y: -1.0}, Sense.LE, 0.0, f"{name}_y")
    model.add_row({prod: 1.0, x: -1.0, y: -1.0}, Sense.GE, -1.0, f"{name}_xy")
    return 3


def emit_upsilon_linearization(model: MilpModel, ctx: WindowContext) -> int:
    """Ups(r,t,c,c') = L(r,t,c) * L(r,t+1,c')."""
    rows = 0
    for robot in ctx.robots:
        r = robot.id
        for k in range(ctx.window):
            for c, d in ctx.motion_pairs():
                var = ctx.Ups(r, k, c, d)
                rows += _product_rows(
                    model,
                    model.col(var),
                    model.col(ctx.L(r, k, c)),
                    model.col(ctx.L(r, k + 1, d)),
                    var.name,
                )
    return rows


def emit_flow_balance(model: MilpModel, ctx: WindowContext) -> int:
    """Transition flow: sum_c' Ups(c,c') = L(t,c) and sum_c Ups(c,c') = L(t+1,c').

    Holds at every integer point of the motion rows and keeps the relaxation
    from splitting L so that the move products (and the move energy) vanish.
    """
    rows = 0
    pairs = ctx.motion_pairs()
    for robot in ctx.robots:
        r = robot.id
        for k in range(ctx.window):
            outflow: dict[Cell, dict[int, float]] = {c: {} for c in ctx.free}
            inflow: dict[Cell, dict[int, float]] = {d: {} for d in ctx.free}
            for c, d in pairs:
                col = model.col(ctx.Ups(r, k, c, d))
                outflow[c][col] = 1.0
                inflow[d][col] = 1.0
            for c in ctx.free:
                outflow[c][model.col(ctx.L(r, k, c))] = -1.0
                name = f"flow_out_{r}_t{ctx.t(k)}_a{c[0]}_b{c[1]}"
                model.add_row(outflow[c], Sense.EQ, 0.0, name)
                inflow[c][model.col(ctx.L(r, k + 1, c))] = -1.0
                name = f"flow_in_{r}_t{ctx.t(k)}_a{c[0]}_b{c[1]}"
                model.add_row(inflow[c], Sense.EQ, 0.0, name)
                rows += 2
    return rows


def emit_alpha_linearization(model: MilpModel, ctx: WindowContext) -> int:
    """Alpha(r,t,c) = E(t,c) * L(r,t+1,c). Variant A only."""
    if ctx.variant is not DynamicsVariant.A:
        raise ValueError("alpha linearization belongs to variant A")
    rows = 0
    for robot in ctx.robots:
        r = robot.id
        for k in range(ctx.window):
            for c in ctx.free:
                var = ctx.Alpha(r, k, c)
                rows += _product_rows(
                    model,
                    model.col(var),
                    model.col(ctx.E(k, c)),
                    model.col(ctx.L(r, k + 1, c)),
                    var.name,
                )
    return rows


def emit_delta_linearization(model: MilpModel, ctx: WindowContext) -> int:
    """Delta(r,t,c) = U(r,t) * L(r,t,c). Variant B only."""
    if ctx.variant is not DynamicsVariant.B:
        raise ValueError("delta linearization belongs to variant B")
    rows = 0
    for robot in ctx.robots:
        r = robot.id
        for k in range(1, ctx.window + 1):
            for c in ctx.free:
                var = ctx.Delta(r, k, c)
                rows += _product_rows(
                    model,
                    model.col(var),
                    model.col(ctx.U(r, k)),
                    model.col(ctx.L(r, k, c)),
                    var.name,
                )
    return rows


def _move_terms(model: MilpModel, ctx: WindowContext, r: str, k: int) -> dict[int, float]:
    params = ctx.scenario.energy
    coeffs = {}
    for c, d in ctx.motion_pairs():
        if d in ctx.nbrs[c]:
            cost = p_move(params, ctx.grid, c, d)
            if cost:
                coeffs[model.col(ctx.Ups(r, k, c, d))] = cost
    return coeffs


def _fix_initial_battery(model: MilpModel, ctx: WindowContext) -> None:
    for robot in ctx.robots:
        model.fix(model.col(ctx.Bat(robot.id, 0)), ctx.state.batteries[robot.id])


def emit_battery_dynamics_a(model: MilpModel, ctx: WindowContext) -> int:
    """Bat(t+1) - Bat(t) + sum L(t+1)(P_TX + P_SEN) + sum Ups*P_move
    - sum Alpha(t)(P_TX + P_SEN) - U(t+1)(CR + P_RX) = -P_RX
    """
    params = ctx.scenario.energy
    cr = ctx.scenario.charge_rate
    _fix_initial_battery(model, ctx)
    rows = 0
    for robot in ctx.robots:
        r = robot.id
        for k in range(ctx.window):
            coeffs = _move_terms(model, ctx, r, k)
            coeffs[model.col(ctx.Bat(r, k + 1))] = 1.0
            coeffs[model.col(ctx.Bat(r, k))] = -1.0
            for c in ctx.free:
                sensing = ctx.p_tx[c] + params.p_sen
                coeffs[model.col(ctx.L(r, k + 1, c))] = sensing
                coeffs[model.col(ctx.Alpha(r, k, c))] = -sensing
            coeffs[model.col(ctx.U(r, k + 1))] = -(cr + params.p_rx)
            model.add_row(coeffs, Sense.EQ, -params.p_rx, f"bat_{r}_t{ctx.t(k + 1)}")
            rows += 1
    return rows


def emit_battery_dynamics_b(model: MilpModel, ctx: WindowContext) -> int:
    """Bat(t+1) = Bat(t) + (CR + P_RX + P_SEN)U(t+1) - P_RX - P_SEN
    - sum Ups*P_move + sum P_TX*Delta(t+1) - sum P_TX*L(t+1)
    """
    params = ctx.scenario.energy
    cr = ctx.scenario.charge_rate
    _fix_initial_battery(model, ctx)
    rows = 0
    for robot in ctx.robots:
        r = robot.id
        for k in range(ctx.window):
            coeffs = _move_terms(model, ctx, r, k)
            coeffs[model.col(ctx.Bat(r, k + 1))] = 1.0
            coeffs[model.col(ctx.Bat(r, k))] = -1.0
            coeffs[model.col(ctx.U(r, k + 1))] = -(cr + params.p_rx + params.p_sen)
            for c in ctx.free:
                coeffs[model.col(ctx.Delta(r, k + 1, c))] = -ctx.p_tx[c]
                coeffs[model.col(ctx.L(r, k + 1, c))] = ctx.p_tx[c]
            model.add_row(
                coeffs, Sense.EQ, -(params.p_rx + params.p_sen), f"bat_{r}_t{ctx.t(k + 1)}"
            )
            rows += 1
    return rows


def emit_exploration_constraints(model: MilpModel, ctx: WindowContext) -> int:
    """E is monotone, set by any visiting robot, and only set by a visit."""
    explored = ctx.state.explored
    free = set(ctx.free)
    for c in ctx.grid.cells():
        model.fix(model.col(ctx.E(0, c)), 1.0 if c in explored and c in free else 0.0)
        if c not in free:
            for k in range(1, ctx.window + 1):
                model.fix(model.col(ctx.E(k, c)), 0.0)

    rows = 0
    for k in range(ctx.window):
        for c in ctx.free:
            nxt, cur = model.col(ctx.E(k + 1, c)), model.col(ctx.E(k, c))
            tag = f"t{ctx.t(k + 1)}_a{c[0]}_b{c[1]}"
            model.add_row({nxt: 1.0, cur: -1.0}, Sense.GE, 0.0, f"mono_{tag}")
            rows += 1
            visits = {}
            for robot in ctx.robots:
                lcol = model.col(ctx.L(robot.id, k + 1, c))
                model.add_row({nxt: 1.0, lcol: -1.0}, Sense.GE, 0.0, f"seen_{robot.id}_{tag}")
                rows += 1
                visits[lcol] = -1.0
            model.add_row({nxt: 1.0, cur: -1.0, **visits}, Sense.LE, 0.0, f"only_{tag}")
            rows += 1
    return rows


def emit_charging_constraints(model: MilpModel, ctx: WindowContext) -> int:
    """Charging only on a station cell."""
    rows = 0
    for robot in ctx.robots:
        r = robot.id
        for k in range(1, ctx.window + 1):
            ucol = model.col(ctx.U(r, k))
            if not ctx.stations:
                model.fix(ucol, 0.0)
                continue
            coeffs = {ucol: 1.0}
            for s in ctx.stations:
                coeffs[model.col(ctx.L(r, k, s))] = -1.0
            model.add_row(coeffs, Sense.LE, 0.0, f"charge_{r}_t{ctx.t(k)}")
            rows += 1
    return rows


def emit_objective(model: MilpModel, ctx: WindowContext) -> dict[int, float]:
    """Maximize weighted coverage and final battery, minus frontier distance."""
    explore, battery, frontier = objective_weights(ctx)
    W = ctx.window
    model.objective.clear()
    for c in ctx.free:
        model.add_objective(model.col(ctx.E(W, c)), explore)
    for robot in ctx.robots:
        model.add_objective(model.col(ctx.Bat(robot.id, W)), battery)
        if frontier:
            for c in ctx.free:
                dist = ctx.frontier.get(c, 0)
                if dist:
                    model.add_objective(model.col(ctx.L(robot.id, W, c)), -frontier * dist)
    return dict(model.objective)
