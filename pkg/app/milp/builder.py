"""Composes the emitters into a solver-ready model."""

import logging

from app.milp.constraints import (
    emit_alpha_linearization,
    emit_battery_dynamics_a,
    emit_battery_dynamics_b,
    emit_charging_constraints,
    emit_delta_linearization,
    emit_exploration_constraints,
    emit_flow_balance,
    emit_motion_constraints,
    emit_objective,
    emit_position_constraints,
    emit_upsilon_linearization,
    index_columns,
)
from app.milp.context import WindowContext, WindowState
from app.milp.model import MilpModel
from app.models import DynamicsVariant, Scenario

logger = logging.getLogger(__name__)


def build_model(
    scenario: Scenario,
    window: int,
    state: WindowState | None = None,
    *,
    variant: DynamicsVariant | str | None = None,
    prune: bool = True,
    relax_exploration: bool = False,
    relax_linearization: bool = False,
) -> MilpModel:
    """Build the MILP for ``window`` steps from ``state``.

    Args:
        scenario: The scenario.
        window: Number of steps W (0 gives a model without decisions).
        state: Window start; defaults to the scenario's initial state.
        variant: Battery dynamics; defaults to the scenario's.
        prune: Product columns for adjacent pairs only, with compact motion rows.
            Off gives all pairs with pairwise non-adjacency rows.
        relax_exploration: Declare E continuous.
        relax_linearization: Declare Ups/Alpha/Delta continuous.

    Returns:
        The model; ``model.context`` holds the WindowContext used to decode it.
    """
    ctx = WindowContext(
        scenario=scenario,
        state=state or WindowState.initial(scenario),
        window=window,
        variant=DynamicsVariant(variant) if variant is not None else None,
        prune=prune,
        relax_exploration=relax_exploration,
        relax_linearization=relax_linearization,
    )
    model = MilpModel(context=ctx)

    # 1. Columns
    index_columns(model, ctx)

    # 2. Motion
    emit_position_constraints(model, ctx)
    emit_motion_constraints(model, ctx)
    emit_upsilon_linearization(model, ctx)
    emit_flow_balance(model, ctx)

    # 3. Battery dynamics
    if ctx.variant is DynamicsVariant.A:
        emit_alpha_linearization(model, ctx)
        emit_battery_dynamics_a(model, ctx)
    else:
        emit_delta_linearization(model, ctx)
        emit_battery_dynamics_b(model, ctx)

    # 4. Exploration, charging, objective
    emit_exploration_constraints(model, ctx)
    emit_charging_constraints(model, ctx)
    emit_objective(model, ctx)

    stats = model.stats()
    logger.info(
        "Built model t=%d W=%d variant %s: %d columns, %d rows, %d binaries",
        ctx.state.t_now,
        window,
        ctx.variant.value,
        stats["columns"],
        stats["rows"],
        stats["binaries"],
    )
    return model
