"""Per-step energy arithmetic and battery recursions.

The step functions here are the reference semantics for the battery rows of
the MILP: a decoded plan replayed through them must reproduce the solver's
battery levels.
"""

import math
from dataclasses import dataclass

from app.models import BatteryState, Cell, EnergyParams, GridMap
from app.scenario.grid import neighbors

# Rounding slack below zero / above capacity that is still treated as on-bound.
BOUND_TOL = 1e-9


class AdjacencyError(ValueError):
    """Raised for a move between non-adjacent cells."""


class BatteryBoundError(Exception):
    """A battery step left [0, capacity]."""

    def __init__(self, message: str, level: float) -> None:
        super().__init__(message)
        self.level = level


class BatteryDepleted(BatteryBoundError):
    pass


class BatteryOverflow(BatteryBoundError):
    pass


@dataclass(frozen=True)
class StepEnergy:
    """Energy drawn (and gained) on one step, by component."""

    move: float = 0.0
    tx: float = 0.0
    rx: float = 0.0
    sen: float = 0.0
    local: float = 0.0
    gain: float = 0.0

    @property
    def drain(self) -> float:
        return self.move + self.tx + self.rx + self.sen + self.local

    @property
    def net(self) -> float:
        return self.gain - self.drain


def p_move(params: EnergyParams, grid: GridMap, src: Cell, dst: Cell) -> float:
    """Movement energy from ``src`` to ``dst`` using the destination terrain.

    Raises:
        AdjacencyError: If ``dst`` is not a neighbor of ``src``.
    """
    if src == dst:
        return 0.0
    if dst not in neighbors(grid, src):
        raise AdjacencyError(f"cells not adjacent: {src} -> {dst}")
    base = params.p_move_base * grid.terrain_factor(dst)
    if src[0] != dst[0] and src[1] != dst[1]:
        return base * params.p_move_diag_factor
    return base


def transmit_power(params: EnergyParams, cell: Cell) -> float:
    """P_TX at ``cell``: table entry, else ``p_tx0 + kappa * d**gamma``."""
    if params.p_tx_table is not None:
        return params.p_tx_table[cell]
    d = math.dist(cell, params.base_station)
    return params.p_tx0 + params.kappa * d**params.gamma


def step_energy_a(
    charging: bool,
    move: tuple[Cell, Cell],
    explored: bool,
    params: EnergyParams,
    grid: GridMap,
    charge_rate: float = 0.0,
) -> StepEnergy:
    """Breakdown for variant A: sensors and TX only on unexplored destinations."""
    src, dst = move
    sensing = 0.0 if explored else 1.0
    return StepEnergy(
        move=p_move(params, grid, src, dst),
        tx=sensing * transmit_power(params, dst),
        rx=0.0 if charging else params.p_rx,
        sen=sensing * params.p_sen,
        gain=charge_rate if charging else 0.0,
    )


def step_energy_b(
    charging: bool,
    move: tuple[Cell, Cell],
    params: EnergyParams,
    grid: GridMap,
    charge_rate: float = 0.0,
) -> StepEnergy:
    """Breakdown for variant B: RX, sensing and TX paid on every non-charging step."""
    src, dst = move
    if charging:
        return StepEnergy(move=p_move(params, grid, src, dst), gain=charge_rate)
    return StepEnergy(
        move=p_move(params, grid, src, dst),
        tx=transmit_power(params, dst),
        rx=params.p_rx,
        sen=params.p_sen,
    )


def step_energy_soa(
    move: tuple[Cell, Cell], params: EnergyParams, grid: GridMap
) -> StepEnergy:
    """Breakdown for the always-on baseline: every sensor and local detection, no charging."""
    src, dst = move
    return StepEnergy(
        move=p_move(params, grid, src, dst),
        tx=transmit_power(params, dst),
        rx=params.p_rx,
        sen=params.p_sen,
        local=params.p_local,
    )


def apply_step(state: BatteryState, energy: StepEnergy, clamp: bool = True) -> BatteryState:
    """Apply a step's net energy to ``state``.

    With ``clamp`` the level saturates at capacity (simulation); without it an
    overflow raises, matching the planner's equality-plus-bounds dynamics.

    Raises:
        BatteryDepleted: The level would drop below zero.
        BatteryOverflow: The level would exceed capacity and ``clamp`` is off.
    """
    level = state.level + energy.net
    if level < -BOUND_TOL:
        raise BatteryDepleted(f"battery depleted ({level:.6g})", level)
    if level > state.capacity + BOUND_TOL and not clamp:
        raise BatteryOverflow(f"battery above capacity ({level:.6g})", level)
    level = min(max(level, 0.0), state.capacity)
    return BatteryState(level=level, capacity=state.capacity)


def battery_step_a(
    state: BatteryState,
    charging: bool,
    move: tuple[Cell, Cell],
    explored: bool,
    params: EnergyParams,
    grid: GridMap,
    charge_rate: float = 0.0,
    clamp: bool = True,
) -> BatteryState:
    """One variant-A step.

    level' = level + CR*u - P_RX*(1-u) - P_move - (1-e)*(P_SEN + P_TX(to))

    Args:
        state: Battery before the step.
        charging: Charging indicator u.
        move: (from, to) cells; must be adjacent.
        explored: Whether the destination was explored before this step (e).
        params: Energy parameters.
        grid: Grid supplying terrain factors.
        charge_rate: CR of the station the robot occupies.
        clamp: Saturate at capacity instead of raising.
    """
    energy = step_energy_a(charging, move, explored, params, grid, charge_rate)
    return apply_step(state, energy, clamp)


def battery_step_b(
    state: BatteryState,
    charging: bool,
    move: tuple[Cell, Cell],
    params: EnergyParams,
    grid: GridMap,
    charge_rate: float = 0.0,
    clamp: bool = True,
) -> BatteryState:
    """One variant-B step.

    level' = level + (CR + P_RX + P_SEN)*u - P_RX - P_SEN - P_move + P_TX(to)*u - P_TX(to)
    """
    energy = step_energy_b(charging, move, params, grid, charge_rate)
    return apply_step(state, energy, clamp)


def battery_step_soa(
    state: BatteryState, move: tuple[Cell, Cell], params: EnergyParams, grid: GridMap
) -> BatteryState:
    return apply_step(state, step_energy_soa(move, params, grid))
