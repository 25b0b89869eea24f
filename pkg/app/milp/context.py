"""Planning-window state and the derived data every emitter reads."""

from dataclasses import dataclass, field

from app.energy.battery import transmit_power
from app.models import Cell, DynamicsVariant, GridMap, RobotSpec, Scenario
from app.milp.model import VarIndex, VarKind
from app.scenario.grid import frontier_distances, neighbor_map


@dataclass
class WindowState:
    """What the planner knows at the start of a window."""

    positions: dict[str, Cell]
    batteries: dict[str, float]
    explored: frozenset[Cell]
    t_now: int = 0
    known_obstacles: frozenset[Cell] = frozenset()
    terrain: dict[Cell, float] = field(default_factory=dict)
    active: tuple[str, ...] | None = None

    @classmethod
    def initial(cls, scenario: Scenario) -> "WindowState":
        """Robots at their start cells, which count as sensed."""
        return cls(
            positions={r.id: r.start_cell for r in scenario.robots},
            batteries={r.id: r.initial_battery for r in scenario.robots},
            explored=frozenset(r.start_cell for r in scenario.robots),
        )


@dataclass
class WindowContext:
    """Scenario, state and window length, plus cached per-cell data."""

    scenario: Scenario
    state: WindowState
    window: int
    variant: DynamicsVariant | None = None
    prune: bool = True
    relax_exploration: bool = False
    relax_linearization: bool = False

    grid: GridMap = field(init=False)
    robots: list[RobotSpec] = field(init=False)
    free: list[Cell] = field(init=False)
    nbrs: dict[Cell, frozenset[Cell]] = field(init=False)
    stations: list[Cell] = field(init=False)
    p_tx: dict[Cell, float] = field(init=False)
    frontier: dict[Cell, int] = field(init=False)

    def __post_init__(self) -> None:
        if self.window < 0:
            raise ValueError("window must be >= 0")
        if self.variant is None:
            self.variant = self.scenario.mission.dynamics_variant
        self.variant = DynamicsVariant(self.variant)
        self.grid = self.scenario.grid.with_obstacles(self.state.known_obstacles)
        if self.state.terrain:
            self.grid = self.grid.with_terrain(self.state.terrain)
        active = self.state.active
        self.robots = [r for r in self.scenario.robots if active is None or r.id in active]
        for robot in self.robots:
            pos = self.state.positions[robot.id]
            if not self.grid.is_free(pos):
                raise ValueError(f"state inconsistent: robot {robot.id} on blocked cell {pos}")
            level = self.state.batteries[robot.id]
            if not 0 <= level <= robot.battery_capacity:
                raise ValueError(f"state inconsistent: robot {robot.id} battery {level}")
        self.free = self.grid.free_cells()
        self.nbrs = neighbor_map(self.grid)
        self.stations = sorted(c for c in self.scenario.station_cells if self.grid.is_free(c))
        self.p_tx = {c: transmit_power(self.scenario.energy, c) for c in self.free}
        if self.scenario.mission.objective_weights.frontier > 0:
            unexplored = [c for c in self.free if c not in self.state.explored]
            self.frontier = frontier_distances(self.grid, unexplored)
        else:
            self.frontier = {}

    # Absolute mission step of window step k.
    def t(self, k: int) -> int:
        return self.state.t_now + k

    def L(self, r: str, k: int, c: Cell) -> VarIndex:
        return VarIndex(VarKind.L, self.t(k), r, c)

    def E(self, k: int, c: Cell) -> VarIndex:
        return VarIndex(VarKind.E, self.t(k), None, c)

    def U(self, r: str, k: int) -> VarIndex:
        return VarIndex(VarKind.U, self.t(k), r)

    def Bat(self, r: str, k: int) -> VarIndex:
        return VarIndex(VarKind.BAT, self.t(k), r)

    def Ups(self, r: str, k: int, c: Cell, d: Cell) -> VarIndex:
        return VarIndex(VarKind.UPS, self.t(k), r, c, d)

    def Alpha(self, r: str, k: int, c: Cell) -> VarIndex:
        return VarIndex(VarKind.ALPHA, self.t(k), r, c)

    def Delta(self, r: str, k: int, c: Cell) -> VarIndex:
        return VarIndex(VarKind.DELTA, self.t(k), r, c)

    def motion_pairs(self) -> list[tuple[Cell, Cell]]:
        """(from, to) pairs that get a product column: adjacent only when pruned."""
        if self.prune:
            return [(c, d) for c in self.free for d in sorted(self.nbrs[c])]
        return [(c, d) for c in self.free for d in self.free]


def objective_weights(ctx: WindowContext) -> tuple[float, float, float]:
    """Resolved (explore, battery, frontier) weights.

    The default exploration weight exceeds the largest possible swing of the
    battery and frontier terms, so coverage is maximized first.
    """
    w = ctx.scenario.mission.objective_weights
    reach = max(ctx.frontier.values(), default=0)
    explore = w.explore
    if explore is None:
        explore = sum(r.battery_capacity * w.battery + reach * w.frontier for r in ctx.robots) + 1
    return float(explore), float(w.battery), float(w.frontier)
