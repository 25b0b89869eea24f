"""Branch-and-bound over the simplex LP relaxation.

All node LPs share one bounded tableau. A child is re-optimized by the dual
simplex from its parent's optimal basis after the branching bound changes;
a node popped later from the open list gets its own saved basis back by
refactorization.
"""

import heapq
import itertools
import logging
import math
import time
from dataclasses import dataclass

import numpy as np

from app.milp.model import MilpModel
from app.solver.base import (
    INT_TOL,
    OBJ_TOL,
    BaseSolver,
    Solution,
    SolveStats,
    SolveStatus,
)
from app.solver.simplex import Basis, BoundedTableau, LPData

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class _Node:
    bound: float
    depth: int
    lb: np.ndarray
    ub: np.ndarray
    x: np.ndarray
    basis: Basis


def _branch_column(x: np.ndarray, integer: np.ndarray) -> int | None:
    """Most fractional integer column; the lowest id wins ties."""
    frac = np.abs(x - np.round(x))
    frac[~integer] = 0.0
    frac[frac <= INT_TOL] = 0.0
    if not frac.any():
        return None
    score = np.minimum(x - np.floor(x), np.ceil(x) - x)
    score[frac == 0.0] = -1.0
    # Round so that numerically equal fractions tie on the lowest id.
    return int(np.argmax(np.round(score, 9)))


class _Relaxations:
    """The shared tableau plus bookkeeping of which node's basis it holds."""

    def __init__(self, data: LPData, stats: SolveStats) -> None:
        self.data = data
        self.stats = stats
        self.tableau = BoundedTableau(data, data.lb, data.ub)
        self.loaded: _Node | None = None

    def _solve(self, lb: np.ndarray, ub: np.ndarray) -> tuple[SolveStatus, np.ndarray | None]:
        self.stats.nodes += 1
        self.loaded = None
        before = self.tableau.iterations
        if not self.tableau.set_bounds(lb, ub):
            return SolveStatus.INFEASIBLE, None
        status = self.tableau.solve()
        self.stats.lp_iterations += self.tableau.iterations - before
        if status is SolveStatus.NUMERICALLY_UNSTABLE:
            self.tableau = BoundedTableau(self.data, self.data.lb, self.data.ub)
        if status is SolveStatus.OPTIMAL:
            return status, self.tableau.values()
        return status, None

    def root(self) -> tuple[SolveStatus, _Node | None]:
        status, x = self._solve(self.data.lb, self.data.ub)
        if x is None:
            return status, None
        lb, ub = self.data.lb.copy(), self.data.ub.copy()
        node = _Node(float(self.data.c @ x), 0, lb, ub, x, self.tableau.snapshot())
        self.loaded = node
        return status, node

    def load(self, node: _Node) -> None:
        """Put ``node``'s optimal basis back into the tableau."""
        if self.loaded is node:
            return
        if not self.tableau.restore(node.basis, node.lb, node.ub):
            logger.debug("Rebuilding tableau after a singular restore")
            self.tableau = BoundedTableau(self.data, self.data.lb, self.data.ub)
            self.tableau.set_bounds(node.lb, node.ub)
            self.tableau.solve()
        self.loaded = node

    def child(
        self, parent: _Node, lb: np.ndarray, ub: np.ndarray
    ) -> tuple[SolveStatus, _Node | None]:
        status, x = self._solve(lb, ub)
        if x is None:
            return status, None
        node = _Node(float(self.data.c @ x), parent.depth + 1, lb, ub, x, self.tableau.snapshot())
        self.loaded = node
        return status, node


def solve_bnb(
    model: MilpModel,
    time_limit_s: float | None = None,
    node_limit: int | None = None,
) -> Solution:
    """Maximize ``model`` with integrality.

    Dives depth-first (rounding-side child first) until a first incumbent is
    found, then selects the open node with the best bound. Branches on the
    most fractional integer column.

    Returns:
        OPTIMAL with the proven optimum, TIME_LIMIT with the incumbent (or no
        values) when a limit stops the search, INFEASIBLE, or the root LP
        status if the relaxation is unbounded or numerically unstable.
    """
    start = time.perf_counter()
    data = LPData.from_model(model)
    integer = model.integrality()
    stats = SolveStats(backend="bnb")

    def out_of_budget() -> bool:
        if node_limit is not None and stats.nodes >= node_limit:
            return True
        return time_limit_s is not None and time.perf_counter() - start >= time_limit_s

    if np.any(data.lb > data.ub):
        return Solution(status=SolveStatus.INFEASIBLE, stats=stats)
    lps = _Relaxations(data, stats)
    status, root = lps.root()
    if root is None:
        stats.wall_time = time.perf_counter() - start
        return Solution(status=status, stats=stats)

    incumbent: np.ndarray | None = None
    incumbent_obj = -math.inf
    counter = itertools.count()
    heap: list[tuple[float, int, _Node]] = []
    dive: list[_Node] = [root]
    limited = False

    while dive or heap:
        if dive:
            node = dive.pop()
        else:
            _, _, node = heapq.heappop(heap)
        if node.bound <= incumbent_obj + OBJ_TOL:
            continue

        j = _branch_column(node.x, integer)
        if j is None:
            incumbent = node.x.copy()
            incumbent_obj = node.bound
            logger.debug("Incumbent %.6f at node %d", incumbent_obj, stats.nodes)
            if dive:
                for pending in dive:
                    heapq.heappush(heap, (-pending.bound, next(counter), pending))
                dive = []
            continue

        if out_of_budget():
            limited = True
            break

        value = node.x[j]
        down_ub = node.ub.copy()
        down_ub[j] = math.floor(value)
        up_lb = node.lb.copy()
        up_lb[j] = math.ceil(value)
        sides = [(node.lb, down_ub), (up_lb, node.ub)]
        if incumbent is None and value - math.floor(value) < 0.5:
            # The child solved last keeps its basis loaded and is dived first.
            sides.reverse()

        lps.load(node)
        children = []
        for lb, ub in sides:
            status, child = lps.child(node, lb, ub)
            if child is not None and child.bound > incumbent_obj + OBJ_TOL:
                children.append(child)
            elif status is SolveStatus.NUMERICALLY_UNSTABLE:
                logger.warning("Pruning numerically unstable node at depth %d", node.depth + 1)

        if incumbent is None:
            dive.extend(children)
        else:
            for child in children:
                heapq.heappush(heap, (-child.bound, next(counter), child))

    stats.wall_time = time.perf_counter() - start
    if limited:
        logger.warning("Branch-and-bound stopped at limit after %d nodes", stats.nodes)
        if incumbent is None:
            return Solution(status=SolveStatus.TIME_LIMIT, stats=stats)
        return Solution(SolveStatus.TIME_LIMIT, incumbent_obj, incumbent, stats)
    if incumbent is None:
        return Solution(status=SolveStatus.INFEASIBLE, stats=stats)
    return Solution(SolveStatus.OPTIMAL, incumbent_obj, incumbent, stats)


class BranchAndBoundSolver(BaseSolver):
    name = "bnb"

    def optimize(self, model: MilpModel) -> Solution:
        return solve_bnb(model, self.time_limit_s, self.node_limit)
