"""Solution types, tolerances and the solver template."""

import logging
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np

from app.milp.model import MilpModel

logger = logging.getLogger(__name__)

FEAS_TOL = 1e-7
INT_TOL = 1e-7
OBJ_TOL = 1e-6


class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    TIME_LIMIT = "time_limit"
    NUMERICALLY_UNSTABLE = "numerically_unstable"


@dataclass
class SolveStats:
    nodes: int = 0
    lp_iterations: int = 0
    wall_time: float = 0.0
    backend: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "nodes": self.nodes,
            "lp_iterations": self.lp_iterations,
            "wall_time": self.wall_time,
            "backend": self.backend,
        }


@dataclass
class Solution:
    """Result of a solve. ``values`` is indexed by column id; None without a solution."""

    status: SolveStatus
    objective: float | None = None
    values: np.ndarray | None = None
    stats: SolveStats = field(default_factory=SolveStats)
    assignment: dict[str, list[tuple[tuple[int, int], bool]]] | None = None

    @property
    def has_values(self) -> bool:
        return self.values is not None or self.assignment is not None


def round_integers(model: MilpModel, values: np.ndarray) -> np.ndarray:
    out = values.copy()
    mask = model.integrality()
    out[mask] = np.round(out[mask])
    return out


class BaseSolver(ABC):
    """Abstract base class for MILP backends.

    Uses the Template Method pattern: solve() times the run, delegates to
    optimize(), then rounds and checks the returned point.
    """

    name = "base"

    def __init__(self, time_limit_s: float | None = None, node_limit: int | None = None):
        self.time_limit_s = time_limit_s
        self.node_limit = node_limit

    def solve(self, model: MilpModel) -> Solution:
        """Template method: optimize -> round -> verify."""
        start = time.perf_counter()
        solution = self.optimize(model)
        if solution.values is not None:
            solution.values = round_integers(model, solution.values)
            solution.objective = model.objective_value(solution.values)
            bad = model.violations(solution.values, FEAS_TOL * 100)
            if bad:
                logger.warning("%s solution violates %d rows, e.g. %s", self.name, len(bad), bad[:3])
        solution.stats.wall_time = time.perf_counter() - start
        solution.stats.backend = self.name
        logger.info(
            "%s: %s objective=%s nodes=%d in %.3fs",
            self.name,
            solution.status.value,
            None if solution.objective is None else round(solution.objective, 6),
            solution.stats.nodes,
            solution.stats.wall_time,
        )
        return solution

    @abstractmethod
    def optimize(self, model: MilpModel) -> Solution:
        """Solve ``model``; values may be unrounded."""
        ...
