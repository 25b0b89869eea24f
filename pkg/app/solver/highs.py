"""HiGHS backend through ``scipy.optimize.milp`` for field-scale windows."""

import logging

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from app.milp.model import MilpModel
from app.solver.base import BaseSolver, Solution, SolveStats, SolveStatus

logger = logging.getLogger(__name__)

# scipy.optimize.milp status codes
_STATUS = {
    0: SolveStatus.OPTIMAL,
    1: SolveStatus.TIME_LIMIT,
    2: SolveStatus.INFEASIBLE,
    3: SolveStatus.UNBOUNDED,
    4: SolveStatus.NUMERICALLY_UNSTABLE,
}


class HighsSolver(BaseSolver):
    name = "highs"

    def optimize(self, model: MilpModel) -> Solution:
        lb, ub = model.bounds()
        options: dict = {"disp": False, "presolve": True}
        if self.time_limit_s is not None:
            options["time_limit"] = self.time_limit_s
        if self.node_limit is not None:
            options["node_limit"] = self.node_limit

        constraints = []
        if model.n_rows:
            lo, hi = model.row_bounds()
            constraints.append(LinearConstraint(model.matrix(), lo, hi))

        # milp minimizes
        res = milp(
            c=-model.objective_vector(),
            constraints=constraints,
            integrality=model.integrality().astype(int),
            bounds=Bounds(lb, ub),
            options=options,
        )
        status = _STATUS.get(res.status, SolveStatus.NUMERICALLY_UNSTABLE)
        stats = SolveStats(nodes=int(getattr(res, "mip_node_count", 0) or 0))
        if res.x is None:
            if status is SolveStatus.OPTIMAL:
                status = SolveStatus.NUMERICALLY_UNSTABLE
            logger.debug("HiGHS returned no point: %s", res.message)
            return Solution(status=status, stats=stats)
        values = np.clip(np.asarray(res.x, dtype=float), lb, ub)
        return Solution(status, float(-res.fun), values, stats)
