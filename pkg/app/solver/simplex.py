"""Dense-tableau bounded-variable dual simplex for LP relaxations.

Every row gets a slack column: row i reads A_i x + s_i = b_i with s_i >= 0
for <=, s_i <= 0 for >= and s_i = 0 for equalities, so the slack basis is
always a valid start. Nonbasic columns sit at one of their bounds, on the
side their reduced cost prefers, which keeps the basis dual feasible; the
dual simplex then restores primal feasibility. Changing column bounds keeps
dual feasibility too, so branch-and-bound re-optimizes a parent's tableau
instead of starting over.

A column whose preferred bound is infinite starts at an artificial bound;
an optimum that still leans on one is reported unbounded. Leaving rows are
chosen by largest infeasibility, switching to Bland's rule (lowest index)
after a run of degenerate pivots.
"""

import logging
import time
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from app.milp.model import MilpModel, Sense
from app.solver.base import FEAS_TOL, Solution, SolveStats, SolveStatus

logger = logging.getLogger(__name__)

PIVOT_TOL = 1e-9
COST_TOL = 1e-9
ZERO_TOL = 1e-12
DEGENERATE_LIMIT = 1000
REFACTOR_EVERY = 100
ARTIFICIAL_BOUND = 1e7

_SENSE_CODE = {Sense.LE: -1, Sense.EQ: 0, Sense.GE: 1}


@dataclass
class LPData:
    """Dense arrays of a model, built once and shared by many LP solves."""

    c: np.ndarray
    A: np.ndarray
    sense: np.ndarray
    b: np.ndarray
    lb: np.ndarray
    ub: np.ndarray

    @classmethod
    def from_model(cls, model: MilpModel) -> "LPData":
        lb, ub = model.bounds()
        return cls(
            c=model.objective_vector(),
            A=model.matrix().toarray(),
            sense=np.array([_SENSE_CODE[r.sense] for r in model.rows], dtype=int),
            b=np.array([r.rhs for r in model.rows], dtype=float),
            lb=lb,
            ub=ub,
        )


@dataclass
class LPResult:
    status: SolveStatus
    x: np.ndarray | None = None
    objective: float | None = None
    iterations: int = 0


@dataclass
class Basis:
    """Enough of a tableau to rebuild it: basic columns and nonbasic sides."""

    basis: np.ndarray
    at_upper: np.ndarray


class BoundedTableau:
    """Working tableau T = B^-1 [A | I] over the columns free at construction.

    Columns fixed by the construction bounds are folded into the right-hand
    side for good; later bound changes apply to the other columns only. Costs
    are kept in minimization form (the model maximizes).
    """

    def __init__(self, data: LPData, lb: np.ndarray, ub: np.ndarray) -> None:
        self.data = data
        self.cols = np.flatnonzero(ub - lb > ZERO_TOL)
        self.fixed_lb = lb.astype(float)
        self.iterations = 0
        self.since_refactor = 0
        self.infeasible = False

        A = data.A[:, self.cols]
        b = data.b - data.A @ np.where(ub - lb > ZERO_TOL, 0.0, lb)
        live = np.any(np.abs(A) > ZERO_TOL, axis=1)
        dead_b, dead_s = b[~live], data.sense[~live]
        if np.any((dead_s <= 0) & (dead_b < -FEAS_TOL)) or np.any(
            (dead_s >= 0) & (dead_b > FEAS_TOL)
        ):
            self.infeasible = True
        A, b, sense = A[live], b[live], data.sense[live]
        m, n = A.shape
        self.m, self.n = m, n
        N = n + m

        self.A_full = np.hstack([A, np.eye(m)])
        self.b = b
        self.cost = np.zeros(N)
        self.cost[:n] = -data.c[self.cols]

        self.lo = np.empty(N)
        self.hi = np.empty(N)
        self.lo[:n], self.hi[:n] = lb[self.cols], ub[self.cols]
        self.lo[n:] = np.where(sense >= 0, -np.inf, 0.0)
        self.hi[n:] = np.where(sense <= 0, np.inf, 0.0)

        self.T = self.A_full.copy()
        self.basis = np.arange(n, N)
        self.is_basic = np.zeros(N, dtype=bool)
        self.is_basic[n:] = True
        self.at_upper = np.zeros(N, dtype=bool)
        self.artificial = np.zeros(N, dtype=bool)
        self.x = np.zeros(N)
        self.d = self.cost.copy()
        for j in range(n):
            self._place(j)
        self.x[n:] = b - A @ self.x[:n]

    # ------------------------------------------------------------------
    # Bounds and placement
    # ------------------------------------------------------------------

    def _place(self, j: int) -> float:
        """Put nonbasic ``j`` on its dual-feasible bound; returns the value change."""
        lo, hi = self.lo[j], self.hi[j]
        if hi - lo <= ZERO_TOL:
            upper = False
        elif self.d[j] > COST_TOL:
            upper = False
        elif self.d[j] < -COST_TOL:
            upper = True
        else:
            upper = bool(self.at_upper[j])
            if not np.isfinite(hi if upper else lo):
                upper = not upper
        bound = hi if upper else lo
        self.artificial[j] = not np.isfinite(bound)
        if self.artificial[j]:
            bound = ARTIFICIAL_BOUND if upper else -ARTIFICIAL_BOUND
        self.at_upper[j] = upper
        change = bound - self.x[j]
        self.x[j] = bound
        return change

    def set_bounds(self, lb: np.ndarray, ub: np.ndarray) -> bool:
        """Replace structural bounds (full-length arrays) and re-place nonbasics.

        Returns False, leaving the tableau untouched, if some lower bound
        exceeds its upper bound.
        """
        new_lo, new_hi = lb[self.cols], ub[self.cols]
        if np.any(new_lo > new_hi + FEAS_TOL):
            return False
        changed = np.flatnonzero((new_lo != self.lo[: self.n]) | (new_hi != self.hi[: self.n]))
        self.lo[: self.n], self.hi[: self.n] = new_lo, new_hi
        for j in changed:
            if self.is_basic[j]:
                continue
            change = self._place(int(j))
            if change:
                self.x[self.basis] -= change * self.T[:, j]
        return True

    # ------------------------------------------------------------------
    # Linear algebra
    # ------------------------------------------------------------------

    def pivot(self, r: int, q: int) -> None:
        """Make column ``q`` basic in row ``r``, updating T and d in place."""
        T = self.T
        T[r] /= T[r, q]
        row = T[r]
        cols = np.flatnonzero(np.abs(row) > ZERO_TOL)
        col = T[:, q].copy()
        col[r] = 0.0
        rows = np.flatnonzero(np.abs(col) > ZERO_TOL)
        if len(rows):
            T[np.ix_(rows, cols)] -= np.outer(col[rows], row[cols])
            T[rows, q] = 0.0
        dq = self.d[q]
        if dq:
            self.d[cols] -= dq * row[cols]
        self.d[q] = 0.0

    def refactor(self) -> bool:
        """Recompute T, basic values and reduced costs from the current basis."""
        self.since_refactor = 0
        if self.m == 0:
            self.d = self.cost.copy()
            return True
        try:
            lu = splu(sparse.csc_matrix(self.A_full[:, self.basis]))
        except RuntimeError:
            logger.debug("Singular basis on refactorization")
            return False
        self.T = lu.solve(self.A_full)
        nonbasic = ~self.is_basic
        self.x[self.basis] = lu.solve(self.b - self.A_full[:, nonbasic] @ self.x[nonbasic])
        self.d = self.cost - self.cost[self.basis] @ self.T
        self.d[self.basis] = 0.0
        return True

    # ------------------------------------------------------------------
    # Warm start
    # ------------------------------------------------------------------

    def snapshot(self) -> Basis:
        return Basis(self.basis.copy(), self.at_upper.copy())

    def restore(self, saved: Basis, lb: np.ndarray, ub: np.ndarray) -> bool:
        """Load a saved basis under new bounds and refactor.

        Returns False if the bounds contradict or the basis is singular; the
        tableau is unchanged on contradicting bounds and unusable on a
        singular basis.
        """
        if np.any(lb[self.cols] > ub[self.cols] + FEAS_TOL):
            return False
        self.basis = saved.basis.copy()
        self.is_basic[:] = False
        self.is_basic[self.basis] = True
        self.at_upper = saved.at_upper.copy()
        self.lo[: self.n], self.hi[: self.n] = lb[self.cols], ub[self.cols]
        for j in np.flatnonzero(~self.is_basic):
            upper = bool(self.at_upper[j])
            bound = self.hi[j] if upper else self.lo[j]
            self.artificial[j] = not np.isfinite(bound)
            if self.artificial[j]:
                bound = ARTIFICIAL_BOUND if upper else -ARTIFICIAL_BOUND
            self.x[j] = bound
        if not self.refactor():
            return False
        # The saved sides were dual feasible for the saved costs; re-check.
        for j in np.flatnonzero(~self.is_basic):
            change = self._place(int(j))
            if change:
                self.x[self.basis] -= change * self.T[:, j]
        return True

    # ------------------------------------------------------------------
    # Dual simplex
    # ------------------------------------------------------------------

    def solve(self, max_iterations: int | None = None) -> SolveStatus:
        """Dual simplex to optimality from the current dual-feasible basis."""
        if self.infeasible:
            return SolveStatus.INFEASIBLE
        limit = self.iterations + (max_iterations or 50 * (self.m + self.n) + 1000)
        degenerate = 0
        bland = False

        while True:
            if self.iterations >= limit:
                logger.warning("Simplex iteration limit reached after %d pivots", self.iterations)
                return SolveStatus.NUMERICALLY_UNSTABLE
            if self.since_refactor >= REFACTOR_EVERY and not self.refactor():
                return SolveStatus.NUMERICALLY_UNSTABLE

            xb = self.x[self.basis]
            below = self.lo[self.basis] - xb
            above = xb - self.hi[self.basis]
            viol = np.maximum(np.maximum(below, above), 0.0)
            candidates = np.flatnonzero(viol > FEAS_TOL)
            if not len(candidates):
                return self._finish()
            if bland:
                r = int(candidates[np.argmin(self.basis[candidates])])
            else:
                r = int(candidates[np.argmax(viol[candidates])])
            p = int(self.basis[r])
            to_lower = below[r] > 0
            target = self.lo[p] if to_lower else self.hi[p]

            alpha = self.T[r]
            movable = ~self.is_basic & (self.hi - self.lo > ZERO_TOL)
            if to_lower:
                eligible = movable & (
                    (~self.at_upper & (alpha < -PIVOT_TOL)) | (self.at_upper & (alpha > PIVOT_TOL))
                )
            else:
                eligible = movable & (
                    (~self.at_upper & (alpha > PIVOT_TOL)) | (self.at_upper & (alpha < -PIVOT_TOL))
                )
            entering = np.flatnonzero(eligible)
            if not len(entering):
                return SolveStatus.INFEASIBLE
            ratios = np.abs(self.d[entering]) / np.abs(alpha[entering])
            best = ratios.min()
            ties = entering[ratios <= best + COST_TOL]
            if bland:
                q = int(ties[0])
            else:
                q = int(ties[np.argmax(np.abs(alpha[ties]))])

            step = (self.x[p] - target) / alpha[q]
            self.x[self.basis] -= step * self.T[:, q]
            self.x[q] += step
            self.pivot(r, q)
            self.basis[r] = q
            self.is_basic[q] = True
            self.is_basic[p] = False
            self.at_upper[p] = not to_lower
            self.artificial[q] = False
            self.x[p] = target

            self.iterations += 1
            self.since_refactor += 1
            degenerate = degenerate + 1 if best <= COST_TOL else 0
            if not bland and degenerate >= DEGENERATE_LIMIT:
                logger.debug("Switching to Bland's rule after %d degenerate pivots", degenerate)
                bland = True

    def _finish(self) -> SolveStatus:
        leaning = ~self.is_basic & self.artificial & (np.abs(self.d) > COST_TOL)
        if leaning.any():
            return SolveStatus.UNBOUNDED
        return SolveStatus.OPTIMAL

    def values(self) -> np.ndarray:
        """Full-length column values clipped to the current bounds."""
        x = self.fixed_lb.copy()
        x[self.cols] = np.clip(self.x[: self.n], self.lo[: self.n], self.hi[: self.n])
        return x

    def result(self, status: SolveStatus) -> LPResult:
        if status is not SolveStatus.OPTIMAL:
            return LPResult(status, iterations=self.iterations)
        x = self.values()
        return LPResult(status, x, float(self.data.c @ x), self.iterations)


def solve_lp_arrays(
    data: LPData,
    lb: np.ndarray | None = None,
    ub: np.ndarray | None = None,
    max_iterations: int | None = None,
) -> LPResult:
    """Solve the LP relaxation of ``data`` under optional replacement bounds."""
    lb = data.lb if lb is None else lb
    ub = data.ub if ub is None else ub
    if np.any(lb > ub + FEAS_TOL):
        return LPResult(SolveStatus.INFEASIBLE)
    tableau = BoundedTableau(data, lb, ub)
    return tableau.result(tableau.solve(max_iterations))


def solve_lp(model: MilpModel, max_iterations: int | None = None) -> Solution:
    """LP relaxation of ``model`` (integrality ignored)."""
    start = time.perf_counter()
    result = solve_lp_arrays(LPData.from_model(model), max_iterations=max_iterations)
    return Solution(
        status=result.status,
        objective=result.objective,
        values=result.x,
        stats=SolveStats(
            lp_iterations=result.iterations,
            wall_time=time.perf_counter() - start,
            backend="simplex",
        ),
    )
