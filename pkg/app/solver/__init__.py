"""MILP solvers, the exhaustive oracle and plan extraction."""

from app.solver.base import (
    FEAS_TOL,
    INT_TOL,
    OBJ_TOL,
    BaseSolver,
    Solution,
    SolveStats,
    SolveStatus,
)
from app.solver.bnb import BranchAndBoundSolver, solve_bnb
from app.solver.exhaustive import OracleGuardError, solve_exhaustive
from app.solver.factory import SolverFactory, create_solver, solver_for_model
from app.solver.highs import HighsSolver
from app.solver.plan import PlanIntegrityError, extract_plan, plan_from_assignment
from app.solver.simplex import solve_lp

__all__ = [
    "FEAS_TOL",
    "INT_TOL",
    "OBJ_TOL",
    "BaseSolver",
    "BranchAndBoundSolver",
    "HighsSolver",
    "OracleGuardError",
    "PlanIntegrityError",
    "Solution",
    "SolveStats",
    "SolveStatus",
    "SolverFactory",
    "create_solver",
    "extract_plan",
    "plan_from_assignment",
    "solve_bnb",
    "solve_exhaustive",
    "solve_lp",
    "solver_for_model",
]
