"""Solver factory - picks the MILP backend for a model."""

from app.config import Settings, get_settings
from app.milp.model import MilpModel
from app.solver.base import BaseSolver
from app.solver.bnb import BranchAndBoundSolver
from app.solver.highs import HighsSolver

_SOLVER_REGISTRY: dict[str, type[BaseSolver]] = {
    BranchAndBoundSolver.name: BranchAndBoundSolver,
    HighsSolver.name: HighsSolver,
}


def register_solver(name: str, solver_class: type[BaseSolver]) -> None:
    """Register a new backend. Allows extension without modifying this module."""
    _SOLVER_REGISTRY[name] = solver_class


def create_solver(name: str, settings: Settings | None = None) -> BaseSolver:
    """Create a solver instance configured from settings.

    Args:
        name: Registered backend name.
        settings: Source of time and node limits (defaults to the singleton).

    Raises:
        ValueError: If no solver is registered under ``name``.
    """
    settings = settings or get_settings()
    solver_class = _SOLVER_REGISTRY.get(name)
    if solver_class is None:
        raise ValueError(f"No solver registered under: {name}")
    return solver_class(
        time_limit_s=settings.solver_time_limit_s,
        node_limit=settings.solver_node_limit,
    )


def get_registered_solvers() -> list[str]:
    return list(_SOLVER_REGISTRY.keys())


def solver_for_model(model: MilpModel, settings: Settings | None = None) -> BaseSolver:
    """Resolve ``solver_backend``; ``auto`` uses bnb up to ``solver_bnb_max_columns`` columns."""
    settings = settings or get_settings()
    name = settings.solver_backend
    if name == "auto":
        name = (
            BranchAndBoundSolver.name
            if model.n_cols <= settings.solver_bnb_max_columns
            else HighsSolver.name
        )
    return create_solver(name, settings)


class SolverFactory:
    """Class-based wrapper for solver selection (used by the planner/DI)."""

    def __init__(self, settings: Settings | None = None) -> None:
        self.settings = settings

    def for_model(self, model: MilpModel) -> BaseSolver:
        return solver_for_model(model, self.settings)

    @staticmethod
    def register(name: str, solver_class: type[BaseSolver]) -> None:
        register_solver(name, solver_class)
