"""MILP model of one planning window."""

from app.milp.builder import build_model
from app.milp.context import WindowContext, WindowState, objective_weights
from app.milp.model import MilpModel, Row, Sense, VarIndex, VarKind

__all__ = [
    "MilpModel",
    "Row",
    "Sense",
    "VarIndex",
    "VarKind",
    "WindowContext",
    "WindowState",
    "build_model",
    "objective_weights",
]
