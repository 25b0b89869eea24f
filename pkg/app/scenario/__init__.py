"""Scenario definition: grid adjacency and scenario files."""

from app.scenario.grid import GridError, frontier_distances, neighbors, reachable_cells
from app.scenario.loader import ScenarioError, load_scenario, save_scenario

__all__ = [
    "GridError",
    "ScenarioError",
    "frontier_distances",
    "load_scenario",
    "neighbors",
    "reachable_cells",
    "save_scenario",
]
