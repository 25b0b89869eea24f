"""Tests for grid adjacency and scenario files."""

import json

import pytest

from app.models import GridMap
from app.scenario.grid import (
    GridError,
    frontier_distances,
    grid_graph,
    is_adjacent,
    neighbors,
    reachable_cells,
)
from app.scenario.loader import (
    ScenarioError,
    load_scenario,
    read_document,
    save_scenario,
    scenario_from_document,
    to_document,
)

from tests.conftest import SCENARIOS


class TestNeighbors:
    def test_interior_cell(self):
        assert len(neighbors(GridMap(width_a=3, height_b=3), (2, 2))) == 9

    def test_corner_cell(self):
        assert neighbors(GridMap(width_a=3, height_b=3), (1, 1)) == {(1, 1), (1, 2), (2, 1), (2, 2)}

    def test_interior_with_three_obstacles(self):
        grid = GridMap(width_a=3, height_b=3, obstacles=frozenset({(1, 1), (2, 1), (3, 1)}))
        assert len(neighbors(grid, (2, 2))) == 6

    def test_von_neumann(self):
        grid = GridMap(width_a=3, height_b=3, connectivity=4)
        assert neighbors(grid, (2, 2)) == {(2, 2), (1, 2), (3, 2), (2, 1), (2, 3)}

    def test_out_of_bounds(self):
        with pytest.raises(GridError, match="out of bounds"):
            neighbors(GridMap(width_a=3, height_b=3), (0, 1))

    def test_adjacency_is_symmetric(self):
        grid = GridMap(width_a=4, height_b=3, obstacles=frozenset({(2, 2)}))
        for c in grid.free_cells():
            for d in grid.free_cells():
                assert is_adjacent(grid, c, d) == is_adjacent(grid, d, c)


class TestReachability:
    def test_open_grid(self):
        grid = GridMap(width_a=3, height_b=3)
        assert reachable_cells(grid, [(1, 1)]) == set(grid.cells())

    def test_walled_start(self):
        walls = {(1, 2), (2, 1), (2, 2)}
        grid = GridMap(width_a=3, height_b=3, obstacles=frozenset(walls))
        assert reachable_cells(grid, [(1, 1)]) == {(1, 1)}

    def test_diagonal_gap_is_passable_with_moore(self):
        grid = GridMap(width_a=2, height_b=2, obstacles=frozenset({(1, 2), (2, 1)}))
        assert reachable_cells(grid, [(1, 1)]) == {(1, 1), (2, 2)}

    def test_graph_has_no_self_loops(self):
        graph = grid_graph(GridMap(width_a=2, height_b=2))
        assert graph.number_of_edges() == 6


class TestFrontierDistances:
    def test_distances_to_nearest_unexplored(self):
        grid = GridMap(width_a=5, height_b=1)
        dist = frontier_distances(grid, [(5, 1)])
        assert [dist[(a, 1)] for a in range(1, 6)] == [4, 3, 2, 1, 0]

    def test_nothing_unexplored(self):
        grid = GridMap(width_a=2, height_b=1)
        assert frontier_distances(grid, []) == {(1, 1): 0, (2, 1): 0}

    def test_disconnected_cells_rank_last(self):
        grid = GridMap(width_a=4, height_b=1, obstacles=frozenset({(2, 1)}))
        dist = frontier_distances(grid, [(4, 1)])
        assert dist[(3, 1)] == 1
        assert dist[(1, 1)] == 2


class TestLoader:
    def test_tiny_file(self):
        scenario = load_scenario(SCENARIOS / "tiny_3x3.json")
        assert (scenario.grid.width_a, scenario.grid.height_b) == (3, 3)
        assert len(scenario.robots) == 1

    def test_field_file(self, field_scenario):
        assert (field_scenario.grid.width_a, field_scenario.grid.height_b) == (13, 9)
        assert field_scenario.grid.cell_size == (3.7, 3.1)
        assert len(field_scenario.robots) == 2
        assert field_scenario.mission.horizon_t == 35
        assert field_scenario.mission.window_w == 5
        assert [r.battery_capacity for r in field_scenario.robots] == [55.0, 60.0]

    def test_start_on_obstacle(self):
        document = to_document(load_scenario(SCENARIOS / "tiny_3x3.json"))
        document["grid"]["obstacles"] = [[1, 1]]
        with pytest.raises(ScenarioError, match="start_cell blocked"):
            scenario_from_document(document)

    def test_station_out_of_bounds(self):
        document = to_document(load_scenario(SCENARIOS / "tiny_3x3.json"))
        document["stations"] = [{"cell": [4, 4], "charge_rate": 1.0}]
        with pytest.raises(ScenarioError, match="station out of bounds"):
            scenario_from_document(document)

    def test_mixed_charge_rates(self):
        document = to_document(load_scenario(SCENARIOS / "tiny_3x3.json"))
        document["stations"] = [
            {"cell": [1, 1], "charge_rate": 1.0},
            {"cell": [3, 3], "charge_rate": 2.0},
        ]
        with pytest.raises(ScenarioError, match="one charge_rate"):
            scenario_from_document(document)

    def test_incomplete_tx_table(self):
        document = to_document(load_scenario(SCENARIOS / "tiny_3x3.json"))
        document["energy"]["p_tx_table"] = [[1, 1, 0.5]]
        with pytest.raises(ScenarioError, match="p_tx_table missing cell"):
            scenario_from_document(document)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError, match="file not found"):
            read_document(tmp_path / "missing.json")

    def test_parse_error(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ScenarioError, match="parse error"):
            load_scenario(path)

    def test_save_then_load_is_stable(self, field_scenario, tmp_path):
        path = tmp_path / "copy.json"
        save_scenario(field_scenario, path)
        again = load_scenario(path)
        assert again == field_scenario
        assert json.loads(path.read_text()) == to_document(again)
