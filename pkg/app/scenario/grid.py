"""Grid adjacency, reachability and frontier distances."""

from collections.abc import Iterable

import networkx as nx

from app.models import Cell, GridMap


class GridError(ValueError):
    """Raised for cells outside the grid."""


def neighbors(grid: GridMap, cell: Cell) -> frozenset[Cell]:
    """Cells reachable in one step from ``cell``, including staying put.

    Args:
        grid: The grid.
        cell: An in-bounds cell.

    Returns:
        In-bounds, non-obstacle cells within one step (Moore, or von Neumann
        when ``grid.connectivity == 4``). ``cell`` itself is included unless
        it is an obstacle.

    Raises:
        GridError: If ``cell`` is out of bounds.
    """
    if not grid.in_bounds(cell):
        raise GridError(f"cell out of bounds: {cell}")
    a, b = cell
    out = set()
    for da in (-1, 0, 1):
        for db in (-1, 0, 1):
            if grid.connectivity == 4 and da != 0 and db != 0:
                continue
            other = (a + da, b + db)
            if grid.is_free(other):
                out.add(other)
    return frozenset(out)


def is_adjacent(grid: GridMap, src: Cell, dst: Cell) -> bool:
    return dst in neighbors(grid, src)


def neighbor_map(grid: GridMap) -> dict[Cell, frozenset[Cell]]:
    """``neighbors`` for every free cell."""
    return {c: neighbors(grid, c) for c in grid.free_cells()}


def grid_graph(grid: GridMap) -> nx.Graph:
    """Undirected graph over free cells with one edge per adjacent pair."""
    graph = nx.Graph()
    graph.add_nodes_from(grid.free_cells())
    for cell, adj in neighbor_map(grid).items():
        graph.add_edges_from((cell, other) for other in adj if other != cell)
    return graph


def reachable_cells(grid: GridMap, starts: Iterable[Cell]) -> set[Cell]:
    """Flood fill from ``starts`` over free cells."""
    graph = grid_graph(grid)
    out: set[Cell] = set()
    for start in starts:
        if start in graph:
            out |= nx.node_connected_component(graph, start)
    return out


def frontier_distances(grid: GridMap, unexplored: Iterable[Cell]) -> dict[Cell, int]:
    """Step distance from every free cell to the nearest unexplored cell.

    Cells with no path to unexplored area get one more than the largest
    finite distance, so they still rank below every connected cell.
    """
    graph = grid_graph(grid)
    sources = [c for c in unexplored if c in graph]
    if not sources:
        return {c: 0 for c in graph.nodes}
    lengths = nx.multi_source_dijkstra_path_length(graph, sources)
    worst = max(lengths.values()) + 1
    return {c: int(lengths.get(c, worst)) for c in graph.nodes}
