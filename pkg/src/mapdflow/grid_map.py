"""Grid maps, traversability, and shortest-path queries.

Maps are 4-connected grids parsed from the MovingAI benchmark text format.
Cells are addressed by a single row-major integer index. All downstream
modules (flow networks, planners, the simulator) work on these indices, so
the neighbor ordering defined here (north, east, south, west) is the
canonical tie-breaking order for the whole package.
"""

from __future__ import annotations

from collections import deque
from heapq import heappush, heappop
from typing import Callable, Iterable, Iterator

import numpy as np

EdgeCost = Callable[[int, int], float]

FREE_CHARS = {".", "E", "S"}
BLOCKED_CHARS = {"@", "T"}


class MapParseError(ValueError):
    """Raised when map text does not conform to the benchmark format."""

    def __init__(self, message: str, line: int, column: int | None = None):
        loc = f"line {line}" if column is None else f"line {line}, column {column}"
        super().__init__(f"{message} ({loc})")
        self.line = line
        self.column = column


class GridMap:
    """Immutable 4-connected occupancy grid.

    Attributes:
        width: Number of columns.
        height: Number of rows.
        free: Per-cell traversability, indexed row-major (``y * width + x``).
        labels: Sparse map of cell index to label character ('E' or 'S').
    """

    def __init__(self, width: int, height: int, free: list[bool],
                 labels: dict[int, str] | None = None):
        if width <= 0 or height <= 0:
            raise ValueError("map dimensions must be positive")
        if len(free) != width * height:
            raise ValueError("cell count does not match width x height")
        self.width = width
        self.height = height
        self.free = list(free)
        self.labels = dict(labels or {})
        self._neighbors = self._build_neighbors()
        self._free_cells = [v for v in range(width * height) if self.free[v]]

    def _build_neighbors(self) -> list[list[int]]:
        # Neighbor order is N, E, S, W; downstream tie-breaking relies on it.
        w, h = self.width, self.height
        table: list[list[int]] = []
        for v in range(w * h):
            if not self.free[v]:
                table.append([])
                continue
            y, x = divmod(v, w)
            nbrs = []
            if y > 0 and self.free[v - w]:
                nbrs.append(v - w)
            if x < w - 1 and self.free[v + 1]:
                nbrs.append(v + 1)
            if y < h - 1 and self.free[v + w]:
                nbrs.append(v + w)
            if x > 0 and self.free[v - 1]:
                nbrs.append(v - 1)
            table.append(nbrs)
        return table

    # -- basic queries ----------------------------------------------------

    def index(self, x: int, y: int) -> int:
        return y * self.width + x

    def coords(self, v: int) -> tuple[int, int]:
        y, x = divmod(v, self.width)
        return x, y

    def in_bounds(self, v: int) -> bool:
        return 0 <= v < self.width * self.height

    def is_free(self, v: int) -> bool:
        return self.in_bounds(v) and self.free[v]

    @property
    def free_cells(self) -> list[int]:
        return self._free_cells

    @property
    def num_free(self) -> int:
        return len(self._free_cells)

    def cells_with_label(self, label: str) -> list[int]:
        return [v for v, c in sorted(self.labels.items()) if c == label]

    def neighbors(self, v: int) -> list[int]:
        """Free orthogonal neighbors of ``v`` in N, E, S, W order."""
        if not self.is_free(v):
            raise ValueError(f"cell {v} is blocked or out of range")
        return self._neighbors[v]

    def directed_edges(self) -> Iterator[tuple[int, int]]:
        """All traversable directed edges, grouped by tail cell index."""
        for v in self._free_cells:
            for u in self._neighbors[v]:
                yield v, u

    def num_directed_edges(self) -> int:
        return sum(len(self._neighbors[v]) for v in self._free_cells)

    # -- serialization ----------------------------------------------------

    def to_text(self) -> str:
        rows = []
        for y in range(self.height):
            row = []
            for x in range(self.width):
                v = self.index(x, y)
                if not self.free[v]:
                    row.append("@")
                else:
                    row.append(self.labels.get(v, "."))
            rows.append("".join(row))
        header = f"type octile\nheight {self.height}\nwidth {self.width}\nmap\n"
        return header + "\n".join(rows) + "\n"


def parse_map(text: str) -> GridMap:
    """Parse MovingAI-style map text into a :class:`GridMap`.

    The format is four header lines (``type ...``, ``height H``, ``width W``,
    ``map``) followed by ``H`` rows of ``W`` characters. ``.``, ``E`` and
    ``S`` are free (labels kept for the latter two); ``@`` and ``T`` are
    blocked.

    Raises:
        MapParseError: On malformed headers, wrong row counts/lengths, or
            unknown cell characters; the error names the offending position.
    """
    lines = text.splitlines()
    if len(lines) < 4:
        raise MapParseError("map text has fewer than 4 header lines", len(lines) + 1)
    if not lines[0].startswith("type"):
        raise MapParseError("expected 'type' header", 1)
    try:
        key, value = lines[1].split()
        if key != "height":
            raise ValueError
        height = int(value)
    except ValueError:
        raise MapParseError("expected 'height <int>' header", 2) from None
    try:
        key, value = lines[2].split()
        if key != "width":
            raise ValueError
        width = int(value)
    except ValueError:
        raise MapParseError("expected 'width <int>' header", 3) from None
    if lines[3].strip() != "map":
        raise MapParseError("expected 'map' header", 4)
    if height <= 0 or width <= 0:
        raise MapParseError("map dimensions must be positive", 2)

    grid_rows = lines[4:]
    # Trailing blank lines are tolerated; missing rows are not.
    while grid_rows and not grid_rows[-1].strip():
        grid_rows.pop()
    if len(grid_rows) != height:
        raise MapParseError(
            f"expected {height} map rows, found {len(grid_rows)}", 5 + len(grid_rows))

    free = [False] * (width * height)
    labels: dict[int, str] = {}
    for y, row in enumerate(grid_rows):
        if len(row) != width:
            raise MapParseError(
                f"row has {len(row)} cells, expected {width}", 5 + y)
        for x, ch in enumerate(row):
            v = y * width + x
            if ch in BLOCKED_CHARS:
                continue
            if ch not in FREE_CHARS:
                raise MapParseError(f"unknown cell character {ch!r}", 5 + y, x + 1)
            free[v] = True
            if ch != ".":
                labels[v] = ch
    return GridMap(width, height, free, labels)


def shortest_distances(grid: GridMap, source: int,
                       edge_cost: EdgeCost | None = None,
                       targets: Iterable[int] | None = None) -> dict[int, float]:
    """Exact shortest-path costs from ``source`` under a nonnegative edge cost.

    With ``edge_cost=None`` every edge costs 1 and a plain BFS is used.
    When ``targets`` is given the search stops once every reachable target
    is settled. Unreachable cells are absent from the result.
    """
    if not grid.is_free(source):
        raise ValueError(f"source cell {source} is blocked or out of range")
    remaining = set(targets) if targets is not None else None
    if remaining is not None:
        remaining.discard(source)

    dist: dict[int, float] = {source: 0.0}
    if edge_cost is None:
        queue = deque([source])
        while queue:
            if remaining is not None and not remaining:
                break
            v = queue.popleft()
            d = dist[v] + 1.0
            for u in grid._neighbors[v]:
                if u not in dist:
                    dist[u] = d
                    if remaining is not None:
                        remaining.discard(u)
                    queue.append(u)
        return dist

    settled: set[int] = set()
    heap: list[tuple[float, int]] = [(0.0, source)]
    best = {source: 0.0}
    dist = {}
    while heap:
        d, v = heappop(heap)
        if v in settled:
            continue
        settled.add(v)
        dist[v] = d
        if remaining is not None:
            remaining.discard(v)
            if not remaining:
                break
        for u in grid._neighbors[v]:
            if u in settled:
                continue
            c = edge_cost(v, u)
            if c < 0:
                raise ValueError(f"negative edge cost on ({v}, {u})")
            nd = d + c
            if nd < best.get(u, float("inf")):
                best[u] = nd
                heappush(heap, (nd, u))
    return dist


class DistanceProvider:
    """Cached distance-to-goal tables under a fixed edge-cost function.

    Tables are computed by a backward search from the goal (arc costs are
    taken in the forward travel direction, so direction-dependent costs are
    handled correctly) and cached per goal cell. Also extracts concrete
    shortest paths by greedy descent over a table.
    """

    def __init__(self, grid: GridMap, edge_cost: EdgeCost | None = None):
        self.grid = grid
        self.edge_cost = edge_cost
        self._tables: dict[int, dict[int, float]] = {}
        self._arrays: dict[int, np.ndarray] = {}

    def table(self, goal: int) -> dict[int, float]:
        """Map of cell -> cost of the cheapest path from that cell to ``goal``."""
        cached = self._tables.get(goal)
        if cached is not None:
            return cached
        tbl = self._backward_search(goal)
        self._tables[goal] = tbl
        return tbl

    def table_array(self, goal: int) -> np.ndarray:
        """Dense variant of :meth:`table`: cost per cell index, inf if unreachable."""
        cached = self._arrays.get(goal)
        if cached is not None:
            return cached
        arr = np.full(self.grid.width * self.grid.height, float("inf"))
        for cell, d in self.table(goal).items():
            arr[cell] = d
        self._arrays[goal] = arr
        return arr

    def distance(self, source: int, goal: int) -> float:
        return self.table(goal).get(source, float("inf"))

    def _backward_search(self, goal: int) -> dict[int, float]:
        grid = self.grid
        if not grid.is_free(goal):
            raise ValueError(f"goal cell {goal} is blocked or out of range")
        if self.edge_cost is None:
            dist = {goal: 0.0}
            queue = deque([goal])
            while queue:
                v = queue.popleft()
                d = dist[v] + 1.0
                for u in grid._neighbors[v]:
                    if u not in dist:
                        dist[u] = d
                        queue.append(u)
            return dist
        cost = self.edge_cost
        dist = {}
        best = {goal: 0.0}
        heap = [(0.0, goal)]
        while heap:
            d, v = heappop(heap)
            if v in dist:
                continue
            dist[v] = d
            for u in grid._neighbors[v]:
                if u in dist:
                    continue
                # Arc u -> v in travel direction.
                nd = d + cost(u, v)
                if nd < best.get(u, float("inf")):
                    best[u] = nd
                    heappush(heap, (nd, u))
        return dist

    def shortest_path(self, source: int, goal: int) -> list[int] | None:
        """Cheapest source->goal cell sequence, or None if unreachable."""
        tbl = self.table(goal)
        if source not in tbl:
            return None
        cost = self.edge_cost
        path = [source]
        v = source
        guard = self.grid.num_free + 1
        while v != goal:
            best_u, best_val = -1, float("inf")
            for u in self.grid._neighbors[v]:
                du = tbl.get(u)
                if du is None:
                    continue
                step = 1.0 if cost is None else cost(v, u)
                val = step + du
                if val < best_val - 1e-12:
                    best_u, best_val = u, val
            if best_u < 0:
                raise RuntimeError("distance table descent failed")
            v = best_u
            path.append(v)
            guard -= 1
            if guard < 0:
                raise RuntimeError("distance table descent did not terminate")
        return path
