"""Collision-free per-step action selection with PIBT.

Agents move one cell per step. PIBT plans the whole team in descending
priority order; when a preferred cell is occupied, the occupant inherits
the priority and plans first, backtracking if it cannot make room. The
resulting step never contains a vertex collision or an edge swap.

Movement preferences come from a guide-path heuristic: remaining path
length for cells on the guide path, detour-to-path plus on-path value.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from heapq import heappush, heappop

from .grid_map import GridMap


class GuideHeuristic:
    """Distance-to-goal estimates anchored on a guide path.

    Cells on the path score their remaining path length; other cells score
    the unit-cost detour to the nearest path cell plus that cell's on-path
    value. Values are expanded lazily by a backward Dijkstra seeded from
    the whole path, so only the region an agent actually wanders through
    is ever computed.
    """

    def __init__(self, grid: GridMap, path: list[int]):
        if not path:
            raise ValueError("guide path must contain at least one cell")
        self.grid = grid
        self.path = path
        self.goal = path[-1]
        last = len(path) - 1
        self._settled: dict[int, int] = {}
        self._frontier: list[tuple[int, int]] = []
        best: dict[int, int] = {}
        for i, cell in enumerate(path):
            value = last - i
            if value < best.get(cell, 1 << 60):
                best[cell] = value
        for cell, value in best.items():
            heappush(self._frontier, (value, cell))

    def value(self, cell: int) -> float:
        """Heuristic value at ``cell`` (inf if unreachable from the path)."""
        settled = self._settled
        got = settled.get(cell)
        if got is not None:
            return float(got)
        frontier = self._frontier
        neighbors = self.grid._neighbors
        while frontier:
            d, v = heappop(frontier)
            if v in settled:
                continue
            settled[v] = d
            for u in neighbors[v]:
                if u not in settled:
                    heappush(frontier, (d + 1, u))
            if v == cell:
                return float(d)
        return float("inf")


def build_guide_heuristic(grid: GridMap, path: list[int]) -> GuideHeuristic:
    return GuideHeuristic(grid, path)


@dataclass
class ActionStep:
    """Result of one planning step: the new location of every agent."""

    locations: list[int]
    moved: list[bool]


def update_priorities(prev: list[float], reached_goal: list[bool],
                      has_goal: list[bool]) -> list[float]:
    """Advance the dynamic PIBT priorities by one step.

    An agent's priority grows by 1 for every step it has a goal and fails
    to reach it, and resets to its base value on arrival. Agents without a
    goal sit one tier below every goal-directed agent. The fractional base
    (n - id) / (n + 1) makes the ordering a strict total order with lower
    ids winning ties.
    """
    n = len(prev)
    out = []
    for i in range(n):
        base = (n - i) / (n + 1)
        if not has_goal[i]:
            out.append(base - 1.0)
        elif reached_goal[i]:
            out.append(base)
        else:
            elapsed = int(prev[i]) if prev[i] >= 0 else 0
            out.append(elapsed + 1 + base)
    return out


def pibt_step(grid: GridMap, locations: list[int],
              heuristics: list[GuideHeuristic | None],
              priorities: list[float]) -> ActionStep:
    """Plan one collision-free step for all agents.

    Agents with a heuristic prefer cells with lower heuristic value, ties
    resolved by the map's canonical neighbor order with waiting last;
    agents without one prefer to wait. Output locations are guaranteed
    vertex-collision-free and edge-swap-free.
    """
    n = len(locations)
    occupied_now: dict[int, int] = {}
    for i, cell in enumerate(locations):
        if cell in occupied_now:
            raise ValueError(f"agents {occupied_now[cell]} and {i} share cell {cell}")
        occupied_now[cell] = i
    reserved: dict[int, int] = {}
    next_loc: list[int | None] = [None] * n

    limit = 5 * n + 1000  # inheritance chains can span the whole team
    if sys.getrecursionlimit() < limit:
        sys.setrecursionlimit(limit)

    def candidates(i: int) -> list[int]:
        cur = locations[i]
        h = heuristics[i]
        if h is None:
            return [cur] + grid.neighbors(cur)
        cells = grid.neighbors(cur) + [cur]
        scored = [h.value(c) for c in cells]
        order = sorted(range(len(cells)), key=lambda k: (scored[k], k))
        return [cells[k] for k in order]

    def plan(i: int, pusher: int | None) -> bool:
        for cell in candidates(i):
            if cell in reserved:
                continue
            if pusher is not None and cell == locations[pusher]:
                continue  # would swap with the agent that pushed us
            occupant = occupied_now.get(cell)
            if occupant is not None and occupant != i:
                if next_loc[occupant] == locations[i]:
                    continue  # taking its old cell would be a swap
                reserved[cell] = i
                next_loc[i] = cell
                if next_loc[occupant] is None and not plan(occupant, i):
                    # The blocked occupant reclaimed this cell; move on.
                    next_loc[i] = None
                    continue
                return True
            reserved[cell] = i
            next_loc[i] = cell
            return True
        # Fully blocked: stay put, reclaiming our own cell even if a pusher
        # reserved it (the pusher sees False and tries another candidate).
        reserved[locations[i]] = i
        next_loc[i] = locations[i]
        return False

    order = sorted(range(n), key=lambda i: -priorities[i])
    for i in order:
        if next_loc[i] is None:
            plan(i, None)

    new_locations = [next_loc[i] if next_loc[i] is not None else locations[i]
                     for i in range(n)]
    moved = [new_locations[i] != locations[i] for i in range(n)]
    return ActionStep(locations=new_locations, moved=moved)
