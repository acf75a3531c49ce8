"""Why solve the assignment on the map instead of a bipartite graph?

The flow network has one node per cell regardless of team size, so its
solve time stays flat as agents are added. The bipartite route must run
one Dijkstra per agent and solve an n x m matching, so it scales with the
team. (Absolute numbers vary by machine; the trend is the point.)
"""

from mapdflow import random_map
from mapdflow.cli import bench_scaling

grid = random_map(64, 64, obstacle_density=0.2, seed=64)
print(f"map 64x64 with {grid.num_free} free cells; "
      "each measurement is a fresh full-team assignment round\n")

print("strategy  agents   p50 ms   p95 ms   max ms")
for row in bench_scaling(grid, [50, 200, 800], ["flow", "linear"], rounds=8):
    print(f"{row['strategy']:<9} {row['agents']:>6} {row['p50_ms']:>8.1f} "
          f"{row['p95_ms']:>8.1f} {row['max_ms']:>8.1f}")

print("\nflow stays map-bound while linear grows with the team")
