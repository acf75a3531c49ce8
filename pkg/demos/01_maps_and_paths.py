"""Grid maps and shortest-path queries.

Parses a small benchmark-format map, inspects the traversability graph,
and runs distance queries under unit and non-unit edge costs.
"""

from mapdflow import DistanceProvider, parse_map, shortest_distances

MAP_TEXT = """\
type octile
height 5
width 9
map
.........
.@@@.@@@.
.@S..E@..
.@@@@@@..
.........
"""

grid = parse_map(MAP_TEXT)
print(f"{grid.width}x{grid.height} map, {grid.num_free} free cells, "
      f"{grid.num_directed_edges()} directed edges")
print("shelf cells:", grid.cells_with_label("S"),
      " workstations:", grid.cells_with_label("E"))

shelf = grid.cells_with_label("S")[0]
station = grid.cells_with_label("E")[0]

dist = shortest_distances(grid, shelf)
print(f"\nunit-cost distance shelf -> station: {dist[station]:.0f}")

# Early-terminating query: stop as soon as the station is settled.
partial = shortest_distances(grid, shelf, targets={station})
print(f"early-terminated search settled {len(partial)} cells "
      f"(full search: {len(dist)})")

# A provider caches distance-to-goal tables and extracts concrete paths.
provider = DistanceProvider(grid)
path = provider.shortest_path(shelf, station)
print("\npath from shelf to station:")
marks = {c: "*" for c in path}
marks[shelf] = "P"
marks[station] = "D"
for y in range(grid.height):
    row = ""
    for x in range(grid.width):
        v = grid.index(x, y)
        row += marks.get(v, "." if grid.is_free(v) else "#")
    print("  " + row)

# Direction-dependent costs: moving east is five times as expensive.
def east_is_slow(u, v):
    return 5.0 if v == u + 1 else 1.0

weighted = shortest_distances(grid, shelf, east_is_slow)
print(f"\nwith east-penalized costs the same trip costs {weighted[station]:.0f} "
      f"(was {dist[station]:.0f})")
