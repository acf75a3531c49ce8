"""Congestion-aware edge costs: planner estimates and execution history.

The traffic model reads delivering agents' guide paths: entering a busy
cell costs extra (vertex congestion), and edges planned in both directions
cost extra still (contraflow). The avg-wait model instead learns from
observed waiting, with exponential decay favoring recent congestion.
"""

from mapdflow import (EdgeWaitStats, TrafficState, contraflow, fcost, pcost,
                      unit_cost, update_wait_stats, vertex_congestion)

# Three delivering agents; two pass through cell 12, one drives against
# the flow on edge (11, 12).
guide_paths = [
    [10, 11, 12, 13],
    [20, 12, 11],
    [30, 12, 13],
]
ts = TrafficState.from_guide_paths(guide_paths)

print("edge            unit  p_v2  c_e  fcost")
for e in ((11, 12), (12, 11), (12, 13), (10, 11)):
    print(f"{str(e):<15} {unit_cost(e):>4.0f} "
          f"{vertex_congestion(e[1], ts):>5.0f} {contraflow(e, ts):>4.0f} "
          f"{fcost(e, ts):>6.0f}")

print("\nexecution history with decay gamma = 0.9:")
stats = EdgeWaitStats(gamma=0.9)
update_wait_stats(stats, [((11, 12), 4), ((11, 12), 2), ((12, 13), 0)])
print(f"  after a congested window: pcost(11->12) = {pcost((11, 12), stats):.3f}")
for window in range(10):
    update_wait_stats(stats, [])
print(f"  after 10 quiet windows:   pcost(11->12) = {pcost((11, 12), stats):.3f}")
print("  (the W/N ratio survives decay; fresh observations dominate mixes)")

update_wait_stats(stats, [((11, 12), 0)])
print(f"  after one wait-free pass: pcost(11->12) = {pcost((11, 12), stats):.3f}")
