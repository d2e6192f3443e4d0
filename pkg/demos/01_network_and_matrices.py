"""Walk through the road-network layer: parse OSM XML, compile one weighted
graph per vehicle profile, snap GPS points, and build cost matrices.

Run:  python3 demos/01_network_and_matrices.py
"""
from pathlib import Path
import sys

sys.path.insert(0, str(Path(__file__).parent))
from make_dataset import ensure_dataset

from fleetroute import (
    build_profiled_graph,
    cost_matrices,
    parse_osm_xml,
    parse_profiles,
    shortest_path,
    snap_point,
)
from fleetroute.model import load_customers, load_facilities

data = ensure_dataset()

# --- 1. the raw road network --------------------------------------------
net = parse_osm_xml(data / "network.osm")
classes = sorted({e.road_class for e in net.edges})
print(f"network: {len(net.nodes)} nodes, {len(net.edges)} edges, classes {classes}")

# --- 2. one graph per vehicle profile ------------------------------------
profiles = parse_profiles(data / "profiles.json")
graphs = {p.name: build_profiled_graph(net, p) for p in profiles}
for name, g in graphs.items():
    arcs = sum(len(a) for a in g.adjacency.values())
    print(f"profile {name}: {arcs} directed arcs, {len(g.connected_nodes)} usable nodes")
# the three-wheeler graph is smaller: path edges are filtered out
assert len(graphs["three_wheeler"].connected_nodes) < len(graphs["wheelbarrow"].connected_nodes)

# --- 3. snapping and per-profile shortest paths ---------------------------
customers = load_customers(data / "customers.csv")
depot = next(f for f in load_facilities(data / "facilities.csv") if f.kind == "depot")
spur_customer = customers[-1]  # lives on a footpath
snap_wb = snap_point(net, graphs["wheelbarrow"], spur_customer.location, 60.0)
print(f"\n{spur_customer.id} snaps to node {snap_wb.node_id} ({snap_wb.snap_dist_m:.1f} m away)")

depot_snap = snap_point(net, graphs["wheelbarrow"], depot.location, 60.0)
for name, g in graphs.items():
    path = shortest_path(g, depot_snap.node_id, snap_wb.node_id)
    if path is None:
        print(f"  {name}: cannot reach it (path edges are off limits)")
    else:
        print(f"  {name}: {path.time_s} s over {path.dist_m:.0f} m via {len(path.nodes)} nodes")

# --- 4. travel-time/distance matrices -------------------------------------
points = [depot_snap.node_id] + [
    snap_point(net, graphs["wheelbarrow"], c.location, 60.0).node_id for c in customers[:8]
]
for name, g in graphs.items():
    m = cost_matrices(g, points)
    finite = sum(1 for row in m.time_s for e in row if e is not None)
    print(f"matrix {name}: {m.size()}x{m.size()}, {finite} finite entries")
    print("  first row (s):", m.time_s[0])
