"""Shared builders and independent oracles for the test suite."""
from __future__ import annotations

import itertools
import math
import random

from fleetroute import (
    CostMatrixSet,
    Customer,
    Facility,
    GeoPoint,
    ProblemInstance,
    RoadNetwork,
    SnapResult,
    VehicleProfile,
    VehicleTypeSpec,
    edge_weight_seconds,
)
from fleetroute.cluster import membership, sequence_runs


# ---------------------------------------------------------------------------
# OSM XML builder


def osm_xml(nodes: dict[int, tuple[float, float]], ways: list[tuple[int, list[int], dict[str, str]]]) -> bytes:
    parts = ['<?xml version="1.0" encoding="UTF-8"?>', '<osm version="0.6">']
    for nid, (lat, lon) in nodes.items():
        parts.append(f'  <node id="{nid}" lat="{lat!r}" lon="{lon!r}"/>')
    for wid, refs, tags in ways:
        parts.append(f'  <way id="{wid}">')
        for ref in refs:
            parts.append(f'    <nd ref="{ref}"/>')
        for k, v in tags.items():
            parts.append(f'    <tag k="{k}" v="{v}"/>')
        parts.append("  </way>")
    parts.append("</osm>")
    return "\n".join(parts).encode()


# ---------------------------------------------------------------------------
# Independent great-circle oracle (spherical law of cosines, not haversine)


def law_of_cosines_m(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    r = 6_371_008.8
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dlam = math.radians(lon2 - lon1)
    c = math.sin(p1) * math.sin(p2) + math.cos(p1) * math.cos(p2) * math.cos(dlam)
    return r * math.acos(max(-1.0, min(1.0, c)))


# ---------------------------------------------------------------------------
# Exhaustive simple-path oracle over a RoadNetwork + profile


def _allowed_arcs(net: RoadNetwork, profile: VehicleProfile) -> dict[int, list[tuple[int, int, float]]]:
    adj: dict[int, list[tuple[int, int, float]]] = {}
    for e in net.edges:
        if not profile.allows(e.road_class):
            continue
        w = edge_weight_seconds(e.length_m, profile.speed_kmh(e.road_class))
        adj.setdefault(e.from_node, []).append((e.to_node, w, e.length_m))
        if not e.oneway:
            adj.setdefault(e.to_node, []).append((e.from_node, w, e.length_m))
    return adj


def enumerate_simple_paths(net: RoadNetwork, profile: VehicleProfile, src: int, dst: int):
    """Yield (time_s, dist_m, path) for every simple path src -> dst."""
    adj = _allowed_arcs(net, profile)

    def walk(u, time_s, dist_m, path, seen):
        if u == dst:
            yield time_s, dist_m, tuple(path)
            return
        for v, w, d in adj.get(u, ()):
            if v in seen:
                continue
            seen.add(v)
            path.append(v)
            yield from walk(v, time_s + w, dist_m + d, path, seen)
            path.pop()
            seen.remove(v)

    yield from walk(src, 0, 0.0, [src], {src})


def oracle_shortest(net: RoadNetwork, profile: VehicleProfile, src: int, dst: int):
    """Minimum-time path by exhaustive enumeration; ties by node sequence."""
    if src == dst:
        return 0, 0.0, (src,)
    best = None
    for time_s, dist_m, path in enumerate_simple_paths(net, profile, src, dst):
        key = (time_s, path)
        if best is None or key < best[0]:
            best = (key, dist_m)
    if best is None:
        return None
    (time_s, path), dist_m = best
    return time_s, dist_m, path


# ---------------------------------------------------------------------------
# Floyd-Warshall oracle over a profiled graph (times only, exact integers)


def floyd_warshall_times(graph, points: list[int]) -> list[list[int | None]]:
    order = sorted(graph.nodes)
    idx = {node: i for i, node in enumerate(order)}
    n = len(order)
    INF = None
    m: list[list[int | None]] = [[INF] * n for _ in range(n)]
    for i in range(n):
        m[i][i] = 0
    for u, arcs in graph.adjacency.items():
        for v, w, _d in arcs:
            i, j = idx[u], idx[v]
            if m[i][j] is None or w < m[i][j]:
                m[i][j] = w
    for k in range(n):
        mk = m[k]
        for i in range(n):
            ik = m[i][k]
            if ik is None:
                continue
            mi = m[i]
            for j in range(n):
                kj = mk[j]
                if kj is None:
                    continue
                t = ik + kj
                if mi[j] is None or t < mi[j]:
                    mi[j] = t
    return [[m[idx[a]][idx[b]] for b in points] for a in points]


# ---------------------------------------------------------------------------
# Synthetic instances straight from matrices (no road network involved)


def matrix_instance(
    times: dict[str, list[list[int | None]]],
    demands: list[int],
    fleet: list[VehicleTypeSpec],
    locations: list[GeoPoint] | None = None,
    zones: list[str] | None = None,
) -> ProblemInstance:
    """Instance with fabricated matrices; ``times`` is keyed by profile name."""
    n = len(demands)
    if locations is None:
        # ~1 km apart so no proximity clusters form by default
        locations = [GeoPoint(19.70 + 0.01 * (i + 1), -72.20) for i in range(n)]
    customers = [
        Customer(
            id=f"C{i + 1:03d}",
            location=locations[i],
            buckets=demands[i],
            zone=(zones[i] if zones else "Z"),
            phone=f"+509{i:04d}",
        )
        for i in range(n)
    ]
    matrices = {}
    for profile, t in times.items():
        assert len(t) == n + 1
        matrices[profile] = CostMatrixSet(
            profile=profile,
            points=list(range(1000, 1000 + n + 1)),
            time_s=[row[:] for row in t],
            dist_m=[[None if e is None else e * 3 for e in row] for row in t],
        )
    depot = Facility(id="DEPOT", location=GeoPoint(19.69, -72.20), kind="depot")
    return ProblemInstance(
        depot=depot,
        customers=customers,
        fleet=fleet,
        matrices=matrices,
        depot_node=1000,
        depot_snap=SnapResult(1000, 0.0),
        snap_report={c.id: SnapResult(1000 + i + 1, 0.0) for i, c in enumerate(customers)},
    )


def single_type_instance(
    times: list[list[int | None]],
    demands: list[int],
    capacity: int,
    locations: list[GeoPoint] | None = None,
) -> ProblemInstance:
    fleet = [VehicleTypeSpec(name="truck", capacity_buckets=capacity, profile="truck", count=1)]
    return matrix_instance({"truck": times}, demands, fleet, locations=locations)


def random_times(rng: random.Random, n: int, lo: int = 10, hi: int = 600) -> list[list[int]]:
    return [[0 if i == j else rng.randint(lo, hi) for j in range(n + 1)] for i in range(n + 1)]


def random_small_instance(rng: random.Random, n: int | None = None) -> ProblemInstance:
    n = n if n is not None else rng.randint(2, 7)
    capacity = rng.randint(4, 10)
    demands = [rng.randint(1, max(1, capacity // 2)) for _ in range(n)]
    return single_type_instance(random_times(rng, n), demands, capacity)


# ---------------------------------------------------------------------------
# Brute-force CVRP oracle: all set partitions x all stop orders x all types


def set_partitions(items: list[int]):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [part[i] + [first]] + part[i + 1 :]


def brute_force_optimum(inst: ProblemInstance, config, clusters=()):
    """(objective, trip_count) of the exact optimum by full enumeration.

    Block costs are separable: each trip independently picks its best
    vehicle type and stop order under travel + per-run cluster charges.
    """
    n = len(inst.customers)
    minutes = config.granularity == "minutes"
    eff: dict[str, list[list[int | None]]] = {}
    max_leg = 0
    for v in inst.fleet:
        raw = inst.matrices[v.profile].time_s
        m = [[None if e is None else (e // 60 if minutes else e) for e in row] for row in raw]
        eff[v.name] = m
        max_leg = max(max_leg, max(e for row in m for e in row if e is not None))
    f = config.trip_cost_f if config.trip_cost_f is not None else (n + 1) * max_leg + 1
    pen = config.cluster_penalty_s
    member = membership(clusters)
    demands = [0] + [c.buckets for c in inst.customers]

    def block_cost(block: list[int]) -> int | None:
        demand = sum(demands[s] for s in block)
        best = None
        for v in inst.fleet:
            if v.capacity_buckets < demand:
                continue
            mat = eff[v.name]
            for perm in itertools.permutations(block):
                total = 0
                prev = 0
                ok = True
                for s in perm + (0,):
                    c = mat[prev][s]
                    if c is None:
                        ok = False
                        break
                    total += c
                    prev = s
                if not ok:
                    continue
                if member:
                    total += pen * sum(sequence_runs(perm, member).values())
                if best is None or total < best:
                    best = total
        return best

    best_obj = None
    best_trips = None
    items = list(range(1, n + 1))
    const = -pen * len(list(clusters)) if member else 0
    for part in set_partitions(items):
        total = f * len(part) + const
        ok = True
        for block in part:
            c = block_cost(block)
            if c is None:
                ok = False
                break
            total += c
        if not ok:
            continue
        if best_obj is None or (total, len(part)) < (best_obj, best_trips):
            best_obj = total
            best_trips = len(part)
    assert best_obj is not None, "oracle found no feasible solution"
    return best_obj, best_trips
