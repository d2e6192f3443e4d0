"""Deterministic synthetic town datasets for end-to-end and acceptance tests.

A rectangular street grid with a few dead-end footpath spurs, two vehicle
profiles (a three-wheeler barred from paths and a slow go-anywhere
wheelbarrow), and customers scattered over distinct nodes. Every byte is a
pure function of the arguments.
"""
from __future__ import annotations

import json
import math
import random

from fleetroute import ProblemInstance, build_instance, parse_osm_xml, parse_profiles
from fleetroute.model import load_customers, load_facilities, load_fleet

BASE_LAT = 19.7500
BASE_LON = -72.2100
M_PER_DEG = 111_194.93

PROFILES_JSON = json.dumps(
    [
        {
            "name": "three_wheeler",
            "speeds": {"residential": 15, "track": 10},
            "access": {"path": False},
            "default_access": True,
            "default_speed_kmh": 10,
        },
        {
            "name": "wheelbarrow",
            "speeds": {"residential": 4.5, "track": 4, "path": 4},
            "access": {},
            "default_access": True,
            "default_speed_kmh": 4,
        },
    ],
    indent=1,
)

FLEET_JSON = json.dumps(
    [
        {"name": "three_wheeler", "capacity_buckets": 40, "profile": "three_wheeler", "count": 2},
        {"name": "wheelbarrow", "capacity_buckets": 15, "profile": "wheelbarrow", "count": 3},
    ],
    indent=1,
)


def _coord(north_m: float, east_m: float) -> tuple[float, float]:
    lat = BASE_LAT + north_m / M_PER_DEG
    lon = BASE_LON + east_m / (M_PER_DEG * math.cos(math.radians(BASE_LAT)))
    return round(lat, 7), round(lon, 7)


def make_town(
    n_customers: int = 100,
    seed: int = 72,
    rows: int = 10,
    cols: int = 10,
    spacing_m: float = 90.0,
    n_spurs: int = 4,
    zones: tuple[str, ...] = ("Avyasyon", "Shada"),
) -> dict[str, bytes]:
    """Input files for one synthetic town, keyed by conventional file name."""
    rng = random.Random(seed)

    def node_id(r: int, c: int) -> int:
        return 100 + r * cols + c

    nodes: dict[int, tuple[float, float]] = {}
    for r in range(rows):
        for c in range(cols):
            nodes[node_id(r, c)] = _coord(r * spacing_m, c * spacing_m)

    ways = []
    wid = 1
    for r in range(rows):
        tags = {"highway": "residential"}
        if r == 2:
            tags = {"highway": "residential", "oneway": "yes"}
        ways.append((wid, [node_id(r, c) for c in range(cols)], tags))
        wid += 1
    for c in range(cols):
        tags = {"highway": "track"} if c == cols - 1 else {"highway": "residential"}
        ways.append((wid, [node_id(r, c) for r in range(rows)], tags))
        wid += 1

    # dead-end footpath spurs off the southern edge, three nodes each
    spur_nodes: list[int] = []
    for k in range(n_spurs):
        c = (k * cols) // max(1, n_spurs) + 1
        root = node_id(0, min(c, cols - 1))
        refs = [root]
        for step in range(1, 4):
            sid = 9000 + k * 10 + step
            nodes[sid] = _coord(-step * 45.0, min(c, cols - 1) * spacing_m + 10.0 * k)
            spur_nodes.append(sid)
            refs.append(sid)
        ways.append((wid, refs, {"highway": "path"}))
        wid += 1

    xml_parts = ['<?xml version="1.0" encoding="UTF-8"?>', '<osm version="0.6">']
    for nid in sorted(nodes):
        lat, lon = nodes[nid]
        xml_parts.append(f'  <node id="{nid}" lat="{lat!r}" lon="{lon!r}"/>')
    for w, refs, tags in ways:
        xml_parts.append(f'  <way id="{w}">')
        xml_parts.extend(f'    <nd ref="{ref}"/>' for ref in refs)
        xml_parts.extend(f'    <tag k="{k}" v="{v}"/>' for k, v in tags.items())
        xml_parts.append("  </way>")
    xml_parts.append("</osm>")
    network = "\n".join(xml_parts).encode()

    # customers on distinct nodes with a small jitter (<= 11 m, so nodes
    # 45+ m apart never form proximity clusters at the default 25 m radius)
    grid_pool = [node_id(r, c) for r in range(rows) for c in range(cols) if (r, c) != (0, 0)]
    spur_pool = list(spur_nodes)
    rng.shuffle(grid_pool)
    rng.shuffle(spur_pool)
    n_spur_customers = min(len(spur_pool), max(0, n_customers // 8))
    chosen = spur_pool[:n_spur_customers] + grid_pool[: n_customers - n_spur_customers]
    if len(chosen) < n_customers:
        raise ValueError("town too small for requested customer count")
    chosen.sort()

    csv_lines = ["id,lat,lon,buckets,zone,phone"]
    for i, nid in enumerate(chosen, start=1):
        lat, lon = nodes[nid]
        lat += rng.uniform(-8, 8) / M_PER_DEG
        lon += rng.uniform(-8, 8) / (M_PER_DEG * math.cos(math.radians(BASE_LAT)))
        east = (lon - BASE_LON) * M_PER_DEG * math.cos(math.radians(BASE_LAT))
        zone = zones[0] if east < (cols / 2) * spacing_m else zones[-1]
        buckets = rng.randint(1, 5)
        csv_lines.append(f"C{i:03d},{lat:.7f},{lon:.7f},{buckets},{zone},+509{30000000 + i}")
    customers_csv = "\n".join(csv_lines).encode() + b"\n"

    d_lat, d_lon = nodes[node_id(0, 0)]
    f_lat, f_lon = nodes[node_id(rows - 1, cols - 1)]
    facilities_csv = (
        "id,lat,lon,kind\n"
        f"DEPOT,{d_lat:.7f},{d_lon:.7f},depot\n"
        f"FP1,{f_lat:.7f},{f_lon:.7f},focal_point\n"
    ).encode()

    return {
        "network.osm": network,
        "profiles.json": PROFILES_JSON.encode(),
        "customers.csv": customers_csv,
        "facilities.csv": facilities_csv,
        "fleet.json": FLEET_JSON.encode(),
    }


def town_instance(files: dict[str, bytes], snap_radius_m: float = 60.0) -> ProblemInstance:
    net = parse_osm_xml(files["network.osm"])
    profiles = parse_profiles(files["profiles.json"])
    customers = load_customers(files["customers.csv"])
    facilities = load_facilities(files["facilities.csv"])
    fleet = load_fleet(files["fleet.json"], [p.name for p in profiles])
    return build_instance(net, profiles, customers, facilities, fleet, snap_radius_m=snap_radius_m)


def acceptance_town() -> dict[str, bytes]:
    """The frozen 100-customer, 2-vehicle-type regression fixture."""
    return make_town(n_customers=100, seed=72, rows=10, cols=10, spacing_m=90.0, n_spurs=4)
