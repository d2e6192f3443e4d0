"""Generate the demo dataset: a small synthetic town in OSM XML plus the
customer/facility/fleet tables and a ready-to-use run config.

The town is a street grid with two footpath spurs (three-wheelers cannot
enter paths), a handful of customers packed close enough to form proximity
clusters, and two service zones. Everything is deterministic.

Run:  python3 demos/make_dataset.py
"""
from __future__ import annotations

import json
import math
import random
from pathlib import Path

DATA_DIR = Path(__file__).parent / "data"

BASE_LAT, BASE_LON = 19.7500, -72.2100
M_PER_DEG = 111_194.93
ROWS, COLS, SPACING_M = 7, 8, 90.0


def coord(north_m: float, east_m: float) -> tuple[float, float]:
    lat = BASE_LAT + north_m / M_PER_DEG
    lon = BASE_LON + east_m / (M_PER_DEG * math.cos(math.radians(BASE_LAT)))
    return round(lat, 7), round(lon, 7)


def node_id(r: int, c: int) -> int:
    return 100 + r * COLS + c


def build_network() -> tuple[bytes, dict[int, tuple[float, float]]]:
    nodes: dict[int, tuple[float, float]] = {}
    for r in range(ROWS):
        for c in range(COLS):
            nodes[node_id(r, c)] = coord(r * SPACING_M, c * SPACING_M)

    ways: list[tuple[int, list[int], dict[str, str]]] = []
    wid = 1
    # east-west streets; the third one is one-way to make matrices asymmetric
    for r in range(ROWS):
        tags = {"highway": "residential"}
        if r == 2:
            tags["oneway"] = "yes"
        ways.append((wid, [node_id(r, c) for c in range(COLS)], tags))
        wid += 1
    # north-south streets; the easternmost is a rough track
    for c in range(COLS):
        tags = {"highway": "track"} if c == COLS - 1 else {"highway": "residential"}
        ways.append((wid, [node_id(r, c) for r in range(ROWS)], tags))
        wid += 1
    # two dead-end footpaths off the southern edge: wheelbarrow-only turf
    for k, col in enumerate((2, 5)):
        refs = [node_id(0, col)]
        for step in (1, 2, 3):
            sid = 9000 + k * 10 + step
            nodes[sid] = coord(-step * 50.0, col * SPACING_M + 12.0 * k)
            refs.append(sid)
        ways.append((wid, refs, {"highway": "path"}))
        wid += 1

    parts = ['<?xml version="1.0" encoding="UTF-8"?>', '<osm version="0.6">']
    for nid in sorted(nodes):
        lat, lon = nodes[nid]
        parts.append(f'  <node id="{nid}" lat="{lat!r}" lon="{lon!r}"/>')
    for w, refs, tags in ways:
        parts.append(f'  <way id="{w}">')
        parts.extend(f'    <nd ref="{ref}"/>' for ref in refs)
        parts.extend(f'    <tag k="{k}" v="{v}"/>' for k, v in tags.items())
        parts.append("  </way>")
    parts.append("</osm>")
    return "\n".join(parts).encode(), nodes


def build_tables(nodes: dict[int, tuple[float, float]]) -> tuple[bytes, bytes]:
    rng = random.Random(19)
    rows = ["id,lat,lon,buckets,zone,phone"]
    cid = 0

    def add(lat: float, lon: float, buckets: int, zone: str) -> None:
        nonlocal cid
        cid += 1
        rows.append(f"C{cid:03d},{lat:.7f},{lon:.7f},{buckets},{zone},+509{40000000 + cid}")

    # scattered grid customers, one per chosen intersection
    pool = [node_id(r, c) for r in range(ROWS) for c in range(COLS) if (r, c) != (0, 0)]
    rng.shuffle(pool)
    for nid in sorted(pool[:26]):
        lat, lon = nodes[nid]
        lat += rng.uniform(-8, 8) / M_PER_DEG
        lon += rng.uniform(-8, 8) / (M_PER_DEG * math.cos(math.radians(BASE_LAT)))
        east = (lon - BASE_LON) * M_PER_DEG * math.cos(math.radians(BASE_LAT))
        zone = "Avyasyon" if east < (COLS / 2) * SPACING_M else "Shada"
        add(lat, lon, rng.randint(1, 5), zone)

    # a tight knot of neighbors at the mouth of the first footpath: these are
    # within walking range of each other and should be collected together
    mouth_lat, mouth_lon = nodes[node_id(0, 2)]
    for i in range(4):
        add(mouth_lat + (4 + 3 * i) / M_PER_DEG, mouth_lon, 1, "Avyasyon")
    # customers down the footpath itself (three-wheelers cannot reach them)
    for sid in (9001, 9002, 9003):
        lat, lon = nodes[sid]
        add(lat, lon + 5 / M_PER_DEG, 2, "Avyasyon")

    customers = ("\n".join(rows) + "\n").encode()

    d_lat, d_lon = nodes[node_id(0, 0)]
    f_lat, f_lon = nodes[node_id(ROWS - 1, COLS - 1)]
    facilities = (
        "id,lat,lon,kind\n"
        f"DEPOT,{d_lat:.7f},{d_lon:.7f},depot\n"
        f"FP1,{f_lat:.7f},{f_lon:.7f},focal_point\n"
    ).encode()
    return customers, facilities


PROFILES = [
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
]

FLEET = [
    {"name": "three_wheeler", "capacity_buckets": 40, "profile": "three_wheeler", "count": 2},
    {"name": "wheelbarrow", "capacity_buckets": 15, "profile": "wheelbarrow", "count": 3},
]


def main() -> Path:
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    network, nodes = build_network()
    customers, facilities = build_tables(nodes)
    (DATA_DIR / "network.osm").write_bytes(network)
    (DATA_DIR / "customers.csv").write_bytes(customers)
    (DATA_DIR / "facilities.csv").write_bytes(facilities)
    (DATA_DIR / "profiles.json").write_text(json.dumps(PROFILES, indent=1) + "\n")
    (DATA_DIR / "fleet.json").write_text(json.dumps(FLEET, indent=1) + "\n")
    run = {
        "paths": {
            "network": "data/network.osm",
            "profiles": "data/profiles.json",
            "customers": "data/customers.csv",
            "facilities": "data/facilities.csv",
            "fleet": "data/fleet.json",
            "out_dir": "out",
        },
        "solver": {
            "seed": 7,
            "time_limit_s": 20.0,
            "stall_iterations": 60,
            "cluster_penalty_s": 120,
            "cluster_radius_m": 25.0,
        },
        "snap_radius_m": 60.0,
    }
    (Path(__file__).parent / "run.json").write_text(json.dumps(run, indent=1) + "\n")
    print(f"wrote demo dataset to {DATA_DIR}")
    print("next: python3 demos/01_network_and_matrices.py")
    return DATA_DIR


def ensure_dataset() -> Path:
    if not (DATA_DIR / "network.osm").is_file():
        main()
    return DATA_DIR


if __name__ == "__main__":
    main()
