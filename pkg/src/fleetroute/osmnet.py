"""Road networks, vehicle profiles, and travel-time/distance matrices.

Parses an OSM XML extract into a :class:`RoadNetwork`, compiles one weighted
graph per vehicle profile (per-road-class speeds and access rules), and runs
Dijkstra searches to produce integer-second travel-time matrices, meter
distance matrices, and path geometries. Unreachable entries are represented
as ``None`` in memory and ``null`` in JSON.
"""
from __future__ import annotations

import io
import json
import xml.etree.ElementTree as ET
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from heapq import heappop, heappush
from pathlib import Path
from typing import BinaryIO, Iterable, Mapping, Sequence

from .errors import EmptyNetworkError, OsmParseError, SnapFailed, ValidationError
from .geo import GeoPoint, haversine_m

# (to_node, weight_seconds, dist_m)
Arc = tuple[int, int, float]


@dataclass(frozen=True)
class RoadEdge:
    from_node: int
    to_node: int
    length_m: float
    road_class: str
    oneway: bool = False


@dataclass
class RoadNetwork:
    """Geographic graph of nodes and tagged road segments."""

    nodes: dict[int, GeoPoint]
    edges: list[RoadEdge]


@dataclass(frozen=True)
class VehicleProfile:
    """Per-road-class speed and access rules for one vehicle type."""

    name: str
    speeds: Mapping[str, float] = field(default_factory=dict)
    access: Mapping[str, bool] = field(default_factory=dict)
    default_access: bool = True
    default_speed_kmh: float = 5.0

    def __post_init__(self) -> None:
        if not self.name:
            raise ValidationError("profile name must be non-empty")
        for road_class, speed in self.speeds.items():
            if not speed > 0:
                raise ValidationError(
                    f"profile '{self.name}' speeds[{road_class!r}]: speed must be positive"
                )
        if not self.default_speed_kmh > 0:
            raise ValidationError(f"profile '{self.name}' default_speed_kmh: speed must be positive")

    def allows(self, road_class: str) -> bool:
        return bool(self.access.get(road_class, self.default_access))

    def speed_kmh(self, road_class: str) -> float:
        return float(self.speeds.get(road_class, self.default_speed_kmh))


@dataclass
class ProfiledGraph:
    """A road network weighted and filtered for one vehicle profile.

    Immutable after construction; edge weights are integer seconds >= 1 so
    every path has strictly increasing cost.
    """

    profile: VehicleProfile
    adjacency: dict[int, tuple[Arc, ...]]
    reverse: dict[int, tuple[Arc, ...]]
    nodes: frozenset[int]
    connected_nodes: frozenset[int]


@dataclass(frozen=True)
class PathResult:
    time_s: int
    dist_m: float
    nodes: tuple[int, ...]


@dataclass(frozen=True)
class SnapResult:
    node_id: int
    snap_dist_m: float


@dataclass
class CostMatrixSet:
    """Travel-time (integer seconds) and distance (integer meters) matrices.

    ``points`` lists the node ids in matrix order (depot first by
    convention); ``None`` marks an unreachable pair, always simultaneously
    in both matrices.
    """

    profile: str
    points: list[int]
    time_s: list[list[int | None]]
    dist_m: list[list[int | None]]

    def size(self) -> int:
        return len(self.points)

    def submatrix(self, keep: Sequence[int]) -> "CostMatrixSet":
        """Restrict to the given point indices, preserving order."""
        return CostMatrixSet(
            profile=self.profile,
            points=[self.points[i] for i in keep],
            time_s=[[self.time_s[i][j] for j in keep] for i in keep],
            dist_m=[[self.dist_m[i][j] for j in keep] for i in keep],
        )

    def to_json_dict(self) -> dict:
        n = self.size()
        return {
            "profile": self.profile,
            "points": list(self.points),
            "time_s": [self.time_s[i][j] for i in range(n) for j in range(n)],
            "dist_m": [self.dist_m[i][j] for i in range(n) for j in range(n)],
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "CostMatrixSet":
        points = list(doc["points"])
        n = len(points)
        flat_t = doc["time_s"]
        flat_d = doc["dist_m"]
        if len(flat_t) != n * n or len(flat_d) != n * n:
            raise ValidationError("matrix length does not match point count")
        return cls(
            profile=doc["profile"],
            points=points,
            time_s=[flat_t[i * n : (i + 1) * n] for i in range(n)],
            dist_m=[flat_d[i * n : (i + 1) * n] for i in range(n)],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))


def _read_bytes(source: bytes | str | Path | BinaryIO) -> bytes:
    if isinstance(source, bytes):
        return source
    if isinstance(source, (str, Path)):
        return Path(source).read_bytes()
    return source.read()


def parse_osm_xml(source: bytes | str | Path | BinaryIO) -> RoadNetwork:
    """Parse an OSM XML extract into a road network.

    Only ``highway``-tagged ways become edges (one edge per consecutive
    ``<nd>`` pair, length = haversine between endpoints), ``oneway=yes`` is
    honored, and nodes not referenced by any kept way are dropped.
    """
    data = _read_bytes(source)
    try:
        root = ET.parse(io.BytesIO(data)).getroot()
    except ET.ParseError as exc:
        line, col = exc.position
        raise OsmParseError(f"parse error at line {line}, column {col}") from exc

    coords: dict[int, GeoPoint] = {}
    for el in root.iter("node"):
        try:
            nid = int(el.attrib["id"])
            point = GeoPoint(float(el.attrib["lat"]), float(el.attrib["lon"]))
        except (KeyError, ValueError) as exc:
            raise OsmParseError(f"invalid <node> element: {exc}") from exc
        coords[nid] = point

    edges: list[RoadEdge] = []
    for way in root.iter("way"):
        way_id = way.attrib.get("id", "?")
        tags = {t.attrib.get("k"): t.attrib.get("v", "") for t in way.findall("tag")}
        road_class = tags.get("highway")
        if road_class is None:
            continue
        refs = []
        for nd in way.findall("nd"):
            try:
                refs.append(int(nd.attrib["ref"]))
            except (KeyError, ValueError) as exc:
                raise OsmParseError(f"way {way_id}: invalid <nd> reference") from exc
        for ref in refs:
            if ref not in coords:
                raise OsmParseError(f"way {way_id} references missing node {ref}")
        oneway = tags.get("oneway") == "yes"
        for a, b in zip(refs, refs[1:]):
            if a == b:
                continue
            length = haversine_m(coords[a], coords[b])
            if length <= 0.0:
                continue
            edges.append(RoadEdge(a, b, length, road_class, oneway))

    if not edges:
        raise EmptyNetworkError("empty network: no highway-tagged ways produced edges")

    used = {e.from_node for e in edges} | {e.to_node for e in edges}
    nodes = {nid: coords[nid] for nid in sorted(used)}
    return RoadNetwork(nodes=nodes, edges=edges)


def parse_profiles(source: bytes | str | Path | BinaryIO) -> list[VehicleProfile]:
    """Parse and validate a JSON array of vehicle profiles."""
    data = _read_bytes(source)
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"profiles: invalid JSON: {exc}") from exc
    if not isinstance(doc, list) or not doc:
        raise ValidationError("profiles: document must be a non-empty JSON array")

    profiles: list[VehicleProfile] = []
    seen: set[str] = set()
    for i, entry in enumerate(doc):
        if not isinstance(entry, dict):
            raise ValidationError(f"profiles[{i}]: entry must be an object")
        name = entry.get("name")
        if not isinstance(name, str) or not name:
            raise ValidationError(f"profiles[{i}].name: must be a non-empty string")
        if name in seen:
            raise ValidationError(f"profiles[{i}].name: duplicate profile name '{name}'")
        seen.add(name)
        speeds = entry.get("speeds", {})
        access = entry.get("access", {})
        if not isinstance(speeds, dict):
            raise ValidationError(f"profile '{name}' speeds: must be an object")
        if not isinstance(access, dict):
            raise ValidationError(f"profile '{name}' access: must be an object")
        for k, v in speeds.items():
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise ValidationError(f"profile '{name}' speeds[{k!r}]: must be a number")
        for k, v in access.items():
            if not isinstance(v, bool):
                raise ValidationError(f"profile '{name}' access[{k!r}]: must be a boolean")
        kwargs = {}
        if "default_access" in entry:
            kwargs["default_access"] = bool(entry["default_access"])
        if "default_speed_kmh" in entry:
            kwargs["default_speed_kmh"] = float(entry["default_speed_kmh"])
        profiles.append(
            VehicleProfile(
                name=name,
                speeds={str(k): float(v) for k, v in speeds.items()},
                access={str(k): bool(v) for k, v in access.items()},
                **kwargs,
            )
        )
    return profiles


def edge_weight_seconds(length_m: float, speed_kmh: float) -> int:
    """Travel time of one edge: round half up, clamped to >= 1 second."""
    return max(1, int(length_m * 3.6 / speed_kmh + 0.5))


def build_profiled_graph(net: RoadNetwork, profile: VehicleProfile) -> ProfiledGraph:
    """Filter and weight a road network for one vehicle profile."""
    fwd: dict[int, list[Arc]] = {}
    rev: dict[int, list[Arc]] = {}

    def add(adj: dict[int, list[Arc]], u: int, v: int, w: int, d: float) -> None:
        adj.setdefault(u, []).append((v, w, d))

    for e in net.edges:
        if not profile.allows(e.road_class):
            continue
        w = edge_weight_seconds(e.length_m, profile.speed_kmh(e.road_class))
        add(fwd, e.from_node, e.to_node, w, e.length_m)
        add(rev, e.to_node, e.from_node, w, e.length_m)
        if not e.oneway:
            add(fwd, e.to_node, e.from_node, w, e.length_m)
            add(rev, e.from_node, e.to_node, w, e.length_m)

    adjacency = {u: tuple(sorted(fwd[u])) for u in sorted(fwd)}
    reverse = {u: tuple(sorted(rev[u])) for u in sorted(rev)}
    connected = frozenset(adjacency) | frozenset(reverse)
    return ProfiledGraph(
        profile=profile,
        adjacency=adjacency,
        reverse=reverse,
        nodes=frozenset(net.nodes),
        connected_nodes=connected,
    )


def _single_source(g: ProfiledGraph, src: int) -> tuple[dict[int, int], dict[int, float], dict[int, tuple[int, ...]]]:
    """Dijkstra from ``src``: times, and per-node distance/geometry along the
    lexicographically smallest minimum-time path."""
    adj = g.adjacency
    time: dict[int, int] = {src: 0}
    done: set[int] = set()
    heap: list[tuple[int, int]] = [(0, src)]
    while heap:
        t, u = heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, w, _d in adj.get(u, ()):
            nt = t + w
            tv = time.get(v)
            if tv is None or nt < tv:
                time[v] = nt
                heappush(heap, (nt, v))

    # Second pass over the tight-edge DAG. Weights are >= 1, so every tight
    # predecessor settles strictly earlier and processing by (time, id) is
    # safe. Among equal-time paths the full node sequence decides.
    paths: dict[int, tuple[int, ...]] = {src: (src,)}
    dist: dict[int, float] = {src: 0.0}
    radj = g.reverse
    for v in sorted(done, key=lambda n: (time[n], n)):
        if v == src:
            continue
        tv = time[v]
        best_path: tuple[int, ...] | None = None
        best_dist = 0.0
        for u, w, d in radj.get(v, ()):
            tu = time.get(u)
            if tu is None or tu + w != tv:
                continue
            cand = paths[u] + (v,)
            if best_path is None or cand < best_path:
                best_path = cand
                best_dist = dist[u] + d
            elif cand == best_path and dist[u] + d < best_dist:
                # parallel edges with equal weight: keep the shorter one
                best_dist = dist[u] + d
        assert best_path is not None
        paths[v] = best_path
        dist[v] = best_dist
    return time, dist, paths


def shortest_path(g: ProfiledGraph, from_node: int, to_node: int) -> PathResult | None:
    """Minimum-travel-time path, or ``None`` when unreachable.

    Ties on time are broken by the lexicographically smallest node sequence,
    making results reproducible.
    """
    for n in (from_node, to_node):
        if n not in g.nodes:
            raise ValueError(f"unknown node {n}")
    if from_node == to_node:
        return PathResult(0, 0.0, (from_node,))
    time, dist, paths = _single_source(g, from_node)
    if to_node not in time:
        return None
    return PathResult(time[to_node], dist[to_node], paths[to_node])


def cost_matrices(g: ProfiledGraph, points: Sequence[int], threads: int | None = None) -> CostMatrixSet:
    """All-pairs matrices over ``points`` via one search per source point.

    The result is identical regardless of ``threads``.
    """
    if not points:
        raise ValueError("points must be non-empty")
    for p in points:
        if p not in g.nodes:
            raise ValueError(f"unknown node {p}")

    unique = sorted(set(points))

    def row_for(src: int) -> tuple[list[int | None], list[int | None]]:
        time, dist, _paths = _single_source(g, src)
        trow: list[int | None] = []
        drow: list[int | None] = []
        for tgt in points:
            t = time.get(tgt)
            if t is None:
                trow.append(None)
                drow.append(None)
            else:
                trow.append(t)
                drow.append(int(dist[tgt] + 0.5))
        return trow, drow

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = dict(zip(unique, pool.map(row_for, unique)))
    else:
        rows = {src: row_for(src) for src in unique}

    time_rows = [list(rows[p][0]) for p in points]
    dist_rows = [list(rows[p][1]) for p in points]
    return CostMatrixSet(profile=g.profile.name, points=list(points), time_s=time_rows, dist_m=dist_rows)


def nearest_connected_node(
    net: RoadNetwork, candidates: Iterable[int], p: GeoPoint, max_radius_m: float
) -> SnapResult:
    """Nearest candidate node by haversine; ties broken by smallest node id."""
    if not max_radius_m > 0:
        raise ValueError("max_radius_m must be positive")
    best_id: int | None = None
    best_dist = float("inf")
    for nid in candidates:
        d = haversine_m(net.nodes[nid], p)
        if d < best_dist or (d == best_dist and (best_id is None or nid < best_id)):
            best_id = nid
            best_dist = d
    if best_id is None or best_dist > max_radius_m:
        raise SnapFailed(p, best_dist, max_radius_m)
    return SnapResult(node_id=best_id, snap_dist_m=best_dist)


def snap_point(net: RoadNetwork, g: ProfiledGraph, p: GeoPoint, max_radius_m: float) -> SnapResult:
    """Snap a GPS point to the nearest node with an accessible incident edge."""
    return nearest_connected_node(net, sorted(g.connected_nodes), p, max_radius_m)
