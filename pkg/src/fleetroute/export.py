"""Field-ready artifacts: GeoJSON route maps, SVG renderings, and reports.

GeoJSON files carry one LineString per trip with real road geometry plus one
numbered Point per customer and a depot Point, loadable in any map viewer.
The SVG renderer is dependency free and byte-deterministic so map output can
be regression tested.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

from .errors import ExportError
from .geo import GeoPoint
from .model import ProblemInstance
from .osmnet import ProfiledGraph, RoadNetwork, shortest_path
from .solver import Solution

# Fixed 12-color cycle assigned by trip index.
TRIP_COLORS = (
    "#e6194b",
    "#3cb44b",
    "#4363d8",
    "#f58231",
    "#911eb4",
    "#46f0f0",
    "#f032e6",
    "#bcf60c",
    "#008080",
    "#9a6324",
    "#800000",
    "#808000",
)

_METERS_PER_DEGREE = 111_194.93


def trip_color(trip_index: int) -> str:
    return TRIP_COLORS[trip_index % len(TRIP_COLORS)]


@dataclass(frozen=True)
class RouteGeometry:
    """Road geometry of one trip: per-leg node sequences plus totals."""

    trip_index: int
    legs: tuple[tuple[int, ...], ...]
    coords: tuple[tuple[float, float], ...]  # concatenated (lat, lon) polyline
    total_dist_m: float
    total_time_s: int


def build_route_geometries(
    net: RoadNetwork,
    inst: ProblemInstance,
    graphs: dict[str, ProfiledGraph],
    sol: Solution,
) -> list[RouteGeometry]:
    """Resolve each trip's depot-to-depot road geometry via shortest paths.

    ``graphs`` maps profile name to its profiled graph.
    """
    profile_of = {v.name: v.profile for v in inst.fleet}
    point_ids: dict[str, list[int]] = {p: m.points for p, m in inst.matrices.items()}
    geometries = []
    for ti, trip in enumerate(sol.trips):
        profile = profile_of.get(trip.vehicle_type)
        if profile is None or profile not in graphs:
            raise ExportError(f"trip {ti}: no graph for vehicle type '{trip.vehicle_type}'")
        g = graphs[profile]
        points = point_ids[profile]
        node_seq = [points[0]] + [points[s] for s in trip.stops] + [points[0]]
        legs: list[tuple[int, ...]] = []
        coords: list[tuple[float, float]] = []
        total_dist = 0.0
        total_time = 0
        for li, (a, b) in enumerate(zip(node_seq, node_seq[1:])):
            path = shortest_path(g, a, b)
            if path is None:
                raise ExportError(f"trip {ti} leg {li} ({a}->{b}): no path under profile '{profile}'")
            legs.append(path.nodes)
            total_dist += path.dist_m
            total_time += path.time_s
            for k, node in enumerate(path.nodes):
                if coords and k == 0:
                    continue  # joint shared with previous leg
                p = net.nodes[node]
                coords.append((p.lat, p.lon))
        geometries.append(
            RouteGeometry(
                trip_index=ti,
                legs=tuple(legs),
                coords=tuple(coords),
                total_dist_m=total_dist,
                total_time_s=total_time,
            )
        )
    return geometries


def _lonlat(lat: float, lon: float) -> list[float]:
    return [round(lon, 6), round(lat, 6)]


def routes_to_geojson(
    inst: ProblemInstance,
    sol: Solution,
    geometries: Sequence[RouteGeometry],
    depot_coord: GeoPoint | None = None,
) -> dict:
    """RFC 7946 FeatureCollection of trips, numbered customers, and the depot.

    ``depot_coord`` is the snapped depot node position; when omitted it is
    taken from the first geometry, falling back to the depot's GPS record.
    """
    if len(geometries) != len(sol.trips):
        raise ExportError(f"expected {len(sol.trips)} geometries, got {len(geometries)}")
    if depot_coord is None:
        if geometries and geometries[0].coords:
            lat, lon = geometries[0].coords[0]
            depot_coord = GeoPoint(lat, lon)
        else:
            depot_coord = inst.depot.location

    features: list[dict] = []
    for ti, (trip, geom) in enumerate(zip(sol.trips, geometries)):
        zones = []
        for s in trip.stops:
            z = inst.customers[s - 1].zone
            if z not in zones:
                zones.append(z)
        features.append(
            {
                "type": "Feature",
                "geometry": {
                    "type": "LineString",
                    "coordinates": [_lonlat(lat, lon) for lat, lon in geom.coords],
                },
                "properties": {
                    "trip": ti,
                    "vehicle_type": trip.vehicle_type,
                    "color": trip_color(ti),
                    "zone": ",".join(zones),
                },
            }
        )
    for ti, trip in enumerate(sol.trips):
        for order, s in enumerate(trip.stops, start=1):
            c = inst.customers[s - 1]
            features.append(
                {
                    "type": "Feature",
                    "geometry": {"type": "Point", "coordinates": _lonlat(c.location.lat, c.location.lon)},
                    "properties": {
                        "id": c.id,
                        "phone": c.phone,
                        "order": order,
                        "trip": ti,
                        "color": trip_color(ti),
                        "zone": c.zone,
                    },
                }
            )
    features.append(
        {
            "type": "Feature",
            "geometry": {"type": "Point", "coordinates": _lonlat(depot_coord.lat, depot_coord.lon)},
            "properties": {"kind": "depot", "id": inst.depot.id},
        }
    )
    for f in inst.focal_points:
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": _lonlat(f.location.lat, f.location.lon)},
                "properties": {"kind": "focal_point", "id": f.id},
            }
        )
    return {"type": "FeatureCollection", "features": features}


def geojson_to_str(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _feature_coords(feature: dict) -> list[list[float]]:
    geom = feature.get("geometry", {})
    if geom.get("type") == "Point":
        return [geom["coordinates"]]
    if geom.get("type") == "LineString":
        return list(geom["coordinates"])
    return []


def render_svg(geojson: dict, canvas_px: int = 800) -> str:
    """Render a FeatureCollection to a deterministic standalone SVG.

    Equirectangular projection fitted to the feature bounds with a 5%
    margin; degenerate bounds get an implied 100 m extent.
    """
    features = geojson.get("features", [])
    pts = [c for f in features for c in _feature_coords(f)]
    if not pts:
        raise ExportError("cannot render an empty feature collection")

    lat_mid = (min(p[1] for p in pts) + max(p[1] for p in pts)) / 2.0
    kx = math.cos(math.radians(lat_mid))

    def world(lon: float, lat: float) -> tuple[float, float]:
        return lon * kx, lat

    xs, ys = zip(*(world(lon, lat) for lon, lat in pts))
    cx = (min(xs) + max(xs)) / 2.0
    cy = (min(ys) + max(ys)) / 2.0
    min_extent = 100.0 / _METERS_PER_DEGREE
    dx = max(max(xs) - min(xs), min_extent)
    dy = max(max(ys) - min(ys), min_extent)
    usable = canvas_px * 0.90  # 5% margin each side
    scale = min(usable / dx, usable / dy)

    def px(lon: float, lat: float) -> tuple[float, float]:
        wx, wy = world(lon, lat)
        return (wx - cx) * scale + canvas_px / 2.0, canvas_px / 2.0 - (wy - cy) * scale

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{canvas_px}" height="{canvas_px}" '
        f'viewBox="0 0 {canvas_px} {canvas_px}">',
        f'<rect width="{canvas_px}" height="{canvas_px}" fill="#ffffff"/>',
    ]
    markers: list[str] = []
    for f in features:
        geom = f.get("geometry", {})
        props = f.get("properties", {})
        if geom.get("type") == "LineString":
            coords = " ".join(f"{px(lon, lat)[0]:.2f},{px(lon, lat)[1]:.2f}" for lon, lat in geom["coordinates"])
            color = props.get("color", "#555555")
            out.append(
                f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="2.5" '
                'stroke-linejoin="round" stroke-linecap="round"/>'
            )
        elif geom.get("type") == "Point":
            lon, lat = geom["coordinates"]
            x, y = px(lon, lat)
            if props.get("kind") == "depot":
                markers.append(
                    f'<rect x="{x - 7:.2f}" y="{y - 7:.2f}" width="14" height="14" fill="#1a355e" '
                    'stroke="#ffffff" stroke-width="1.5"/>'
                    f'<text x="{x:.2f}" y="{y:.2f}" text-anchor="middle" dy="0.35em" '
                    'font-family="sans-serif" font-size="9" fill="#ffffff">D</text>'
                )
            elif props.get("kind") == "focal_point":
                markers.append(
                    f'<circle cx="{x:.2f}" cy="{y:.2f}" r="5" fill="none" stroke="#1a355e" stroke-width="1.5"/>'
                )
            else:
                color = props.get("color", "#555555")
                label = props.get("order", "")
                markers.append(
                    f'<circle cx="{x:.2f}" cy="{y:.2f}" r="8" fill="{color}" stroke="#ffffff" '
                    'stroke-width="1.5"/>'
                    f'<text x="{x:.2f}" y="{y:.2f}" text-anchor="middle" dy="0.35em" '
                    f'font-family="sans-serif" font-size="9" fill="#ffffff">{label}</text>'
                )
    out.extend(markers)  # markers above lines
    out.append("</svg>")
    return "\n".join(out) + "\n"


def format_hms(seconds: int) -> str:
    h, rem = divmod(int(seconds), 3600)
    m, s = divmod(rem, 60)
    return f"{h}:{m:02d}:{s:02d}"


def _trip_distance_m(inst: ProblemInstance, trip) -> int:
    profile = {v.name: v.profile for v in inst.fleet}[trip.vehicle_type]
    dist = inst.matrices[profile].dist_m
    total = 0
    prev = 0
    for s in tuple(trip.stops) + (0,):
        d = dist[prev][s]
        total += d if d is not None else 0
        prev = s
    return total


def summary_report(inst: ProblemInstance, sol: Solution, baseline_trips: int | None = None) -> str:
    """Plain-text run summary with a per-trip table.

    With a baseline trip count, appends the whole-percent trip change, e.g.
    38 -> 33 trips reports "trip change: -13%".
    """
    total_dist_m = sum(_trip_distance_m(inst, t) for t in sol.trips)
    buckets = sum(t.load_buckets for t in sol.trips)
    lines = [
        f"trips: {sol.trip_count}",
        f"travel time: {format_hms(sol.travel_seconds)}",
        f"distance: {total_dist_m / 1000.0:.1f} km",
        f"buckets: {buckets}",
        "",
        f"{'trip':>4}  {'vehicle_type':<16} {'stops':>5} {'buckets':>7} {'travel':>9} {'distance':>9}",
    ]
    for ti, t in enumerate(sol.trips, start=1):
        lines.append(
            f"{ti:>4}  {t.vehicle_type:<16} {len(t.stops):>5} {t.load_buckets:>7} "
            f"{format_hms(t.travel_seconds):>9} {_trip_distance_m(inst, t) / 1000.0:>6.1f} km"
        )
    if baseline_trips is not None and baseline_trips > 0:
        pct = round((sol.trip_count - baseline_trips) / baseline_trips * 100)
        lines.append("")
        lines.append(f"baseline trips: {baseline_trips}")
        lines.append(f"trip change: {pct:+d}%")
    return "\n".join(lines) + "\n"
