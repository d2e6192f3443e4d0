"""Command-line pipeline: prepare matrices, solve per zone, export maps.

``fleetroute matrix|solve|export --config run.json`` with per-command flags.
Matrix files are cached behind a checksum over the input files, so a full
run never recomputes them when valid files exist. Exit codes: 0 success,
1 input/validation error, 2 infeasible, 3 internal error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import re
import sys
import tempfile
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .cluster import build_clusters
from .errors import (
    EmptyNetworkError,
    EvaluationError,
    ExportError,
    FleetRouteError,
    InfeasibleCustomerError,
    LoadError,
    OsmParseError,
    SnapFailed,
    ValidationError,
)
from .export import (
    build_route_geometries,
    format_hms,
    geojson_to_str,
    render_svg,
    routes_to_geojson,
    summary_report,
)
from .model import (
    ProblemInstance,
    build_instance,
    load_customers,
    load_facilities,
    load_fleet,
    min_trips_lower_bound,
    slice_instance,
    validate_instance,
)
from .osmnet import (
    CostMatrixSet,
    SnapResult,
    build_profiled_graph,
    parse_osm_xml,
    parse_profiles,
)
from .solver import (
    Solution,
    SolverConfig,
    Trip,
    check_feasible,
    gls_run,
    solution_from_json_dict,
    solution_to_json_dict,
)

MATRIX_SCHEMA = "fleetroute-matrix/1"
SNAP_SCHEMA = "fleetroute-snap-report/1"

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INFEASIBLE = 2
EXIT_INTERNAL = 3


@dataclass
class RunConfig:
    network: Path
    profiles: Path
    customers: Path
    facilities: Path
    fleet: Path
    out_dir: Path
    solver: SolverConfig
    snap_radius_m: float = 100.0
    zones: list[str] | None = None


def load_run_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"config {path}: {exc}") from exc
    paths = doc.get("paths")
    if not isinstance(paths, dict):
        raise ValidationError(f"config {path}: missing 'paths' object")
    base = path.parent

    def resolve(key: str) -> Path:
        v = paths.get(key)
        if not isinstance(v, str) or not v:
            raise ValidationError(f"config {path}: paths.{key} missing")
        p = Path(v)
        return p if p.is_absolute() else base / p

    solver_doc = doc.get("solver", {})
    if not isinstance(solver_doc, dict):
        raise ValidationError(f"config {path}: 'solver' must be an object")
    known = {f.name for f in fields(SolverConfig)}
    unknown = set(solver_doc) - known
    if unknown:
        raise ValidationError(f"config {path}: unknown solver options {sorted(unknown)}")
    zones = doc.get("zones")
    if zones is not None and not (isinstance(zones, list) and all(isinstance(z, str) for z in zones)):
        raise ValidationError(f"config {path}: 'zones' must be a list of strings")
    cfg = RunConfig(
        network=resolve("network"),
        profiles=resolve("profiles"),
        customers=resolve("customers"),
        facilities=resolve("facilities"),
        fleet=resolve("fleet"),
        out_dir=resolve("out_dir"),
        solver=SolverConfig(**solver_doc),
        snap_radius_m=float(doc.get("snap_radius_m", 100.0)),
        zones=zones,
    )
    for key in ("network", "profiles", "customers", "facilities", "fleet"):
        p = getattr(cfg, key)
        if not p.is_file():
            raise ValidationError(f"config {path}: paths.{key} does not exist: {p}")
    return cfg


def _write_atomic(path: Path, data: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _inputs_checksum(cfg: RunConfig) -> str:
    h = hashlib.sha256()
    for key in ("network", "profiles", "customers", "facilities", "fleet"):
        h.update(getattr(cfg, key).read_bytes())
        h.update(b"\x00")
    h.update(repr(cfg.snap_radius_m).encode())
    return h.hexdigest()


def _threads() -> int | None:
    env = os.environ.get("FLEETROUTE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValidationError(f"FLEETROUTE_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count()


def _matrix_path(cfg: RunConfig, profile: str) -> Path:
    return cfg.out_dir / f"matrix-{_slug(profile)}.json"


def _snap_report_path(cfg: RunConfig) -> Path:
    return cfg.out_dir / "snap-report.json"


def _slug(name: str) -> str:
    cleaned = re.sub(r"[^A-Za-z0-9_-]+", "_", name).strip("_")
    return cleaned or "unzoned"


def _load_tables(cfg: RunConfig):
    profiles = parse_profiles(cfg.profiles)
    customers = load_customers(cfg.customers)
    facilities = load_facilities(cfg.facilities)
    fleet = load_fleet(cfg.fleet, [p.name for p in profiles])
    return profiles, customers, facilities, fleet


def _try_cached_instance(cfg: RunConfig, checksum: str) -> ProblemInstance | None:
    snap_path = _snap_report_path(cfg)
    if not snap_path.is_file():
        return None
    try:
        snap_doc = json.loads(snap_path.read_text())
    except (OSError, json.JSONDecodeError):
        return None
    if snap_doc.get("schema") != SNAP_SCHEMA or snap_doc.get("inputs_checksum") != checksum:
        return None

    profiles, customers, facilities, fleet = _load_tables(cfg)
    used = []
    for spec in fleet:
        if spec.profile not in used:
            used.append(spec.profile)
    matrices: dict[str, CostMatrixSet] = {}
    for profile in used:
        mpath = _matrix_path(cfg, profile)
        if not mpath.is_file():
            return None
        try:
            doc = json.loads(mpath.read_text())
        except (OSError, json.JSONDecodeError):
            return None
        if doc.get("schema") != MATRIX_SCHEMA or doc.get("inputs_checksum") != checksum:
            return None
        matrices[profile] = CostMatrixSet.from_json_dict(doc)

    depots = [f for f in facilities if f.kind == "depot"]
    if len(depots) != 1:
        raise ValidationError(f"exactly one depot required, found {len(depots)}")
    snap_report = {
        cid: SnapResult(s["node_id"], s["snap_dist_m"]) for cid, s in snap_doc["customers"].items()
    }
    kept = [c for c in customers if c.id in snap_report]
    from .model import Exclusion

    return ProblemInstance(
        depot=depots[0],
        customers=kept,
        fleet=fleet,
        matrices=matrices,
        depot_node=snap_doc["depot"]["node_id"],
        depot_snap=SnapResult(snap_doc["depot"]["node_id"], snap_doc["depot"]["snap_dist_m"]),
        snap_report=snap_report,
        exclusions=[Exclusion(e["customer_id"], e["reason"]) for e in snap_doc.get("exclusions", [])],
        focal_points=[f for f in facilities if f.kind == "focal_point"],
    )


def _prepare_instance(cfg: RunConfig, write: bool) -> tuple[ProblemInstance, bool]:
    """Build or load the instance; returns (instance, from_cache)."""
    checksum = _inputs_checksum(cfg)
    cached = _try_cached_instance(cfg, checksum)
    if cached is not None:
        return cached, True

    profiles, customers, facilities, fleet = _load_tables(cfg)
    net = parse_osm_xml(cfg.network)
    inst = build_instance(
        net, profiles, customers, facilities, fleet, snap_radius_m=cfg.snap_radius_m, threads=_threads()
    )
    if write:
        for profile, matrix in inst.matrices.items():
            doc = {"schema": MATRIX_SCHEMA, "inputs_checksum": checksum}
            doc.update(matrix.to_json_dict())
            _write_atomic(_matrix_path(cfg, profile), json.dumps(doc, sort_keys=True, separators=(",", ":")))
        snap_doc = {
            "schema": SNAP_SCHEMA,
            "inputs_checksum": checksum,
            "depot": {"node_id": inst.depot_snap.node_id, "snap_dist_m": inst.depot_snap.snap_dist_m},
            "customers": {
                cid: {"node_id": s.node_id, "snap_dist_m": s.snap_dist_m}
                for cid, s in inst.snap_report.items()
            },
            "exclusions": [{"customer_id": e.customer_id, "reason": e.reason} for e in inst.exclusions],
        }
        _write_atomic(_snap_report_path(cfg), json.dumps(snap_doc, sort_keys=True, separators=(",", ":")))
    return inst, False


def _zone_partition(inst: ProblemInstance, cfg: RunConfig, args) -> list[tuple[str, list[int]]]:
    """Ordered (zone, customer positions) pairs after filters."""
    if getattr(args, "no_zone_split", False):
        return [("all", list(range(len(inst.customers))))]
    by_zone: dict[str, list[int]] = {}
    for i, c in enumerate(inst.customers):
        by_zone.setdefault(c.zone, []).append(i)
    wanted = None
    if getattr(args, "zones", None):
        wanted = [z.strip() for z in args.zones.split(",") if z.strip()]
    elif cfg.zones:
        wanted = cfg.zones
    if wanted is not None:
        unknown = [z for z in wanted if z not in by_zone]
        if unknown:
            raise ValidationError(f"unknown zones: {', '.join(unknown)}")
        return [(z, by_zone[z]) for z in wanted]
    return [(z, by_zone[z]) for z in sorted(by_zone)]


def _solver_config(cfg: RunConfig, args) -> SolverConfig:
    sc = cfg.solver
    if getattr(args, "seed", None) is not None:
        sc = replace(sc, seed=args.seed)
    if getattr(args, "time_limit", None) is not None:
        sc = replace(sc, time_limit_s=args.time_limit)
    if getattr(args, "granularity", None) is not None:
        sc = replace(sc, granularity=args.granularity)
    return sc


def cmd_matrix(args) -> int:
    cfg = load_run_config(args.config)
    inst, from_cache = _prepare_instance(cfg, write=True)
    n_profiles = len(inst.matrices)
    state = "reused cached" if from_cache else "computed"
    print(f"{state} {n_profiles} matrix file(s) over {len(inst.customers)} customers", flush=True)
    for e in inst.exclusions:
        print(f"warning: excluded {e.customer_id}: {e.reason}", file=sys.stderr)
    return EXIT_OK


def cmd_solve(args) -> int:
    cfg = load_run_config(args.config)
    inst, _ = _prepare_instance(cfg, write=True)
    solver_cfg = _solver_config(cfg, args)

    findings = validate_instance(inst)
    fatal = [f for f in findings if f.severity == "fatal"]
    for f in findings:
        print(f"{f.severity}: {f.message}", file=sys.stderr)
    if fatal:
        print("instance is infeasible; aborting", file=sys.stderr)
        return EXIT_INFEASIBLE

    total_trips = 0
    total_travel = 0
    for zone, indices in _zone_partition(inst, cfg, args):
        if not indices:
            print(f"warning: zone {zone}: no customers, skipped", file=sys.stderr)
            continue
        zi = slice_instance(inst, indices)
        clusters = build_clusters(zi, solver_cfg.cluster_radius_m)
        sol = gls_run(zi, solver_cfg, clusters)
        violations = check_feasible(zi, sol)
        if violations:
            print(f"zone {zone}: infeasible solution: {violations[0]}", file=sys.stderr)
            return EXIT_INFEASIBLE
        assert sol.trip_count >= min_trips_lower_bound(zi)
        doc = solution_to_json_dict(zi, sol, clusters, zone=zone)
        _write_atomic(cfg.out_dir / f"solution-{_slug(zone)}.json", json.dumps(doc, sort_keys=True, separators=(",", ":")))
        print(f"zone {zone}: {sol.trip_count} trips, travel {format_hms(sol.travel_seconds)}")
        total_trips += sol.trip_count
        total_travel += sol.travel_seconds
    print(f"total: {total_trips} trips, travel {format_hms(total_travel)}")
    return EXIT_OK


def cmd_export(args) -> int:
    cfg = load_run_config(args.config)
    inst, _ = _prepare_instance(cfg, write=True)

    profiles = parse_profiles(cfg.profiles)
    net = parse_osm_xml(cfg.network)
    used = {v.profile for v in inst.fleet}
    graphs = {p.name: build_profiled_graph(net, p) for p in profiles if p.name in used}
    depot_coord = net.nodes[inst.depot_node]

    master_features: list[dict] = []
    seen_feature_keys: set[str] = set()
    merged_trips: list[Trip] = []
    merged_travel = 0
    merged_objective = 0
    merged_penalty = 0
    full_index = {c.id: i + 1 for i, c in enumerate(inst.customers)}

    zones = _zone_partition(inst, cfg, args)
    for zone, indices in zones:
        path = cfg.out_dir / f"solution-{_slug(zone)}.json"
        if not path.is_file():
            print(f"missing solution file for zone {zone}: {path}", file=sys.stderr)
            return EXIT_INPUT
        zi = slice_instance(inst, indices)
        doc = json.loads(path.read_text())
        sol = solution_from_json_dict(zi, doc)
        geometries = build_route_geometries(net, zi, graphs, sol)
        geo = routes_to_geojson(zi, sol, geometries, depot_coord=depot_coord)
        _write_atomic(cfg.out_dir / f"zone-{_slug(zone)}.geojson", geojson_to_str(geo))
        _write_atomic(cfg.out_dir / f"zone-{_slug(zone)}.svg", render_svg(geo, canvas_px=args.canvas_px))
        for feature in geo["features"]:
            key = geojson_to_str(feature)
            if key in seen_feature_keys:
                continue  # depot / focal points repeat per zone
            seen_feature_keys.add(key)
            master_features.append(feature)
        zone_ids = [c.id for c in zi.customers]
        for t in sol.trips:
            merged_trips.append(
                Trip(
                    vehicle_type=t.vehicle_type,
                    stops=tuple(full_index[zone_ids[s - 1]] for s in t.stops),
                    load_buckets=t.load_buckets,
                    travel_seconds=t.travel_seconds,
                )
            )
        merged_travel += sol.travel_seconds
        merged_objective += sol.objective
        merged_penalty += sol.penalty_seconds

    master = {"type": "FeatureCollection", "features": master_features}
    _write_atomic(cfg.out_dir / "master.geojson", geojson_to_str(master))

    merged = Solution(
        trips=tuple(merged_trips),
        travel_seconds=merged_travel,
        trip_count=len(merged_trips),
        objective=merged_objective,
        penalty_seconds=merged_penalty,
    )
    report = summary_report(inst, merged, baseline_trips=args.baseline_trips)
    _write_atomic(cfg.out_dir / "summary.txt", report)
    print(report, end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fleetroute",
        description="Mixed-fleet waste-collection routing: matrices, per-zone solving, map export.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_matrix = sub.add_parser("matrix", help="compute travel-time/distance matrices per fleet profile")
    p_matrix.add_argument("--config", required=True, help="run config JSON")
    p_matrix.set_defaults(func=cmd_matrix)

    p_solve = sub.add_parser("solve", help="solve routes per service zone")
    p_solve.add_argument("--config", required=True)
    p_solve.add_argument("--zones", help="comma-separated zone filter")
    p_solve.add_argument("--seed", type=int)
    p_solve.add_argument("--time-limit", type=float, dest="time_limit", help="seconds per zone")
    p_solve.add_argument("--no-zone-split", action="store_true", dest="no_zone_split")
    p_solve.add_argument("--granularity", choices=["seconds", "minutes"])
    p_solve.set_defaults(func=cmd_solve)

    p_export = sub.add_parser("export", help="write GeoJSON/SVG maps and the summary report")
    p_export.add_argument("--config", required=True)
    p_export.add_argument("--zones")
    p_export.add_argument("--baseline-trips", type=int, dest="baseline_trips")
    p_export.add_argument("--no-zone-split", action="store_true", dest="no_zone_split")
    p_export.add_argument("--canvas-px", type=int, dest="canvas_px", default=800)
    p_export.set_defaults(func=cmd_export)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InfeasibleCustomerError, EvaluationError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (
        LoadError,
        ValidationError,
        OsmParseError,
        EmptyNetworkError,
        SnapFailed,
        ExportError,
        FileNotFoundError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FleetRouteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001 - map anything unexpected to exit 3
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
