"""Customer/facility/fleet ingestion and problem-instance assembly.

Reads the customer, facility, and fleet tables, snaps every location to the
road network, and builds a validated :class:`ProblemInstance` holding one
cost matrix per fleet profile (depot at index 0).
"""
from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterable, Sequence

from .errors import LoadError, SnapFailed, ValidationError
from .geo import GeoPoint
from .osmnet import (
    CostMatrixSet,
    ProfiledGraph,
    RoadNetwork,
    SnapResult,
    VehicleProfile,
    build_profiled_graph,
    cost_matrices,
    nearest_connected_node,
)

log = logging.getLogger(__name__)

FACILITY_KINDS = ("depot", "focal_point")


@dataclass(frozen=True)
class Customer:
    id: str
    location: GeoPoint
    buckets: int = 1
    zone: str = ""
    phone: str | None = None


@dataclass(frozen=True)
class Facility:
    id: str
    location: GeoPoint
    kind: str


@dataclass(frozen=True)
class VehicleTypeSpec:
    name: str
    capacity_buckets: int
    profile: str
    count: int = 1


@dataclass(frozen=True)
class Exclusion:
    customer_id: str
    reason: str


@dataclass(frozen=True)
class Finding:
    severity: str  # "fatal" | "warning"
    code: str
    message: str


@dataclass
class ProblemInstance:
    """Depot, customers, fleet, and per-profile cost matrices.

    Matrix point order is ``[depot] + customers`` and identical across
    profiles; customer i (0-based) sits at matrix index i + 1.
    """

    depot: Facility
    customers: list[Customer]
    fleet: list[VehicleTypeSpec]
    matrices: dict[str, CostMatrixSet]
    depot_node: int
    depot_snap: SnapResult
    snap_report: dict[str, SnapResult] = field(default_factory=dict)
    exclusions: list[Exclusion] = field(default_factory=list)
    focal_points: list[Facility] = field(default_factory=list)

    def customer_at(self, matrix_index: int) -> Customer:
        return self.customers[matrix_index - 1]

    def demand(self, matrix_index: int) -> int:
        return self.customers[matrix_index - 1].buckets

    def to_json_dict(self) -> dict:
        def point(p: GeoPoint) -> list[float]:
            return [p.lat, p.lon]

        return {
            "depot": {"id": self.depot.id, "location": point(self.depot.location), "kind": self.depot.kind},
            "customers": [
                {
                    "id": c.id,
                    "location": point(c.location),
                    "buckets": c.buckets,
                    "zone": c.zone,
                    "phone": c.phone,
                }
                for c in self.customers
            ],
            "fleet": [
                {
                    "name": v.name,
                    "capacity_buckets": v.capacity_buckets,
                    "profile": v.profile,
                    "count": v.count,
                }
                for v in self.fleet
            ],
            "matrices": {name: m.to_json_dict() for name, m in self.matrices.items()},
            "depot_node": self.depot_node,
            "depot_snap": {"node_id": self.depot_snap.node_id, "snap_dist_m": self.depot_snap.snap_dist_m},
            "snap_report": {
                cid: {"node_id": s.node_id, "snap_dist_m": s.snap_dist_m}
                for cid, s in self.snap_report.items()
            },
            "exclusions": [{"customer_id": e.customer_id, "reason": e.reason} for e in self.exclusions],
            "focal_points": [
                {"id": f.id, "location": point(f.location), "kind": f.kind} for f in self.focal_points
            ],
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ProblemInstance":
        def point(v: Sequence[float]) -> GeoPoint:
            return GeoPoint(v[0], v[1])

        return cls(
            depot=Facility(doc["depot"]["id"], point(doc["depot"]["location"]), doc["depot"]["kind"]),
            customers=[
                Customer(
                    id=c["id"],
                    location=point(c["location"]),
                    buckets=c["buckets"],
                    zone=c["zone"],
                    phone=c["phone"],
                )
                for c in doc["customers"]
            ],
            fleet=[
                VehicleTypeSpec(v["name"], v["capacity_buckets"], v["profile"], v["count"])
                for v in doc["fleet"]
            ],
            matrices={name: CostMatrixSet.from_json_dict(m) for name, m in doc["matrices"].items()},
            depot_node=doc["depot_node"],
            depot_snap=SnapResult(doc["depot_snap"]["node_id"], doc["depot_snap"]["snap_dist_m"]),
            snap_report={
                cid: SnapResult(s["node_id"], s["snap_dist_m"]) for cid, s in doc["snap_report"].items()
            },
            exclusions=[Exclusion(e["customer_id"], e["reason"]) for e in doc["exclusions"]],
            focal_points=[
                Facility(f["id"], point(f["location"]), f["kind"]) for f in doc.get("focal_points", [])
            ],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str | bytes) -> "ProblemInstance":
        return cls.from_json_dict(json.loads(text))


def _decode_rows(source: bytes | str | Path | BinaryIO) -> list[list[str]]:
    if isinstance(source, (str, Path)):
        data = Path(source).read_bytes()
    elif isinstance(source, bytes):
        data = source
    else:
        data = source.read()
    text = data.decode("utf-8-sig")
    return list(csv.reader(io.StringIO(text)))


def _parse_point(lat_s: str, lon_s: str) -> GeoPoint:
    try:
        lat = float(lat_s)
    except ValueError:
        raise ValueError("invalid latitude") from None
    if not -90.0 <= lat <= 90.0:
        raise ValueError("invalid latitude")
    try:
        lon = float(lon_s)
    except ValueError:
        raise ValueError("invalid longitude") from None
    if not -180.0 <= lon <= 180.0:
        raise ValueError("invalid longitude")
    return GeoPoint(lat, lon)


def load_customers(source: bytes | str | Path | BinaryIO, max_bad_ratio: float = 0.1) -> list[Customer]:
    """Load ``customers.csv`` (header ``id,lat,lon,buckets,zone,phone``).

    Bad rows are skipped with a logged warning; when more than
    ``max_bad_ratio`` of the data rows are bad the whole load aborts with a
    :class:`LoadError` listing every row-level problem. A blank buckets
    field defaults to 1.
    """
    rows = _decode_rows(source)
    if not rows:
        raise LoadError("customers: empty file")
    header = [h.strip().lower() for h in rows[0]]
    if header[:5] != ["id", "lat", "lon", "buckets", "zone"]:
        raise LoadError("customers: header must start with id,lat,lon,buckets,zone")

    customers: list[Customer] = []
    errors: list[str] = []
    seen: set[str] = set()
    data_rows = 0
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not f.strip() for f in row):
            continue
        data_rows += 1
        try:
            if len(row) < 5:
                raise ValueError("too few fields")
            cid = row[0].strip()
            if not cid:
                raise ValueError("missing id")
            if cid in seen:
                raise ValueError(f"duplicate id '{cid}'")
            location = _parse_point(row[1].strip(), row[2].strip())
            buckets_s = row[3].strip()
            if buckets_s:
                try:
                    buckets = int(buckets_s)
                except ValueError:
                    raise ValueError("invalid buckets") from None
                if buckets <= 0:
                    raise ValueError("invalid buckets")
            else:
                buckets = 1
            zone = row[4].strip()
            phone = row[5].strip() if len(row) > 5 and row[5].strip() else None
        except ValueError as exc:
            errors.append(f"row {lineno}: {exc}")
            continue
        seen.add(cid)
        customers.append(Customer(id=cid, location=location, buckets=buckets, zone=zone, phone=phone))

    if errors and len(errors) > max_bad_ratio * data_rows:
        raise LoadError(
            f"customers: {len(errors)} of {data_rows} rows invalid: " + "; ".join(errors),
            row_errors=errors,
        )
    for msg in errors:
        log.warning("customers: skipped %s", msg)
    return customers


def load_facilities(source: bytes | str | Path | BinaryIO) -> list[Facility]:
    """Load ``facilities.csv`` (header ``id,lat,lon,kind``); any bad row aborts."""
    rows = _decode_rows(source)
    if not rows:
        raise LoadError("facilities: empty file")
    header = [h.strip().lower() for h in rows[0]]
    if header[:4] != ["id", "lat", "lon", "kind"]:
        raise LoadError("facilities: header must be id,lat,lon,kind")

    facilities: list[Facility] = []
    errors: list[str] = []
    seen: set[str] = set()
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not f.strip() for f in row):
            continue
        try:
            if len(row) < 4:
                raise ValueError("too few fields")
            fid = row[0].strip()
            if not fid:
                raise ValueError("missing id")
            if fid in seen:
                raise ValueError(f"duplicate id '{fid}'")
            location = _parse_point(row[1].strip(), row[2].strip())
            kind = row[3].strip()
            if kind not in FACILITY_KINDS:
                raise ValueError(f"invalid kind '{kind}'")
        except ValueError as exc:
            errors.append(f"row {lineno}: {exc}")
            continue
        seen.add(fid)
        facilities.append(Facility(id=fid, location=location, kind=kind))
    if errors:
        raise LoadError("facilities: " + "; ".join(errors), row_errors=errors)
    return facilities


def load_fleet(source: bytes | str | Path | BinaryIO, profile_names: Iterable[str]) -> list[VehicleTypeSpec]:
    """Load and validate ``fleet.json`` against the declared profile names."""
    if isinstance(source, (str, Path)):
        data = Path(source).read_bytes()
    elif isinstance(source, bytes):
        data = source
    else:
        data = source.read()
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"fleet: invalid JSON: {exc}") from exc
    if not isinstance(doc, list):
        raise ValidationError("fleet: document must be a JSON array")
    if not doc:
        raise ValidationError("fleet must be non-empty")

    known = set(profile_names)
    fleet: list[VehicleTypeSpec] = []
    seen: set[str] = set()
    for i, entry in enumerate(doc):
        if not isinstance(entry, dict):
            raise ValidationError(f"fleet[{i}]: entry must be an object")
        name = entry.get("name")
        if not isinstance(name, str) or not name:
            raise ValidationError(f"fleet[{i}].name: must be a non-empty string")
        if name in seen:
            raise ValidationError(f"fleet[{i}].name: duplicate vehicle type '{name}'")
        seen.add(name)
        capacity = entry.get("capacity_buckets")
        if not isinstance(capacity, int) or isinstance(capacity, bool) or capacity <= 0:
            raise ValidationError(f"vehicle type '{name}': capacity must be a positive integer")
        profile = entry.get("profile")
        if profile not in known:
            raise ValidationError(f"vehicle type '{name}': unknown profile '{profile}'")
        count = entry.get("count", 1)
        if not isinstance(count, int) or isinstance(count, bool) or count <= 0:
            raise ValidationError(f"vehicle type '{name}': count must be a positive integer")
        fleet.append(VehicleTypeSpec(name=name, capacity_buckets=capacity, profile=profile, count=count))
    return fleet


def build_instance(
    net: RoadNetwork,
    profiles: Sequence[VehicleProfile],
    customers: Sequence[Customer],
    facilities: Sequence[Facility],
    fleet: Sequence[VehicleTypeSpec],
    snap_radius_m: float = 100.0,
    threads: int | None = None,
) -> ProblemInstance:
    """Snap all locations and assemble the instance with per-profile matrices.

    A failed depot snap is fatal; customers that cannot be snapped, or that
    no fleet profile can reach round-trip, are moved to the exclusion report
    instead of failing the build.
    """
    profile_by_name = {p.name: p for p in profiles}
    for spec in fleet:
        if spec.profile not in profile_by_name:
            raise ValidationError(f"vehicle type '{spec.name}': unknown profile '{spec.profile}'")
    depots = [f for f in facilities if f.kind == "depot"]
    if len(depots) != 1:
        raise ValidationError(f"exactly one depot required, found {len(depots)}")
    depot = depots[0]
    focal_points = [f for f in facilities if f.kind == "focal_point"]

    used_profiles: list[str] = []
    for spec in fleet:
        if spec.profile not in used_profiles:
            used_profiles.append(spec.profile)
    graphs: dict[str, ProfiledGraph] = {
        name: build_profiled_graph(net, profile_by_name[name]) for name in used_profiles
    }

    # Snap against the union of per-profile connectivity so a node reachable
    # by any fleet vehicle is a valid target; per-profile unreachability then
    # shows up as INF matrix entries rather than a snap failure.
    snap_nodes: set[int] = set()
    for g in graphs.values():
        snap_nodes |= g.connected_nodes
    candidates = sorted(snap_nodes)
    if not candidates:
        raise ValidationError("no profile leaves any accessible road edge")

    depot_snap = nearest_connected_node(net, candidates, depot.location, snap_radius_m)

    kept: list[Customer] = []
    kept_snaps: list[SnapResult] = []
    exclusions: list[Exclusion] = []
    for c in customers:
        try:
            snap = nearest_connected_node(net, candidates, c.location, snap_radius_m)
        except SnapFailed as exc:
            exclusions.append(Exclusion(c.id, f"snap failed: {exc}"))
            continue
        kept.append(c)
        kept_snaps.append(snap)

    points = [depot_snap.node_id] + [s.node_id for s in kept_snaps]
    matrices = {name: cost_matrices(graphs[name], points, threads=threads) for name in used_profiles}

    # Round-trip reachability under at least one fleet profile.
    reachable: list[int] = []
    for i in range(1, len(points)):
        ok = any(
            m.time_s[0][i] is not None and m.time_s[i][0] is not None for m in matrices.values()
        )
        if ok:
            reachable.append(i)
        else:
            exclusions.append(Exclusion(kept[i - 1].id, "unreachable by every fleet profile"))
    if len(reachable) != len(kept):
        keep_idx = [0] + reachable
        matrices = {name: m.submatrix(keep_idx) for name, m in matrices.items()}
        kept = [kept[i - 1] for i in reachable]
        kept_snaps = [kept_snaps[i - 1] for i in reachable]

    for e in exclusions:
        log.warning("excluded customer %s: %s", e.customer_id, e.reason)

    return ProblemInstance(
        depot=depot,
        customers=kept,
        fleet=list(fleet),
        matrices=matrices,
        depot_node=depot_snap.node_id,
        depot_snap=depot_snap,
        snap_report={c.id: s for c, s in zip(kept, kept_snaps)},
        exclusions=exclusions,
        focal_points=focal_points,
    )


def validate_instance(inst: ProblemInstance, snap_warn_m: float = 50.0) -> list[Finding]:
    """Report fatal and warning findings; the caller decides what to do."""
    findings: list[Finding] = []
    max_capacity = max((v.capacity_buckets for v in inst.fleet), default=0)
    for i, c in enumerate(inst.customers, start=1):
        if c.buckets > max_capacity:
            findings.append(
                Finding(
                    "fatal",
                    "demand_exceeds_capacity",
                    f"customer {c.id}: demand {c.buckets} exceeds all capacities (max {max_capacity})",
                )
            )
            continue
        capable = False
        for spec in inst.fleet:
            if spec.capacity_buckets < c.buckets:
                continue
            m = inst.matrices[spec.profile]
            if m.time_s[0][i] is not None and m.time_s[i][0] is not None:
                capable = True
                break
        if not capable:
            findings.append(
                Finding(
                    "fatal",
                    "no_capable_vehicle",
                    f"customer {c.id}: no vehicle type can both carry and reach it",
                )
            )
    for c in inst.customers:
        snap = inst.snap_report[c.id]
        if snap.snap_dist_m > snap_warn_m:
            findings.append(
                Finding(
                    "warning",
                    "snap_distance",
                    f"customer {c.id}: snapped {snap.snap_dist_m:.0f} m away (threshold {snap_warn_m:.0f} m)",
                )
            )
    for name, m in inst.matrices.items():
        for i, c in enumerate(inst.customers, start=1):
            out_ok = m.time_s[0][i] is not None
            back_ok = m.time_s[i][0] is not None
            if out_ok != back_ok:
                direction = "outbound only" if out_ok else "return only"
                findings.append(
                    Finding(
                        "warning",
                        "asymmetric_reachability",
                        f"customer {c.id}: {direction} under profile '{name}'",
                    )
                )
    return findings


def min_trips_lower_bound(inst: ProblemInstance) -> int:
    """Bucket-packing bound: ceil(total demand / largest capacity)."""
    total = sum(c.buckets for c in inst.customers)
    if total == 0:
        return 0
    max_capacity = max(v.capacity_buckets for v in inst.fleet)
    return -(-total // max_capacity)


def slice_instance(inst: ProblemInstance, customer_indices: Sequence[int]) -> ProblemInstance:
    """Sub-instance over the given 0-based customer positions (same depot)."""
    keep = [0] + [i + 1 for i in customer_indices]
    customers = [inst.customers[i] for i in customer_indices]
    return ProblemInstance(
        depot=inst.depot,
        customers=customers,
        fleet=list(inst.fleet),
        matrices={name: m.submatrix(keep) for name, m in inst.matrices.items()},
        depot_node=inst.depot_node,
        depot_snap=inst.depot_snap,
        snap_report={c.id: inst.snap_report[c.id] for c in customers if c.id in inst.snap_report},
        exclusions=[],
        focal_points=list(inst.focal_points),
    )
