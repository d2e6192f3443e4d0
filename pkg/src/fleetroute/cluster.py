"""Proximity clusters and the route-contiguity break count.

Customers within walking range of each other (single-linkage over haversine
distance) form clusters; a solution is charged one break each time a trip
leaves a cluster and comes back for the rest, or a cluster is split across
trips. This is what steers the solver away from the out-and-back pathology
where cost-equivalent stop orders hide the driver's extra stops.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

from .geo import haversine_m

if TYPE_CHECKING:
    from .model import ProblemInstance
    from .solver import Trip


@dataclass(frozen=True)
class ProximityCluster:
    """A maximal group of mutually walkable customers (matrix indices)."""

    id: int
    members: frozenset[int]


def build_clusters(inst: "ProblemInstance", cluster_radius_m: float) -> list[ProximityCluster]:
    """Single-linkage clustering of customers within ``cluster_radius_m``.

    Members are matrix indices (customer i at index i + 1); singletons are
    not stored. Cluster ids are assigned in order of smallest member.
    """
    if not cluster_radius_m > 0:
        raise ValueError("cluster_radius_m must be positive")
    pts = [c.location for c in inst.customers]
    n = len(pts)
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(n):
        for j in range(i + 1, n):
            if haversine_m(pts[i], pts[j]) <= cluster_radius_m:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)

    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)

    clusters = []
    for root in sorted(groups):
        members = groups[root]
        if len(members) < 2:
            continue
        clusters.append(
            ProximityCluster(id=len(clusters), members=frozenset(i + 1 for i in members))
        )
    return clusters


def membership(clusters: Iterable[ProximityCluster]) -> dict[int, int]:
    """Map of matrix index -> cluster id for clustered customers."""
    out: dict[int, int] = {}
    for c in clusters:
        for m in c.members:
            out[m] = c.id
    return out


def sequence_runs(stops: Sequence[int], member_cluster: dict[int, int]) -> dict[int, int]:
    """Count maximal runs of each cluster's members within one stop sequence."""
    runs: dict[int, int] = {}
    prev: int | None = None
    for s in stops:
        cid = member_cluster.get(s)
        if cid is not None and cid != prev:
            runs[cid] = runs.get(cid, 0) + 1
        prev = cid
    return runs


def count_breaks(trips: Iterable["Trip"], clusters: Sequence[ProximityCluster]) -> int:
    """Total contiguity breaks over all trips.

    Per cluster: every maximal member-run beyond the first costs one break,
    whether the extra runs sit inside one trip or across trips.
    """
    if not clusters:
        return 0
    member_cluster = membership(clusters)
    total_runs: dict[int, int] = {}
    for trip in trips:
        for cid, r in sequence_runs(trip.stops, member_cluster).items():
            total_runs[cid] = total_runs.get(cid, 0) + r
    return sum(r - 1 for r in total_runs.values() if r > 1)
