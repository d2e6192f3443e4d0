"""Multi-trip heterogeneous-fleet CVRP solver.

Minimizes trip count first and travel time second by charging a fixed cost
per trip that dominates any achievable travel total, then running a savings
construction followed by guided local search over integer-second leg costs.
All cost arithmetic is integer; a ``granularity="minutes"`` mode floors leg
costs to whole minutes and is kept only to demonstrate the rounding failure
that motivates second-resolution costs.
"""
from __future__ import annotations

import json
import time as _time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .cluster import ProximityCluster, build_clusters, count_breaks, membership
from .errors import EvaluationError, InfeasibleCustomerError, ValidationError
from .model import ProblemInstance

NEIGHBORHOODS = ("relocate", "exchange", "two_opt_intra", "or_opt", "change_vehicle_type")

GRANULARITIES = ("seconds", "minutes")


@dataclass(frozen=True)
class Trip:
    """One depot round trip: ordered customer matrix indices, never depot."""

    vehicle_type: str
    stops: tuple[int, ...]
    load_buckets: int
    travel_seconds: int = 0


@dataclass(frozen=True)
class Solution:
    trips: tuple[Trip, ...]
    travel_seconds: int
    trip_count: int
    objective: int
    penalty_seconds: int
    truncated: bool = False
    seed: int = 0


@dataclass(frozen=True)
class EvalResult:
    objective: int
    travel_seconds: int
    trip_count: int
    penalty_seconds: int


@dataclass
class SolverConfig:
    seed: int = 0
    time_limit_s: float = 10.0
    gls_lambda_alpha: float = 0.1
    trip_cost_f: int | None = None  # None -> (n + 1) * max finite leg cost + 1
    cluster_penalty_s: int = 120
    cluster_radius_m: float = 25.0
    granularity: str = "seconds"
    stall_iterations: int | None = None  # stop after this many non-improving penalty rounds


@dataclass
class GlsState:
    """Penalty counts per directed leg feature (vehicle_type, from, to)."""

    penalties: dict[tuple[str, int, int], int] = field(default_factory=dict)
    lambda_s: int = 0


class _CostModel:
    """Effective per-type leg costs, capacities, and objective constants."""

    def __init__(self, inst: ProblemInstance, config: SolverConfig, clusters: Sequence[ProximityCluster]):
        if config.granularity not in GRANULARITIES:
            raise ValidationError(f"granularity must be one of {GRANULARITIES}")
        minutes = config.granularity == "minutes"
        self.n = len(inst.customers)
        self.types = [v.name for v in inst.fleet]
        self.cap = {v.name: v.capacity_buckets for v in inst.fleet}
        self.demand = [0] + [c.buckets for c in inst.customers]
        self.customer_ids = [c.id for c in inst.customers]
        self.time: dict[str, list[list[int | None]]] = {}
        max_leg = 0
        for v in inst.fleet:
            if v.profile not in inst.matrices:
                raise ValidationError(f"instance has no matrix for profile '{v.profile}'")
            raw = inst.matrices[v.profile].time_s
            if minutes:
                eff = [[None if e is None else e // 60 for e in row] for row in raw]
            else:
                eff = raw
            self.time[v.name] = eff
            for row in eff:
                for e in row:
                    if e is not None and e > max_leg:
                        max_leg = e
        self.max_finite_leg = max_leg
        if config.trip_cost_f is not None:
            self.trip_cost_f = int(config.trip_cost_f)
        else:
            self.trip_cost_f = (self.n + 1) * max_leg + 1
        self.cluster_pen = int(config.cluster_penalty_s)
        self.member_cluster = membership(clusters)
        self.n_clusters = len(list(clusters))


def _check_trips(cm: _CostModel, trips: Sequence[Trip]) -> None:
    for ti, trip in enumerate(trips):
        if trip.vehicle_type not in cm.time:
            raise EvaluationError(f"trip {ti}: unknown vehicle type '{trip.vehicle_type}'")
        for s in trip.stops:
            if not 1 <= s <= cm.n:
                raise ValueError(f"trip {ti}: stop index {s} out of range")


def _evaluate_with(cm: _CostModel, trips: Sequence[Trip], clusters: Sequence[ProximityCluster]) -> EvalResult:
    _check_trips(cm, trips)
    travel = 0
    for ti, trip in enumerate(trips):
        mat = cm.time[trip.vehicle_type]
        prev = 0
        for li, s in enumerate(tuple(trip.stops) + (0,)):
            c = mat[prev][s]
            if c is None:
                raise EvaluationError(
                    f"trip {ti} leg {li} ({prev}->{s}) unreachable for vehicle type "
                    f"'{trip.vehicle_type}'"
                )
            travel += c
            prev = s
    penalty = cm.cluster_pen * count_breaks(trips, clusters)
    objective = cm.trip_cost_f * len(trips) + travel + penalty
    return EvalResult(objective=objective, travel_seconds=travel, trip_count=len(trips), penalty_seconds=penalty)


def evaluate(
    inst: ProblemInstance,
    trips: Sequence[Trip],
    config: SolverConfig,
    clusters: Sequence[ProximityCluster] = (),
) -> EvalResult:
    """Recompute every objective component from the instance matrices."""
    return _evaluate_with(_CostModel(inst, config, clusters), trips, clusters)


class _Search:
    """Mutable solution state with best-improvement neighborhood scans.

    Route values fold the per-trip fixed cost, augmented leg costs, and the
    cluster-run penalty into one integer so every move is a one- or
    two-route value replacement.
    """

    def __init__(self, cm: _CostModel, routes: Sequence[Sequence[int]], rtypes: Sequence[str]):
        self.cm = cm
        self.routes: list[list[int]] = [list(r) for r in routes]
        self.rtypes: list[str] = list(rtypes)
        self.loads: list[int] = [sum(cm.demand[s] for s in r) for r in self.routes]
        self.pen: dict[tuple[str, int, int], int] = {}
        self.lam = 0
        self.aug_time: dict[str, list[list[int | None]]] = cm.time
        self.rvalue: list[int] = []
        self.refresh_values()

    def refresh_values(self) -> None:
        # materialize augmented matrices so scans never touch the penalty dict
        if self.lam and self.pen:
            aug = {vt: [row[:] for row in mat] for vt, mat in self.cm.time.items()}
            for (vt, i, j), p in self.pen.items():
                base = aug[vt][i][j]
                if base is not None:
                    aug[vt][i][j] = base + self.lam * p
            self.aug_time = aug
        else:
            self.aug_time = self.cm.time
        values = []
        for vt, r in zip(self.rtypes, self.routes):
            v = self.route_value(vt, r)
            if v is None:
                raise EvaluationError(f"route {r} has an unreachable leg for vehicle type '{vt}'")
            values.append(v)
        self.rvalue = values

    def _runs(self, stops: Sequence[int]) -> int:
        mc = self.cm.member_cluster
        cnt = 0
        prev: int | None = None
        for s in stops:
            cid = mc.get(s)
            if cid is not None and cid != prev:
                cnt += 1
            prev = cid
        return cnt

    def route_value(self, vt: str, stops: Sequence[int]) -> int | None:
        if not stops:
            return 0
        mat = self.aug_time[vt]
        total = self.cm.trip_cost_f
        row = mat[0]
        for s in stops:
            c = row[s]
            if c is None:
                return None
            total += c
            row = mat[s]
        c = row[0]
        if c is None:
            return None
        total += c
        if self.cm.member_cluster:
            total += self.cm.cluster_pen * self._runs(stops)
        return total

    # A move is a tuple of (trip_index, new_stops, new_vehicle_type) edits.
    Move = tuple[tuple[int, list[int], str], ...]

    def apply(self, ops: Move) -> None:
        for ti, stops, vt in ops:
            self.routes[ti] = list(stops)
            self.rtypes[ti] = vt
            self.loads[ti] = sum(self.cm.demand[s] for s in stops)
            v = self.route_value(vt, stops)
            assert v is not None
            self.rvalue[ti] = v
        if any(not r for r in self.routes):
            keep = [k for k in range(len(self.routes)) if self.routes[k]]
            self.routes = [self.routes[k] for k in keep]
            self.rtypes = [self.rtypes[k] for k in keep]
            self.loads = [self.loads[k] for k in keep]
            self.rvalue = [self.rvalue[k] for k in keep]

    def scan_relocate(self) -> tuple[int, Move] | None:
        best_delta = 0
        best: _Search.Move | None = None
        routes, rtypes, loads, rvalue = self.routes, self.rtypes, self.loads, self.rvalue
        cap, demand = self.cm.cap, self.cm.demand
        for ta in range(len(routes)):
            ra = routes[ta]
            vta = rtypes[ta]
            va = rvalue[ta]
            for pa in range(len(ra)):
                s = ra[pa]
                ds = demand[s]
                ra_new = ra[:pa] + ra[pa + 1 :]
                va_new = self.route_value(vta, ra_new)
                if va_new is None:
                    continue
                for tb in range(len(routes)):
                    if tb == ta:
                        for q in range(len(ra_new) + 1):
                            if q == pa:
                                continue
                            cand = ra_new[:q] + [s] + ra_new[q:]
                            vc = self.route_value(vta, cand)
                            if vc is None:
                                continue
                            delta = vc - va
                            if delta < best_delta:
                                best_delta = delta
                                best = ((ta, cand, vta),)
                    else:
                        vtb = rtypes[tb]
                        if loads[tb] + ds > cap[vtb]:
                            continue
                        rb = routes[tb]
                        vb = rvalue[tb]
                        for q in range(len(rb) + 1):
                            cand = rb[:q] + [s] + rb[q:]
                            vc = self.route_value(vtb, cand)
                            if vc is None:
                                continue
                            delta = va_new + vc - va - vb
                            if delta < best_delta:
                                best_delta = delta
                                best = ((ta, ra_new, vta), (tb, cand, vtb))
        return (best_delta, best) if best is not None else None

    def scan_exchange(self) -> tuple[int, Move] | None:
        best_delta = 0
        best: _Search.Move | None = None
        routes, rtypes, loads, rvalue = self.routes, self.rtypes, self.loads, self.rvalue
        cap, demand = self.cm.cap, self.cm.demand
        for ta in range(len(routes)):
            ra = routes[ta]
            vta = rtypes[ta]
            for tb in range(ta + 1, len(routes)):
                rb = routes[tb]
                vtb = rtypes[tb]
                for pa in range(len(ra)):
                    s = ra[pa]
                    for pb in range(len(rb)):
                        t = rb[pb]
                        if loads[ta] - demand[s] + demand[t] > cap[vta]:
                            continue
                        if loads[tb] - demand[t] + demand[s] > cap[vtb]:
                            continue
                        ca = ra[:pa] + [t] + ra[pa + 1 :]
                        cb = rb[:pb] + [s] + rb[pb + 1 :]
                        va_new = self.route_value(vta, ca)
                        if va_new is None:
                            continue
                        vb_new = self.route_value(vtb, cb)
                        if vb_new is None:
                            continue
                        delta = va_new + vb_new - rvalue[ta] - rvalue[tb]
                        if delta < best_delta:
                            best_delta = delta
                            best = ((ta, ca, vta), (tb, cb, vtb))
        return (best_delta, best) if best is not None else None

    def scan_two_opt_intra(self) -> tuple[int, Move] | None:
        best_delta = 0
        best: _Search.Move | None = None
        for t in range(len(self.routes)):
            r = self.routes[t]
            vt = self.rtypes[t]
            v = self.rvalue[t]
            for i in range(len(r) - 1):
                for j in range(i + 1, len(r)):
                    cand = r[:i] + r[i : j + 1][::-1] + r[j + 1 :]
                    vc = self.route_value(vt, cand)
                    if vc is None:
                        continue
                    delta = vc - v
                    if delta < best_delta:
                        best_delta = delta
                        best = ((t, cand, vt),)
        return (best_delta, best) if best is not None else None

    def scan_or_opt(self, min_seg_len: int = 1) -> tuple[int, Move] | None:
        best_delta = 0
        best: _Search.Move | None = None
        routes, rtypes, loads, rvalue = self.routes, self.rtypes, self.loads, self.rvalue
        cap, demand = self.cm.cap, self.cm.demand
        for ta in range(len(routes)):
            ra = routes[ta]
            vta = rtypes[ta]
            va = rvalue[ta]
            for seg_len in (1, 2, 3):
                if seg_len < min_seg_len:
                    continue
                if seg_len > len(ra):
                    break
                for i in range(len(ra) - seg_len + 1):
                    seg = ra[i : i + seg_len]
                    seg_demand = sum(demand[s] for s in seg)
                    ra_new = ra[:i] + ra[i + seg_len :]
                    va_new = self.route_value(vta, ra_new)
                    if va_new is None:
                        continue
                    for tb in range(len(routes)):
                        if tb == ta:
                            for q in range(len(ra_new) + 1):
                                if q == i:
                                    continue
                                cand = ra_new[:q] + seg + ra_new[q:]
                                vc = self.route_value(vta, cand)
                                if vc is None:
                                    continue
                                delta = vc - va
                                if delta < best_delta:
                                    best_delta = delta
                                    best = ((ta, cand, vta),)
                        else:
                            vtb = rtypes[tb]
                            if loads[tb] + seg_demand > cap[vtb]:
                                continue
                            rb = routes[tb]
                            vb = rvalue[tb]
                            for q in range(len(rb) + 1):
                                cand = rb[:q] + seg + rb[q:]
                                vc = self.route_value(vtb, cand)
                                if vc is None:
                                    continue
                                delta = va_new + vc - va - vb
                                if delta < best_delta:
                                    best_delta = delta
                                    best = ((ta, ra_new, vta), (tb, cand, vtb))
        return (best_delta, best) if best is not None else None

    def scan_change_vehicle_type(self) -> tuple[int, Move] | None:
        best_delta = 0
        best: _Search.Move | None = None
        for t in range(len(self.routes)):
            r = self.routes[t]
            cur = self.rtypes[t]
            for vt in self.cm.types:
                if vt == cur:
                    continue
                if self.loads[t] > self.cm.cap[vt]:
                    continue
                vc = self.route_value(vt, r)
                if vc is None:
                    continue
                delta = vc - self.rvalue[t]
                if delta < best_delta:
                    best_delta = delta
                    best = ((t, list(r), vt),)
        return (best_delta, best) if best is not None else None

    def scanner(self, neighborhood: str) -> Callable[[], tuple[int, "_Search.Move"] | None]:
        try:
            return {
                "relocate": self.scan_relocate,
                "exchange": self.scan_exchange,
                "two_opt_intra": self.scan_two_opt_intra,
                "or_opt": self.scan_or_opt,
                "change_vehicle_type": self.scan_change_vehicle_type,
            }[neighborhood]
        except KeyError:
            raise ValueError(f"unknown neighborhood '{neighborhood}'") from None

    def descend(self, deadline: float) -> bool:
        """Apply best-improvement moves until a local optimum over all
        neighborhoods; returns False if the deadline cut the descent short.

        The or_opt pass skips length-1 segments: those moves are exactly the
        relocate neighborhood, which scans first, so the reachable local
        optima are unchanged."""
        scans = [
            self.scan_relocate,
            self.scan_exchange,
            self.scan_two_opt_intra,
            lambda: self.scan_or_opt(min_seg_len=2),
            self.scan_change_vehicle_type,
        ]
        while True:
            if _time.monotonic() >= deadline:
                return False
            improved = False
            for scan in scans:
                if _time.monotonic() >= deadline:
                    return False
                res = scan()
                if res is not None:
                    self.apply(res[1])
                    improved = True
                    break
            if not improved:
                return True

    def true_components(self) -> tuple[int, int, int, int]:
        """(travel, trip_count, breaks, leg_count) under unaugmented costs."""
        travel = 0
        legs = 0
        for vt, r in zip(self.rtypes, self.routes):
            mat = self.cm.time[vt]
            prev = 0
            for s in tuple(r) + (0,):
                travel += mat[prev][s]  # feasible by construction
                legs += 1
                prev = s
        if self.cm.member_cluster:
            breaks = sum(self._runs(r) for r in self.routes) - self.cm.n_clusters
        else:
            breaks = 0
        return travel, len(self.routes), breaks, legs

    def true_objective(self) -> int:
        travel, trips, breaks, _legs = self.true_components()
        return self.cm.trip_cost_f * trips + travel + self.cm.cluster_pen * breaks

    def snapshot(self) -> tuple[tuple[tuple[int, ...], ...], tuple[str, ...]]:
        return tuple(tuple(r) for r in self.routes), tuple(self.rtypes)

    def penalize(self) -> bool:
        """One GLS round: bump the penalty of every maximum-utility leg of
        the current solution. Utility ties are compared exactly with integer
        cross-multiplication."""
        legs: dict[tuple[str, int, int], int] = {}
        for vt, r in zip(self.rtypes, self.routes):
            mat = self.cm.time[vt]
            prev = 0
            for s in tuple(r) + (0,):
                key = (vt, prev, s)
                if key not in legs:
                    legs[key] = mat[prev][s]
                prev = s
        if not legs:
            return False
        best_keys: list[tuple[str, int, int]] = []
        best_c, best_p = -1, 0
        for key, c in legs.items():
            p = self.pen.get(key, 0)
            lhs = c * (1 + best_p)
            rhs = best_c * (1 + p)
            if lhs > rhs:
                best_keys = [key]
                best_c, best_p = c, p
            elif lhs == rhs:
                best_keys.append(key)
        for key in best_keys:
            self.pen[key] = self.pen.get(key, 0) + 1
        if self.lam:
            if self.aug_time is self.cm.time:
                self.aug_time = {vt: [row[:] for row in mat] for vt, mat in self.cm.time.items()}
            for vt, i, j in best_keys:
                base = self.aug_time[vt][i][j]
                if base is not None:
                    self.aug_time[vt][i][j] = base + self.lam
            values = []
            for vt, r in zip(self.rtypes, self.routes):
                v = self.route_value(vt, r)
                assert v is not None
                values.append(v)
            self.rvalue = values
        return True


def _construct_routes(inst: ProblemInstance, cm: _CostModel) -> tuple[list[list[int]], list[str]]:
    """Parallel savings construction, one pass per vehicle type.

    Each customer goes to its cheapest capable type (round-trip time, fleet
    order on ties); within a type, route tails are joined to route heads in
    descending savings order whenever capacity and reachability allow, which
    favors the fewest trips.
    """
    assignment: dict[int, str] = {}
    for k in range(1, cm.n + 1):
        best_vt: str | None = None
        best_cost = 0
        for vt in cm.types:
            if cm.cap[vt] < cm.demand[k]:
                continue
            out_c = cm.time[vt][0][k]
            back_c = cm.time[vt][k][0]
            if out_c is None or back_c is None:
                continue
            rt = out_c + back_c
            if best_vt is None or rt < best_cost:
                best_vt = vt
                best_cost = rt
        if best_vt is None:
            raise InfeasibleCustomerError(
                f"customer '{cm.customer_ids[k - 1]}' cannot be served by any vehicle type"
            )
        assignment[k] = best_vt

    routes: list[list[int]] = []
    rtypes: list[str] = []
    for vt in cm.types:
        members = [k for k in range(1, cm.n + 1) if assignment[k] == vt]
        if not members:
            continue
        mat = cm.time[vt]
        cap = cm.cap[vt]
        local: dict[int, list[int]] = {i: [k] for i, k in enumerate(members)}
        loads: dict[int, int] = {i: cm.demand[k] for i, k in enumerate(members)}
        route_of: dict[int, int] = {k: i for i, k in enumerate(members)}

        savings: list[tuple[int, int, int]] = []
        for i in members:
            for j in members:
                if i == j:
                    continue
                cij = mat[i][j]
                if cij is None:
                    continue
                savings.append((-(mat[0][i] + mat[j][0] - cij), i, j))
        savings.sort()

        for _neg_s, i, j in savings:
            ri = route_of[i]
            rj = route_of[j]
            if ri == rj:
                continue
            route_i = local[ri]
            route_j = local[rj]
            if route_i[-1] != i or route_j[0] != j:
                continue
            if loads[ri] + loads[rj] > cap:
                continue
            route_i.extend(route_j)
            loads[ri] += loads[rj]
            for k in route_j:
                route_of[k] = ri
            del local[rj]
            del loads[rj]

        for ridx in sorted(local):
            routes.append(local[ridx])
            rtypes.append(vt)
    return routes, rtypes


def _finalize(
    inst: ProblemInstance,
    config: SolverConfig,
    clusters: Sequence[ProximityCluster],
    routes: Sequence[Sequence[int]],
    rtypes: Sequence[str],
    truncated: bool,
    cm: _CostModel | None = None,
) -> Solution:
    cm = cm if cm is not None else _CostModel(inst, config, clusters)
    trips = []
    for vt, r in zip(rtypes, routes):
        mat = cm.time[vt]
        travel = 0
        prev = 0
        for s in tuple(r) + (0,):
            c = mat[prev][s]
            if c is None:
                raise EvaluationError(f"route {list(r)} unreachable for vehicle type '{vt}'")
            travel += c
            prev = s
        trips.append(
            Trip(
                vehicle_type=vt,
                stops=tuple(r),
                load_buckets=sum(cm.demand[s] for s in r),
                travel_seconds=travel,
            )
        )
    res = _evaluate_with(cm, trips, clusters)
    return Solution(
        trips=tuple(trips),
        travel_seconds=res.travel_seconds,
        trip_count=res.trip_count,
        objective=res.objective,
        penalty_seconds=res.penalty_seconds,
        truncated=truncated,
        seed=config.seed,
    )


def construct_initial(
    inst: ProblemInstance,
    config: SolverConfig,
    clusters: Sequence[ProximityCluster] | None = None,
) -> Solution:
    """Feasible starting solution via parallel savings per vehicle type."""
    if clusters is None:
        clusters = build_clusters(inst, config.cluster_radius_m)
    cm = _CostModel(inst, config, clusters)
    routes, rtypes = _construct_routes(inst, cm)
    return _finalize(inst, config, clusters, routes, rtypes, truncated=False, cm=cm)


def local_search_step(
    inst: ProblemInstance,
    sol: Solution,
    neighborhood: str,
    config: SolverConfig | None = None,
    clusters: Sequence[ProximityCluster] | None = None,
    gls_state: GlsState | None = None,
) -> Solution | None:
    """Best improving move in one neighborhood, or ``None`` at a local optimum.

    With ``gls_state`` the move is chosen under the augmented cost; the
    returned solution's components are always unaugmented.
    """
    config = config if config is not None else SolverConfig()
    if clusters is None:
        clusters = build_clusters(inst, config.cluster_radius_m)
    cm = _CostModel(inst, config, clusters)
    _check_trips(cm, sol.trips)
    search = _Search(cm, [list(t.stops) for t in sol.trips], [t.vehicle_type for t in sol.trips])
    if gls_state is not None:
        search.pen = dict(gls_state.penalties)
        search.lam = gls_state.lambda_s
        search.refresh_values()
    res = search.scanner(neighborhood)()
    if res is None:
        return None
    search.apply(res[1])
    return _finalize(inst, config, clusters, search.routes, search.rtypes, truncated=False, cm=cm)


def gls_run(
    inst: ProblemInstance,
    config: SolverConfig,
    clusters: Sequence[ProximityCluster] | None = None,
) -> Solution:
    """Guided local search: descend, penalize max-utility legs, repeat.

    Runs until the time limit (or, when configured, until
    ``stall_iterations`` penalty rounds pass without improving the true
    objective) and returns the best solution ever seen by unaugmented
    objective. Equal instance and config give identical results.
    """
    start = _time.monotonic()
    deadline = start + config.time_limit_s
    if clusters is None:
        clusters = build_clusters(inst, config.cluster_radius_m)
    cm = _CostModel(inst, config, clusters)
    routes, rtypes = _construct_routes(inst, cm)
    search = _Search(cm, routes, rtypes)

    best_routes, best_types = search.snapshot()
    best_obj = search.true_objective()
    truncated = _time.monotonic() >= deadline

    if not truncated:
        lam_set = False
        reached_optimum = False
        stall = 0
        while True:
            completed = search.descend(deadline)
            obj = search.true_objective()
            if obj < best_obj:
                best_obj = obj
                best_routes, best_types = search.snapshot()
                stall = 0
            elif completed:
                stall += 1
            if not completed:
                truncated = not reached_optimum
                break
            reached_optimum = True
            if config.stall_iterations is not None and stall >= config.stall_iterations:
                break
            if _time.monotonic() >= deadline:
                break
            if not lam_set:
                travel, _trips, _breaks, legs = search.true_components()
                search.lam = int(config.gls_lambda_alpha * travel / legs + 0.5) if legs else 0
                lam_set = True
            if not search.penalize():
                break
    return _finalize(inst, config, clusters, best_routes, best_types, truncated, cm=cm)


def check_feasible(inst: ProblemInstance, sol: Solution) -> list[str]:
    """List of violations; empty means the solution is feasible."""
    violations: list[str] = []
    n = len(inst.customers)
    fleet = {v.name: v for v in inst.fleet}
    seen: dict[int, int] = {}
    for ti, trip in enumerate(sol.trips):
        spec = fleet.get(trip.vehicle_type)
        if spec is None:
            violations.append(f"trip {ti}: unknown vehicle type '{trip.vehicle_type}'")
            continue
        if spec.count < 1:
            violations.append(f"trip {ti}: vehicle type '{trip.vehicle_type}' has count 0")
        load = 0
        for s in trip.stops:
            if not 1 <= s <= n:
                violations.append(f"trip {ti}: stop index {s} out of range")
                continue
            seen[s] = seen.get(s, 0) + 1
            load += inst.customers[s - 1].buckets
        if load > spec.capacity_buckets:
            violations.append(
                f"trip {ti}: capacity exceeded by {load - spec.capacity_buckets} "
                f"(load {load} > {spec.capacity_buckets})"
            )
        if trip.load_buckets != load:
            violations.append(f"trip {ti}: load_buckets {trip.load_buckets} does not match stops ({load})")
        mat = inst.matrices[spec.profile].time_s
        prev = 0
        for li, s in enumerate(trip.stops + (0,)):
            if not 0 <= s <= n:
                break
            if mat[prev][s] is None:
                violations.append(f"trip {ti} leg {li} ({prev}->{s}) unreachable for '{trip.vehicle_type}'")
            prev = s
    for i in range(1, n + 1):
        c = seen.get(i, 0)
        if c == 0:
            violations.append(f"customer {inst.customers[i - 1].id} unvisited")
        elif c > 1:
            violations.append(f"customer {inst.customers[i - 1].id} visited {c} times")
    return violations


def solution_to_json_dict(
    inst: ProblemInstance,
    sol: Solution,
    clusters: Sequence[ProximityCluster] | None = None,
    zone: str | None = None,
) -> dict:
    ids = [c.id for c in inst.customers]
    doc = {
        "trips": [
            {
                "vehicle_type": t.vehicle_type,
                "stops": [ids[s - 1] for s in t.stops],
                "load_buckets": t.load_buckets,
                "travel_seconds": t.travel_seconds,
            }
            for t in sol.trips
        ],
        "travel_seconds": sol.travel_seconds,
        "trip_count": sol.trip_count,
        "objective": sol.objective,
        "penalty_seconds": sol.penalty_seconds,
        "truncated": sol.truncated,
        "seed": sol.seed,
        "diagnostics": {
            "clusters": [
                {"id": c.id, "members": [ids[m - 1] for m in sorted(c.members)]}
                for c in (clusters or ())
            ],
            "breaks": count_breaks(sol.trips, list(clusters)) if clusters else 0,
        },
    }
    if zone is not None:
        doc["zone"] = zone
    return doc


def solution_to_json(
    inst: ProblemInstance,
    sol: Solution,
    clusters: Sequence[ProximityCluster] | None = None,
    zone: str | None = None,
) -> str:
    return json.dumps(solution_to_json_dict(inst, sol, clusters, zone), sort_keys=True, separators=(",", ":"))


def solution_from_json_dict(inst: ProblemInstance, doc: dict) -> Solution:
    index = {c.id: i + 1 for i, c in enumerate(inst.customers)}
    trips = []
    for t in doc["trips"]:
        stops = []
        for cid in t["stops"]:
            if cid not in index:
                raise ValidationError(f"solution references unknown customer '{cid}'")
            stops.append(index[cid])
        trips.append(
            Trip(
                vehicle_type=t["vehicle_type"],
                stops=tuple(stops),
                load_buckets=t["load_buckets"],
                travel_seconds=t["travel_seconds"],
            )
        )
    return Solution(
        trips=tuple(trips),
        travel_seconds=doc["travel_seconds"],
        trip_count=doc["trip_count"],
        objective=doc["objective"],
        penalty_seconds=doc["penalty_seconds"],
        truncated=doc.get("truncated", False),
        seed=doc.get("seed", 0),
    )


def solution_from_json(inst: ProblemInstance, text: str | bytes) -> Solution:
    return solution_from_json_dict(inst, json.loads(text))
