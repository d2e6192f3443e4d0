"""Mixed-fleet, multi-trip vehicle routing over OSM road networks.

Pipeline: parse an OSM extract, compile per-vehicle profiled graphs, compute
integer-second cost matrices, solve the capacitated multi-trip routing
problem with savings construction plus guided local search, and export
GeoJSON/SVG maps and reports. See the ``fleetroute`` CLI for the end-to-end
flow.
"""
from .cluster import ProximityCluster, build_clusters, count_breaks
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
from .geo import EARTH_RADIUS_M, GeoPoint, haversine_m
from .model import (
    Customer,
    Exclusion,
    Facility,
    Finding,
    ProblemInstance,
    VehicleTypeSpec,
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
    PathResult,
    ProfiledGraph,
    RoadEdge,
    RoadNetwork,
    SnapResult,
    VehicleProfile,
    build_profiled_graph,
    cost_matrices,
    edge_weight_seconds,
    parse_osm_xml,
    parse_profiles,
    shortest_path,
    snap_point,
)
from .export import (
    RouteGeometry,
    build_route_geometries,
    render_svg,
    routes_to_geojson,
    summary_report,
    trip_color,
)
from .solver import (
    NEIGHBORHOODS,
    EvalResult,
    GlsState,
    Solution,
    SolverConfig,
    Trip,
    check_feasible,
    construct_initial,
    evaluate,
    gls_run,
    local_search_step,
    solution_from_json,
    solution_to_json,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
