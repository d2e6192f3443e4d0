"""Exception types used across the toolkit."""
from __future__ import annotations

from typing import TYPE_CHECKING, Sequence

if TYPE_CHECKING:
    from .geo import GeoPoint


class FleetRouteError(Exception):
    """Base class for all fleetroute errors."""


class OsmParseError(FleetRouteError):
    """Malformed OSM XML or a dangling node reference."""


class EmptyNetworkError(FleetRouteError):
    """The parsed network contains no road edges."""


class ValidationError(FleetRouteError):
    """A document (profiles, fleet, config, instance) failed validation."""


class LoadError(FleetRouteError):
    """A tabular input could not be loaded; carries per-row messages."""

    def __init__(self, message: str, row_errors: Sequence[str] = ()) -> None:
        super().__init__(message)
        self.row_errors = list(row_errors)


class SnapFailed(FleetRouteError):
    """No usable road node within the snap radius of a point."""

    def __init__(self, point: "GeoPoint", best_dist_m: float, max_radius_m: float) -> None:
        super().__init__(
            f"no connected road node within {max_radius_m:g} m of "
            f"({point.lat:.6f}, {point.lon:.6f}); nearest candidate at {best_dist_m:.1f} m"
        )
        self.point = point
        self.best_dist_m = best_dist_m
        self.max_radius_m = max_radius_m


class EvaluationError(FleetRouteError):
    """A trip crosses a leg that is unreachable for its vehicle type."""


class InfeasibleCustomerError(FleetRouteError):
    """A customer cannot be served by any vehicle type in the fleet."""


class ExportError(FleetRouteError):
    """A map or report artifact could not be produced."""
