import math
import random

import pytest

from fleetroute import GeoPoint, haversine_m

from conftest import law_of_cosines_m


def test_haversine_zero_for_identical_points():
    p = GeoPoint(19.76, -72.20)
    assert haversine_m(p, p) == 0.0


def test_haversine_matches_independent_formula():
    rng = random.Random(1)
    for _ in range(200):
        a = GeoPoint(rng.uniform(-60, 60), rng.uniform(-179, 179))
        b = GeoPoint(a.lat + rng.uniform(-0.05, 0.05), a.lon + rng.uniform(-0.05, 0.05))
        expected = law_of_cosines_m(a.lat, a.lon, b.lat, b.lon)
        assert haversine_m(a, b) == pytest.approx(expected, abs=1e-3)


def test_haversine_symmetry():
    a = GeoPoint(19.7581, -72.2043)
    b = GeoPoint(19.7600, -72.1990)
    assert haversine_m(a, b) == haversine_m(b, a)


@pytest.mark.parametrize("lat,lon", [(91, 0), (-90.5, 0), (0, 181), (0, -180.1)])
def test_out_of_range_coordinates_rejected(lat, lon):
    with pytest.raises(ValueError):
        GeoPoint(lat, lon)


def test_quarter_meridian():
    # pole to equator along a meridian is a quarter circumference
    d = haversine_m(GeoPoint(0, 0), GeoPoint(90, 0))
    assert d == pytest.approx(math.pi * 6_371_008.8 / 2, rel=1e-12)
