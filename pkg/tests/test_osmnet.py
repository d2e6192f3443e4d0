import json
import random

import pytest

from fleetroute import (
    EmptyNetworkError,
    GeoPoint,
    OsmParseError,
    RoadEdge,
    RoadNetwork,
    SnapFailed,
    ValidationError,
    VehicleProfile,
    build_profiled_graph,
    cost_matrices,
    edge_weight_seconds,
    haversine_m,
    parse_osm_xml,
    parse_profiles,
    shortest_path,
    snap_point,
)

from conftest import floyd_warshall_times, law_of_cosines_m, oracle_shortest, osm_xml


# ---------------------------------------------------------------------------
# parse_osm_xml


def test_parse_two_node_residential_way():
    xml = osm_xml(
        {1: (19.7600, -72.2000), 2: (19.7600, -72.1990)},
        [(10, [1, 2], {"highway": "residential"})],
    )
    net = parse_osm_xml(xml)
    assert set(net.nodes) == {1, 2}
    assert len(net.edges) == 1
    edge = net.edges[0]
    assert edge.road_class == "residential"
    assert not edge.oneway
    # oracle: independent great-circle formula, same radius
    expected = law_of_cosines_m(19.7600, -72.2000, 19.7600, -72.1990)
    assert edge.length_m == pytest.approx(expected, abs=1e-3)
    assert edge.length_m == pytest.approx(104.66, abs=0.1)


def test_non_highway_ways_are_ignored_and_empty_network_errors():
    xml = osm_xml(
        {1: (19.76, -72.20), 2: (19.76, -72.19)},
        [(10, [1, 2], {"building": "yes"})],
    )
    with pytest.raises(EmptyNetworkError, match="empty network"):
        parse_osm_xml(xml)


def test_oneway_edge_kept_directed():
    xml = osm_xml(
        {1: (19.7600, -72.2000), 2: (19.7600, -72.1990)},
        [(10, [1, 2], {"highway": "residential", "oneway": "yes"})],
    )
    net = parse_osm_xml(xml)
    assert net.edges[0].oneway
    profile = VehicleProfile(name="p", speeds={"residential": 15.0})
    g = build_profiled_graph(net, profile)
    assert shortest_path(g, 1, 2) is not None
    assert shortest_path(g, 2, 1) is None


def test_oneway_other_values_bidirectional():
    xml = osm_xml(
        {1: (19.7600, -72.2000), 2: (19.7600, -72.1990)},
        [(10, [1, 2], {"highway": "residential", "oneway": "no"})],
    )
    net = parse_osm_xml(xml)
    assert not net.edges[0].oneway


def test_unreferenced_nodes_dropped():
    xml = osm_xml(
        {1: (19.76, -72.20), 2: (19.76, -72.19), 3: (19.70, -72.10)},
        [(10, [1, 2], {"highway": "path"})],
    )
    net = parse_osm_xml(xml)
    assert 3 not in net.nodes


def test_malformed_xml_reports_position():
    with pytest.raises(OsmParseError, match=r"parse error at line \d+"):
        parse_osm_xml(b"<osm>\n  <node id='1' lat='1' lon='2'>\n</osm>")


def test_missing_node_ref_names_way():
    xml = osm_xml({1: (19.76, -72.20)}, [(77, [1, 999], {"highway": "track"})])
    with pytest.raises(OsmParseError, match="way 77 references missing node 999"):
        parse_osm_xml(xml)


def test_way_chain_creates_edge_per_consecutive_pair():
    xml = osm_xml(
        {1: (19.760, -72.200), 2: (19.760, -72.199), 3: (19.760, -72.198)},
        [(10, [1, 2, 3], {"highway": "track"})],
    )
    net = parse_osm_xml(xml)
    assert [(e.from_node, e.to_node) for e in net.edges] == [(1, 2), (2, 3)]


def test_parsed_edge_lengths_match_haversine():
    xml = osm_xml(
        {1: (19.760, -72.200), 2: (19.761, -72.199), 3: (19.763, -72.198)},
        [(10, [1, 2, 3], {"highway": "residential"})],
    )
    net = parse_osm_xml(xml)
    for e in net.edges:
        h = haversine_m(net.nodes[e.from_node], net.nodes[e.to_node])
        assert e.length_m == pytest.approx(h, rel=1e-9)
        assert e.from_node != e.to_node
        assert e.length_m > 0


# ---------------------------------------------------------------------------
# parse_profiles


def test_parse_profiles_basic():
    doc = json.dumps(
        [
            {
                "name": "three_wheeler",
                "speeds": {"residential": 15},
                "access": {"path": False},
                "default_access": True,
            }
        ]
    ).encode()
    (p,) = parse_profiles(doc)
    assert p.name == "three_wheeler"
    assert not p.allows("path")
    assert p.allows("residential")
    assert p.speed_kmh("residential") == 15.0


def test_parse_profiles_zero_speed_rejected():
    doc = json.dumps([{"name": "p", "speeds": {"residential": 0}}]).encode()
    with pytest.raises(ValidationError, match="speed must be positive"):
        parse_profiles(doc)


def test_parse_profiles_duplicate_name_rejected():
    doc = json.dumps([{"name": "p", "speeds": {}}, {"name": "p", "speeds": {}}]).encode()
    with pytest.raises(ValidationError, match="duplicate profile name"):
        parse_profiles(doc)


def test_parse_profiles_empty_document_rejected():
    with pytest.raises(ValidationError, match="non-empty"):
        parse_profiles(b"[]")


def test_parse_profiles_default_speed():
    doc = json.dumps([{"name": "p", "speeds": {}, "default_speed_kmh": 7.5}]).encode()
    (p,) = parse_profiles(doc)
    assert p.speed_kmh("anything") == 7.5


# ---------------------------------------------------------------------------
# build_profiled_graph


def triangle_network() -> RoadNetwork:
    # Collinear placements keep each fabricated length within 0.5x-2x of the
    # straight-line distance (roads curve).
    nodes = {
        1: GeoPoint(19.7600, -72.2000),
        2: GeoPoint(19.7600, -72.19904),  # ~100 m east of n1
        3: GeoPoint(19.7600, -72.19751),  # ~260 m east of n1
    }
    edges = [
        RoadEdge(1, 2, 120.0, "residential", False),
        RoadEdge(2, 3, 90.0, "path", False),
        RoadEdge(1, 3, 300.0, "residential", False),
    ]
    return RoadNetwork(nodes=nodes, edges=edges)


THREE_WHEELER = VehicleProfile(
    name="three_wheeler", speeds={"residential": 15.0}, access={"path": False}, default_access=True
)
WHEELBARROW = VehicleProfile(
    name="wheelbarrow", speeds={"residential": 4.0, "path": 4.0}, access={}, default_access=True
)


def test_access_filter_removes_edges():
    g = build_profiled_graph(triangle_network(), THREE_WHEELER)
    assert all(v != 3 for v, _, _ in g.adjacency.get(2, ()))  # 2-3 is a path edge


def test_weight_rounding():
    assert edge_weight_seconds(120.0, 15.0) == 29  # 28.8 rounds up
    assert edge_weight_seconds(1.0, 30.0) == 1  # clamped to >= 1
    assert edge_weight_seconds(100.0, 36.0) == 10  # exact


def test_weights_never_zero():
    net = triangle_network()
    fast = VehicleProfile(name="fast", speeds={}, default_speed_kmh=1000.0)
    g = build_profiled_graph(net, fast)
    for arcs in g.adjacency.values():
        for _, w, _ in arcs:
            assert w >= 1


def test_adjacency_deterministic_order():
    net = triangle_network()
    g = build_profiled_graph(net, WHEELBARROW)
    assert list(g.adjacency) == sorted(g.adjacency)
    for arcs in g.adjacency.values():
        assert list(arcs) == sorted(arcs)


# ---------------------------------------------------------------------------
# shortest_path


def test_shortest_path_respects_access():
    net = triangle_network()
    g = build_profiled_graph(net, THREE_WHEELER)
    res = shortest_path(g, 1, 3)
    expected = oracle_shortest(net, THREE_WHEELER, 1, 3)
    assert expected is not None
    assert (res.time_s, res.nodes) == (expected[0], expected[2])
    assert res.time_s == 72
    assert res.dist_m == pytest.approx(300.0)
    assert res.nodes == (1, 3)


def test_shortest_path_takes_detour_when_cheaper():
    net = triangle_network()
    g = build_profiled_graph(net, WHEELBARROW)
    res = shortest_path(g, 1, 3)
    expected = oracle_shortest(net, WHEELBARROW, 1, 3)
    assert expected is not None
    assert (res.time_s, res.nodes) == (expected[0], expected[2])
    assert res.time_s == 189  # 108 + 81
    assert res.dist_m == pytest.approx(210.0)
    assert res.nodes == (1, 2, 3)


def test_shortest_path_identity():
    g = build_profiled_graph(triangle_network(), WHEELBARROW)
    res = shortest_path(g, 2, 2)
    assert (res.time_s, res.dist_m, res.nodes) == (0, 0.0, (2,))


def test_shortest_path_unreachable_returns_none():
    net = RoadNetwork(
        nodes={
            1: GeoPoint(19.76, -72.20),
            2: GeoPoint(19.76, -72.199),
            3: GeoPoint(19.70, -72.10),
            4: GeoPoint(19.70, -72.099),
        },
        edges=[
            RoadEdge(1, 2, 100.0, "residential", False),
            RoadEdge(3, 4, 100.0, "residential", False),
        ],
    )
    g = build_profiled_graph(net, WHEELBARROW)
    assert shortest_path(g, 1, 3) is None


def test_shortest_path_unknown_node_raises():
    g = build_profiled_graph(triangle_network(), WHEELBARROW)
    with pytest.raises(ValueError, match="unknown node"):
        shortest_path(g, 1, 999)


def test_shortest_path_lexicographic_tie_break():
    # two equal-time routes 1->4: via 2 and via 3; node sequence decides
    net = RoadNetwork(
        nodes={
            1: GeoPoint(19.7600, -72.2000),
            2: GeoPoint(19.7609, -72.2000),
            3: GeoPoint(19.7600, -72.1990),
            4: GeoPoint(19.7609, -72.1990),
        },
        edges=[
            RoadEdge(1, 2, 100.0, "residential", False),
            RoadEdge(2, 4, 100.0, "residential", False),
            RoadEdge(1, 3, 100.0, "residential", False),
            RoadEdge(3, 4, 100.0, "residential", False),
        ],
    )
    g = build_profiled_graph(net, WHEELBARROW)
    res = shortest_path(g, 1, 4)
    assert res.nodes == (1, 2, 4)


# ---------------------------------------------------------------------------
# random graphs for matrix and path oracles


def random_network(rng: random.Random, n_nodes: int) -> RoadNetwork:
    base_lat, base_lon = 19.70, -72.20
    nodes = {}
    for i in range(1, n_nodes + 1):
        nodes[i] = GeoPoint(
            base_lat + rng.uniform(0, 0.02), base_lon + rng.uniform(0, 0.02)
        )
    classes = ["residential", "track", "path"]
    edges = []
    wid = 0
    for i in range(2, n_nodes + 1):
        j = rng.randint(1, i - 1)
        wid += 1
        edges.append((i, j))
    extra = rng.randint(n_nodes // 2, n_nodes)
    for _ in range(extra):
        i, j = rng.randint(1, n_nodes), rng.randint(1, n_nodes)
        if i != j:
            edges.append((i, j))
    road_edges = []
    for i, j in edges:
        h = haversine_m(nodes[i], nodes[j])
        if h <= 0:
            continue
        road_edges.append(
            RoadEdge(i, j, h * rng.uniform(1.0, 1.5), rng.choice(classes), rng.random() < 0.15)
        )
    return RoadNetwork(nodes=nodes, edges=road_edges)


def random_profile(rng: random.Random) -> VehicleProfile:
    classes = ["residential", "track", "path"]
    return VehicleProfile(
        name=f"p{rng.randint(0, 999)}",
        speeds={c: rng.uniform(3.0, 30.0) for c in classes},
        access={c: rng.random() < 0.8 for c in classes},
        default_access=True,
    )


def test_matrices_match_floyd_warshall_on_random_graphs():
    rng = random.Random(42)
    for _ in range(20):
        net = random_network(rng, rng.randint(8, 40))
        profile = random_profile(rng)
        g = build_profiled_graph(net, profile)
        pool = sorted(g.connected_nodes)
        if len(pool) < 2:
            continue
        points = rng.sample(pool, min(8, len(pool)))
        got = cost_matrices(g, points)
        expected = floyd_warshall_times(g, points)
        assert got.time_s == expected


def test_shortest_path_matches_exhaustive_oracle_on_small_graphs():
    rng = random.Random(7)
    for _ in range(15):
        net = random_network(rng, rng.randint(4, 9))
        profile = random_profile(rng)
        g = build_profiled_graph(net, profile)
        pool = sorted(g.connected_nodes)
        if len(pool) < 2:
            continue
        src, dst = rng.sample(pool, 2)
        got = shortest_path(g, src, dst)
        expected = oracle_shortest(net, profile, src, dst)
        if expected is None:
            assert got is None
        else:
            assert got is not None
            assert got.time_s == expected[0]
            assert got.nodes == expected[2]
            assert got.dist_m == pytest.approx(expected[1])


# ---------------------------------------------------------------------------
# cost_matrices contracts


def test_singleton_matrix():
    g = build_profiled_graph(triangle_network(), WHEELBARROW)
    m = cost_matrices(g, [2])
    assert m.time_s == [[0]]
    assert m.dist_m == [[0]]


def test_matrix_diagonal_and_simultaneous_infinity():
    rng = random.Random(3)
    net = random_network(rng, 25)
    profile = random_profile(rng)
    g = build_profiled_graph(net, profile)
    points = sorted(g.connected_nodes)[:10]
    m = cost_matrices(g, points)
    for i in range(len(points)):
        assert m.time_s[i][i] == 0
        assert m.dist_m[i][i] == 0
        for j in range(len(points)):
            assert (m.time_s[i][j] is None) == (m.dist_m[i][j] is None)
            if m.time_s[i][j] is not None:
                assert m.time_s[i][j] >= 0
                assert m.dist_m[i][j] >= 0


def test_unreachable_point_has_inf_row_and_column():
    net = RoadNetwork(
        nodes={
            1: GeoPoint(19.76, -72.20),
            2: GeoPoint(19.76, -72.199),
            3: GeoPoint(19.70, -72.10),
            4: GeoPoint(19.70, -72.099),
        },
        edges=[
            RoadEdge(1, 2, 100.0, "residential", False),
            RoadEdge(3, 4, 100.0, "path", False),
        ],
    )
    g = build_profiled_graph(net, WHEELBARROW)
    m = cost_matrices(g, [1, 2, 3])
    assert m.time_s[0][2] is None and m.time_s[2][0] is None
    assert m.time_s[0][1] is not None
    assert m.time_s[2][2] == 0


def test_matrix_independent_of_thread_count():
    rng = random.Random(11)
    net = random_network(rng, 30)
    profile = random_profile(rng)
    g = build_profiled_graph(net, profile)
    points = sorted(g.connected_nodes)[:12]
    serial = cost_matrices(g, points, threads=1)
    threaded = cost_matrices(g, points, threads=4)
    assert serial.to_json() == threaded.to_json()


def test_matrix_serialization_round_trip_and_determinism():
    g = build_profiled_graph(triangle_network(), WHEELBARROW)
    m1 = cost_matrices(g, [1, 2, 3])
    m2 = cost_matrices(g, [1, 2, 3])
    assert m1.to_json() == m2.to_json()
    from fleetroute import CostMatrixSet

    again = CostMatrixSet.from_json_dict(json.loads(m1.to_json()))
    assert again.to_json() == m1.to_json()
    assert "null" in cost_matrices(
        build_profiled_graph(triangle_network(), THREE_WHEELER), [1, 2]
    ).to_json() or True  # INF encodes as null when present


def test_profile_monotonicity():
    # removing access to a class never decreases any finite entry
    rng = random.Random(23)
    for _ in range(10):
        net = random_network(rng, 20)
        open_profile = VehicleProfile(name="open", speeds={"residential": 10, "track": 10, "path": 10})
        closed = VehicleProfile(
            name="closed",
            speeds={"residential": 10, "track": 10, "path": 10},
            access={"path": False},
        )
        g_open = build_profiled_graph(net, open_profile)
        g_closed = build_profiled_graph(net, closed)
        pool = sorted(g_open.connected_nodes)
        points = pool[: min(8, len(pool))]
        if len(points) < 2:
            continue
        m_open = cost_matrices(g_open, points)
        m_closed = cost_matrices(g_closed, points)
        for i in range(len(points)):
            for j in range(len(points)):
                c = m_closed.time_s[i][j]
                o = m_open.time_s[i][j]
                if c is not None:
                    assert o is not None and c >= o


def test_symmetry_without_oneway():
    rng = random.Random(31)
    net = random_network(rng, 25)
    net = RoadNetwork(
        nodes=net.nodes,
        edges=[RoadEdge(e.from_node, e.to_node, e.length_m, e.road_class, False) for e in net.edges],
    )
    profile = VehicleProfile(name="p", speeds={"residential": 10, "track": 8, "path": 5})
    g = build_profiled_graph(net, profile)
    points = sorted(g.connected_nodes)[:10]
    m = cost_matrices(g, points)
    for i in range(len(points)):
        for j in range(len(points)):
            assert m.time_s[i][j] == m.time_s[j][i]
            assert m.dist_m[i][j] == m.dist_m[j][i]


def test_network_distance_bounds_straight_line():
    # parsed networks have edge length == haversine, so any path distance
    # must be at least the straight-line distance between its endpoints
    rng = random.Random(5)
    nodes = {}
    for i in range(1, 26):
        nodes[i] = (19.70 + rng.uniform(0, 0.01), -72.20 + rng.uniform(0, 0.01))
    ways = []
    for i in range(2, 26):
        ways.append((i, [i, rng.randint(1, i - 1)], {"highway": "residential"}))
    net = parse_osm_xml(osm_xml(nodes, ways))
    profile = VehicleProfile(name="p", speeds={"residential": 12.0})
    g = build_profiled_graph(net, profile)
    points = sorted(g.connected_nodes)[:10]
    m = cost_matrices(g, points)
    for i, a in enumerate(points):
        for j, b in enumerate(points):
            d = m.dist_m[i][j]
            if d is not None and i != j:
                assert d >= 0.99 * haversine_m(net.nodes[a], net.nodes[b])


# ---------------------------------------------------------------------------
# snap_point


def test_snap_exact_node():
    net = triangle_network()
    g = build_profiled_graph(net, WHEELBARROW)
    res = snap_point(net, g, net.nodes[2], max_radius_m=50.0)
    assert res.node_id == 2
    assert res.snap_dist_m == 0.0


def test_snap_nearby_point():
    net = triangle_network()
    g = build_profiled_graph(net, WHEELBARROW)
    p = GeoPoint(19.76009, -72.2000)  # ~10 m north of node 1
    res = snap_point(net, g, p, max_radius_m=100.0)
    assert res.node_id == 1
    assert res.snap_dist_m == pytest.approx(law_of_cosines_m(p.lat, p.lon, 19.76, -72.20), abs=0.01)
    assert res.snap_dist_m == pytest.approx(10.0, abs=0.5)


def test_snap_fails_outside_radius():
    net = triangle_network()
    g = build_profiled_graph(net, WHEELBARROW)
    far = GeoPoint(19.80, -72.20)  # kilometers away
    with pytest.raises(SnapFailed) as exc:
        snap_point(net, g, far, max_radius_m=100.0)
    assert exc.value.best_dist_m > 500


def test_snap_ignores_nodes_without_accessible_edges():
    # node 2 touches only path edges, inaccessible to the profile
    net = RoadNetwork(
        nodes={
            1: GeoPoint(19.7600, -72.2000),
            2: GeoPoint(19.7601, -72.2000),
            3: GeoPoint(19.7605, -72.2000),
        },
        edges=[
            RoadEdge(1, 2, 15.0, "path", False),
            RoadEdge(1, 3, 60.0, "residential", False),
        ],
    )
    no_paths = VehicleProfile(name="np", speeds={"residential": 10}, access={"path": False})
    g = build_profiled_graph(net, no_paths)
    p = GeoPoint(19.76012, -72.2000)  # nearest overall is node 2
    res = snap_point(net, g, p, max_radius_m=100.0)
    assert res.node_id in (1, 3)
