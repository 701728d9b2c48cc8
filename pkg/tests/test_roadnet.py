from __future__ import annotations

import heapq
import math

import numpy as np
import pytest

from poolsim.geometry import Point, euclid
from poolsim.roadnet import (Edge, NetworkError, NoPathError, RoadNetwork,
                             gen_grid, load_network, save_network)


def oracle_dijkstra(adj: dict[int, dict[int, float]], src: int,
                    dst: int) -> float:
    """Plain heapq Dijkstra, independent of the packaged implementation."""
    dist = {src: 0.0}
    heap = [(0.0, src)]
    done: set[int] = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        if u == dst:
            return d
        done.add(u)
        for v, w in adj.get(u, {}).items():
            nd = d + w
            if nd < dist.get(v, math.inf):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return math.inf


def adjacency_of(net: RoadNetwork) -> dict[int, dict[int, float]]:
    adj: dict[int, dict[int, float]] = {}
    for e in net.edges:
        pairs = [(e.u, e.v), (e.v, e.u)] if e.bidirectional else [(e.u, e.v)]
        for a, b in pairs:
            cur = adj.setdefault(a, {})
            if b not in cur or e.length_km < cur[b]:
                cur[b] = e.length_km
    return adj


def oracle_all_paths_min(adj: dict[int, dict[int, float]], src: int,
                         dst: int, depth: int) -> float:
    """Brute-force minimum over all simple paths up to the given hop count."""
    best = math.inf

    def walk(u: int, seen: frozenset[int], acc: float) -> None:
        nonlocal best
        if acc >= best:
            return
        if u == dst:
            best = acc
            return
        if len(seen) > depth:
            return
        for v, w in adj.get(u, {}).items():
            if v not in seen:
                walk(v, seen | {v}, acc + w)

    walk(src, frozenset([src]), 0.0)
    return best


class TestGenGrid:
    @pytest.mark.parametrize("nx,ny,n_nodes,n_edges", [
        (2, 2, 4, 4),
        (3, 3, 9, 12),
        (10, 10, 100, 180),
    ])
    def test_counts(self, nx, ny, n_nodes, n_edges):
        net = gen_grid(nx, ny, 1.0)
        assert len(net.nodes) == n_nodes
        assert len(net.edges) == n_edges

    def test_positions_row_major(self):
        net = gen_grid(3, 2, 0.5)
        assert net.point(0) == Point(0.0, 0.0)
        assert net.point(2) == Point(1.0, 0.0)
        assert net.point(3) == Point(0.0, 0.5)

    def test_invalid_dimensions(self):
        with pytest.raises(NetworkError):
            gen_grid(1, 5, 1.0)
        with pytest.raises(NetworkError):
            gen_grid(3, 3, 0.0)

    def test_area(self):
        assert gen_grid(10, 10, 0.5).area_km2() == pytest.approx(4.5 * 4.5)
        assert gen_grid(20, 20, 0.3).area_km2() == pytest.approx(5.7 * 5.7)


class TestShortestPaths:
    def test_corner_to_corner(self):
        net = gen_grid(3, 3, 1.0)
        assert net.shortest_dist(0, 8) == pytest.approx(4.0)

    def test_self_and_adjacent(self):
        net = gen_grid(3, 3, 1.0)
        assert net.shortest_dist(4, 4) == 0.0
        assert net.shortest_dist(0, 1) == pytest.approx(1.0)

    def test_against_path_enumeration(self):
        # (0,0) -> (2,1) on the 3x3 unit grid: brute force over simple paths
        net = gen_grid(3, 3, 1.0)
        adj = adjacency_of(net)
        want = oracle_all_paths_min(adj, 0, 5, depth=9)
        assert want == pytest.approx(3.0)
        assert net.shortest_dist(0, 5) == pytest.approx(want)

    def test_against_heap_dijkstra_grids(self):
        rng = np.random.default_rng(31)
        for _ in range(3):
            nx, ny = rng.integers(3, 8, 2)
            net = gen_grid(int(nx), int(ny), float(rng.uniform(0.2, 2.0)))
            adj = adjacency_of(net)
            ids = list(net.nodes)
            for _ in range(25):
                a, b = rng.choice(ids, 2)
                assert net.shortest_dist(int(a), int(b)) == pytest.approx(
                    oracle_dijkstra(adj, int(a), int(b)))

    def test_against_heap_dijkstra_random_graph(self):
        rng = np.random.default_rng(97)
        n = 40
        pts = {i: Point(*rng.uniform(0, 10, 2)) for i in range(n)}
        edges = []
        eid = 0
        for i in range(1, n):  # spanning tree keeps it connected
            j = int(rng.integers(0, i))
            d = euclid(pts[i], pts[j])
            edges.append(Edge(eid, i, j, d * float(rng.uniform(1.0, 1.5))))
            eid += 1
        for _ in range(60):
            i, j = rng.integers(0, n, 2)
            if i == j:
                continue
            d = euclid(pts[int(i)], pts[int(j)])
            edges.append(Edge(eid, int(i), int(j),
                              d * float(rng.uniform(1.0, 1.5)) + 1e-9))
            eid += 1
        net = RoadNetwork(nodes=pts, edges=edges)
        adj = adjacency_of(net)
        for _ in range(50):
            a, b = (int(x) for x in rng.integers(0, n, 2))
            assert net.shortest_dist(a, b) == pytest.approx(
                oracle_dijkstra(adj, a, b))

    def test_path_nodes_consistent_with_dist(self):
        net = gen_grid(5, 4, 0.5)
        rng = np.random.default_rng(3)
        ids = list(net.nodes)
        for _ in range(30):
            a, b = (int(x) for x in rng.choice(ids, 2))
            path = net.shortest_path_nodes(a, b)
            assert path[0] == a and path[-1] == b
            total = sum(net.hop_length(u, v) for u, v in zip(path, path[1:]))
            assert total == pytest.approx(net.shortest_dist(a, b))

    def test_parallel_edges_use_shortest(self):
        # duplicate entries must not be summed into the sparse matrix
        nodes = {0: Point(0, 0), 1: Point(1, 0)}
        edges = [Edge(0, 0, 1, 3.0), Edge(1, 0, 1, 2.0)]
        net = RoadNetwork(nodes=nodes, edges=edges)
        assert net.shortest_dist(0, 1) == pytest.approx(2.0)
        assert net.hop_length(0, 1) == pytest.approx(2.0)

    def test_directed_edge_no_return(self):
        nodes = {0: Point(0, 0), 1: Point(1, 0)}
        edges = [Edge(0, 0, 1, 1.0, bidirectional=False)]
        net = RoadNetwork(nodes=nodes, edges=edges)
        assert net.shortest_dist(0, 1) == pytest.approx(1.0)
        with pytest.raises(NoPathError):
            net.shortest_dist(1, 0)
        with pytest.raises(NoPathError):
            net.shortest_path_nodes(1, 0)

    def test_symmetric_on_bidirectional(self):
        net = gen_grid(4, 4, 0.7)
        rng = np.random.default_rng(8)
        ids = list(net.nodes)
        for _ in range(20):
            a, b = (int(x) for x in rng.choice(ids, 2))
            assert net.shortest_dist(a, b) == pytest.approx(
                net.shortest_dist(b, a))

    def test_triangle_inequality_and_lower_bound(self):
        net = gen_grid(6, 6, 0.4)
        rng = np.random.default_rng(12)
        ids = list(net.nodes)
        for _ in range(60):
            a, b, c = (int(x) for x in rng.choice(ids, 3))
            dab = net.shortest_dist(a, b)
            assert dab <= net.shortest_dist(a, c) + net.shortest_dist(c, b) + 1e-9
            assert dab >= euclid(net.point(a), net.point(b)) - 1e-6

    def test_cache_transparency(self):
        net1 = gen_grid(5, 5, 1.0)
        warm = net1.shortest_dist(0, 24)
        again = net1.shortest_dist(0, 24)
        net2 = gen_grid(5, 5, 1.0)
        fresh = net2.shortest_dist(0, 24)
        assert warm == again == fresh

    def test_stop_sequence_length(self):
        net = gen_grid(5, 5, 1.0)
        assert net.stop_sequence_length([0, 4, 24]) == pytest.approx(4 + 4)
        assert net.stop_sequence_length([7]) == 0.0
        assert net.stop_sequence_length([]) == 0.0

    def test_unknown_node(self):
        net = gen_grid(2, 2, 1.0)
        with pytest.raises(NetworkError):
            net.shortest_dist(0, 99)
        with pytest.raises(NetworkError):
            net.point(-1)


class TestValidation:
    def test_nonpositive_length(self):
        nodes = {0: Point(0, 0), 1: Point(0, 0)}
        with pytest.raises(NetworkError):
            RoadNetwork(nodes=nodes, edges=[Edge(0, 0, 1, 0.0)])

    def test_length_below_euclid(self):
        nodes = {0: Point(0, 0), 1: Point(3, 0)}
        with pytest.raises(NetworkError):
            RoadNetwork(nodes=nodes, edges=[Edge(0, 0, 1, 2.5)])

    def test_length_slack_accepted(self):
        nodes = {0: Point(0, 0), 1: Point(3, 0)}
        net = RoadNetwork(nodes=nodes, edges=[Edge(0, 0, 1, 3.0 - 1e-7)])
        assert net.shortest_dist(0, 1) == pytest.approx(3.0, abs=1e-6)

    def test_dangling_endpoint(self):
        nodes = {0: Point(0, 0), 1: Point(1, 0)}
        with pytest.raises(NetworkError):
            RoadNetwork(nodes=nodes, edges=[Edge(0, 0, 7, 1.0)])


class TestFileIO:
    def test_round_trip(self, tmp_path):
        net = gen_grid(4, 3, 0.5)
        nodes_p = tmp_path / "nodes.csv"
        edges_p = tmp_path / "edges.csv"
        save_network(net, nodes_p, edges_p)
        back = load_network(nodes_p, edges_p)
        assert back.nodes == net.nodes
        assert len(back.edges) == len(net.edges)
        assert back.shortest_dist(0, 11) == net.shortest_dist(0, 11)

    def test_duplicate_node_id(self, tmp_path):
        p = tmp_path / "nodes.csv"
        p.write_text("id,x_km,y_km\n0,0,0\n0,1,0\n")
        e = tmp_path / "edges.csv"
        e.write_text("id,from,to,length_km,bidirectional\n")
        with pytest.raises(NetworkError, match="duplicate"):
            load_network(p, e)

    def test_bad_header(self, tmp_path):
        p = tmp_path / "nodes.csv"
        p.write_text("id,x,y\n0,0,0\n")
        e = tmp_path / "edges.csv"
        e.write_text("id,from,to,length_km,bidirectional\n")
        with pytest.raises(NetworkError, match="header"):
            load_network(p, e)

    def test_edge_unknown_node(self, tmp_path):
        p = tmp_path / "nodes.csv"
        p.write_text("id,x_km,y_km\n0,0,0\n1,1,0\n")
        e = tmp_path / "edges.csv"
        e.write_text("id,from,to,length_km,bidirectional\n0,0,5,1.0,true\n")
        with pytest.raises(NetworkError, match="unknown node"):
            load_network(p, e)

    def test_latlon_projection(self, tmp_path):
        # two nodes on the same parallel, 0.02 deg of longitude apart at 48N
        p = tmp_path / "nodes.csv"
        p.write_text("id,lat,lon\n0,48.0,11.00\n1,48.0,11.02\n")
        e = tmp_path / "edges.csv"
        want = 6371.0088 * math.radians(0.02) * math.cos(math.radians(48.0))
        e.write_text("id,from,to,length_km,bidirectional\n"
                     f"0,0,1,{want + 0.01},true\n")
        net = load_network(p, e)
        got = euclid(net.point(0), net.point(1))
        assert got == pytest.approx(want, rel=1e-9)

    def test_latlon_lat_spacing(self, tmp_path):
        p = tmp_path / "nodes.csv"
        p.write_text("id,lat,lon\n0,48.00,11.0\n1,48.01,11.0\n")
        e = tmp_path / "edges.csv"
        want = 6371.0088 * math.radians(0.01)
        e.write_text("id,from,to,length_km,bidirectional\n"
                     f"0,0,1,{want + 0.01},true\n")
        net = load_network(p, e)
        assert euclid(net.point(0), net.point(1)) == pytest.approx(want,
                                                                   rel=1e-9)
