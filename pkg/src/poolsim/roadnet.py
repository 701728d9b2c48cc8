"""Road network: nodes, edges, and memoized shortest paths.

Distances along the network (D) are shortest-path km; straight-line km (E)
come from :mod:`poolsim.geometry`.  Every edge must satisfy length >= E of its
endpoints (up to 1e-6 slack), which makes D >= E hold network-wide and is what
lets rectangle membership act as a sound lower-bound filter.

Shortest paths are single-source Dijkstra (scipy csgraph) memoized per source;
the cache is transparent, results never depend on query order.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .geometry import Point, euclid

EARTH_RADIUS_KM = 6371.0088
_LENGTH_SLACK = 1e-6


class NetworkError(ValueError):
    """Malformed network input (parse or validation failure)."""


class NoPathError(RuntimeError):
    """No route exists between the queried nodes."""


@dataclass(frozen=True)
class Edge:
    id: int
    u: int
    v: int
    length_km: float
    bidirectional: bool = True


@dataclass
class RoadNetwork:
    nodes: dict[int, Point]
    edges: list[Edge]
    _index: dict[int, int] = field(init=False, repr=False)
    _ids: list[int] = field(init=False, repr=False)
    _adj: list[dict[int, float]] = field(init=False, repr=False)
    _csr: csr_matrix = field(init=False, repr=False)
    _dist_cache: dict[int, np.ndarray] = field(init=False, repr=False)
    _pred_cache: dict[int, np.ndarray] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._ids = list(self.nodes.keys())
        self._index = {nid: i for i, nid in enumerate(self._ids)}
        n = len(self._ids)
        # parallel edges collapse to the shortest one; scipy would otherwise
        # sum duplicate COO entries
        adj: list[dict[int, float]] = [dict() for _ in range(n)]
        for e in self.edges:
            self._validate_edge(e)
            iu, iv = self._index[e.u], self._index[e.v]
            pairs = [(iu, iv), (iv, iu)] if e.bidirectional else [(iu, iv)]
            for a, b in pairs:
                prev = adj[a].get(b)
                if prev is None or e.length_km < prev:
                    adj[a][b] = e.length_km
        self._adj = adj
        rows, cols, data = [], [], []
        for a, nbrs in enumerate(adj):
            for b, w in nbrs.items():
                rows.append(a)
                cols.append(b)
                data.append(w)
        self._csr = csr_matrix((data, (rows, cols)), shape=(n, n))
        self._dist_cache = {}
        self._pred_cache = {}

    def _validate_edge(self, e: Edge) -> None:
        if e.u not in self.nodes or e.v not in self.nodes:
            raise NetworkError(f"edge {e.id} references unknown node "
                               f"({e.u} -> {e.v})")
        if not (e.length_km > 0):
            raise NetworkError(f"edge {e.id} has nonpositive length "
                               f"{e.length_km}")
        straight = euclid(self.nodes[e.u], self.nodes[e.v])
        if e.length_km < straight - _LENGTH_SLACK:
            raise NetworkError(
                f"edge {e.id} length {e.length_km} km is shorter than the "
                f"straight line {straight:.6f} km between nodes {e.u} and {e.v}")

    # -- queries ---------------------------------------------------------

    def point(self, node_id: int) -> Point:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise NetworkError(f"unknown node id {node_id}") from None

    def _source_row(self, src_idx: int) -> tuple[np.ndarray, np.ndarray]:
        dist = self._dist_cache.get(src_idx)
        if dist is None:
            dist, pred = dijkstra(self._csr, directed=True, indices=src_idx,
                                  return_predecessors=True)
            self._dist_cache[src_idx] = dist
            self._pred_cache[src_idx] = pred
        return self._dist_cache[src_idx], self._pred_cache[src_idx]

    def shortest_dist(self, a: int, b: int) -> float:
        """Network shortest-path distance a -> b in km."""
        ia = self._index.get(a)
        ib = self._index.get(b)
        if ia is None or ib is None:
            raise NetworkError(f"unknown node id {a if ia is None else b}")
        if ia == ib:
            return 0.0
        dist, _ = self._source_row(ia)
        d = dist[ib]
        if math.isinf(d):
            raise NoPathError(f"no path from node {a} to node {b}")
        return float(d)

    def shortest_path_nodes(self, a: int, b: int) -> list[int]:
        """Node sequence of a shortest path a -> b, inclusive of both ends."""
        ia = self._index.get(a)
        ib = self._index.get(b)
        if ia is None or ib is None:
            raise NetworkError(f"unknown node id {a if ia is None else b}")
        if ia == ib:
            return [a]
        dist, pred = self._source_row(ia)
        if math.isinf(dist[ib]):
            raise NoPathError(f"no path from node {a} to node {b}")
        rev = [ib]
        cur = ib
        while cur != ia:
            cur = int(pred[cur])
            rev.append(cur)
        return [self._ids[i] for i in reversed(rev)]

    def hop_length(self, a: int, b: int) -> float:
        """Length of the direct edge a -> b (shortest parallel edge)."""
        try:
            return self._adj[self._index[a]][self._index[b]]
        except KeyError:
            raise NetworkError(f"no edge from node {a} to node {b}") from None

    def stop_sequence_length(self, seq: list[int]) -> float:
        """Total D along consecutive node pairs of seq."""
        return sum(self.shortest_dist(u, v) for u, v in zip(seq, seq[1:]))

    def bbox(self) -> tuple[float, float, float, float]:
        xs = [p.x for p in self.nodes.values()]
        ys = [p.y for p in self.nodes.values()]
        return min(xs), min(ys), max(xs), max(ys)

    def area_km2(self) -> float:
        """Bounding-box area of the node set, the city area S used in analysis."""
        x0, y0, x1, y1 = self.bbox()
        return (x1 - x0) * (y1 - y0)


# -- generation and I/O ---------------------------------------------------


def gen_grid(nx: int, ny: int, spacing_km: float) -> RoadNetwork:
    """Rectangular lattice with row-major node ids and bidirectional edges.

    Node (row r, col c) has id r*nx + c at (c*spacing, r*spacing).  Edge ids
    number horizontal edges first, then vertical, both row-major, so repeated
    generation is byte-stable.
    """
    if nx < 2 or ny < 2:
        raise NetworkError(f"grid needs nx, ny >= 2, got {nx}x{ny}")
    if not (spacing_km > 0):
        raise NetworkError(f"grid spacing must be positive, got {spacing_km}")
    nodes = {r * nx + c: Point(c * spacing_km, r * spacing_km)
             for r in range(ny) for c in range(nx)}
    edges: list[Edge] = []
    eid = 0
    for r in range(ny):
        for c in range(nx - 1):
            edges.append(Edge(eid, r * nx + c, r * nx + c + 1, spacing_km))
            eid += 1
    for r in range(ny - 1):
        for c in range(nx):
            edges.append(Edge(eid, r * nx + c, (r + 1) * nx + c, spacing_km))
            eid += 1
    return RoadNetwork(nodes=nodes, edges=edges)


def _parse_bool(s: str, where: str) -> bool:
    t = s.strip().lower()
    if t in ("1", "true", "yes"):
        return True
    if t in ("0", "false", "no"):
        return False
    raise NetworkError(f"{where}: bad boolean {s!r}")


def _project_latlon(rows: list[tuple[int, float, float]]) -> dict[int, Point]:
    """Equirectangular projection about the mean latitude, km."""
    lat0 = math.radians(sum(r[1] for r in rows) / len(rows))
    lon0 = math.radians(sum(r[2] for r in rows) / len(rows))
    coslat = math.cos(lat0)
    out = {}
    for nid, lat, lon in rows:
        x = EARTH_RADIUS_KM * (math.radians(lon) - lon0) * coslat
        y = EARTH_RADIUS_KM * (math.radians(lat) - lat0)
        out[nid] = Point(x, y)
    return out


def load_network(nodes_path: str | os.PathLike,
                 edges_path: str | os.PathLike) -> RoadNetwork:
    """Load a network from two CSVs.

    Nodes: header ``id,x_km,y_km`` (planar) or ``id,lat,lon`` (geographic,
    projected equirectangularly about the mean latitude).  Mixing is rejected.
    Edges: header ``id,from,to,length_km,bidirectional``.
    """
    with open(nodes_path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise NetworkError(f"{nodes_path}: empty nodes file") from None
        header = [h.strip() for h in header]
        if header == ["id", "x_km", "y_km"]:
            geographic = False
        elif header == ["id", "lat", "lon"]:
            geographic = True
        else:
            raise NetworkError(
                f"{nodes_path}: nodes header must be id,x_km,y_km or "
                f"id,lat,lon, got {','.join(header)}")
        raw: list[tuple[int, float, float]] = []
        seen: set[int] = set()
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise NetworkError(f"{nodes_path}:{lineno}: expected 3 fields")
            try:
                nid = int(row[0])
                a, b = float(row[1]), float(row[2])
            except ValueError as exc:
                raise NetworkError(f"{nodes_path}:{lineno}: {exc}") from None
            if nid in seen:
                raise NetworkError(f"{nodes_path}:{lineno}: duplicate node id {nid}")
            seen.add(nid)
            raw.append((nid, a, b))
    if not raw:
        raise NetworkError(f"{nodes_path}: no nodes")
    if geographic:
        nodes = _project_latlon(raw)
    else:
        nodes = {nid: Point(a, b) for nid, a, b in raw}

    edges: list[Edge] = []
    with open(edges_path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise NetworkError(f"{edges_path}: empty edges file") from None
        if [h.strip() for h in header] != ["id", "from", "to", "length_km",
                                           "bidirectional"]:
            raise NetworkError(f"{edges_path}: edges header must be "
                               f"id,from,to,length_km,bidirectional")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise NetworkError(f"{edges_path}:{lineno}: expected 5 fields")
            try:
                eid, u, v = int(row[0]), int(row[1]), int(row[2])
                length = float(row[3])
            except ValueError as exc:
                raise NetworkError(f"{edges_path}:{lineno}: {exc}") from None
            bidi = _parse_bool(row[4], f"{edges_path}:{lineno}")
            if u not in nodes or v not in nodes:
                raise NetworkError(
                    f"{edges_path}:{lineno}: edge {eid} references unknown "
                    f"node ({u} -> {v})")
            edges.append(Edge(eid, u, v, length, bidi))
    try:
        return RoadNetwork(nodes=nodes, edges=edges)
    except NetworkError:
        raise
    except ValueError as exc:
        raise NetworkError(str(exc)) from None


def save_network(net: RoadNetwork, nodes_path: str | os.PathLike,
                 edges_path: str | os.PathLike) -> None:
    """Write the planar CSV pair; full float precision, byte-stable order."""
    with open(nodes_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["id", "x_km", "y_km"])
        for nid, p in net.nodes.items():
            w.writerow([nid, repr(p.x), repr(p.y)])
    with open(edges_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["id", "from", "to", "length_km", "bidirectional"])
        for e in net.edges:
            w.writerow([e.id, e.u, e.v, repr(e.length_km),
                        "true" if e.bidirectional else "false"])
