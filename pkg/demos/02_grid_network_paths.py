"""Synthetic road networks: grid generation, shortest paths, distance cache.

The simulator runs on plain node/edge networks with Euclidean coordinates.
This walk-through builds a Manhattan-style grid, queries a few shortest
paths, and shows that repeated distance lookups hit a cache rather than
re-running the search.
"""
import time

from poolsim.roadnet import gen_grid


def main() -> None:
    net = gen_grid(nx=8, ny=6, spacing_km=0.5)
    print(f"8x6 grid at 0.5 km spacing: {len(net.nodes)} nodes, "
          f"{len(net.edges)} edges, bounding area {net.area_km2():.2f} km^2")

    pairs = [(0, 47), (0, 7), (5, 42), (20, 27)]
    print("\nshortest distances (km):")
    for a, b in pairs:
        pa, pb = net.point(a), net.point(b)
        print(f"  {a:2d} ({pa.x:.1f},{pa.y:.1f}) -> {b:2d} ({pb.x:.1f},{pb.y:.1f})"
              f" : {net.shortest_dist(a, b):.2f}")

    route = net.shortest_path_nodes(0, 47)
    print(f"\nnode sequence 0 -> 47: {route}")

    t0 = time.perf_counter()
    for a in net.nodes:
        net.shortest_dist(35, a)
    cold = time.perf_counter() - t0
    t0 = time.perf_counter()
    for a in net.nodes:
        net.shortest_dist(35, a)
    warm = time.perf_counter() - t0
    print(f"\nall distances from node 35: first pass {cold * 1e3:.2f} ms, "
          f"second pass {warm * 1e3:.3f} ms (cached)")


if __name__ == "__main__":
    main()
