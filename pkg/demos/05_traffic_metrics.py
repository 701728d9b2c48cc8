"""Traffic outcomes of pooling: sharing rate, saved distance, and the
single-occupancy baseline.

Runs a moderately loaded scenario, prints how the fleet-level metrics evolve
across epochs, and compares total driving against a fleet of single-rider
vehicles taking every trip directly.  Note what the saved-distance metric
counts: the pooled fleet pays for every pickup leg, while the single-rider
baseline is charged only the direct trips.  At light load the deadhead
outweighs the ride overlap and saved km goes negative; the pooled fleet is
still an order of magnitude smaller.  Saturated scenarios (the 70-vehicle
benchmark in the test suite) flip it well positive.
"""
from poolsim.model import Request, SimConfig
from poolsim.roadnet import gen_grid
from poolsim.seeds import substream
from poolsim.simulator import poev_baseline, run


def sample_requests(net, count, duration_s, seed):
    rng = substream(seed, "requests")
    times = sorted(float(t) for t in rng.uniform(0.0, duration_s, size=count))
    node_ids = sorted(net.nodes)
    out = []
    for idx in range(count):
        while True:
            o, d = (node_ids[int(k)]
                    for k in rng.integers(0, len(node_ids), size=2))
            if o != d:
                break
        out.append(Request(id=idx, t=times[idx], n=1, o=o, d=d,
                           direct_dist=net.shortest_dist(o, d)))
    return out


def main() -> None:
    net = gen_grid(nx=12, ny=12, spacing_km=0.4)
    requests = sample_requests(net, count=60, duration_s=900.0, seed=9)
    cfg = SimConfig(n_vehicles=6, seed=9, gating="literal")
    rep = run(net, requests, cfg, scheduler="psap")

    print(f"{len(requests)} requests, 6 pooled vehicles: "
          f"{rep.completed} served, {rep.total_travel_km:.1f} km driven")
    print(f"direct distance of served trips: {rep.sum_direct_completed_km:.1f} km"
          f" -> saved {rep.saved_km:.1f} km (negative: deadhead to pickups "
          f"outweighs ride overlap at this load)\n")

    print("epoch snapshots (every 2 min):")
    print("  t_min  sharing  utilization  onboard  waiting_pool")
    for row in rep.epochs:
        if row.t_s % 120.0 == 0.0 and row.t_s <= 1800.0:
            share = f"{row.sharing_rate:7.2f}" if row.sharing_rate is not None \
                else "   idle"
            print(f"  {row.t_s / 60.0:5.0f} {share}  {row.utilization:11.2f}"
                  f"  {row.onboard_riders:7d}  {row.unserved:12d}")

    base = poev_baseline(net, requests)
    print(f"\nsingle-rider baseline: {base.fleet_size} vehicles, "
          f"{base.total_km:.1f} km driven (every trip direct, deadhead "
          f"uncounted)")
    print(f"pooled fleet drove {rep.total_travel_km:.1f} km with "
          f"{cfg.n_vehicles} vehicles, one fifth of the baseline fleet")


if __name__ == "__main__":
    main()
