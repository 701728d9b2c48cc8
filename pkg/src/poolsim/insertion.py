"""Origin-destination insertion into a vehicle's planned stop path.

A candidate is a pair (i, j): the new origin is spliced in at position i and
the new destination at position j of the o-augmented path, 0 <= i < j <= K+1
for a path of K stops.  Position 0 is immediately after the vehicle's current
head node.  Candidates fall into three cases by where the destination lands:

  A  destination between existing stops (j <= K)
  B  destination appended, origin interior (i < K, j = K+1)
  C  both appended at the tail (i = K, j = K+1)

The added driving distance has a closed form per case built from at most six
shortest-path lookups, so cost never re-sums the whole path.  Enumeration for
K >= 1 starts at i = 1: the per-case closed-form candidate counts
(K(K-1)/2, K-1, 1) count slots between and after committed stops only, so the
slot ahead of the in-progress head leg is not enumerated (insertion_cost and
splice themselves accept i = 0).  A K = 0 path has the single append
candidate (0, 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import (Request, RequestState, SimConfig, Stop, StopKind, Vehicle,
                    stop_index)
from .roadnet import NoPathError, RoadNetwork

CASE_A = "A"
CASE_B = "B"
CASE_C = "C"

INFEASIBLE = math.inf


@dataclass(frozen=True)
class Candidate:
    i: int
    j: int
    case: str
    cost: float  # added km, INFEASIBLE when the splice fails QoS


@dataclass(frozen=True)
class QosViolation:
    request_id: int
    kind: str  # detour | buffer | capacity


# feasibility comparisons carry a hair of slack so exact-boundary plans
# (planned/direct landing on the threshold) survive float rounding
_QOS_EPS = 1e-9


def classify_case(i: int, j: int, k: int) -> str:
    if not (0 <= i < j <= k + 1):
        raise ValueError(f"bad insertion positions ({i}, {j}) for K={k}")
    if i == k and j == k + 1:
        return CASE_C
    if j == k + 1:
        return CASE_B
    return CASE_A


def candidate_positions(k: int) -> list[tuple[int, int]]:
    """All (i, j) insertion positions for a path of K stops, lexicographic."""
    if k == 0:
        return [(0, 1)]
    return [(i, j) for i in range(1, k + 1) for j in range(i + 1, k + 2)]


def insertion_cost(net: RoadNetwork, head: int, stops: list[Stop], o: int,
                   d: int, i: int, j: int) -> float:
    """Added driving distance of splicing o at i and d at j.

    ``head`` stands in as position 0 (the vehicle's current head node).
    Raises NoPathError if a needed leg has no route.
    """
    k = len(stops)
    if not (0 <= i < j <= k + 1):
        raise ValueError(f"bad insertion positions ({i}, {j}) for K={k}")

    def theta(m: int) -> int:
        return head if m == 0 else stops[m - 1].node

    dd = net.shortest_dist
    if i == k and j == k + 1:
        # both appended after the last stop
        return dd(theta(k), o) + dd(o, d)
    if j == i + 1:
        # o and d adjacent inside the path
        return (dd(theta(i), o) + dd(o, d) + dd(d, theta(i + 1))
                - dd(theta(i), theta(i + 1)))
    if j == k + 1:
        # o interior, d appended
        return (dd(theta(i), o) + dd(o, theta(i + 1))
                - dd(theta(i), theta(i + 1)) + dd(theta(k), d))
    # o and d both interior, non-adjacent; d lands between the stops that are
    # at positions j-1 and j of the o-augmented path
    return (dd(theta(i), o) + dd(o, theta(i + 1)) - dd(theta(i), theta(i + 1))
            + dd(theta(j - 1), d) + dd(d, theta(j))
            - dd(theta(j - 1), theta(j)))


def splice(stops: list[Stop], o: int, d: int, i: int, j: int,
           request_id: int) -> list[Stop]:
    """New stop list with o at position i, then d at position j."""
    k = len(stops)
    if not (0 <= i < j <= k + 1):
        raise ValueError(f"bad insertion positions ({i}, {j}) for K={k}")
    out = list(stops)
    out.insert(i, Stop(StopKind.ORIGIN, request_id, o))
    out.insert(j, Stop(StopKind.DESTINATION, request_id, d))
    return out


def _max_occupancy(path: list[Stop], requests: dict[int, Request],
                   new_request: Request, onboard_now: int) -> int:
    load = onboard_now
    peak = load
    for s in path:
        r = new_request if s.request_id == new_request.id else requests[s.request_id]
        if s.kind == StopKind.ORIGIN:
            load += r.n
            peak = max(peak, load)
        else:
            load -= r.n
    return peak


def qos_check(net: RoadNetwork, v: Vehicle, requests: dict[int, Request],
              path: list[Stop], new_request: Request, config: SimConfig,
              check_buffer: bool) -> QosViolation | None:
    """First quality-of-service violation of a candidate path, or None.

    Checks the new request first, then committed requests in service-list
    order; per request the detour bound comes before the pickup buffer.  The
    buffer guarantee is per request and only applies before pickup: the new
    request is buffer-checked when ``check_buffer`` is set (an assignment past
    the waiting threshold trades its own buffer guarantee for coverage), and a
    committed waiting rider is buffer-checked exactly when it was scheduled
    under the threshold, so a late-arriving request can never stretch a
    guaranteed rider's pickup past the buffer.
    """
    # prefix driving distances: pre[m] = km from the current position to stop m
    nodes = [s.node for s in path]
    pre = [v.offset_km + net.shortest_dist(v.node, nodes[0])]
    for a, b in zip(nodes, nodes[1:]):
        pre.append(pre[-1] + net.shortest_dist(a, b))

    idx: dict[tuple[int, str], int] = {}
    for m, s in enumerate(path):
        idx[(s.request_id, s.kind.value)] = m

    max_detour = config.max_detour + _QOS_EPS
    max_buffer = config.buffer_km + _QOS_EPS

    def check_one(r: Request, is_new: bool) -> QosViolation | None:
        di = idx[(r.id, StopKind.DESTINATION.value)]
        if is_new or r.state == RequestState.WAITING:
            oi = idx[(r.id, StopKind.ORIGIN.value)]
            planned = pre[di] - pre[oi]
            if planned / r.direct_dist - 1.0 > max_detour:
                return QosViolation(r.id, "detour")
            guarded = check_buffer if is_new else bool(r.scheduled_under_wait)
            if guarded:
                since = 0.0 if is_new else v.odometer - r.odometer_at_schedule
                if since + pre[oi] > max_buffer:
                    return QosViolation(r.id, "buffer")
        else:  # onboard
            ridden = v.odometer - r.traveled_at_pickup
            if (ridden + pre[di]) / r.direct_dist - 1.0 > max_detour:
                return QosViolation(r.id, "detour")
        return None

    hit = check_one(new_request, is_new=True)
    if hit is not None:
        return hit
    for rid in v.service_list:
        hit = check_one(requests[rid], is_new=False)
        if hit is not None:
            return hit
    if config.strict_occupancy:
        onboard_now = sum(requests[rid].n for rid in v.service_list
                          if requests[rid].state == RequestState.ONBOARD)
        if _max_occupancy(path, requests, new_request, onboard_now) > v.capacity:
            return QosViolation(new_request.id, "capacity")
    return None


def evaluate_candidate(net: RoadNetwork, v: Vehicle,
                       requests: dict[int, Request], new_request: Request,
                       config: SimConfig, check_buffer: bool, i: int,
                       j: int) -> Candidate:
    """Cost one (i, j) splice and QoS-check it; infeasible carries inf."""
    case = classify_case(i, j, len(v.path))
    try:
        cost = insertion_cost(net, v.node, v.path, new_request.o,
                              new_request.d, i, j)
        trial = splice(v.path, new_request.o, new_request.d, i, j,
                       new_request.id)
        if qos_check(net, v, requests, trial, new_request, config,
                     check_buffer) is not None:
            cost = INFEASIBLE
    except NoPathError:
        cost = INFEASIBLE
    return Candidate(i, j, case, cost)


def enumerate_all(net: RoadNetwork, v: Vehicle, requests: dict[int, Request],
                  new_request: Request, config: SimConfig,
                  check_buffer: bool) -> list[Candidate]:
    """Every insertion candidate with its cost; infeasible ones carry inf.

    This is the exhaustive-search per-vehicle step: no geometric filtering.
    """
    return [evaluate_candidate(net, v, requests, new_request, config,
                               check_buffer, i, j)
            for i, j in candidate_positions(len(v.path))]
