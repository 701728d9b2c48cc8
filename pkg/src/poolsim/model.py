"""Domain model: requests, vehicles, world state, run configuration.

Request lifecycle: Unscheduled -> Waiting (assigned, not yet picked up) ->
Onboard -> Completed.  A vehicle's planned path is an ordered stop list the
vehicle serves front to back; its service list holds the ids of every request
it has committed to and not yet dropped off.

Quality-of-service quantities:
  waiting time  seconds since release, frozen at pickup
  detour ratio  extra in-vehicle distance over the direct o->d distance
  pickup buffer km the vehicle drives between scheduling and the pickup
"""

from __future__ import annotations

import csv
import enum
import os
from dataclasses import dataclass, field, asdict

from .geometry import Point, VehiclePsa
from .roadnet import RoadNetwork


class RequestState(enum.Enum):
    UNSCHEDULED = "unscheduled"
    WAITING = "waiting"
    ONBOARD = "onboard"
    COMPLETED = "completed"


class StopKind(enum.Enum):
    ORIGIN = "o"
    DESTINATION = "d"


@dataclass(frozen=True)
class Stop:
    kind: StopKind
    request_id: int
    node: int


@dataclass
class Request:
    id: int
    t: float                     # release time, s
    n: int                       # party size
    o: int                       # origin node
    d: int                       # destination node
    direct_dist: float = 0.0     # D(o, d), km, set at ingestion
    state: RequestState = RequestState.UNSCHEDULED
    vehicle_id: int | None = None
    schedule_time: float | None = None
    p_s: Point | None = None     # vehicle position at scheduling
    odometer_at_schedule: float | None = None
    scheduled_under_wait: bool | None = None  # w <= W when assigned
    pickup_time: float | None = None
    traveled_at_pickup: float | None = None
    dropoff_time: float | None = None
    traveled_at_dropoff: float | None = None


@dataclass
class Vehicle:
    id: int
    capacity: int
    node: int                    # node the vehicle is at or moving toward
    offset_km: float = 0.0       # km remaining to reach `node`; 0 means at it
    prev_node: int | None = None  # edge tail while mid-edge
    odometer: float = 0.0
    service_list: list[int] = field(default_factory=list)
    path: list[Stop] = field(default_factory=list)
    psa: VehiclePsa = field(default_factory=VehiclePsa.empty)
    route: list[int] | None = None  # expanded hops after `node`; None = stale

    def position_point(self, net: RoadNetwork) -> Point:
        """Planar position, interpolated along the current edge if mid-edge."""
        if self.offset_km <= 0.0 or self.prev_node is None:
            return net.point(self.node)
        a = net.point(self.prev_node)
        b = net.point(self.node)
        hop = net.hop_length(self.prev_node, self.node)
        frac = 1.0 - self.offset_km / hop
        return Point(a.x + (b.x - a.x) * frac, a.y + (b.y - a.y) * frac)


@dataclass
class SimConfig:
    max_detour: float = 0.2          # Delta, ratio
    wait_threshold_s: float = 240.0  # W
    buffer_km: float = 6.0           # B
    capacity: int = 5                # C, seats per vehicle
    speed_kmh: float = 30.0
    epoch_s: float = 10.0
    n_vehicles: int = 1
    seed: int = 0
    gating: str = "literal"          # literal | inclusive
    start_s: float = 0.0
    horizon_s: float | None = None   # hard stop; None runs to completion
    strict_occupancy: bool = False   # seat check on simultaneous occupancy

    def __post_init__(self) -> None:
        if self.max_detour < 0:
            raise ValueError("max_detour must be >= 0")
        if self.wait_threshold_s < 0:
            raise ValueError("wait_threshold_s must be >= 0")
        if self.buffer_km < 0:
            raise ValueError("buffer_km must be >= 0")
        if self.capacity < 1:
            raise ValueError("capacity must be >= 1")
        if not (self.speed_kmh > 0):
            raise ValueError("speed_kmh must be positive")
        if not (self.epoch_s > 0):
            raise ValueError("epoch_s must be positive")
        if self.n_vehicles < 1:
            raise ValueError("n_vehicles must be >= 1")
        if self.gating not in ("literal", "inclusive"):
            raise ValueError(f"gating must be literal or inclusive, "
                             f"got {self.gating!r}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class WorldState:
    clock: float
    vehicles: dict[int, Vehicle]
    requests: dict[int, Request]

    def ids_in_state(self, state: RequestState) -> list[int]:
        return sorted(r.id for r in self.requests.values() if r.state == state)

    @property
    def unscheduled(self) -> list[int]:
        return self.ids_in_state(RequestState.UNSCHEDULED)

    @property
    def waiting(self) -> list[int]:
        return self.ids_in_state(RequestState.WAITING)

    @property
    def onboard(self) -> list[int]:
        return self.ids_in_state(RequestState.ONBOARD)


def waiting_time(r: Request, now: float) -> float:
    """Seconds the rider has waited; frozen at pickup."""
    if r.state in (RequestState.ONBOARD, RequestState.COMPLETED):
        assert r.pickup_time is not None
        return r.pickup_time - r.t
    return max(0.0, now - r.t)


def passengers_committed(v: Vehicle, requests: dict[int, Request]) -> int:
    """Total party size over the service list (waiting plus onboard)."""
    return sum(requests[rid].n for rid in v.service_list)


def stop_index(path: list[Stop], request_id: int, kind: StopKind) -> int:
    for i, s in enumerate(path):
        if s.request_id == request_id and s.kind == kind:
            return i
    raise ValueError(f"request {request_id} has no {kind.value} stop in path")


def dist_to_stop(net: RoadNetwork, v: Vehicle, path: list[Stop],
                 idx: int) -> float:
    """Driving distance from the vehicle's current position to path[idx]."""
    total = v.offset_km + net.shortest_dist(v.node, path[0].node)
    for k in range(idx):
        total += net.shortest_dist(path[k].node, path[k + 1].node)
    return total


def planned_leg_dist(net: RoadNetwork, path: list[Stop], i: int,
                     j: int) -> float:
    """Driving distance along the path from stop i to stop j (i <= j)."""
    return sum(net.shortest_dist(path[k].node, path[k + 1].node)
               for k in range(i, j))


def current_detour(net: RoadNetwork, r: Request, v: Vehicle) -> float:
    """Detour ratio of r under the vehicle's committed path.

    Waiting: planned in-vehicle distance o->d along the path over the direct
    distance, minus one.  Onboard: distance already ridden plus the remaining
    distance to r's destination, over direct, minus one.  Completed: realized.
    """
    if r.state == RequestState.WAITING:
        io = stop_index(v.path, r.id, StopKind.ORIGIN)
        idst = stop_index(v.path, r.id, StopKind.DESTINATION)
        planned = planned_leg_dist(net, v.path, io, idst)
        return planned / r.direct_dist - 1.0
    if r.state == RequestState.ONBOARD:
        assert r.traveled_at_pickup is not None
        ridden = v.odometer - r.traveled_at_pickup
        idst = stop_index(v.path, r.id, StopKind.DESTINATION)
        remaining = dist_to_stop(net, v, v.path, idst)
        return (ridden + remaining) / r.direct_dist - 1.0
    if r.state == RequestState.COMPLETED:
        assert r.traveled_at_pickup is not None
        assert r.traveled_at_dropoff is not None
        return (r.traveled_at_dropoff - r.traveled_at_pickup) / r.direct_dist - 1.0
    raise ValueError(f"request {r.id} is unscheduled, no detour defined")


def current_buffer(net: RoadNetwork, r: Request, v: Vehicle) -> float:
    """Pickup buffer of r in km.

    Waiting: km driven since scheduling plus the remaining driving distance to
    r's origin stop.  Onboard/Completed: frozen at pickup.
    """
    assert r.odometer_at_schedule is not None
    if r.state == RequestState.WAITING:
        io = stop_index(v.path, r.id, StopKind.ORIGIN)
        return (v.odometer - r.odometer_at_schedule
                + dist_to_stop(net, v, v.path, io))
    if r.state in (RequestState.ONBOARD, RequestState.COMPLETED):
        assert r.traveled_at_pickup is not None
        return r.traveled_at_pickup - r.odometer_at_schedule
    raise ValueError(f"request {r.id} is unscheduled, no buffer defined")


# -- request I/O -----------------------------------------------------------

REQUEST_HEADER = ["id", "t_s", "n", "o_node", "d_node"]


class RequestError(ValueError):
    """Malformed request input."""


def load_requests(path: str | os.PathLike, net: RoadNetwork) -> list[Request]:
    """Read requests CSV (header ``id,t_s,n,o_node,d_node``) and resolve D(o,d).

    Unknown nodes, origin == destination, nonpositive party size, and
    unreachable o->d pairs are hard errors at ingestion.
    """
    out: list[Request] = []
    seen: set[int] = set()
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise RequestError(f"{path}: empty requests file") from None
        if [h.strip() for h in header] != REQUEST_HEADER:
            raise RequestError(f"{path}: requests header must be "
                               f"{','.join(REQUEST_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise RequestError(f"{path}:{lineno}: expected 5 fields")
            try:
                rid = int(row[0])
                t = float(row[1])
                n = int(row[2])
                o, d = int(row[3]), int(row[4])
            except ValueError as exc:
                raise RequestError(f"{path}:{lineno}: {exc}") from None
            if rid in seen:
                raise RequestError(f"{path}:{lineno}: duplicate request id {rid}")
            seen.add(rid)
            if n < 1:
                raise RequestError(f"{path}:{lineno}: party size must be >= 1")
            if t < 0:
                raise RequestError(f"{path}:{lineno}: release time must be >= 0")
            if o == d:
                raise RequestError(f"{path}:{lineno}: origin equals destination")
            for nd in (o, d):
                if nd not in net.nodes:
                    raise RequestError(f"{path}:{lineno}: unknown node {nd}")
            try:
                direct = net.shortest_dist(o, d)
            except Exception as exc:
                raise RequestError(f"{path}:{lineno}: {exc}") from None
            out.append(Request(id=rid, t=t, n=n, o=o, d=d, direct_dist=direct))
    return out


def save_requests(requests: list[Request], path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(REQUEST_HEADER)
        for r in requests:
            w.writerow([r.id, repr(r.t), r.n, r.o, r.d])
