"""Domain types for the multimodal ridesharing matcher, plus instance validation.

Times are integer seconds measured from the start of the planning interval,
distances integer meters, coordinates planar meters.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional


class MatchType(str, enum.Enum):
    FM = "FM"
    LM = "LM"


class DriverKind(str, enum.Enum):
    PERSONAL = "personal"
    DESIGNATED = "designated"


class Problem(str, enum.Enum):
    MIN_DIST = "mindist"
    MIN_NUM = "minnum"


@dataclass(frozen=True)
class Location:
    vertex_id: int
    coord: tuple[float, float]

    def to_dict(self) -> dict:
        return {"vertex_id": self.vertex_id, "coord": list(self.coord)}

    @classmethod
    def from_dict(cls, d: dict) -> "Location":
        return cls(d["vertex_id"], tuple(d["coord"]))


@dataclass(frozen=True)
class RoadEdge:
    source: int
    target: int
    distance_meters: int
    travel_seconds: int


@dataclass(frozen=True)
class RoadNetwork:
    """Directed road graph. Vertex ids are arbitrary integers."""

    vertices: tuple[Location, ...]
    edges: tuple[RoadEdge, ...]

    @cached_property
    def location(self) -> dict[int, Location]:
        return {v.vertex_id: v for v in self.vertices}

    @cached_property
    def adjacency(self) -> dict[int, list[RoadEdge]]:
        adj: dict[int, list[RoadEdge]] = {v.vertex_id: [] for v in self.vertices}
        for e in self.edges:
            adj.setdefault(e.source, []).append(e)
        for out in adj.values():
            out.sort(key=lambda e: (e.target, e.travel_seconds, e.distance_meters))
        return adj

    @cached_property
    def router(self):
        from .routing import RoadRouter
        return RoadRouter(self)

    @cached_property
    def bounding_box(self) -> tuple[float, float, float, float]:
        xs = [v.coord[0] for v in self.vertices]
        ys = [v.coord[1] for v in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    def to_dict(self) -> dict:
        return {
            "vertices": [v.to_dict() for v in self.vertices],
            "edges": [
                {"from": e.source, "to": e.target,
                 "distance_meters": e.distance_meters, "travel_seconds": e.travel_seconds}
                for e in self.edges
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RoadNetwork":
        return cls(
            tuple(Location.from_dict(v) for v in d["vertices"]),
            tuple(RoadEdge(e["from"], e["to"], e["distance_meters"], e["travel_seconds"])
                  for e in d["edges"]),
        )


@dataclass(frozen=True)
class StopEvent:
    station: int
    arrival: int
    departure: int


@dataclass(frozen=True)
class Trip:
    id: str
    events: tuple[StopEvent, ...]


@dataclass(frozen=True)
class TransitTimetable:
    trips: tuple[Trip, ...]

    def to_dict(self) -> dict:
        return {"trips": [
            {"id": t.id,
             "events": [{"station": ev.station, "arrival": ev.arrival, "departure": ev.departure}
                        for ev in t.events]}
            for t in self.trips
        ]}

    @classmethod
    def from_dict(cls, d: dict) -> "TransitTimetable":
        return cls(tuple(
            Trip(t["id"], tuple(StopEvent(ev["station"], ev["arrival"], ev["departure"])
                                for ev in t["events"]))
            for t in d["trips"]
        ))


@dataclass(frozen=True)
class Driver:
    id: str
    kind: DriverKind
    match_type: MatchType
    origin: Location
    destination: Location
    earliest_departure: int
    latest_arrival: int
    capacity: int
    detour_limit: int
    # rider this designated driver was generated for and is known to serve
    paired_rider: Optional[str] = None

    @property
    def is_personal(self) -> bool:
        return self.kind is DriverKind.PERSONAL

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "match_type": self.match_type.value,
            "origin": self.origin.to_dict(),
            "destination": self.destination.to_dict(),
            "earliest_departure": self.earliest_departure,
            "latest_arrival": self.latest_arrival,
            "capacity": self.capacity,
            "detour_limit": self.detour_limit,
            "paired_rider": self.paired_rider,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Driver":
        return cls(
            id=d["id"],
            kind=DriverKind(d["kind"]),
            match_type=MatchType(d["match_type"]),
            origin=Location.from_dict(d["origin"]),
            destination=Location.from_dict(d["destination"]),
            earliest_departure=d["earliest_departure"],
            latest_arrival=d["latest_arrival"],
            capacity=d["capacity"],
            detour_limit=d["detour_limit"],
            paired_rider=d.get("paired_rider"),
        )


@dataclass(frozen=True)
class Rider:
    id: str
    match_type: MatchType
    origin: Location
    destination: Location
    earliest_departure: int
    latest_arrival: int
    acceptance_threshold: float
    transit_baseline: int

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "match_type": self.match_type.value,
            "origin": self.origin.to_dict(),
            "destination": self.destination.to_dict(),
            "earliest_departure": self.earliest_departure,
            "latest_arrival": self.latest_arrival,
            "acceptance_threshold": self.acceptance_threshold,
            "transit_baseline": self.transit_baseline,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Rider":
        return cls(
            id=d["id"],
            match_type=MatchType(d["match_type"]),
            origin=Location.from_dict(d["origin"]),
            destination=Location.from_dict(d["destination"]),
            earliest_departure=d["earliest_departure"],
            latest_arrival=d["latest_arrival"],
            acceptance_threshold=d["acceptance_threshold"],
            transit_baseline=d["transit_baseline"],
        )


@dataclass(frozen=True)
class Instance:
    network: RoadNetwork
    timetable: TransitTimetable
    stations: tuple[Location, ...]
    personal_drivers: tuple[Driver, ...]
    designated_drivers: tuple[Driver, ...]
    riders: tuple[Rider, ...]
    interval: tuple[int, int] = (0, 1800)

    @property
    def drivers(self) -> tuple[Driver, ...]:
        return self.personal_drivers + self.designated_drivers

    @cached_property
    def transit(self):
        from .routing import TransitIndex
        return TransitIndex(self.timetable, self.network)

    @cached_property
    def driver_by_id(self) -> dict[str, Driver]:
        return {d.id: d for d in self.drivers}

    @cached_property
    def rider_by_id(self) -> dict[str, Rider]:
        return {r.id: r for r in self.riders}

    def subinstance(self, rider_ids: Iterable[str], driver_ids: Iterable[str]) -> "Instance":
        """Same network and timetable, restricted agent sets (order preserved)."""
        rs, ds = set(rider_ids), set(driver_ids)
        sub = Instance(
            network=self.network,
            timetable=self.timetable,
            stations=self.stations,
            personal_drivers=tuple(d for d in self.personal_drivers if d.id in ds),
            designated_drivers=tuple(d for d in self.designated_drivers if d.id in ds),
            riders=tuple(r for r in self.riders if r.id in rs),
            interval=self.interval,
        )
        sub.__dict__["transit"] = self.transit      # share the scan index
        return sub

    def to_dict(self) -> dict:
        return {
            "network": self.network.to_dict(),
            "timetable": self.timetable.to_dict(),
            "stations": [s.to_dict() for s in self.stations],
            "personal_drivers": [d.to_dict() for d in self.personal_drivers],
            "designated_drivers": [d.to_dict() for d in self.designated_drivers],
            "riders": [r.to_dict() for r in self.riders],
            "interval": list(self.interval),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Instance":
        return cls(
            network=RoadNetwork.from_dict(d["network"]),
            timetable=TransitTimetable.from_dict(d["timetable"]),
            stations=tuple(Location.from_dict(s) for s in d["stations"]),
            personal_drivers=tuple(Driver.from_dict(x) for x in d["personal_drivers"]),
            designated_drivers=tuple(Driver.from_dict(x) for x in d["designated_drivers"]),
            riders=tuple(Rider.from_dict(x) for x in d["riders"]),
            interval=tuple(d["interval"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Instance":
        return cls.from_dict(json.loads(text))


def validate_instance(instance: Instance) -> list[str]:
    """Return one human-readable line per violated invariant (empty if none)."""
    problems: list[str] = []
    net = instance.network
    known = net.location

    def check_loc(owner: str, fieldname: str, loc: Location) -> None:
        if loc.vertex_id not in known:
            problems.append(f"{owner}: {fieldname} vertex {loc.vertex_id} not in network")

    for e in net.edges:
        if e.source not in known or e.target not in known:
            problems.append(f"road edge {e.source}->{e.target}: endpoint not in network")
        if e.distance_meters <= 0 or e.travel_seconds <= 0:
            problems.append(f"road edge {e.source}->{e.target}: weights must be positive")

    station_ids = {s.vertex_id for s in instance.stations}
    for s in instance.stations:
        check_loc(f"station {s.vertex_id}", "location", s)
    for trip in instance.timetable.trips:
        prev = None
        for ev in trip.events:
            if ev.station not in station_ids:
                problems.append(f"trip {trip.id}: stop {ev.station} is not a station")
            if ev.arrival > ev.departure:
                problems.append(f"trip {trip.id}: arrival after departure at {ev.station}")
            if prev is not None and ev.arrival <= prev.departure:
                problems.append(f"trip {trip.id}: events not strictly time-ordered")
            prev = ev

    personal_ids = {d.id for d in instance.personal_drivers}
    for d in instance.designated_drivers:
        if d.id in personal_ids:
            problems.append(f"driver {d.id}: listed as both personal and designated")
    seen: set[str] = set()
    for d in instance.drivers:
        if d.id in seen and d.id not in personal_ids:
            problems.append(f"driver {d.id}: duplicate id")
        seen.add(d.id)
        expected = DriverKind.PERSONAL if d.id in personal_ids else DriverKind.DESIGNATED
        if d.kind is not expected:
            problems.append(f"driver {d.id}: kind {d.kind.value} listed under {expected.value}")
        if not d.earliest_departure < d.latest_arrival:
            problems.append(f"driver {d.id}: time window [earliest_departure, latest_arrival] empty")
        if d.capacity < 1:
            problems.append(f"driver {d.id}: capacity must be >= 1")
        if d.detour_limit < 0:
            problems.append(f"driver {d.id}: detour_limit must be >= 0")
        check_loc(f"driver {d.id}", "origin", d.origin)
        check_loc(f"driver {d.id}", "destination", d.destination)

    rider_seen: set[str] = set()
    for r in instance.riders:
        if r.id in rider_seen:
            problems.append(f"rider {r.id}: duplicate id")
        rider_seen.add(r.id)
        if not r.earliest_departure < r.latest_arrival:
            problems.append(f"rider {r.id}: time window [earliest_departure, latest_arrival] empty")
        if not 0 < r.acceptance_threshold <= 1:
            problems.append(f"rider {r.id}: acceptance_threshold (theta) must be in (0, 1], "
                            f"got {r.acceptance_threshold}")
        if r.transit_baseline <= 0:
            problems.append(f"rider {r.id}: transit_baseline must be positive")
        if r.origin.vertex_id == r.destination.vertex_id:
            problems.append(f"rider {r.id}: origin equals destination")
        check_loc(f"rider {r.id}", "origin", r.origin)
        check_loc(f"rider {r.id}", "destination", r.destination)
    return problems


def _perfect_matching_exists(left: list, adjacency: dict) -> bool:
    match_right: dict = {}

    def augment(u, seen) -> bool:
        for v in adjacency.get(u, ()):
            if v in seen:
                continue
            seen.add(v)
            if v not in match_right or augment(match_right[v], seen):
                match_right[v] = u
                return True
        return False

    return all(augment(u, set()) for u in left)


def _designated_and_riders(instance, hypergraph):
    if instance is not None:
        designated = [d.id for d in instance.designated_drivers]
        riders = [r.id for r in instance.riders]
        types = {d.id: d.match_type for d in instance.designated_drivers}
        types.update({r.id: r.match_type for r in instance.riders})
    else:
        designated = list(hypergraph.designated_drivers)
        riders = list(hypergraph.riders)
        types = {}
    return designated, riders, types


def check_assumption1(instance: Optional[Instance], hypergraph) -> bool:
    """Every rider can be served alone by a distinct designated driver."""
    designated, riders, _ = _designated_and_riders(instance, hypergraph)
    dset = set(designated)
    adjacency: dict[str, list[str]] = {r: [] for r in riders}
    for e in hypergraph.edges:
        if len(e.riders) == 1 and e.driver in dset and e.riders[0] in adjacency:
            adjacency[e.riders[0]].append(e.driver)
    return _perfect_matching_exists(riders, adjacency)


def check_assumption2(instance: Optional[Instance], hypergraph) -> bool:
    """|designated| == |riders| and every same-type (designated, rider) pair is an edge.

    With ``instance=None`` the hypergraph's own designated drivers and riders are
    used and all of them are taken to share one match type.
    """
    designated, riders, types = _designated_and_riders(instance, hypergraph)
    if len(designated) != len(riders):
        return False
    if types:
        # per-type balance, otherwise no distinct same-type driver exists for someone
        for mt in MatchType:
            if (sum(types[d] == mt for d in designated)
                    != sum(types[r] == mt for r in riders)):
                return False
    for d in designated:
        for r in riders:
            if types and types[d] != types[r]:
                continue
            if hypergraph.edge_for(d, (r,)) is None:
                return False
    return True
