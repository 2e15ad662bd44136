"""Road shortest paths and timetable journeys.

Road paths minimise travel time; ties go to fewer edges, then to the
lexicographically smallest vertex sequence. Transit journeys are searched with
a connection scan that keeps Pareto labels over (time, meters walked) so the
walking cap is honoured exactly.
"""

from __future__ import annotations

import bisect
import heapq
import math
from dataclasses import dataclass
from typing import Optional, Union

from .errors import NoJourney, Unreachable
from .model import Location, RoadNetwork, TransitTimetable

WALK_SPEED = 1.4          # m/s
WALK_CAP_METERS = 4000


@dataclass(frozen=True)
class PathResult:
    distance_meters: int
    travel_seconds: int
    path: tuple[int, ...]


@dataclass(frozen=True)
class Walk:
    source: int
    target: int
    seconds: int
    meters: int


@dataclass(frozen=True)
class Ride:
    trip_id: str
    board_station: int
    alight_station: int
    depart: int
    arrive: int


Leg = Union[Walk, Ride]


@dataclass(frozen=True)
class Journey:
    legs: tuple[Leg, ...]
    depart: int
    arrive: int

    @property
    def duration(self) -> int:
        return self.arrive - self.depart

    @property
    def walk_meters(self) -> int:
        return sum(leg.meters for leg in self.legs if isinstance(leg, Walk))

    @property
    def rides(self) -> list[Ride]:
        return [leg for leg in self.legs if isinstance(leg, Ride)]


def walk_meters(a: tuple[float, float], b: tuple[float, float]) -> int:
    return math.ceil(math.hypot(a[0] - b[0], a[1] - b[1]) - 1e-9)


def walk_seconds(meters: int) -> int:
    return math.ceil(meters / WALK_SPEED - 1e-9)


# --------------------------------------------------------------------------
# road network
# --------------------------------------------------------------------------

class RoadRouter:
    """One-to-all shortest path trees, cached per source vertex."""

    def __init__(self, net: RoadNetwork):
        self.net = net
        self._trees: dict[int, tuple[dict, dict, dict]] = {}

    def tree(self, source: int) -> tuple[dict, dict, dict]:
        """Return (seconds, meters, parent) maps for every vertex reachable from source."""
        cached = self._trees.get(source)
        if cached is None:
            cached = self._trees[source] = self._dijkstra(source)
        return cached

    def _dijkstra(self, source: int):
        adj = self.net.adjacency
        if source not in adj:
            raise Unreachable(source, source)
        key = {source: (0, 0)}
        meters = {source: 0}
        parent: dict[int, Optional[int]] = {source: None}
        done: set[int] = set()
        heap = [(0, 0, source)]

        def chain(v):
            out = []
            while v is not None:
                out.append(v)
                v = parent[v]
            out.reverse()
            return out

        while heap:
            t, h, u = heapq.heappop(heap)
            if u in done or key[u] != (t, h):
                continue
            done.add(u)
            for e in adj[u]:
                v = e.target
                cand = (t + e.travel_seconds, h + 1)
                cur = key.get(v)
                if cur is None or cand < cur:
                    key[v] = cand
                    parent[v] = u
                    meters[v] = meters[u] + e.distance_meters
                    heapq.heappush(heap, (cand[0], cand[1], v))
                elif cand == cur and v not in done and parent[v] != u:
                    if chain(u) < chain(parent[v]):
                        parent[v] = u
                        meters[v] = meters[u] + e.distance_meters
        seconds = {v: k[0] for v, k in key.items()}
        return seconds, meters, parent

    def travel(self, o: int, d: int) -> tuple[int, int]:
        """(seconds, meters) of the fastest o->d path."""
        seconds, meters, _ = self.tree(o)
        if d not in seconds:
            raise Unreachable(o, d)
        return seconds[d], meters[d]

    def seconds(self, o: int, d: int) -> int:
        return self.travel(o, d)[0]

    def path(self, o: int, d: int) -> PathResult:
        seconds, meters, parent = self.tree(o)
        if d not in seconds:
            raise Unreachable(o, d)
        seq = []
        v: Optional[int] = d
        while v is not None:
            seq.append(v)
            v = parent[v]
        seq.reverse()
        return PathResult(meters[d], seconds[d], tuple(seq))


def _vertex_id(x: Union[Location, int]) -> int:
    return x.vertex_id if isinstance(x, Location) else x


def shortest_path(net: RoadNetwork, o: Union[Location, int], d: Union[Location, int]) -> PathResult:
    """Fastest o->d path (FP). Raises Unreachable if d cannot be reached."""
    o_id, d_id = _vertex_id(o), _vertex_id(d)
    if o_id not in net.location:
        raise Unreachable(o_id, d_id)
    return net.router.path(o_id, d_id)


# --------------------------------------------------------------------------
# public transit
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Connection:
    dep: int
    arr: int
    source: int
    target: int
    trip_id: str
    seq: int


class _Label:
    __slots__ = ("time", "walk", "parent")

    def __init__(self, time, walk, parent):
        self.time = time
        self.walk = walk
        self.parent = parent


def _insert_forward(bag: list, label: _Label) -> bool:
    """Pareto insert minimising (time, walk)."""
    for other in bag:
        if other.time <= label.time and other.walk <= label.walk:
            return False
    bag[:] = [o for o in bag if not (label.time <= o.time and label.walk <= o.walk)]
    bag.append(label)
    return True


def _insert_reverse(bag: list, time: int, walk: int) -> bool:
    """Pareto insert maximising time, minimising walk."""
    for t, w in bag:
        if t >= time and w <= walk:
            return False
    bag[:] = [(t, w) for t, w in bag if not (time >= t and walk <= w)]
    bag.append((time, walk))
    return True


class ForwardScan:
    """Result of a one-to-all earliest arrival scan from a point."""

    def __init__(self, index: "TransitIndex", origin: Location, depart: int, ride_labels: dict):
        self.index = index
        self.origin = origin
        self.depart = depart
        self.ride_labels = ride_labels

    def _best(self, target: Location, allow_walk_only: bool):
        index = self.index
        best_time, best = None, None
        cap = index.walk_cap
        for st, bag in self.ride_labels.items():
            wd = walk_meters(index.coord[st], target.coord)
            wt = walk_seconds(wd)
            for lab in bag:
                if lab.walk + wd > cap:
                    continue
                t = lab.time + wt
                if best_time is None or t < best_time or (t == best_time and lab.walk < best[0].walk):
                    best_time, best = t, (lab, st, wd, wt)
        if allow_walk_only:
            wd = walk_meters(self.origin.coord, target.coord)
            if wd <= cap:
                t = self.depart + walk_seconds(wd)
                if best_time is None or t <= best_time:
                    best_time, best = t, None
        return best_time, best

    def arrival(self, target: Location, allow_walk_only: bool = False) -> Optional[int]:
        return self._best(target, allow_walk_only)[0]

    def journey(self, target: Location, allow_walk_only: bool = False) -> Journey:
        best_time, best = self._best(target, allow_walk_only)
        if best_time is None:
            raise NoJourney(f"no journey from vertex {self.origin.vertex_id} "
                            f"to vertex {target.vertex_id} departing {self.depart}")
        if best is None:
            wd = walk_meters(self.origin.coord, target.coord)
            return Journey((Walk(self.origin.vertex_id, target.vertex_id, walk_seconds(wd), wd),),
                           self.depart, best_time)
        lab, st, wd, wt = best
        legs: list[Leg] = []
        if target.vertex_id != st or wd:
            legs.append(Walk(st, target.vertex_id, wt, wd))
        while lab.parent is not None:
            kind = lab.parent[0]
            if kind == "ride":
                _, trip_id, board_lab, board_st, alight_st, dep = lab.parent
                legs.append(Ride(trip_id, board_st, alight_st, dep, lab.time))
                lab = board_lab
            elif kind == "walk":
                _, prev, from_st, to_st, meters = lab.parent
                legs.append(Walk(from_st, to_st, lab.time - prev.time, meters))
                lab = prev
            else:  # initial walk from the origin point
                _, to_st, meters = lab.parent
                if meters or to_st != self.origin.vertex_id:
                    legs.append(Walk(self.origin.vertex_id, to_st, walk_seconds(meters), meters))
                break
        legs.reverse()
        return Journey(tuple(legs), self.depart, best_time)


class TransitIndex:
    """Connections of a timetable sorted for forward and reverse scans."""

    def __init__(self, timetable: TransitTimetable, net: RoadNetwork, walk_cap: int = WALK_CAP_METERS):
        self.walk_cap = walk_cap
        conns = []
        stations = set()
        for trip in timetable.trips:
            for i in range(len(trip.events) - 1):
                a, b = trip.events[i], trip.events[i + 1]
                conns.append(Connection(a.departure, b.arrival, a.station, b.station, trip.id, i))
                stations.update((a.station, b.station))
        conns.sort(key=lambda c: (c.dep, c.arr, c.trip_id, c.seq))
        self.connections = conns
        self.dep_times = [c.dep for c in conns]
        self.stations = sorted(stations)
        self.coord = {s: net.location[s].coord for s in self.stations}
        # footpaths between stations within the walking cap
        self.footpaths: dict[int, list[tuple[int, int, int]]] = {}
        for s in self.stations:
            out = []
            for x in self.stations:
                if x == s:
                    continue
                wd = walk_meters(self.coord[s], self.coord[x])
                if wd <= walk_cap:
                    out.append((x, wd, walk_seconds(wd)))
            self.footpaths[s] = out

    def forward(self, origin: Location, depart: int, target: Optional[Location] = None,
                until: Optional[int] = None) -> ForwardScan:
        """Earliest-arrival labels at every station, reached with at least one ride.

        With ``target`` the scan stops once no later connection can improve the
        arrival at that point; with ``until`` it ignores departures after that time.
        """
        cap = self.walk_cap
        pre: dict[int, list] = {}
        post: dict[int, list] = {s: [] for s in self.stations}
        for s in self.stations:
            wd = walk_meters(origin.coord, self.coord[s])
            if wd <= cap:
                pre[s] = [_Label(depart + walk_seconds(wd), wd, ("origin", s, wd))]
        trip_state: dict[str, tuple] = {}
        best_target = None
        start = bisect.bisect_left(self.dep_times, depart)
        for c in self.connections[start:]:
            if until is not None and c.dep > until:
                break
            if best_target is not None and c.dep >= best_target:
                break
            cand = None
            for bag in (pre.get(c.source, ()), post[c.source]):
                for lab in bag:
                    if lab.time <= c.dep and (cand is None or lab.walk < cand.walk):
                        cand = lab
            state = trip_state.get(c.trip_id)
            if cand is not None and (state is None or cand.walk < state[0]):
                state = trip_state[c.trip_id] = (cand.walk, cand, c.source, c.dep)
            if state is None:
                continue
            walk, board_lab, board_st, board_dep = state
            lab = _Label(c.arr, walk, ("ride", c.trip_id, board_lab, board_st, c.target, board_dep))
            if not _insert_forward(post[c.target], lab):
                continue
            if target is not None:
                wd = walk_meters(self.coord[c.target], target.coord)
                if walk + wd <= cap:
                    t = c.arr + walk_seconds(wd)
                    if best_target is None or t < best_target:
                        best_target = t
            for x, wd, wt in self.footpaths[c.target]:
                if walk + wd <= cap:
                    _insert_forward(post[x], _Label(c.arr + wt, walk + wd,
                                                    ("walk", lab, c.target, x, wd)))
                    if target is not None:
                        wd2 = walk_meters(self.coord[x], target.coord)
                        if walk + wd + wd2 <= cap:
                            t = c.arr + wt + walk_seconds(wd2)
                            if best_target is None or t < best_target:
                                best_target = t
        return ForwardScan(self, origin, depart, post)

    def earliest_arrival(self, origin: Location, target: Location, depart: int,
                         allow_walk_only: bool = False) -> Journey:
        scan = self.forward(origin, depart, target=target)
        return scan.journey(target, allow_walk_only)

    def latest_departures(self, target: Location, deadline: int, allow_walk_only: bool = False,
                          not_before: Optional[int] = None) -> dict[int, int]:
        """Latest time at each station from which ``target`` is still reached by ``deadline``.

        Mirror image of :meth:`forward`: a rider standing at station ``s`` at time
        ``t`` reaches the target in time iff ``t <= result[s]``. Stations that
        cannot make it are absent.
        """
        cap = self.walk_cap
        final: dict[int, tuple[int, int]] = {}
        for s in self.stations:
            wd = walk_meters(self.coord[s], target.coord)
            if wd <= cap:
                final[s] = (deadline - walk_seconds(wd), wd)
        ahead: dict[int, list] = {s: [] for s in self.stations}
        trip_state: dict[str, int] = {}
        end = bisect.bisect_right(self.dep_times, deadline)
        for c in reversed(self.connections[:end]):
            if not_before is not None and c.dep < not_before:
                break
            if c.arr > deadline:
                continue
            alight = None
            f = final.get(c.target)
            if f is not None and f[0] >= c.arr:
                alight = f[1]
            for t, w in ahead[c.target]:
                if t >= c.arr and (alight is None or w < alight):
                    alight = w
            state = trip_state.get(c.trip_id)
            if alight is not None and (state is None or alight < state):
                state = trip_state[c.trip_id] = alight
            if state is None:
                continue
            if not _insert_reverse(ahead[c.source], c.dep, state):
                continue
            for y, wd, wt in self.footpaths[c.source]:
                if state + wd <= cap:
                    _insert_reverse(ahead[y], c.dep - wt, state + wd)
        out = {}
        for s in self.stations:
            times = [t for t, _ in ahead[s]]
            if allow_walk_only and s in final:
                times.append(final[s][0])
            if times:
                out[s] = max(times)
        return out


def earliest_arrival_journey(net: RoadNetwork, tt: TransitTimetable, o: Location, d: Location,
                             depart: int, walk_cap: int = WALK_CAP_METERS,
                             allow_walk_only: bool = False) -> Journey:
    """Earliest-arrival journey o->d departing no earlier than ``depart``.

    A journey rides at least one trip unless ``allow_walk_only`` is set.
    Raises NoJourney if nothing reaches d within the walking cap.
    """
    if depart < 0:
        raise ValueError("depart must be >= 0")
    return TransitIndex(tt, net, walk_cap).earliest_arrival(o, d, depart, allow_walk_only)
