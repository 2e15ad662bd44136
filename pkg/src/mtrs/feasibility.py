"""Feasible matches between one driver and a set of riders, and the full
hypergraph of such matches.

First-mile route:  driver origin -> rider origins (in some order) -> station -> driver destination;
each rider continues from the station by transit.
Last-mile route:   driver origin -> station -> rider destinations (in some order) -> driver destination;
each rider reaches the station by transit first.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .errors import NegativeDetour, NoJourney, Unreachable
from .hypergraph import Edge, Hypergraph
from .model import Driver, DriverKind, Instance, MatchType, Problem, Rider


@dataclass(frozen=True)
class ServiceTimes:
    pickup: int
    transit_board: int
    arrive_destination: int


@dataclass(frozen=True)
class FeasibleMatch:
    driver_id: str
    rider_ids: tuple[str, ...]
    station: int
    route: tuple[int, ...]          # stop vertices, driver origin first and destination last
    route_distance: int
    route_duration: int
    td: int
    weight: int
    service: tuple[tuple[str, ServiceTimes], ...]

    @property
    def service_times(self) -> dict[str, ServiceTimes]:
        return dict(self.service)


def incurred_travel_distance(driver: Driver, route_distance: int, fp_distance: int) -> int:
    """Detour beyond the fastest path for personal drivers, full route for designated ones."""
    if driver.kind is DriverKind.DESIGNATED:
        return route_distance
    if route_distance < fp_distance:
        raise NegativeDetour(f"driver {driver.id}: route {route_distance} m shorter "
                             f"than fastest path {fp_distance} m")
    return route_distance - fp_distance


def rider_deadline(rider: Rider) -> int:
    """Latest arrival that still saves theta * t_hat seconds and respects beta."""
    keep = (1 - Fraction(rider.acceptance_threshold).limit_denominator(10**6)) * rider.transit_baseline
    return min(rider.latest_arrival, rider.earliest_departure + math.floor(keep))


class FeasibilityChecker:
    """Caches road trees and per-rider transit tables for one instance."""

    def __init__(self, instance: Instance):
        self.instance = instance
        self.router = instance.network.router
        self.transit = instance.transit
        self.station_ids = sorted(s.vertex_id for s in instance.stations)
        self.station_loc = {s.vertex_id: s for s in instance.stations}
        self._latest: dict[Rider, dict[int, int]] = {}
        self._to_station: dict[Rider, dict[int, int]] = {}
        self.checks = 0

    # -- per rider transit tables --------------------------------------------

    def latest_at_station(self, rider: Rider) -> dict[int, int]:
        """FM: latest time the rider may be dropped at each station."""
        table = self._latest.get(rider)
        if table is None:
            table = self.transit.latest_departures(rider.destination, rider_deadline(rider),
                                                   allow_walk_only=True,
                                                   not_before=rider.earliest_departure)
            self._latest[rider] = table
        return table

    def arrival_at_station(self, rider: Rider) -> dict[int, int]:
        """LM: earliest time the rider can be at each station by transit or on foot."""
        table = self._to_station.get(rider)
        if table is None:
            scan = self.transit.forward(rider.origin, rider.earliest_departure,
                                        until=rider_deadline(rider))
            table = {}
            for s in self.station_ids:
                t = scan.arrival(self.station_loc[s], allow_walk_only=True)
                if t is not None:
                    table[s] = t
            self._to_station[rider] = table
        return table

    # -- match check ----------------------------------------------------------

    def check(self, driver: Driver, riders: Sequence[Rider]) -> Optional[FeasibleMatch]:
        self.checks += 1
        if not riders or len(riders) > driver.capacity:
            return None
        if any(r.match_type is not driver.match_type for r in riders):
            return None
        riders = sorted(riders, key=lambda r: r.id)
        router = self.router
        o_i, d_i = driver.origin.vertex_id, driver.destination.vertex_id
        fp_secs, fp_meters = router.travel(o_i, d_i)
        budget = fp_secs + driver.detour_limit if driver.is_personal else math.inf
        from_origin = router.tree(o_i)[0]

        fm = driver.match_type is MatchType.FM
        if fm:
            tables = [self.latest_at_station(r) for r in riders]
        else:
            tables = [self.arrival_at_station(r) for r in riders]
            deadlines = [rider_deadline(r) for r in riders]

        best = None
        for s in self.station_ids:
            if any(s not in tab for tab in tables) or s not in from_origin:
                continue
            try:
                if from_origin[s] + router.seconds(s, d_i) > budget:
                    continue
            except Unreachable:
                continue
            for order in itertools.permutations(range(len(riders))):
                try:
                    if fm:
                        cand = self._fm_candidate(driver, riders, order, s, tables, budget)
                    else:
                        cand = self._lm_candidate(driver, riders, order, s, tables, deadlines, budget)
                except Unreachable:
                    continue
                if cand is None:
                    continue
                w = max(cand[0] - (fp_meters if driver.is_personal else 0), 1)
                if best is None or w < best[0]:
                    best = (w, s, order, cand)
        if best is None:
            return None
        _, s, order, cand = best
        td = incurred_travel_distance(driver, cand[0], fp_meters)
        return self._materialize(driver, riders, order, s, cand, td)

    def _fm_candidate(self, driver, riders, order, s, latest, budget):
        router = self.router
        t = driver.earliest_departure
        here = driver.origin.vertex_id
        secs = meters = 0
        for k in order:
            r = riders[k]
            ds, dm = router.travel(here, r.origin.vertex_id)
            secs += ds
            meters += dm
            t = max(t + ds, r.earliest_departure)
            here = r.origin.vertex_id
        ds, dm = router.travel(here, s)
        secs += ds
        meters += dm
        t_station = t + ds
        for tab in latest:
            if t_station > tab[s]:
                return None
        ds, dm = router.travel(s, driver.destination.vertex_id)
        secs += ds
        meters += dm
        if t_station + ds > driver.latest_arrival or secs > budget:
            return None
        return meters, secs, t_station

    def _lm_candidate(self, driver, riders, order, s, arrive_at, deadlines, budget):
        router = self.router
        ds, dm = router.travel(driver.origin.vertex_id, s)
        secs, meters = ds, dm
        t = max(driver.earliest_departure + ds, max(tab[s] for tab in arrive_at))
        t_leave = t
        here = s
        for k in order:
            r = riders[k]
            ds, dm = router.travel(here, r.destination.vertex_id)
            secs += ds
            meters += dm
            t += ds
            if t > deadlines[k]:
                return None
            here = r.destination.vertex_id
        ds, dm = router.travel(here, driver.destination.vertex_id)
        secs += ds
        meters += dm
        if t + ds > driver.latest_arrival or secs > budget:
            return None
        return meters, secs, t_leave

    def _materialize(self, driver, riders, order, s, cand, td) -> FeasibleMatch:
        router = self.router
        meters, secs, t_station = cand
        service = {}
        if driver.match_type is MatchType.FM:
            route = [driver.origin.vertex_id] + [riders[k].origin.vertex_id for k in order]
            route += [s, driver.destination.vertex_id]
            # departure pushed as late as possible: walk the pickups backwards from the station
            t = t_station
            nxt = s
            pickups = {}
            for k in reversed(order):
                r = riders[k]
                t -= router.seconds(r.origin.vertex_id, nxt)
                pickups[r.id] = t
                nxt = r.origin.vertex_id
            for r in riders:
                journey = self.transit.earliest_arrival(self.station_loc[s], r.destination,
                                                        t_station, allow_walk_only=True)
                rides = journey.rides
                board = rides[0].depart if rides else t_station
                service[r.id] = ServiceTimes(pickups[r.id], board, journey.arrive)
        else:
            route = [driver.origin.vertex_id, s] + [riders[k].destination.vertex_id for k in order]
            route.append(driver.destination.vertex_id)
            t = t_station
            here = s
            for k in order:
                r = riders[k]
                t += router.seconds(here, r.destination.vertex_id)
                here = r.destination.vertex_id
                try:
                    journey = self.transit.earliest_arrival(r.origin, self.station_loc[s],
                                                            r.earliest_departure,
                                                            allow_walk_only=True)
                    rides = journey.rides
                    board = rides[0].depart if rides else r.earliest_departure
                except NoJourney:  # pragma: no cover - table says reachable
                    board = r.earliest_departure
                service[r.id] = ServiceTimes(t_station, board, t)
        return FeasibleMatch(
            driver_id=driver.id,
            rider_ids=tuple(r.id for r in riders),
            station=s,
            route=tuple(route),
            route_distance=meters,
            route_duration=secs,
            td=td,
            weight=max(td, 1),
            service=tuple(sorted(service.items())),
        )


def check_feasible_match(instance: Instance, driver: Driver, riders: Iterable[Rider],
                         checker: Optional[FeasibilityChecker] = None) -> Optional[FeasibleMatch]:
    """Cheapest feasible route for ``driver`` serving exactly ``riders``, or None."""
    checker = checker or FeasibilityChecker(instance)
    return checker.check(driver, list(riders))


def _candidates(prev_level: list[tuple[str, ...]], k: int) -> list[tuple[str, ...]]:
    """Apriori join: k-sets all of whose (k-1)-subsets are in ``prev_level``."""
    known = set(prev_level)
    out = []
    for a, b in itertools.combinations(prev_level, 2):
        if a[:-1] != b[:-1]:
            continue
        cand = a + (b[-1],) if a[-1] < b[-1] else b + (a[-1],)
        if all(sub in known for sub in itertools.combinations(cand, k - 1)):
            out.append(cand)
    return sorted(set(out))


def driver_matches(checker: FeasibilityChecker, driver: Driver,
                   riders: Sequence[Rider]) -> dict[tuple[str, ...], FeasibleMatch]:
    """All feasible rider sets for one driver, found level by level."""
    pool = sorted((r for r in riders if r.match_type is driver.match_type), key=lambda r: r.id)
    by_id = {r.id: r for r in pool}
    found: dict[tuple[str, ...], FeasibleMatch] = {}
    level = []
    for r in pool:
        m = checker.check(driver, [r])
        if m is not None:
            found[(r.id,)] = m
            level.append((r.id,))
    for k in range(2, driver.capacity + 1):
        nxt = []
        for cand in _candidates(level, k):
            m = checker.check(driver, [by_id[x] for x in cand])
            if m is not None:
                found[cand] = m
                nxt.append(cand)
        if not nxt:
            break
        level = nxt
    return found


def enumerate_hypergraph(instance: Instance, problem: Problem,
                         drivers: Optional[Iterable[Driver]] = None,
                         checker: Optional[FeasibilityChecker] = None) -> Hypergraph:
    """Hypergraph of every feasible match.

    For MIN_NUM only designated drivers are enumerated and every edge weighs 1;
    for MIN_DIST all drivers are used and weights are incurred travel distance
    (at least 1).
    """
    problem = Problem(problem)
    checker = checker or FeasibilityChecker(instance)
    if drivers is None:
        drivers = instance.designated_drivers if problem is Problem.MIN_NUM else instance.drivers
    drivers = list(drivers)
    edges = []
    for driver in drivers:
        matches = driver_matches(checker, driver, instance.riders)
        for key in sorted(matches, key=lambda t: (len(t), t)):
            m = matches[key]
            weight = 1 if problem is Problem.MIN_NUM else m.weight
            edges.append(Edge(len(edges), driver.id, key, weight, m.station, m.td, m))
    return Hypergraph(
        [d.id for d in drivers],
        [r.id for r in instance.riders],
        edges,
        {d.id: d.capacity for d in drivers},
        {d.id: d.kind for d in drivers},
    )
