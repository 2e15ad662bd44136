"""Shared builders for the test suite."""

import itertools
import random

from mtrs.generate import GenConfig
from mtrs.hypergraph import Edge, Hypergraph
from mtrs.model import (Driver, DriverKind, Instance, Location, MatchType, RoadEdge, RoadNetwork,
                        Rider, StopEvent, TransitTimetable, Trip)


def small_config(seed=0, riders=6, **kw):
    base = dict(n=12, spacing=400, lines=3, station_count=18, riders=riders, zones=(3, 3), seed=seed)
    base.update(kw)
    return GenConfig(**base)


def random_hypergraph(rng: random.Random, n_riders=None, n_drivers=None, max_edges=24):
    """Arbitrary weighted hypergraph, not necessarily coverable."""
    n_riders = n_riders or rng.randint(1, 6)
    n_drivers = n_drivers or rng.randint(1, 6)
    riders = [f"r{i}" for i in range(n_riders)]
    drivers = [f"d{i}" for i in range(n_drivers)]
    seen, edges = set(), []
    for _ in range(rng.randint(1, max_edges)):
        d = rng.choice(drivers)
        rs = tuple(sorted(rng.sample(riders, rng.randint(1, min(3, n_riders)))))
        if (d, rs) in seen:
            continue
        seen.add((d, rs))
        edges.append(Edge(len(edges), d, rs, rng.randint(1, 30)))
    caps = {d: 3 for d in drivers}
    return Hypergraph(drivers, riders, edges, caps)


def assumption2_hypergraph(rng: random.Random, n=None, lam=None, personal=None):
    """Designated drivers that can each serve every rider alone, plus random
    downward-closed groups; weights grow with the rider set."""
    n = n or rng.randint(2, 6)
    lam = lam or rng.choice((2, 3))
    personal = rng.randint(0, 2) if personal is None else personal
    riders = [f"r{i}" for i in range(n)]
    designated = [f"g{i}" for i in range(n)]
    own = [f"p{i}" for i in range(personal)]
    edges = []
    kinds, caps = {}, {}
    for d in designated + own:
        kinds[d] = DriverKind.DESIGNATED if d.startswith("g") else DriverKind.PERSONAL
        caps[d] = lam
        base = rng.randint(1, 20)
        cost = {r: rng.randint(1, 20) for r in riders}
        sets = set()
        if kinds[d] is DriverKind.DESIGNATED:
            sets.update((r,) for r in riders)
        for _ in range(rng.randint(0, 4)):
            group = tuple(sorted(rng.sample(riders, rng.randint(1, min(lam, n)))))
            for k in range(1, len(group) + 1):
                sets.update(itertools.combinations(group, k))
        for rs in sorted(sets, key=lambda s: (len(s), s)):
            w = base + sum(cost[r] for r in rs) + 3 * (len(rs) - 1)
            edges.append(Edge(len(edges), d, rs, w))
    return Hypergraph(designated + own, riders, edges, caps, kinds)


# ---- tiny hand-built worlds -------------------------------------------------

def line_network(n, spacing=100, secs=10):
    """Vertices 0..n-1 on the x axis, two-way roads between neighbours."""
    verts = tuple(Location(i, (i * spacing, 0.0)) for i in range(n))
    edges = []
    for i in range(n - 1):
        edges.append(RoadEdge(i, i + 1, spacing, secs))
        edges.append(RoadEdge(i + 1, i, spacing, secs))
    return RoadNetwork(verts, tuple(edges))


def trip(trip_id, stops):
    """stops: (station, arrival, departure) triples."""
    return Trip(trip_id, tuple(StopEvent(*s) for s in stops))


def instance_of(net, trips, stations, personal=(), designated=(), riders=()):
    loc = net.location
    return Instance(net, TransitTimetable(tuple(trips)), tuple(loc[s] for s in stations),
                    tuple(personal), tuple(designated), tuple(riders))


def driver(id, net, o, d, alpha=0, beta=10_000, cap=2, z=10_000, kind=DriverKind.PERSONAL,
           match=MatchType.FM):
    return Driver(id, kind, match, net.location[o], net.location[d], alpha, beta, cap, z)


def rider(id, net, o, d, alpha=0, beta=10_000, theta=0.3, t_hat=5000, match=MatchType.FM):
    return Rider(id, match, net.location[o], net.location[d], alpha, beta, theta, t_hat)
