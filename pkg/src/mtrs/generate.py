"""Seeded synthetic instances: grid road network, line-based timetable,
riders and drivers for one interval, and set-matching reduction hypergraphs."""

from __future__ import annotations

import json
import math
import random
from dataclasses import asdict, dataclass, fields
from typing import Optional

from .errors import ConfigError, GenerationExhausted, NoJourney
from .feasibility import FeasibilityChecker
from .hypergraph import Edge, Hypergraph
from .model import (Driver, DriverKind, Instance, Location, MatchType, Problem, RoadEdge,
                    RoadNetwork, Rider, StopEvent, TransitTimetable, Trip)
from .routing import WALK_CAP_METERS, TransitIndex

MINUTE = 60


@dataclass
class GenConfig:
    n: int = 40                         # road grid is n x n
    spacing: int = 400                  # meters between neighbouring vertices
    speed: int = 10                     # m/s on every road; time stays proportional to distance
    lines: int = 8
    station_count: int = 64             # spread over the lines; crossings may merge stations
    trips_per_line: int = 24            # per direction
    headway: int = 600
    dwell: int = 30
    transit_speed: float = 7.0
    riders: int = 30
    zones: tuple = (5, 5)
    departure_weights: Optional[list] = None
    arrival_weights: Optional[list] = None
    theta: float = 0.3
    interval_length: int = 1800
    designated_tries: int = 20
    max_rejects: int = 1000
    seed: int = 0

    def __post_init__(self):
        self.zones = tuple(self.zones)
        for name in ("n", "spacing", "lines", "station_count", "trips_per_line", "headway",
                     "riders", "interval_length", "designated_tries", "max_rejects"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.n < 3:
            raise ConfigError("grid side n must be at least 3")
        if self.station_count < 3 * self.lines:
            raise ConfigError("need at least 3 stations per line")
        if len(self.zones) != 2 or min(self.zones) < 1 or max(self.zones) > self.n:
            raise ConfigError("zones must be (columns, rows) within the grid")
        k = self.zones[0] * self.zones[1]
        for name in ("departure_weights", "arrival_weights"):
            w = getattr(self, name)
            if w is None:
                continue
            if len(w) != k or any(x < 0 for x in w) or abs(sum(w) - 1) > 1e-9:
                raise ConfigError(f"{name} needs {k} non-negative weights summing to 1")
        if not 0 < self.theta <= 1:
            raise ConfigError("theta must lie in (0, 1]")
        if self.speed <= 0 or self.transit_speed <= 0:
            raise ConfigError("speeds must be positive")

    def zone_weights(self, which: str) -> list:
        w = getattr(self, f"{which}_weights")
        k = self.zones[0] * self.zones[1]
        return list(w) if w is not None else [1 / k] * k

    def to_dict(self) -> dict:
        d = asdict(self)
        d["zones"] = list(self.zones)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GenConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown generator keys: {sorted(unknown)}")
        return cls(**d)


# ---- network and timetable ------------------------------------------------

def gen_road_network(cfg: GenConfig) -> RoadNetwork:
    rng = random.Random(f"network-{cfg.seed}")
    n, sp = cfg.n, cfg.spacing
    vertices = tuple(Location(y * n + x, (float(x * sp), float(y * sp)))
                     for y in range(n) for x in range(n))
    edges = []
    for y in range(n):
        for x in range(n):
            u = y * n + x
            for dx, dy in ((1, 0), (0, 1)):
                if x + dx >= n or y + dy >= n:
                    continue
                v = (y + dy) * n + x + dx
                # whole seconds at a single speed, so fastest and shortest paths coincide
                secs = max(1, round(sp * rng.uniform(0.95, 1.15) / cfg.speed))
                dist = secs * cfg.speed
                edges.append(RoadEdge(u, v, dist, secs))
                edges.append(RoadEdge(v, u, dist, secs))
    return RoadNetwork(vertices, tuple(edges))


def line_layout(cfg: GenConfig) -> list[list[int]]:
    """Station vertex ids along each line: alternating rows and columns."""
    n = cfg.n
    rows = (cfg.lines + 1) // 2
    cols = cfg.lines // 2
    per = [cfg.station_count // cfg.lines + (1 if i < cfg.station_count % cfg.lines else 0)
           for i in range(cfg.lines)]

    def spread(count, k):
        return [round((i + 1) * (n - 1) / (count + 1)) for i in range(count)] if k else []

    row_pos = spread(rows, rows)
    col_pos = spread(cols, cols)
    layout = []
    for i in range(cfg.lines):
        k = per[i]
        along = sorted({round(j * (n - 1) / (k - 1)) for j in range(k)})
        if i % 2 == 0:
            y = row_pos[i // 2]
            layout.append([y * n + x for x in along])
        else:
            x = col_pos[i // 2]
            layout.append([y * n + x for y in along])
    return layout


def gen_timetable(cfg: GenConfig, net: RoadNetwork, t_a: int) -> tuple[TransitTimetable, tuple]:
    """Trips in both directions of every line, times relative to ``t_a``."""
    router = net.router
    layout = line_layout(cfg)
    trips = []
    phase = -(t_a % cfg.headway)
    for li, stops in enumerate(layout):
        runs = [math.ceil(router.travel(a, b)[1] / cfg.transit_speed)
                for a, b in zip(stops, stops[1:])]
        offset = (li * 97) % cfg.headway
        for direction, seq, legs in (("f", stops, runs), ("b", stops[::-1], runs[::-1])):
            for k in range(cfg.trips_per_line):
                t = phase + offset + k * cfg.headway - cfg.headway
                events = [StopEvent(seq[0], t, t)]
                for station, run in zip(seq[1:], legs):
                    arr = events[-1].departure + run
                    last = station == seq[-1]
                    events.append(StopEvent(station, arr, arr if last else arr + cfg.dwell))
                trips.append(Trip(f"L{li}{direction}{k}", tuple(events)))
    stations = tuple(net.location[s] for s in sorted({s for line in layout for s in line}))
    return TransitTimetable(tuple(trips)), stations


# ---- agents ----------------------------------------------------------------

def _zone_vertices(cfg: GenConfig) -> list[list[int]]:
    zx, zy = cfg.zones
    out = [[] for _ in range(zx * zy)]
    for y in range(cfg.n):
        for x in range(cfg.n):
            z = (y * zy // cfg.n) * zx + (x * zx // cfg.n)
            out[z].append(y * cfg.n + x)
    return out


class _Sampler:
    def __init__(self, cfg: GenConfig, net: RoadNetwork, rng: random.Random):
        self.cfg = cfg
        self.net = net
        self.rng = rng
        self.zones = _zone_vertices(cfg)
        self.dep_w = cfg.zone_weights("departure")
        self.arr_w = cfg.zone_weights("arrival")

    def zone(self, which: str) -> int:
        w = self.dep_w if which == "departure" else self.arr_w
        return self.rng.choices(range(len(self.zones)), weights=w)[0]

    def vertex_in(self, zone: int) -> Location:
        return self.net.location[self.rng.choice(self.zones[zone])]

    def zone_of(self, loc: Location) -> int:
        zx, zy = self.cfg.zones
        n = self.cfg.n
        x, y = loc.vertex_id % n, loc.vertex_id // n
        return (y * zy // n) * zx + (x * zx // n)


def _personal_window(rng: random.Random) -> tuple[int, int]:
    alpha = rng.randint(30 * MINUTE, 70 * MINUTE)
    return alpha, alpha + rng.randint(45 * MINUTE, 70 * MINUTE)


def gen_interval_instance(cfg: GenConfig, t_a: int = 0, net: Optional[RoadNetwork] = None) -> Instance:
    """Riders, personal and designated drivers requesting during [t_a, t_a + interval).

    Times in the instance are seconds after ``t_a``. Each designated driver is
    drawn for one rider and kept only if it can serve that rider alone, so a
    distinct feasible driver exists for every rider.
    """
    net = net or gen_road_network(cfg)
    timetable, stations = gen_timetable(cfg, net, t_a)
    base = Instance(net, timetable, stations, (), (), (), (t_a, t_a + cfg.interval_length))
    index: TransitIndex = base.transit
    checker = FeasibilityChecker(base)
    rng = random.Random(f"agents-{cfg.seed}-{t_a}")
    sampler = _Sampler(cfg, net, rng)

    riders, designated = [], []
    rejects = 0
    while len(riders) < cfg.riders:
        if rejects >= cfg.max_rejects:
            raise GenerationExhausted(f"{rejects} consecutive rider candidates rejected")
        pair = _try_rider(cfg, sampler, index, checker, len(riders))
        if pair is None:
            rejects += 1
            continue
        rejects = 0
        riders.append(pair[0])
        designated.append(pair[1])

    personal = []
    for k in range(round(cfg.riders / 3)):
        while True:
            o = sampler.vertex_in(sampler.zone("departure"))
            d = sampler.vertex_in(sampler.zone("arrival"))
            if o != d:
                break
        alpha, beta = _personal_window(rng)
        fp_secs = net.router.seconds(o.vertex_id, d.vertex_id)
        z = rng.randint(20 * MINUTE, max(20 * MINUTE, fp_secs))
        personal.append(Driver(f"p{k}", DriverKind.PERSONAL,
                               rng.choice((MatchType.FM, MatchType.LM)), o, d,
                               alpha, beta, rng.choice((2, 3)), z))
    return Instance(net, timetable, stations, tuple(personal), tuple(designated),
                    tuple(riders), base.interval)


def _try_rider(cfg, sampler: _Sampler, index: TransitIndex, checker, k: int):
    rng = sampler.rng
    match = rng.choice((MatchType.FM, MatchType.LM))
    o = sampler.vertex_in(sampler.zone("departure"))
    d = sampler.vertex_in(sampler.zone("arrival"))
    alpha = rng.randint(45 * MINUTE, 75 * MINUTE)
    beta = alpha + rng.randint(45 * MINUTE, 90 * MINUTE)
    if o == d:
        return None
    try:
        journey = index.earliest_arrival(o, d, alpha)
    except NoJourney:
        return None
    t_hat = journey.arrive - alpha
    if t_hat < 30 * MINUTE or journey.walk_meters > WALK_CAP_METERS or journey.arrive > beta:
        return None
    rider = Rider(f"r{k}", match, o, d, alpha, beta, cfg.theta, t_hat)
    home_zone = sampler.zone_of(o if match is MatchType.FM else d)
    for _ in range(cfg.designated_tries):
        home = sampler.vertex_in(home_zone)
        a, b = _personal_window(rng)
        driver = Driver(f"g{k}", DriverKind.DESIGNATED, match, home, home, a, b, 3, 0,
                        paired_rider=rider.id)
        if checker.check(driver, [rider]) is not None:
            return rider, driver
    return None


# ---- set-matching reduction ----------------------------------------------

@dataclass
class ThreeDM:
    q: int
    A: list
    B: list
    C: list
    F: list
    omega: int = 3

    def __post_init__(self):
        self.F = [tuple(f) for f in self.F]
        if len(self.A) != 2 * self.q or len(self.B) != self.q or len(self.C) != self.q:
            raise ConfigError("need |A| = 2q and |B| = |C| = q")
        if len(set(self.A) | set(self.B) | set(self.C)) != 4 * self.q:
            raise ConfigError("A, B, C must be disjoint")
        a, b, c = set(self.A), set(self.B), set(self.C)
        if any(x not in a or y not in b or z not in c for x, y, z in self.F):
            raise ConfigError("triples must lie in A x B x C")
        if self.omega < 2:
            raise ConfigError("fill weight must be at least 2")

    def to_json(self) -> str:
        d = {"q": self.q, "A": self.A, "B": self.B, "C": self.C,
             "F": [list(f) for f in self.F], "omega": self.omega}
        return json.dumps(d, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ThreeDM":
        d = json.loads(text)
        return cls(d["q"], d["A"], d["B"], d["C"], d["F"], d.get("omega", 3))


def random_3dm(rng: random.Random, q: int, n_triples: Optional[int] = None,
               plant: Optional[bool] = None, omega: Optional[int] = None) -> ThreeDM:
    A = [f"a{i + 1}" for i in range(2 * q)]
    B = [f"b{i + 1}" for i in range(q)]
    C = [f"c{i + 1}" for i in range(q)]
    if plant is None:
        plant = rng.random() < 0.5
    if n_triples is None:
        n_triples = rng.randint(1, 3 * q)
    n_triples = min(n_triples, 2 * q ** 3)    # |A x B x C|
    triples = set()
    if plant:
        a_perm = rng.sample(A, q)
        c_perm = rng.sample(C, q)
        triples.update(zip(a_perm, B, c_perm))
    while len(triples) < n_triples:
        triples.add((rng.choice(A), rng.choice(B), rng.choice(C)))
    F = sorted(triples)
    rng.shuffle(F)
    return ThreeDM(q, A, B, C, F, omega if omega is not None else rng.randint(2, 6))


def gen_3dm_hypergraph(tdm: ThreeDM, problem=Problem.MIN_DIST) -> Hypergraph:
    """Drivers A (capacity 2), riders B and C; triples become a pair edge and its two halves."""
    unit = Problem(problem) is Problem.MIN_NUM
    specs: dict[tuple, int] = {}
    for a, b, c in tdm.F:
        for riders in ((b, c), (b,), (c,)):
            specs.setdefault((a, riders), 2)
    for a in tdm.A:
        for x in tdm.B + tdm.C:
            specs.setdefault((a, (x,)), tdm.omega)
    edges = [Edge(i, a, tuple(sorted(rs)), 1 if unit else w)
             for i, ((a, rs), w) in enumerate(specs.items())]
    return Hypergraph(tdm.A, tdm.B + tdm.C, edges, {a: 2 for a in tdm.A},
                      {a: DriverKind.DESIGNATED for a in tdm.A})


def brute_force_3dm(tdm: ThreeDM) -> int:
    """Largest set of pairwise disjoint triples."""
    F = list(dict.fromkeys(tdm.F))
    best = 0

    def walk(i, used, size):
        nonlocal best
        best = max(best, size)
        if size + (len(F) - i) <= best or best == tdm.q:
            return
        for j in range(i, len(F)):
            f = F[j]
            if used.isdisjoint(f):
                walk(j + 1, used | set(f), size + 1)

    walk(0, frozenset(), 0)
    return best
