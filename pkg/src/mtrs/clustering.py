"""Spatial and temporal clustering of riders and personal drivers.

Phase 1 bins agents by grid cell and destination sector and groups them around
a dominating set of rider interval windows. Phase 2 merges small clusters,
balances rider/driver ratios and splits large clusters. Designated drivers are
attached to the cluster of the rider they are paired with. Each cluster is then
solved as an independent sub-instance.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .errors import CardinalityMismatch, ConfigError, DegenerateWindow, Infeasible, OutOfBounds
from .feasibility import FeasibilityChecker
from .model import Driver, Instance, MatchType, Problem, Rider

ALLOCATION_MODES = ("greedy", "exact", "paired")


def _frac(x) -> Fraction:
    return Fraction(repr(x)) if isinstance(x, float) else Fraction(x)


def _round_half_up(x: Fraction) -> int:
    return math.floor(x + Fraction(1, 2))


@dataclass(frozen=True)
class IntervalWindow:
    a: int
    b: int

    def __post_init__(self):
        if self.a > self.b:
            raise ValueError(f"empty window [{self.a}, {self.b}]")

    def overlaps(self, other: "IntervalWindow") -> bool:
        return max(self.a, other.a) <= min(self.b, other.b)


def interval_window(agent: Union[Driver, Rider]) -> IntervalWindow:
    """Sub-window of the agent's time window used to test temporal compatibility."""
    alpha, beta = agent.earliest_departure, agent.latest_arrival
    fm = agent.match_type is MatchType.FM
    if isinstance(agent, Driver):
        z = Fraction(agent.detour_limit)
        a, b = (alpha, beta - z) if fm else (alpha + Fraction(1, 5) * z, beta - Fraction(3, 10) * z)
    else:
        slack = _frac(agent.acceptance_threshold) * agent.transit_baseline
        if fm:
            a, b = alpha, beta - slack
        else:
            a, b = alpha + Fraction(1, 4) * slack, beta - Fraction(7, 20) * slack
    a, b = _round_half_up(Fraction(a)), _round_half_up(Fraction(b))
    if a > b:
        raise DegenerateWindow(agent.id, a, b)
    return IntervalWindow(a, b)


def window_or_point(agent: Union[Driver, Rider]) -> IntervalWindow:
    """Like interval_window, but an empty window collapses to the departure instant."""
    try:
        return interval_window(agent)
    except DegenerateWindow:
        return IntervalWindow(agent.earliest_departure, agent.earliest_departure)


@dataclass(frozen=True)
class Grid:
    min_x: float
    min_y: float
    max_x: float
    max_y: float
    m1: int
    m2: int

    def __post_init__(self):
        if self.m1 < 1 or self.m2 < 1:
            raise ConfigError("grid dimensions must be positive")
        if self.max_x < self.min_x or self.max_y < self.min_y:
            raise ConfigError("bad bounding box")

    @classmethod
    def over(cls, instance: Instance, m1: int, m2: int) -> "Grid":
        return cls(*instance.network.bounding_box, m1, m2)

    @property
    def cell_width(self) -> float:
        return (self.max_x - self.min_x) / self.m1

    @property
    def cell_height(self) -> float:
        return (self.max_y - self.min_y) / self.m2


def _index(offset: float, size: float, count: int) -> int:
    if size == 0:
        return 1
    return min(math.floor(offset / size) + 1, count)


def locate_cell(grid: Grid, point: tuple[float, float]) -> tuple[int, int]:
    """Cell (x, y) holding the point; x counts columns from the left, y rows from the top."""
    px, py = point
    if not (grid.min_x <= px <= grid.max_x and grid.min_y <= py <= grid.max_y):
        raise OutOfBounds(f"point {point} outside the grid")
    x = _index(px - grid.min_x, grid.cell_width, grid.m1)
    y = _index(grid.max_y - py, grid.cell_height, grid.m2)
    return x, y


def cells_adjacent(c1: tuple[int, int], c2: tuple[int, int]) -> bool:
    return abs(c1[0] - c2[0]) + abs(c1[1] - c2[1]) <= 2


# sector of each 45 degree slice of bearings, counter-clockwise from due east;
# bearings use y pointing up, cell rows count downward
_BEARING_SECTORS = (5, 4, 8, 3, 6, 2, 7, 1)


def sector_of(center: tuple[int, int], target: tuple[int, int], fallback_bearing: float) -> int:
    dx, dy = target[0] - center[0], target[1] - center[1]
    if dx and dy:
        if dy > 0:
            return 1 if dx > 0 else 2
        return 3 if dx < 0 else 4
    if dx:
        return 5 if dx > 0 else 6
    if dy:
        return 7 if dy > 0 else 8
    slice_ = math.floor((fallback_bearing % (2 * math.pi)) / (math.pi / 4) + 0.5) % 8
    return _BEARING_SECTORS[slice_]


@dataclass
class ClusterConfig:
    m1: int = 4
    m2: int = 4
    s_min: int = 4
    s_max: int = 12
    tau1: float = 0.5
    tau2: float = 2.0
    allocation: str = "auto"       # greedy | exact | paired | auto (paired when every driver has one)

    def __post_init__(self):
        if self.m1 < 1 or self.m2 < 1:
            raise ConfigError("m1 and m2 must be positive")
        if not 1 <= self.s_min < self.s_max:
            raise ConfigError("need 1 <= s_min < s_max")
        if self.tau1 <= 0 or self.tau2 < 1:
            raise ConfigError("need tau1 > 0 and tau2 >= 1")
        if self.allocation not in ALLOCATION_MODES + ("auto",):
            raise ConfigError(f"unknown allocation mode {self.allocation!r}")

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, d: dict) -> "ClusterConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown cluster config keys {sorted(unknown)}")
        return cls(**d)


@dataclass
class Cluster:
    id: int
    match_type: MatchType
    origin_cell: tuple[int, int]
    sector: int
    riders: list[str] = field(default_factory=list)
    personal: list[str] = field(default_factory=list)
    designated: list[str] = field(default_factory=list)
    isolated: bool = False

    @property
    def size(self) -> int:
        return len(self.riders) + len(self.personal)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "match_type": self.match_type.value,
            "origin_cell": list(self.origin_cell),
            "destination_sector": self.sector,
            "riders": list(self.riders),
            "personal_drivers": list(self.personal),
            "designated_drivers": list(self.designated),
            "size": self.size,
            "isolated": self.isolated,
        }


@dataclass
class ClusterSet:
    clusters: list[Cluster]
    grid: Grid
    windows: dict = field(default_factory=dict, repr=False)

    def by_id(self) -> dict[int, Cluster]:
        return {c.id: c for c in self.clusters}

    def cluster_of(self) -> dict[str, int]:
        out = {}
        for c in self.clusters:
            for x in c.riders + c.personal + c.designated:
                out[x] = c.id
        return out

    def to_list(self) -> list[dict]:
        return [c.to_dict() for c in self.clusters]

    def to_json(self) -> str:
        return json.dumps(self.to_list(), indent=2)


# ---- phase 1 ------------------------------------------------------------------

def _home_and_away(agent, grid: Grid):
    """(bin cell, sector) of an agent: FM agents bin by origin, LM agents by destination."""
    if agent.match_type is MatchType.FM:
        home, away = agent.origin.coord, agent.destination.coord
    else:
        home, away = agent.destination.coord, agent.origin.coord
    c0, c1 = locate_cell(grid, home), locate_cell(grid, away)
    bearing = math.atan2(away[1] - home[1], away[0] - home[0])
    return c0, sector_of(c0, c1, bearing)


def dominating_riders(windows: dict[str, IntervalWindow], riders: list[str]) -> list[str]:
    """Greedy dominating set of the interval graph on the given riders."""
    order = sorted(riders, key=lambda r: (windows[r].b, windows[r].a, r))
    dominated: set[str] = set()
    out = []
    for r in order:
        if r in dominated:
            continue
        out.append(r)
        dominated.update(v for v in order if windows[v].overlaps(windows[r]))
    return out


def _group_bin(riders: list[str], drivers: list[str], windows: dict) -> tuple[list[list[str]], list[str]]:
    """Groups for one (cell, sector) bin: one per dominator, plus drivers left alone."""
    dom = dominating_riders(windows, riders)
    others = sorted(set(riders) - set(dom)) + sorted(drivers)
    nbrs = {v: [u for u in dom if windows[u].overlaps(windows[v])] for v in others}
    deg_u = {u: sum(1 for v in others if u in nbrs[v]) for u in dom}
    members = {u: [u] for u in dom}
    n_riders = {u: 1 for u in dom}
    is_rider = set(riders)
    remaining = [v for v in others if nbrs[v]]
    alone = [v for v in others if not nbrs[v]]

    def take(u, v):
        members[u].append(v)
        if v in is_rider:
            n_riders[u] += 1
        for w in nbrs[v]:
            deg_u[w] -= 1
        remaining.remove(v)

    for v in [v for v in remaining if len(nbrs[v]) == 1]:
        take(nbrs[v][0], v)
    while remaining:
        live = {u for v in remaining for u in nbrs[v]}
        u = min(live, key=lambda u: (n_riders[u], deg_u[u], dom.index(u)))
        cand = [v for v in remaining if u in nbrs[v]]
        v = min(cand, key=lambda v: (len(nbrs[v]), others.index(v)))
        take(u, v)
    return [members[u] for u in dom], alone


def build_clusters_phase1(instance: Instance, cfg: ClusterConfig) -> ClusterSet:
    grid = Grid.over(instance, cfg.m1, cfg.m2)
    agents = {a.id: a for a in list(instance.riders) + list(instance.personal_drivers)}
    windows = {k: window_or_point(a) for k, a in agents.items()}
    bins: dict = {}
    for a in agents.values():
        cell, sector = _home_and_away(a, grid)
        key = (a.match_type is MatchType.LM, cell[1], cell[0], sector)
        bins.setdefault(key, ([], []))[0 if isinstance(a, Rider) else 1].append(a.id)
    clusters = []
    for key in sorted(bins):
        lm, y, x, sector = key
        mt = MatchType.LM if lm else MatchType.FM
        riders, drivers = bins[key]
        groups, alone = _group_bin(riders, drivers, windows)
        for g in groups + [[v] for v in alone]:
            c = Cluster(len(clusters), mt, (x, y), sector)
            for v in g:
                (c.riders if isinstance(agents[v], Rider) else c.personal).append(v)
            clusters.append(c)
    return ClusterSet(clusters, grid, windows)


# ---- phase 2 ------------------------------------------------------------------

def _mean_window(ids: list[str], windows) -> Optional[tuple[Fraction, Fraction]]:
    if not ids:
        return None
    return (Fraction(sum(windows[i].a for i in ids), len(ids)),
            Fraction(sum(windows[i].b for i in ids), len(ids)))


def _mean_overlap(w1, w2) -> bool:
    return w1 is not None and w2 is not None and max(w1[0], w2[0]) <= min(w1[1], w2[1])


def clusters_adjacent(c1: Cluster, c2: Cluster, windows) -> bool:
    """Same match type and sector, nearby cells, and driver/rider mean windows that overlap."""
    if c1.match_type is not c2.match_type or c1.sector != c2.sector:
        return False
    if not cells_adjacent(c1.origin_cell, c2.origin_cell):
        return False
    return (_mean_overlap(_mean_window(c1.personal, windows), _mean_window(c2.riders, windows))
            or _mean_overlap(_mean_window(c1.riders, windows), _mean_window(c2.personal, windows)))


def imbalance(n_riders: int, n_drivers: int, low: bool) -> float:
    """f_C: the over-represented side divided by the other side."""
    num, den = (n_drivers, n_riders) if low else (n_riders, n_drivers)
    return math.inf if den == 0 else num / den


class _MergeGraph:
    """Cluster graph whose edges touch at least one cluster of ``special``."""

    def __init__(self, clusters: list[Cluster], special: set[int], windows):
        self.by_id = {c.id: c for c in clusters}
        self.nbrs: dict[int, set[int]] = {c.id: set() for c in clusters}
        ids = sorted(self.by_id)
        for i, a in enumerate(ids):
            for b in ids[i + 1:]:
                if a not in special and b not in special:
                    continue
                if clusters_adjacent(self.by_id[a], self.by_id[b], windows):
                    self.nbrs[a].add(b)
                    self.nbrs[b].add(a)

    def merge(self, src: int, dst: int):
        """Move src's members into dst and contract the edge."""
        s, d = self.by_id.pop(src), self.by_id[dst]
        d.riders += s.riders
        d.personal += s.personal
        d.designated += s.designated
        for n in self.nbrs.pop(src):
            if n != dst:
                self.nbrs[n].discard(src)
                self.nbrs[n].add(dst)
                self.nbrs[dst].add(n)
        self.nbrs[dst].discard(src)


def merge_small(clusters: list[Cluster], s_min: int, windows) -> list[Cluster]:
    small = {c.id for c in clusters if c.size < s_min}
    g = _MergeGraph(clusters, small, windows)
    while small:
        cid = min(small, key=lambda i: (g.by_id[i].size, i))
        small.discard(cid)
        if not g.nbrs[cid]:
            g.by_id[cid].isolated = True
            continue
        dst = min(g.nbrs[cid], key=lambda i: (g.by_id[i].size, i))
        g.merge(cid, dst)
        if dst in small and g.by_id[dst].size >= s_min:
            small.discard(dst)
        g.by_id[dst].isolated = False
    return sorted(g.by_id.values(), key=lambda c: c.id)


def balance(clusters: list[Cluster], tau1: float, tau2: float, n_riders: int, n_drivers: int,
            windows) -> list[Cluster]:
    if n_drivers == 0:
        return clusters
    ratio = n_riders / n_drivers
    if tau1 > ratio:
        raise ConfigError(f"tau1={tau1} exceeds the global rider/driver ratio {ratio:.3f}")

    def side(c):
        """'l' when drivers are over-represented, 'h' when riders are, None if balanced."""
        r, d = len(c.riders), len(c.personal)
        if d and r / d < tau1 or not r and d:
            return "l"
        if r and (not d or r / d > tau2 * ratio):
            return "h"
        return None

    def f(c):
        return imbalance(len(c.riders), len(c.personal), side(c) == "l")

    imb = {c.id for c in clusters if side(c)}
    g = _MergeGraph(clusters, imb, windows)
    while imb:
        cid = max(imb, key=lambda i: (f(g.by_id[i]), -i))
        imb.discard(cid)
        c = g.by_id[cid]
        s = side(c)
        near = [g.by_id[i] for i in g.nbrs[cid]]
        opposite = [n for n in near if side(n) not in (None, s)]
        if opposite:
            dst = max(opposite, key=lambda n: (f(n), -n.id))
        else:
            balanced = [n for n in near if side(n) is None]
            if not balanced:
                continue

            def after(n):
                r, d = len(c.riders) + len(n.riders), len(c.personal) + len(n.personal)
                return imbalance(r, d, s == "l"), n.id

            dst = min(balanced, key=after)
        g.merge(cid, dst.id)
        if dst.id in imb and side(dst) is None:
            imb.discard(dst.id)
    return sorted(g.by_id.values(), key=lambda c: c.id)


def split_large(clusters: list[Cluster], s_max: int, windows) -> list[Cluster]:
    out, next_id = [], max((c.id for c in clusters), default=-1) + 1
    for c in clusters:
        if c.size <= s_max:
            out.append(c)
            continue
        z = -(-c.size // s_max)
        parts = [Cluster(c.id if k == 0 else next_id + k - 1, c.match_type, c.origin_cell, c.sector)
                 for k in range(z)]
        next_id += z - 1

        def by_start(ids):
            return sorted(ids, key=lambda i: (windows[i].a, windows[i].b, i))

        k = 0
        for r in by_start(c.riders):
            parts[k % z].riders.append(r)
            k += 1
        for d in by_start(c.personal):
            parts[k % z].personal.append(d)
            k += 1
        out.extend(parts)
    return sorted(out, key=lambda c: c.id)


def refine_clusters(cs: ClusterSet, cfg: ClusterConfig, instance: Instance) -> ClusterSet:
    w = cs.windows
    clusters = [Cluster(c.id, c.match_type, c.origin_cell, c.sector, list(c.riders),
                        list(c.personal), list(c.designated), c.isolated) for c in cs.clusters]
    clusters = merge_small(clusters, cfg.s_min, w)
    clusters = balance(clusters, cfg.tau1, cfg.tau2, len(instance.riders),
                       len(instance.personal_drivers), w)
    clusters = split_large(clusters, cfg.s_max, w)
    return ClusterSet(clusters, cs.grid, w)


# ---- designated drivers ---------------------------------------------------------

def _anchor(agent) -> tuple[float, float]:
    return (agent.origin if agent.match_type is MatchType.FM else agent.destination).coord


def _pairing(instance: Instance, mode: str) -> dict[str, str]:
    """Designated driver id -> rider id."""
    drivers, riders = instance.designated_drivers, instance.riders
    if len(drivers) != len(riders):
        raise CardinalityMismatch(f"{len(drivers)} designated drivers for {len(riders)} riders")
    if mode == "paired":
        out = {d.id: d.paired_rider for d in drivers}
        if None in out.values() or set(out.values()) != {r.id for r in riders}:
            raise CardinalityMismatch("designated drivers are not paired one-to-one with riders")
        return out
    out = {}
    for mt in MatchType:
        ds = sorted((d for d in drivers if d.match_type is mt), key=lambda d: d.id)
        rs = sorted((r for r in riders if r.match_type is mt), key=lambda r: r.id)
        if len(ds) != len(rs):
            raise CardinalityMismatch(f"{len(ds)} {mt.value} designated drivers for {len(rs)} riders")
        if mode == "exact":
            import numpy as np
            from scipy.optimize import linear_sum_assignment
            cost = np.array([[math.dist(_anchor(d), _anchor(r)) for r in rs] for d in ds])
            rows, cols = linear_sum_assignment(cost.reshape(len(ds), len(rs)))
            out.update({ds[i].id: rs[j].id for i, j in zip(rows, cols)})
        else:
            free = list(rs)
            for d in ds:
                r = min(free, key=lambda r: (math.dist(_anchor(d), _anchor(r)), r.id))
                free.remove(r)
                out[d.id] = r.id
    return out


def allocate_designated(cs: ClusterSet, instance: Instance, mode: str = "greedy") -> ClusterSet:
    """Put every designated driver in the cluster of the rider it is paired with."""
    if mode == "auto":
        paired = instance.designated_drivers and all(d.paired_rider for d in instance.designated_drivers)
        mode = "paired" if paired else "greedy"
    if mode not in ALLOCATION_MODES:
        raise ConfigError(f"unknown allocation mode {mode!r}")
    pairs = _pairing(instance, mode)
    home = cs.cluster_of()
    by_id = cs.by_id()
    for c in cs.clusters:
        c.designated = []
    for d in instance.designated_drivers:
        by_id[home[pairs[d.id]]].designated.append(d.id)
    return cs


def cluster_instance(instance: Instance, cfg: ClusterConfig) -> ClusterSet:
    """Both phases plus designated-driver allocation."""
    cs = build_clusters_phase1(instance, cfg)
    cs = refine_clusters(cs, cfg, instance)
    return allocate_designated(cs, instance, cfg.allocation)


def solve_clustered(instance: Instance, cfg: ClusterConfig, problem=Problem.MIN_DIST,
                    algo: str = "exact", time_limit: Optional[float] = None,
                    checker: Optional[FeasibilityChecker] = None, clusters: Optional[ClusterSet] = None):
    """Solve every cluster on its own and join the per-cluster solutions."""
    from .solvers.pipeline import merge_results, solve_instance
    algo = {"greedy_min_dist": "greedy", "greedy_min_num": "greedy"}.get(algo, algo)
    cs = clusters or cluster_instance(instance, cfg)
    checker = checker or FeasibilityChecker(instance)
    parts = []
    for c in cs.clusters:
        if not c.riders:
            continue
        sub = instance.subinstance(c.riders, c.personal + c.designated)
        try:
            res = solve_instance(sub, problem, algo, time_limit, checker=checker)
        except Infeasible as exc:
            raise Infeasible(f"cluster {c.id}: {exc}", cluster_id=c.id, rider=exc.rider) from exc
        parts.append((c.id, res))
    merged = merge_results([r.id for r in instance.riders], parts, problem, algo)
    merged.clusters = cs
    return merged
