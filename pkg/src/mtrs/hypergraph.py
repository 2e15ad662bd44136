"""Weighted hypergraph of feasible matches: driver vertices, rider vertices,
one hyperedge per feasible (driver, rider set) pair."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .model import DriverKind


@dataclass(frozen=True)
class Edge:
    id: int
    driver: str
    riders: tuple[str, ...]
    weight: int
    station: Optional[int] = None
    td: Optional[int] = None                      # incurred travel distance, meters
    match: Optional[object] = field(default=None, compare=False, repr=False)

    def vertices(self) -> tuple[str, ...]:
        return (self.driver,) + self.riders


class Hypergraph:
    """Edges are kept sorted by id. Ids survive :meth:`restrict`, so they need not be contiguous."""

    def __init__(self, drivers: Iterable[str], riders: Iterable[str], edges: Iterable[Edge],
                 capacities: Optional[dict] = None, kinds: Optional[dict] = None):
        self.drivers = tuple(drivers)
        self.riders = tuple(riders)
        self.edges = tuple(sorted(edges, key=lambda e: e.id))
        self.capacities = dict(capacities or {})
        self.kinds = dict(kinds or {})
        self.edge_by_id = {e.id: e for e in self.edges}
        if len(self.edge_by_id) != len(self.edges):
            raise ValueError("duplicate edge ids")
        self.driver_edges: dict[str, list[int]] = {d: [] for d in self.drivers}
        self.rider_edges: dict[str, list[int]] = {r: [] for r in self.riders}
        self._lookup: dict[tuple[str, frozenset], Edge] = {}
        for e in self.edges:
            if e.driver not in self.driver_edges:
                raise ValueError(f"edge {e.id}: unknown driver {e.driver}")
            self.driver_edges[e.driver].append(e.id)
            for r in e.riders:
                if r not in self.rider_edges:
                    raise ValueError(f"edge {e.id}: unknown rider {r}")
                self.rider_edges[r].append(e.id)
            self._lookup.setdefault((e.driver, frozenset(e.riders)), e)

    @property
    def incidence(self) -> dict[str, list[int]]:
        """E(u) for every vertex u (drivers and riders)."""
        out = dict(self.driver_edges)
        out.update(self.rider_edges)
        return out

    def edge_for(self, driver: str, riders: Iterable[str]) -> Optional[Edge]:
        return self._lookup.get((driver, frozenset(riders)))

    # ---- stats -----------------------------------------------------------

    @property
    def lam(self) -> int:
        """Largest vehicle capacity (falls back to the largest rider set)."""
        if self.capacities:
            return max(self.capacities.values())
        return max((len(e.riders) for e in self.edges), default=1)

    @property
    def w_min(self) -> Optional[int]:
        return min((e.weight for e in self.edges), default=None)

    @property
    def w_max(self) -> Optional[int]:
        return max((e.weight for e in self.edges), default=None)

    @property
    def mu(self) -> Optional[float]:
        if not self.edges:
            return None
        return self.w_max / self.w_min

    @property
    def personal_drivers(self) -> tuple[str, ...]:
        return tuple(d for d in self.drivers if self.kinds.get(d) is DriverKind.PERSONAL)

    @property
    def designated_drivers(self) -> tuple[str, ...]:
        if not self.kinds:
            return self.drivers
        return tuple(d for d in self.drivers if self.kinds.get(d) is DriverKind.DESIGNATED)

    # ---- derived hypergraphs --------------------------------------------

    def restrict(self, riders: Optional[Iterable[str]] = None,
                 drivers: Optional[Iterable[str]] = None) -> "Hypergraph":
        """Sub-hypergraph on the given vertices; keeps edges lying entirely inside it."""
        rs = set(self.riders if riders is None else riders)
        ds = set(self.drivers if drivers is None else drivers)
        return Hypergraph(
            [d for d in self.drivers if d in ds],
            [r for r in self.riders if r in rs],
            [e for e in self.edges if e.driver in ds and all(r in rs for r in e.riders)],
            {d: c for d, c in self.capacities.items() if d in ds},
            {d: k for d, k in self.kinds.items() if d in ds},
        )

    def with_weights(self, weight_of) -> "Hypergraph":
        edges = [Edge(e.id, e.driver, e.riders, weight_of(e), e.station, e.td, e.match)
                 for e in self.edges]
        return Hypergraph(self.drivers, self.riders, edges, self.capacities, self.kinds)

    # ---- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "drivers": list(self.drivers),
            "riders": list(self.riders),
            "capacities": {d: self.capacities[d] for d in self.drivers if d in self.capacities},
            "kinds": {d: self.kinds[d].value for d in self.drivers if d in self.kinds},
            "edges": [
                {"id": e.id, "driver": e.driver, "riders": list(e.riders),
                 "station": e.station, "weight": e.weight, "td": e.td}
                for e in self.edges
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Hypergraph":
        edges = [Edge(x.get("id", i), x["driver"], tuple(x["riders"]), x["weight"],
                      x.get("station"), x.get("td"))
                 for i, x in enumerate(d["edges"])]
        drivers = d.get("drivers") or sorted({e.driver for e in edges})
        riders = d.get("riders") or sorted({r for e in edges for r in e.riders})
        kinds = {k: DriverKind(v) for k, v in d.get("kinds", {}).items()}
        return cls(drivers, riders, edges, d.get("capacities", {}), kinds)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Hypergraph":
        return cls.from_dict(json.loads(text))

    def __repr__(self) -> str:
        return (f"Hypergraph(drivers={len(self.drivers)}, riders={len(self.riders)}, "
                f"edges={len(self.edges)})")


def build_hypergraph(edge_specs, capacities=None, kinds=None, drivers=None, riders=None) -> Hypergraph:
    """Convenience constructor from ``(driver, riders, weight)`` triples; ids follow list order."""
    edges = [Edge(i, d, tuple(sorted(rs)), w) for i, (d, rs, w) in enumerate(edge_specs)]
    if drivers is None:
        drivers = sorted({e.driver for e in edges} | set(capacities or {}))
    if riders is None:
        riders = sorted({r for e in edges for r in e.riders})
    return Hypergraph(drivers, riders, edges, capacities, kinds)


def downward_closure_violations(H: Hypergraph) -> list[str]:
    """Multi-rider edges missing some non-empty proper subset of their riders."""
    out = []
    for e in H.edges:
        for k in range(1, len(e.riders)):
            for sub in itertools.combinations(e.riders, k):
                if H.edge_for(e.driver, sub) is None:
                    out.append(f"edge {e.id}: {e.driver} with {list(sub)} missing")
    return out


def weight_monotonicity_violations(H: Hypergraph) -> list[str]:
    """Nested rider sets of one driver whose smaller set weighs more."""
    out = []
    for e in H.edges:
        for k in range(1, len(e.riders)):
            for sub in itertools.combinations(e.riders, k):
                f = H.edge_for(e.driver, sub)
                if f is not None and f.weight > e.weight:
                    out.append(f"edge {f.id} (w={f.weight}) heavier than superset edge {e.id} (w={e.weight})")
    return out
