"""Solution containers and structural re-validation."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

from ..errors import Infeasible
from ..hypergraph import Hypergraph
from ..model import Problem


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    TIME_LIMIT = "TimeLimit"


def objective_of(H: Hypergraph, edge_ids: Iterable[int], problem: Problem) -> int:
    ids = list(edge_ids)
    if Problem(problem) is Problem.MIN_NUM:
        return len(ids)
    return sum(H.edge_by_id[i].weight for i in ids)


@dataclass
class AssignmentSolution:
    chosen_edges: tuple[int, ...]
    assignment: dict[str, str]
    objective: Optional[int]
    problem: Problem
    status: Status
    stats: dict = field(default_factory=dict)

    @classmethod
    def from_edges(cls, H: Hypergraph, edge_ids: Iterable[int], problem: Problem,
                   status: Status, **stats) -> "AssignmentSolution":
        ids = tuple(sorted(edge_ids))
        assignment = {}
        for i in ids:
            e = H.edge_by_id[i]
            for r in e.riders:
                assignment[r] = e.driver
        return cls(ids, assignment, objective_of(H, ids, problem), Problem(problem), status, stats)

    @property
    def drivers_used(self) -> set[str]:
        return set(self.assignment.values())

    def to_dict(self, H: Optional[Hypergraph] = None) -> dict:
        edges = []
        for i in self.chosen_edges:
            if H is None:
                edges.append({"id": i})
            else:
                e = H.edge_by_id[i]
                edges.append({"id": i, "driver": e.driver, "riders": list(e.riders),
                              "station": e.station, "weight": e.weight})
        return {"problem": self.problem.value, "objective": self.objective,
                "status": self.status.value, "edges": edges}

    def to_json(self, H: Optional[Hypergraph] = None) -> str:
        return json.dumps(self.to_dict(H), sort_keys=True, indent=1) + "\n"


@dataclass
class PartialAssignment:
    chosen_edges: tuple[int, ...]
    served: frozenset
    unserved: frozenset


def validate_solution(H: Hypergraph, sol: AssignmentSolution,
                      riders: Optional[Iterable[str]] = None) -> list[str]:
    """Disjointness, exact cover of ``riders`` (default: all of H's riders) and objective."""
    problems = []
    required = set(H.riders if riders is None else riders)
    drivers_seen: set[str] = set()
    riders_seen: dict[str, int] = {}
    for i in sol.chosen_edges:
        e = H.edge_by_id.get(i)
        if e is None:
            problems.append(f"edge {i} not in hypergraph")
            continue
        if e.driver in drivers_seen:
            problems.append(f"driver {e.driver} used by more than one edge")
        drivers_seen.add(e.driver)
        for r in e.riders:
            if r in riders_seen:
                problems.append(f"rider {r} covered by edges {riders_seen[r]} and {i}")
            riders_seen[r] = i
    missing = required - set(riders_seen)
    if missing:
        problems.append(f"riders not covered: {sorted(missing)}")
    if sol.objective is not None and sol.objective != objective_of(H, sol.chosen_edges, sol.problem):
        problems.append("objective does not match chosen edges")
    return problems


def require_coverable(H: Hypergraph) -> None:
    for r in H.riders:
        if not H.rider_edges[r]:
            raise Infeasible(f"rider {r} has no incident edge", rider=r)
