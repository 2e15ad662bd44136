"""Enumerate-then-solve for a whole instance, for both problems."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from ..errors import ConfigError
from ..feasibility import FeasibilityChecker, enumerate_hypergraph
from ..hypergraph import Edge, Hypergraph
from ..model import DriverKind, Instance, Problem
from .exact import solve_exact
from .greedy import assign_personal_maximal, greedy_min_dist, greedy_min_num
from .local_search import local_search_ls
from .solution import AssignmentSolution, Status

ALGOS = ("exact", "greedy", "ls")


def solve_hypergraph(H: Hypergraph, problem, algo: str,
                     time_limit: Optional[float] = None) -> AssignmentSolution:
    problem = Problem(problem)
    if algo == "exact":
        return solve_exact(H, problem, time_limit)
    if algo in ("greedy", "greedy_min_dist", "greedy_min_num"):
        if problem is Problem.MIN_NUM:
            return greedy_min_num(H)
        return greedy_min_dist(H)
    if algo == "ls":
        if problem is not Problem.MIN_NUM:
            raise ConfigError("local search applies to minnum only")
        return local_search_ls(H)
    raise ConfigError(f"unknown algorithm {algo!r}")


@dataclass
class PipelineResult:
    """Chosen edges over ``hypergraph`` (all drivers, TD weights) and how long each stage took."""
    problem: Problem
    algo: str
    hypergraph: Hypergraph
    solution: AssignmentSolution
    personal_edges: tuple[int, ...] = ()
    enum_seconds: float = 0.0
    solve_seconds: float = 0.0
    clusters: Optional[list] = None
    extra: dict = field(default_factory=dict)

    @property
    def chosen(self) -> list[Edge]:
        return [self.hypergraph.edge_by_id[i] for i in self.solution.chosen_edges]


def solve_on_hypergraph(H: Hypergraph, problem, algo: str,
                        time_limit: Optional[float] = None):
    """Solve over an all-driver hypergraph with TD weights.

    minnum runs in two stages: personal drivers take as many riders as they
    can, then designated drivers (weight 1 each) cover the rest. The returned
    solution's objective is the problem's objective: total weight for mindist,
    number of designated drivers for minnum.
    """
    problem = Problem(problem)
    if problem is Problem.MIN_DIST:
        sol = solve_hypergraph(H, problem, algo, time_limit)
        return sol, ()
    part = assign_personal_maximal(H)
    designated = [d for d in H.drivers if H.kinds.get(d, DriverKind.DESIGNATED) is DriverKind.DESIGNATED]
    rest = H.restrict(riders=sorted(part.unserved), drivers=designated).with_weights(lambda e: 1)
    stage2 = solve_hypergraph(rest, problem, algo, time_limit)
    chosen = tuple(sorted(part.chosen_edges + stage2.chosen_edges))
    merged = AssignmentSolution.from_edges(H, chosen, problem, stage2.status, **stage2.stats)
    merged.objective = len(stage2.chosen_edges)
    return merged, part.chosen_edges


def solve_instance(instance: Instance, problem, algo: str, time_limit: Optional[float] = None,
                   checker: Optional[FeasibilityChecker] = None) -> PipelineResult:
    problem = Problem(problem)
    if algo not in ALGOS:
        raise ConfigError(f"unknown algorithm {algo!r}")
    t0 = time.perf_counter()
    # both problems need every driver: minnum's first stage uses the personal ones
    H = enumerate_hypergraph(instance, Problem.MIN_DIST, checker=checker)
    t1 = time.perf_counter()
    sol, personal = solve_on_hypergraph(H, problem, algo, time_limit)
    t2 = time.perf_counter()
    return PipelineResult(problem, algo, H, sol, personal, t1 - t0, t2 - t1)


def merge_results(instance_riders, parts: list[tuple[object, "PipelineResult"]],
                  problem, algo: str) -> PipelineResult:
    """Union of per-cluster results, with edge ids renumbered into one hypergraph."""
    problem = Problem(problem)
    drivers, riders, edges, caps, kinds = [], [], [], {}, {}
    chosen, personal = [], []
    statuses = []
    enum_s = solve_s = 0.0
    objective = 0
    for _, res in parts:
        H = res.hypergraph
        offset = len(edges)
        remap = {}
        for e in H.edges:
            remap[e.id] = offset + len(remap)
            edges.append(Edge(remap[e.id], e.driver, e.riders, e.weight, e.station, e.td, e.match))
        drivers.extend(H.drivers)
        riders.extend(H.riders)
        caps.update(H.capacities)
        kinds.update(H.kinds)
        chosen.extend(remap[i] for i in res.solution.chosen_edges)
        personal.extend(remap[i] for i in res.personal_edges)
        statuses.append(res.solution.status)
        objective += res.solution.objective or 0
        enum_s += res.enum_seconds
        solve_s += res.solve_seconds
    order = {r: k for k, r in enumerate(instance_riders)}
    riders.sort(key=lambda r: order.get(r, len(order)))
    merged_H = Hypergraph(drivers, riders, edges, caps, kinds)
    if Status.TIME_LIMIT in statuses:
        status = Status.TIME_LIMIT
    elif statuses and all(s is Status.OPTIMAL for s in statuses):
        status = Status.OPTIMAL
    else:
        status = Status.FEASIBLE
    sol = AssignmentSolution.from_edges(merged_H, chosen, problem, status)
    sol.objective = objective
    return PipelineResult(problem, algo, merged_H, sol, tuple(sorted(personal)), enum_s, solve_s)
