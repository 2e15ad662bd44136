"""Exhaustive optimum over disjoint edge subsets; a test oracle for small hypergraphs."""

from __future__ import annotations

from ..errors import Infeasible
from ..hypergraph import Hypergraph
from ..model import Problem
from .solution import AssignmentSolution, Status

MAX_EDGES = 24


def brute_force_optimal(H: Hypergraph, problem=Problem.MIN_DIST) -> AssignmentSolution:
    problem = Problem(problem)
    if len(H.edges) > MAX_EDGES:
        raise ValueError(f"brute force limited to {MAX_EDGES} edges, got {len(H.edges)}")
    edges = list(H.edges)
    n_riders = len(H.riders)
    cost = [1 if problem is Problem.MIN_NUM else e.weight for e in edges]
    best = [None, None]

    def walk(i, used_vertices, covered, total, chosen):
        if i == len(edges):
            if covered == n_riders and (best[0] is None or total < best[0]):
                best[0], best[1] = total, list(chosen)
            return
        walk(i + 1, used_vertices, covered, total, chosen)
        e = edges[i]
        verts = e.vertices()
        if any(v in used_vertices for v in verts):
            return
        chosen.append(e.id)
        walk(i + 1, used_vertices | set(verts), covered + len(e.riders), total + cost[i], chosen)
        chosen.pop()

    walk(0, frozenset(), 0, 0, [])
    if best[0] is None:
        raise Infeasible("no disjoint edge set covers every rider")
    return AssignmentSolution.from_edges(H, best[1], problem, Status.OPTIMAL)
