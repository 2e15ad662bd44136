"""Greedy assignment rules over a hypergraph."""

from __future__ import annotations

from fractions import Fraction

from ..errors import Infeasible
from ..hypergraph import Hypergraph
from ..model import Problem
from .solution import AssignmentSolution, PartialAssignment, Status


def _greedy_pass(H: Hypergraph, key, require_cover=True):
    """Repeatedly take the best still-available edge by ``key``.

    An edge stays available while its driver is unused and none of its riders
    is covered; once dead it never revives, so one sorted sweep suffices.
    """
    order = sorted(H.edges, key=key)
    used, covered = set(), set()
    chosen = []
    iterations = 0
    for e in order:
        if len(covered) == len(H.riders):
            break
        if e.driver in used or any(r in covered for r in e.riders):
            continue
        iterations += 1
        chosen.append(e.id)
        used.add(e.driver)
        covered.update(e.riders)
    if require_cover and len(covered) != len(H.riders):
        left = sorted(set(H.riders) - covered)
        raise Infeasible(f"riders left without an available edge: {left}", rider=left[0])
    return chosen, covered, iterations


def greedy_min_dist(H: Hypergraph) -> AssignmentSolution:
    """Better of the cheapest-edge-first and cheapest-per-rider-first passes."""
    results = []
    for name, key in (("M1", lambda e: (e.weight, e.id)),
                      ("M2", lambda e: (Fraction(e.weight, len(e.riders)), e.id))):
        try:
            chosen, _, it = _greedy_pass(H, key)
        except Infeasible as exc:
            results.append((name, None, exc, 0))
            continue
        results.append((name, chosen, None, it))
    ok = [(sum(H.edge_by_id[i].weight for i in ch), k, name, ch, it)
          for k, (name, ch, _, it) in enumerate(results) if ch is not None]
    if not ok:
        raise results[0][2]
    total, _, name, chosen, it = min(ok)
    weights = {n: (sum(H.edge_by_id[i].weight for i in c) if c is not None else None)
               for n, c, _, _ in results}
    return AssignmentSolution.from_edges(H, chosen, Problem.MIN_DIST, Status.FEASIBLE,
                                         picked=name, iterations=it,
                                         w_m1=weights["M1"], w_m2=weights["M2"])


def _max_cardinality_key(e):
    return (-len(e.riders), e.weight, e.id)


def greedy_min_num(H: Hypergraph) -> AssignmentSolution:
    chosen, _, it = _greedy_pass(H, _max_cardinality_key)
    return AssignmentSolution.from_edges(H, chosen, Problem.MIN_NUM, Status.FEASIBLE,
                                         iterations=it)


def assign_personal_maximal(H: Hypergraph) -> PartialAssignment:
    """Serve as many riders as the personal drivers can take, largest sets first."""
    personal = set(H.personal_drivers) if H.kinds else set(H.drivers)
    sub = H.restrict(drivers=[d for d in H.drivers if d in personal])
    chosen, covered, _ = _greedy_pass(sub, _max_cardinality_key, require_cover=False)
    return PartialAssignment(tuple(sorted(chosen)), frozenset(covered),
                             frozenset(set(H.riders) - covered))
