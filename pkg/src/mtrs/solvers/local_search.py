"""Driver-count local search: start from a singleton matching, then merge."""

from __future__ import annotations

from typing import Optional

from ..errors import Infeasible
from ..hypergraph import Hypergraph
from ..model import Problem
from .solution import AssignmentSolution, Status


def singleton_matching(H: Hypergraph) -> dict[str, int]:
    """Maximum matching of riders to drivers through single-rider edges (rider -> edge id)."""
    options = {r: [] for r in H.riders}
    for e in H.edges:
        if len(e.riders) == 1:
            options[e.riders[0]].append(e)
    driver_of: dict[str, int] = {}          # driver -> edge id
    rider_of: dict[str, int] = {}

    def augment(r, seen):
        for e in options[r]:
            if e.driver in seen:
                continue
            seen.add(e.driver)
            cur = driver_of.get(e.driver)
            if cur is None or augment(H.edge_by_id[cur].riders[0], seen):
                driver_of[e.driver] = e.id
                rider_of[r] = e.id
                return True
        return False

    for r in sorted(H.riders):
        augment(r, set())
    return rider_of


class _State:
    def __init__(self, H: Hypergraph, edges):
        self.H = H
        self.edges = set(edges)
        self.by_driver = {H.edge_by_id[i].driver: i for i in self.edges}
        self.by_rider = {r: i for i in self.edges for r in H.edge_by_id[i].riders}

    def apply(self, remove, add):
        H = self.H
        for i in remove:
            self.edges.discard(i)
            e = H.edge_by_id[i]
            del self.by_driver[e.driver]
            for r in e.riders:
                del self.by_rider[r]
        for i in add:
            e = H.edge_by_id[i]
            assert e.driver not in self.by_driver and not any(r in self.by_rider for r in e.riders)
            self.edges.add(i)
            self.by_driver[e.driver] = i
            for r in e.riders:
                self.by_rider[r] = i

    def owner(self, riders) -> Optional[int]:
        """The single solution edge containing all of ``riders``, if there is one."""
        owners = {self.by_rider.get(r) for r in riders}
        if len(owners) != 1:
            return None
        (i,) = owners
        return i


def _improvement(st: _State, e_id: int):
    """Return (remove, add) lowering the driver count by at least one, or None."""
    H = st.H
    e = H.edge_by_id[e_id]
    (r,) = e.riders
    candidates = [H.edge_by_id[i] for i in H.rider_edges[r]]
    # merge: one edge of a solution driver absorbs r together with that driver's riders
    for e3 in candidates:
        rest = [x for x in e3.riders if x != r]
        if not rest:
            continue
        if e3.driver == e.driver:
            f = st.owner(rest)
            if f is not None and f != e_id and set(H.edge_by_id[f].riders) == set(rest):
                return [e_id, f], [e3.id]
            continue
        f = st.by_driver.get(e3.driver)
        if f is None or f == e_id:
            continue
        if set(H.edge_by_id[f].riders) | {r} == set(e3.riders):
            return [e_id, f], [e3.id]
    # swap-merge: r and part of another edge e' move to f's driver, the rest of e' to g's driver
    for e3 in candidates:
        f = st.by_driver.get(e3.driver)
        if f is None or f == e_id:
            continue
        f_riders = set(H.edge_by_id[f].riders)
        if not f_riders < set(e3.riders) or r not in e3.riders:
            continue
        x = set(e3.riders) - f_riders - {r}
        if not x:
            continue
        e2 = st.owner(x)
        if e2 is None or e2 in (e_id, f):
            continue
        y = set(H.edge_by_id[e2].riders) - x
        if not y:
            return [e_id, f, e2], [e3.id]
        for g in sorted(st.edges):
            if g in (e_id, f, e2):
                continue
            eg = H.edge_by_id[g]
            e4 = H.edge_for(eg.driver, set(eg.riders) | y)
            if e4 is not None:
                return [e_id, f, e2, g], [e3.id, e4.id]
    return None


def local_search_ls(H: Hypergraph, max_rounds: Optional[int] = None) -> AssignmentSolution:
    matching = singleton_matching(H)
    if len(matching) != len(H.riders):
        left = sorted(set(H.riders) - set(matching))
        raise Infeasible(f"single-rider matching cannot cover {left}", rider=left[0])
    st = _State(H, matching.values())
    initial = len(st.by_driver)
    trace = [initial]
    rounds = 0
    while max_rounds is None or rounds < max_rounds:
        applied = False
        for e_id in sorted(st.edges):
            if len(H.edge_by_id[e_id].riders) != 1:
                continue
            move = _improvement(st, e_id)
            if move is None:
                continue
            st.apply(*move)
            trace.append(len(st.by_driver))
            applied = True
            rounds += 1
            break
        if not applied:
            break
    return AssignmentSolution.from_edges(H, st.edges, Problem.MIN_NUM, Status.FEASIBLE,
                                         initial_size=initial, trace=trace,
                                         improvements=len(trace) - 1)
