"""Depth-first branch and bound for the set-partitioning model.

Branching follows riders in ascending id order; each node branches on the
still-usable incident edges of its lowest uncovered rider, cheapest first.
Two lower bounds prune nodes:

* share bound: every uncovered rider pays at least the smallest w(e)/|R(e)|
  over its usable edges;
* Lagrangian bound: with prices u on the rider rows, sum(u) plus, for each free
  driver, the most negative reduced cost w(e) - u(R(e)) of its usable edges.
  Prices are improved by a few subgradient steps per node, starting from the
  parent's prices.

Edges whose forced use would lift the Lagrangian bound above the incumbent are
dropped for the whole subtree. Every pruning rule only discards solutions that
cannot beat the incumbent, so the search is exact when it runs to completion.
"""

from __future__ import annotations

import math
import sys
import time
from typing import Optional

import numpy as np

from ..errors import Infeasible
from ..hypergraph import Hypergraph
from ..model import Problem
from .greedy import greedy_min_dist, greedy_min_num
from .solution import AssignmentSolution, Status, require_coverable

ROOT_STEPS = 300
NODE_STEPS = 15


class _Timeout(Exception):
    pass


def _components(H: Hypergraph) -> list[list[str]]:
    """Rider groups that share no driver and no edge with each other."""
    parent = {r: r for r in H.riders}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for d in H.drivers:
        riders = sorted({r for i in H.driver_edges[d] for r in H.edge_by_id[i].riders})
        for r in riders[1:]:
            a, b = find(riders[0]), find(r)
            if a != b:
                parent[max(a, b)] = min(a, b)
    groups: dict[str, list[str]] = {}
    for r in H.riders:
        groups.setdefault(find(r), []).append(r)
    return sorted((sorted(g) for g in groups.values()), key=lambda g: g[0])


class _Search:
    def __init__(self, H: Hypergraph, problem: Problem, deadline: Optional[float],
                 incumbent: Optional[tuple[int, list[int]]]):
        self.deadline = deadline
        self.nodes = 0
        riders = sorted(H.riders)
        self.n = len(riders)
        r_index = {r: k for k, r in enumerate(riders)}
        # edges grouped by driver so per-driver minima are segment reductions
        edges = sorted(H.edges, key=lambda e: (e.driver, e.id))
        drivers = sorted({e.driver for e in edges})
        d_index = {d: k for k, d in enumerate(drivers)}
        self.m = len(edges)
        self.ids = [e.id for e in edges]
        self.ids_arr = np.asarray(self.ids)
        self.costs = [1 if problem is Problem.MIN_NUM else e.weight for e in edges]
        self.drv = [d_index[e.driver] for e in edges]
        members = [[r_index[x] for x in e.riders] for e in edges]
        self.masks = [sum(1 << k for k in mem) for mem in members]
        self.c = np.asarray(self.costs, dtype=float)
        self.drv_arr = np.asarray(self.drv, dtype=np.int64)
        self.rows = np.repeat(np.arange(self.m), [len(x) for x in members])
        self.cols = np.fromiter((r for x in members for r in x), dtype=np.int64,
                                count=len(self.rows))
        self.seg = np.flatnonzero(np.r_[True, self.drv_arr[1:] != self.drv_arr[:-1]])

        self.options = [[] for _ in riders]      # (cost, edge id, edge index)
        self.by_share = [[] for _ in riders]     # (share, edge index)
        for k, (c, mem) in enumerate(zip(self.costs, members)):
            for r in mem:
                self.options[r].append((c, self.ids[k], k))
                self.by_share[r].append((c / len(mem), k))
        for lst in self.options:
            lst.sort()
        for lst in self.by_share:
            lst.sort()
        self.full = (1 << self.n) - 1
        self.best_cost, self.best = (math.inf, None) if incumbent is None else incumbent
        self.cap = sum(self.costs) + 1           # no cover can cost more
        self.root_bound = None

    # ---- bounds ------------------------------------------------------------

    def _limit(self) -> float:
        # costs are integers, so an improving cover costs at most best - 1
        if self.best_cost == math.inf:
            return self.cap
        return self.best_cost - 1 + min(0.5, 1e-7 * (1 + abs(self.best_cost)))

    def _share_bound(self, covered: int, alive) -> float:
        total = 0.0
        rest = self.full & ~covered
        while rest:
            low = rest & -rest
            r = low.bit_length() - 1
            rest ^= low
            for share, k in self.by_share[r]:
                if alive[k]:
                    total += share
                    break
            else:
                return math.inf
        return total

    def _lagrange(self, u, alive, open_riders, steps: int, target: float, heuristic=None):
        """Improve prices on the residual problem; returns (bound, prices, reduced, per-driver min)."""
        best = (-math.inf, u, None, None)
        step = 1.0
        stall = 0
        for it in range(steps):
            reduced = self.c - np.bincount(self.rows, weights=u[self.cols], minlength=self.m)
            masked = np.where(alive, reduced, np.inf)
            per_driver = np.minimum(np.minimum.reduceat(masked, self.seg), 0.0)
            val = float(u[open_riders].sum() + per_driver.sum())
            if val > best[0] + 1e-9:
                best = (val, u, reduced, per_driver)
                stall = 0
            else:
                stall += 1
                if stall >= 4:
                    step /= 2
                    stall = 0
            if heuristic is not None and it % 10 == 0:
                heuristic(reduced, alive)
                target = min(target, heuristic.limit())
            if val >= target:
                break
            # the relaxed problem takes each driver's most negative usable edge
            seg_min = np.repeat(per_driver, np.diff(np.r_[self.seg, self.m]))
            hit = alive & (seg_min < 0) & (masked <= seg_min)
            picked_idx = np.flatnonzero(hit)
            _, first = np.unique(self.drv_arr[picked_idx], return_index=True)
            picked = np.zeros(self.m)
            picked[picked_idx[first]] = 1.0
            g = open_riders.astype(float)
            g -= np.bincount(self.cols, weights=picked[self.rows], minlength=self.n)
            g[~open_riders] = 0.0
            norm = float(g @ g)
            if norm == 0 or step < 1e-3:
                break
            gap = max(target - val, 1e-6 * (1 + abs(val)))
            u = u + step * gap / norm * g
        return best

    def _greedy_completion(self, reduced, alive, covered, used, cost, chosen):
        order = np.flatnonzero(alive)
        order = order[np.lexsort((self.ids_arr[order], reduced[order]))]
        used_d, total, picked = set(used), cost, list(chosen)
        for k in order:
            if self.drv[k] in used_d or self.masks[k] & covered:
                continue
            used_d.add(self.drv[k])
            covered |= self.masks[k]
            picked.append(self.ids[k])
            total += self.costs[k]
            if covered == self.full:
                break
        if covered == self.full and total < self.best_cost:
            self.best_cost, self.best = total, picked

    # ---- search ------------------------------------------------------------

    def run(self):
        alive = np.ones(self.m, dtype=bool)
        u = np.array([lst[0][0] for lst in self.by_share], dtype=float)
        self._dfs(0, [], 0, [], alive, u, root=True)

    def _dfs(self, covered, used, cost, chosen, alive, u, root=False):
        self.nodes += 1
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise _Timeout
        if covered == self.full:
            if cost < self.best_cost:
                self.best_cost, self.best = cost, list(chosen)
            return
        limit = self._limit()
        if cost + self._share_bound(covered, alive) > limit:
            return
        open_riders = np.array([not covered >> r & 1 for r in range(self.n)], dtype=bool)
        search = self

        class _Heuristic:
            def __call__(self, reduced, alive_now):
                search._greedy_completion(reduced, alive_now, covered, used, cost, chosen)

            def limit(self):
                return search._limit() - cost

        use_heur = root or self.nodes % 16 == 1
        val, u, reduced, per_driver = self._lagrange(
            u, alive, open_riders, ROOT_STEPS if root else NODE_STEPS, limit - cost,
            _Heuristic() if use_heur else None)
        if root:
            self.root_bound = cost + val
        limit = self._limit()
        if reduced is None or cost + val > limit:
            return
        # drop edges that cannot be part of an improving cover below this node
        seg_min = np.repeat(per_driver, np.diff(np.r_[self.seg, self.m]))
        alive = alive & (cost + val - seg_min + reduced <= limit)
        if cost + self._share_bound(covered, alive) > limit:
            return

        r = (~covered & (covered + 1)).bit_length() - 1     # lowest uncovered rider
        for c, eid, k in self.options[r]:
            if not alive[k]:
                continue
            if cost + c > self._limit():
                break                                          # options sorted by cost
            d, mask = self.drv[k], self.masks[k]
            # the driver and the riders of the chosen edge leave the residual problem
            hit = np.zeros(self.n, dtype=bool)
            m = mask
            while m:
                low = m & -m
                hit[low.bit_length() - 1] = True
                m ^= low
            touched = np.bincount(self.rows, weights=hit[self.cols], minlength=self.m) > 0
            child = alive & ~touched & (self.drv_arr != d)
            chosen.append(eid)
            used.append(d)
            self._dfs(covered | mask, used, cost + c, chosen, child, u)
            used.pop()
            chosen.pop()


def _greedy_incumbent(H: Hypergraph, problem: Problem):
    try:
        sol = greedy_min_num(H) if problem is Problem.MIN_NUM else greedy_min_dist(H)
    except Infeasible:
        return None
    return sol.objective, list(sol.chosen_edges)


def solve_exact(H: Hypergraph, problem=Problem.MIN_DIST, time_limit: Optional[float] = None,
                decompose: bool = True) -> AssignmentSolution:
    """Optimal cover of every rider by pairwise disjoint edges.

    Independent rider components are solved one after another. With a time
    limit the best cover found so far is returned with status TIME_LIMIT.
    """
    problem = Problem(problem)
    start = time.monotonic()
    if not H.riders:
        return AssignmentSolution.from_edges(H, [], problem, Status.OPTIMAL, nodes=0, seconds=0.0)
    require_coverable(H)
    deadline = None if time_limit is None else start + time_limit
    groups = _components(H) if decompose else [sorted(H.riders)]
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 4 * len(H.riders) + 200))
    chosen: list[int] = []
    nodes = 0
    timed_out = False
    for group in groups:
        sub = H.restrict(riders=group) if len(groups) > 1 else H
        search = _Search(sub, problem, deadline, _greedy_incumbent(sub, problem))
        try:
            search.run()
        except _Timeout:
            timed_out = True
        nodes += search.nodes
        if search.best is None:
            if timed_out:
                return AssignmentSolution(tuple(), {}, None, problem, Status.TIME_LIMIT,
                                          {"nodes": nodes, "seconds": time.monotonic() - start})
            raise Infeasible(f"no disjoint cover for riders {group}")
        chosen.extend(search.best)
    status = Status.TIME_LIMIT if timed_out else Status.OPTIMAL
    return AssignmentSolution.from_edges(H, chosen, problem, status, nodes=nodes,
                                         components=len(groups),
                                         seconds=time.monotonic() - start)
