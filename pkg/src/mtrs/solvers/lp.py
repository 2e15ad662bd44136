"""CPLEX-LP text for the binary set-partitioning model."""

from __future__ import annotations

import re

from ..hypergraph import Hypergraph
from ..model import Problem


def _row_name(prefix: str, vertex: str) -> str:
    return prefix + re.sub(r"[^A-Za-z0-9_]", "_", str(vertex))


TERMS_PER_LINE = 10      # LP readers cap the line length


def _terms(ids, coef=None) -> str:
    parts = []
    for k, i in enumerate(ids):
        c = "" if coef is None or coef[i] == 1 else f"{coef[i]} "
        lead = "" if k == 0 else ("\n   + " if k % TERMS_PER_LINE == 0 else "+ ")
        parts.append(lead + f"{c}x_{i}")
    return " ".join(parts).replace(" \n", "\n")


def export_lp(H: Hypergraph, problem=Problem.MIN_DIST) -> str:
    problem = Problem(problem)
    ids = [e.id for e in H.edges]
    coef = {e.id: (1 if problem is Problem.MIN_NUM else e.weight) for e in H.edges}
    lines = [f"\\ {problem.value} over {len(H.drivers)} drivers, {len(H.riders)} riders, "
             f"{len(ids)} edges", "Minimize", " obj: " + (_terms(ids, coef) if ids else "0"),
             "Subject To"]
    for d in H.drivers:
        if H.driver_edges[d]:
            lines.append(f" {_row_name('drv_', d)}: {_terms(sorted(H.driver_edges[d]))} <= 1")
    for r in H.riders:
        if H.rider_edges[r]:
            lines.append(f" {_row_name('rdr_', r)}: {_terms(sorted(H.rider_edges[r]))} = 1")
        elif ids:
            # keeps the exported model infeasible, as the instance is
            lines.append(f" {_row_name('rdr_', r)}: 0 x_{ids[0]} = 1")
        else:
            lines.append(f"\\ rider {r} has no incident edge; the model is infeasible")
    lines.append("Binary")
    lines.extend(f" x_{i}" for i in ids)
    lines.append("End")
    return "\n".join(lines) + "\n"
