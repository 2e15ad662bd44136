"""Per-interval report rows and their CSV/JSON serialization."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, fields, replace

from .errors import Infeasible
from .model import DriverKind, Instance, Problem
from .solvers.solution import validate_solution

CSV_COLUMNS = ("interval", "algo", "clustered", "problem", "objective", "assigned_total",
               "assigned_personal", "assigned_designated", "time_saved_total_s",
               "time_saved_avg_s", "enum_ms", "solve_ms", "total_ms")


@dataclass
class MetricsReport:
    interval: str
    algo: str
    clustered: bool
    problem: str
    objective: int
    assigned_total: int
    assigned_personal: int
    assigned_designated: int
    time_saved_total_s: int
    time_saved_avg_s: float
    enum_ms: int
    solve_ms: int
    total_ms: int
    travel_distance_m: int = 0
    riders: int = 0

    def csv_row(self) -> list:
        row = []
        for name in CSV_COLUMNS:
            v = getattr(self, name)
            if isinstance(v, bool):
                v = int(v)
            elif isinstance(v, float):
                v = f"{v:.3f}"
            row.append(v)
        return row

    def to_dict(self) -> dict:
        return asdict(self)


def time_saved(instance: Instance, edges) -> dict[str, int]:
    """Seconds each served rider saves against its pure transit journey."""
    riders = instance.rider_by_id
    out = {}
    for e in edges:
        for rid, st in e.match.service:
            r = riders[rid]
            out[rid] = r.transit_baseline - (st.arrive_destination - r.earliest_departure)
    return out


def report_for(instance: Instance, result, interval, clustered: bool, timing: bool = True) -> MetricsReport:
    """Re-validate a pipeline result and summarize it; aborts on a broken solution."""
    H, sol = result.hypergraph, result.solution
    problems = validate_solution(H, replace(sol, objective=None), riders=[r.id for r in instance.riders])
    chosen = result.chosen
    kinds = {d.id: d.kind for d in instance.drivers}
    personal = sum(1 for e in chosen if kinds[e.driver] is DriverKind.PERSONAL)
    # minnum counts designated drivers only; personal ones are free
    expected = (len(chosen) - personal if result.problem is Problem.MIN_NUM
                else sum(e.weight for e in chosen))
    if sol.objective != expected:
        problems.append(f"objective {sol.objective} does not match chosen edges ({expected})")
    if problems:
        raise Infeasible("solution failed re-validation: " + "; ".join(problems))
    saved = time_saved(instance, chosen)
    for rid, s in saved.items():
        r = instance.rider_by_id[rid]
        if s < r.acceptance_threshold * r.transit_baseline:
            raise Infeasible(f"rider {rid} saves only {s} s", rider=rid)
    total_saved = sum(saved.values())
    n = len(instance.riders)
    enum_ms = round(result.enum_seconds * 1000) if timing else 0
    solve_ms = round(result.solve_seconds * 1000) if timing else 0
    return MetricsReport(
        interval=str(interval),
        algo=result.algo,
        clustered=clustered,
        problem=result.problem.value,
        objective=sol.objective,
        assigned_total=len(chosen),
        assigned_personal=personal,
        assigned_designated=len(chosen) - personal,
        time_saved_total_s=total_saved,
        time_saved_avg_s=total_saved / n if n else 0.0,
        enum_ms=enum_ms,
        solve_ms=solve_ms,
        total_ms=enum_ms + solve_ms,
        travel_distance_m=sum(e.td for e in chosen),
        riders=n,
    )


def aggregate(reports: list[MetricsReport]) -> MetricsReport:
    """Sums over intervals; the average is total time saved over all riders."""
    if not reports:
        raise ValueError("nothing to aggregate")
    first = reports[0]
    total = {f.name: sum(getattr(r, f.name) for r in reports) for f in fields(MetricsReport)
             if f.type in ("int", int)}
    riders = total["riders"]
    return MetricsReport(
        interval="all", algo=first.algo, clustered=first.clustered, problem=first.problem,
        time_saved_avg_s=total["time_saved_total_s"] / riders if riders else 0.0,
        **total)


def to_csv(reports: list[MetricsReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow(r.csv_row())
    return buf.getvalue()


def to_json(reports: list[MetricsReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=1, sort_keys=True) + "\n"
