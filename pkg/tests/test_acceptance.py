"""End-to-end acceptance checks; each test prints one PASS/FAIL line."""

import json
import os
import random
import subprocess
import sys
import time
from dataclasses import replace

import pytest

from helpers import assumption2_hypergraph, random_hypergraph, small_config
from mtrs.clustering import ClusterConfig, build_clusters_phase1, cluster_instance, refine_clusters, solve_clustered
from mtrs.errors import Infeasible
from mtrs.feasibility import FeasibilityChecker, enumerate_hypergraph
from mtrs.generate import GenConfig, brute_force_3dm, gen_3dm_hypergraph, gen_interval_instance, random_3dm
from mtrs.hypergraph import downward_closure_violations, weight_monotonicity_violations
from mtrs.metrics import report_for
from mtrs.model import Problem, check_assumption2
from mtrs.solvers import brute_force_optimal, greedy_min_dist, greedy_min_num, local_search_ls, solve_exact
from mtrs.solvers.pipeline import solve_instance
from mtrs.solvers.solution import Status, validate_solution


@pytest.fixture
def verdict(capsys):
    def say(name, ok, detail=""):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        assert ok, detail
    return say


def _objective_or_none(fn, *args):
    try:
        return fn(*args).objective
    except Infeasible:
        return None


def _set_matching_sweep(problem, target):
    rng = random.Random(2024 if problem is Problem.MIN_DIST else 2025)
    bad, yes, t0 = [], 0, time.perf_counter()
    for k in range(120):
        q = 1 + k % 4
        tdm = random_3dm(rng, q)
        perfect = brute_force_3dm(tdm) == q
        yes += perfect
        got = solve_exact(gen_3dm_hypergraph(tdm, problem), problem).objective
        if (got == target(q)) != perfect:
            bad.append((k, q, got))
    return bad, yes, time.perf_counter() - t0


def test_set_matching_equivalence_weighted(verdict):
    bad, yes, secs = _set_matching_sweep(Problem.MIN_DIST, lambda q: 2 * q)
    verdict("3DM equivalence, distance objective = 2q", not bad and secs < 60,
            f"120 instances ({yes} with a perfect matching), {len(bad)} mismatches, {secs:.1f}s")


def test_set_matching_equivalence_unit(verdict):
    bad, yes, secs = _set_matching_sweep(Problem.MIN_NUM, lambda q: q)
    verdict("3DM equivalence, count objective = q", not bad and secs < 60,
            f"120 instances ({yes} with a perfect matching), {len(bad)} mismatches, {secs:.1f}s")


def test_exact_matches_brute_force(verdict):
    rng = random.Random(7)
    bad, solved, t0 = [], 0, time.perf_counter()
    for k in range(500):
        H = random_hypergraph(rng, max_edges=24)
        assert len(H.riders) <= 6 and len(H.edges) <= 24
        for problem in Problem:
            want = _objective_or_none(brute_force_optimal, H, problem)
            got = _objective_or_none(solve_exact, H, problem)
            solved += want is not None
            if want != got:
                bad.append((k, problem.value, want, got))
    secs = time.perf_counter() - t0
    verdict("exact solver vs exhaustive oracle", not bad and secs < 120,
            f"1000 solves ({solved} coverable), {len(bad)} mismatches, {secs:.1f}s")


def _ratio_sweep():
    rng = random.Random(11)
    for k in range(240):
        H = assumption2_hypergraph(rng, lam=2 + k % 2)
        assert check_assumption2(None, H)
        yield H


def test_greedy_distance_ratio(verdict):
    worst, bad = 0.0, []
    for H in _ratio_sweep():
        lam, mu = H.lam, H.mu
        bound = (lam * lam * mu + lam) / (lam + 1)
        g, opt = greedy_min_dist(H).objective, solve_exact(H, Problem.MIN_DIST).objective
        worst = max(worst, g / opt / bound)
        if g > bound * opt:
            bad.append((g, opt, bound))
    verdict("greedy distance within (l^2 mu + l)/(l + 1)", not bad,
            f"240 instances, {len(bad)} violations, worst ratio/bound {worst:.3f}")


def test_greedy_count_ratio(verdict):
    worst, bad = 0.0, []
    for H in _ratio_sweep():
        bound = (H.lam + 2) / 2
        g, opt = greedy_min_num(H).objective, solve_exact(H, Problem.MIN_NUM).objective
        worst = max(worst, g / opt / bound)
        if g > bound * opt:
            bad.append((g, opt, bound))
    verdict("greedy count within (l + 2)/2", not bad,
            f"240 instances, {len(bad)} violations, worst ratio/bound {worst:.3f}")


def test_enumerated_hypergraphs_are_closed_and_monotone(verdict):
    bad, edges = [], 0
    for seed in range(50):
        inst = gen_interval_instance(small_config(seed=100 + seed, riders=8))
        H = enumerate_hypergraph(inst, Problem.MIN_DIST)
        edges += len(H.edges)
        bad += downward_closure_violations(H) + weight_monotonicity_violations(H)
    verdict("downward closure and nested weight monotonicity", not bad,
            f"50 instances, {edges} edges, {len(bad)} violations")


def _independent_check(inst, result):
    """Disjoint exact cover and per-rider time saving, recomputed from the chosen matches."""
    problems = []
    seen_drivers, seen_riders = set(), []
    for e in result.chosen:
        if e.driver in seen_drivers:
            problems.append(f"driver {e.driver} used twice")
        seen_drivers.add(e.driver)
        seen_riders += list(e.riders)
    if sorted(seen_riders) != sorted(r.id for r in inst.riders):
        problems.append("riders not covered exactly once")
    riders = inst.rider_by_id
    for e in result.chosen:
        for rid, st in e.match.service:
            r = riders[rid]
            saved = r.transit_baseline - (st.arrive_destination - r.earliest_departure)
            if saved < r.acceptance_threshold * r.transit_baseline or saved < 0.3 * r.transit_baseline:
                problems.append(f"rider {rid} saves {saved}s of {r.transit_baseline}s")
    return problems


def test_every_algorithm_returns_valid_solutions(verdict):
    runs = [("mindist", "exact", False), ("mindist", "greedy", False), ("minnum", "exact", False),
            ("minnum", "greedy", False), ("minnum", "ls", False), ("mindist", "exact", True),
            ("minnum", "greedy", True)]
    bad, n, stuck = [], 0, 0
    for seed in range(12):
        inst = gen_interval_instance(small_config(seed=200 + seed, riders=10))
        checker = FeasibilityChecker(inst)
        for problem, algo, clustered in runs:
            try:
                if clustered:
                    res = solve_clustered(inst, ClusterConfig(m1=3, m2=3), problem, algo, checker=checker)
                else:
                    res = solve_instance(inst, problem, algo, checker=checker)
            except Infeasible as exc:
                # greedy may stop without a cover; every other algorithm must return one
                if algo != "greedy":
                    bad.append((seed, problem, algo, clustered, str(exc)))
                stuck += 1
                continue
            n += 1
            found = _independent_check(inst, res)
            found += validate_solution(res.hypergraph, replace(res.solution, objective=None),
                                       riders=[r.id for r in inst.riders])
            try:
                report_for(inst, res, 0, clustered)
            except Infeasible as exc:
                found.append(str(exc))
            bad += [(seed, problem, algo, clustered, p) for p in found]
    verdict("feasibility contracts for every algorithm", not bad,
            f"{n} solutions checked, {stuck} greedy runs stopped without a cover, {len(bad)} violations")


def test_local_search_improves_monotonically(verdict):
    rng = random.Random(5)
    bad, moves = [], 0
    for k in range(150):
        H = assumption2_hypergraph(rng, n=rng.randint(2, 7))
        sol = local_search_ls(H)
        trace = sol.stats["trace"]
        moves += len(trace) - 1
        if any(b >= a for a, b in zip(trace, trace[1:])) or trace[-1] > sol.stats["initial_size"]:
            bad.append((k, trace))
        if trace[-1] != len(sol.chosen_edges) or validate_solution(H, sol):
            bad.append((k, "final matching"))
    verdict("local search strictly decreases the used drivers", not bad,
            f"150 instances, {moves} improving moves, {len(bad)} violations")


def test_clustering_soundness(verdict):
    cfg = ClusterConfig(m1=3, m2=3, s_min=3, s_max=6)
    notes, worse, runs = [], 0, 0
    for seed in range(50):
        inst = gen_interval_instance(small_config(seed=300 + seed, riders=10))
        agents = sorted([r.id for r in inst.riders] + [d.id for d in inst.personal_drivers])
        first = build_clusters_phase1(inst, cfg)
        if sorted(x for c in first.clusters for x in c.riders + c.personal) != agents:
            notes.append(f"seed {seed}: phase 1 is not a partition")
        refined = refine_clusters(first, cfg, inst)
        for c in refined.clusters:
            if c.size > cfg.s_max or (c.size < cfg.s_min and not c.isolated):
                notes.append(f"seed {seed}: cluster {c.id} has size {c.size}")
        checker = FeasibilityChecker(inst)
        clustered = solve_clustered(inst, cfg, "mindist", "exact", checker=checker)
        plain = solve_instance(inst, "mindist", "exact", checker=checker)
        runs += 1
        worse += clustered.solution.objective > plain.solution.objective
        if clustered.solution.objective < plain.solution.objective:
            notes.append(f"seed {seed}: clustered {clustered.solution.objective} < {plain.solution.objective}")

    inst = gen_interval_instance(GenConfig(riders=200, seed=1))
    cs = cluster_instance(inst, ClusterConfig())
    t0 = time.perf_counter()
    checker = FeasibilityChecker(inst)
    for c in cs.clusters:
        if c.riders:
            enumerate_hypergraph(inst.subinstance(c.riders, c.personal + c.designated), Problem.MIN_DIST,
                                 checker=checker)
    t_clustered = time.perf_counter() - t0
    t0 = time.perf_counter()
    enumerate_hypergraph(inst, Problem.MIN_DIST)
    t_plain = time.perf_counter() - t0
    if t_clustered >= t_plain:
        notes.append(f"clustered enumeration {t_clustered:.1f}s not below {t_plain:.1f}s")
    verdict("clustering soundness", not notes,
            f"{runs} paired runs ({worse} strictly worse when clustered); 200-rider enumeration "
            f"{t_clustered:.1f}s clustered vs {t_plain:.1f}s plain; {len(notes)} problems")


def test_reports_are_reproducible(verdict, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"generate": small_config(seed=9, riders=8).to_dict()}))
    outputs = []
    for flags, hash_seed in [([], "1"), ([], "2"), (["--cluster"], "3"), (["--cluster"], "4")]:
        out = tmp_path / f"r{hash_seed}.csv"
        env = dict(os.environ, PYTHONHASHSEED=hash_seed)
        subprocess.run([sys.executable, "-m", "mtrs.cli", "bench", "--config", str(cfg), "--intervals", "2",
                        "--no-timing", "--out", str(out)] + flags, check=True, env=env)
        outputs.append(out.read_bytes())
    same = outputs[0] == outputs[1] and outputs[2] == outputs[3]
    verdict("byte-identical reports for identical seeds and flags", same,
            f"{len(outputs[0])} and {len(outputs[2])} bytes")


def test_desk_scale_pipeline(verdict):
    t0 = time.perf_counter()
    inst = gen_interval_instance(GenConfig(riders=100, seed=1), 7 * 3600)
    res = solve_instance(inst, "mindist", "exact", time_limit=280)
    report = report_for(inst, res, 0, False)
    secs = time.perf_counter() - t0
    verdict("desk-scale distance pipeline under 5 minutes",
            secs < 300 and res.solution.status is Status.OPTIMAL,
            f"{len(inst.riders)} riders, {len(inst.personal_drivers)} personal and "
            f"{len(inst.designated_drivers)} designated drivers, {len(res.hypergraph.edges)} edges, "
            f"objective {report.objective} ({res.solution.status.value}) in {secs:.1f}s")
