import csv
import io
import json

import pytest

from helpers import small_config
from mtrs.cli import main
from mtrs.feasibility import enumerate_hypergraph
from mtrs.metrics import CSV_COLUMNS
from mtrs.model import Instance

HEADER = ("interval,algo,clustered,problem,objective,assigned_total,assigned_personal,"
          "assigned_designated,time_saved_total_s,time_saved_avg_s,enum_ms,solve_ms,total_ms")


@pytest.fixture
def config(tmp_path):
    gen = small_config(seed=4, riders=5).to_dict()
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"generate": gen, "cluster": {"m1": 3, "m2": 3}}))
    return str(path)


def run(capsys, *argv):
    rc = main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def exhaustive_min(H):
    """Cheapest disjoint cover by trying every edge for the lowest uncovered rider."""
    best = [None]

    def walk(covered, drivers, cost):
        rest = sorted(set(H.riders) - covered)
        if not rest:
            best[0] = cost if best[0] is None else min(best[0], cost)
            return
        r = rest[0]
        for e in H.edges:
            if r in e.riders and e.driver not in drivers and not covered & set(e.riders):
                walk(covered | set(e.riders), drivers | {e.driver}, cost + e.weight)

    walk(frozenset(), frozenset(), 0)
    return best[0]


def test_header_is_exact(capsys, config):
    rc, out, _ = run(capsys, "solve", "--config", config, "--no-timing")
    assert rc == 0
    assert out.splitlines()[0] == HEADER
    assert ",".join(CSV_COLUMNS) == HEADER


def test_mindist_exact_matches_exhaustive_search(capsys, config, tmp_path):
    inst_path = tmp_path / "inst.json"
    assert run(capsys, "generate", "--config", config, "--out", str(inst_path))[0] == 0
    rc, out, _ = run(capsys, "solve", "--instance", str(inst_path), "--problem", "mindist",
                     "--algo", "exact")
    assert rc == 0
    H = enumerate_hypergraph(Instance.from_json(inst_path.read_text()), "mindist")
    assert int(rows(out)[0]["objective"]) == exhaustive_min(H)


def test_minnum_counts(capsys, config):
    for algo in ("exact", "greedy", "ls"):
        rc, out, _ = run(capsys, "solve", "--config", config, "--problem", "minnum", "--algo", algo)
        assert rc == 0
        row = rows(out)[0]
        assert int(row["assigned_total"]) == int(row["assigned_personal"]) + int(row["assigned_designated"])
        assert int(row["objective"]) == int(row["assigned_designated"])


def test_cluster_flag_never_improves(capsys, config):
    for seed in (1, 2, 3):
        _, plain, _ = run(capsys, "solve", "--config", config, "--seed", str(seed))
        _, clustered, _ = run(capsys, "solve", "--config", config, "--seed", str(seed), "--cluster")
        assert int(rows(clustered)[0]["objective"]) >= int(rows(plain)[0]["objective"])
        assert rows(clustered)[0]["clustered"] == "1"


def test_json_report_and_solution_file(capsys, config, tmp_path):
    sol = tmp_path / "sol.json"
    rc, out, _ = run(capsys, "solve", "--config", config, "--format", "json", "--solution", str(sol))
    assert rc == 0
    report = json.loads(out)[0]
    assert report["riders"] == 5
    assert report["time_saved_avg_s"] == pytest.approx(report["time_saved_total_s"] / 5)
    assert json.loads(sol.read_text())


def test_bench_appends_totals(capsys, config):
    rc, out, _ = run(capsys, "bench", "--config", config, "--intervals", "2", "--algo", "greedy",
                     "--no-timing")
    assert rc == 0
    got = rows(out)
    assert [r["interval"] for r in got] == ["0", "1", "all"]
    assert int(got[2]["objective"]) == int(got[0]["objective"]) + int(got[1]["objective"])


def test_other_subcommands(capsys, config, tmp_path):
    hg = tmp_path / "h.json"
    assert run(capsys, "match", "--config", config, "--out", str(hg))[0] == 0
    rc, out, _ = run(capsys, "export-lp", "--hypergraph", str(hg))
    assert rc == 0 and "minimize" in out.lower()
    rc, out, _ = run(capsys, "cluster", "--config", config)
    assert rc == 0 and isinstance(json.loads(out), list)


def test_exit_codes(capsys, config, tmp_path):
    assert run(capsys, "solve", "--config", str(tmp_path / "missing.json"))[0] == 4
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"generate": {"riders": -1}}))
    assert run(capsys, "solve", "--config", str(bad))[0] == 3
    bad.write_text(json.dumps({"planner": {}}))
    assert run(capsys, "solve", "--config", str(bad))[0] == 3
    assert run(capsys, "solve", "--config", config, "--algo", "ls")[0] == 3
    assert run(capsys, "solve", "--config", config, "--out", str(tmp_path / "no" / "dir.csv"))[0] == 4


def test_infeasible_exit_code(capsys, config, tmp_path):
    inst_path = tmp_path / "inst.json"
    run(capsys, "generate", "--config", config, "--out", str(inst_path))
    data = json.loads(inst_path.read_text())
    # designated drivers whose window has already closed cannot serve anyone
    for d in data["designated_drivers"]:
        d["earliest_departure"], d["latest_arrival"] = 0, 1
    data["personal_drivers"] = []
    inst_path.write_text(json.dumps(data))
    rc, _, err = run(capsys, "solve", "--instance", str(inst_path))
    assert rc == 2 and "infeasible" in err
