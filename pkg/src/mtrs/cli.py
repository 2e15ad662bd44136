"""Command line entry point: generate, match, solve, bench, export-lp, cluster."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional

from .clustering import ClusterConfig, cluster_instance, solve_clustered
from .errors import CardinalityMismatch, ConfigError, GenerationExhausted, Infeasible, MTRSError
from .feasibility import enumerate_hypergraph
from .generate import GenConfig, gen_interval_instance, gen_road_network
from .hypergraph import Hypergraph
from .metrics import aggregate, report_for, to_csv, to_json
from .model import Instance, Problem, validate_instance
from .solvers.lp import export_lp
from .solvers.pipeline import ALGOS, solve_instance

EXIT_OK, EXIT_INFEASIBLE, EXIT_CONFIG, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("mtrs")


class _IOFailure(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise _IOFailure(f"cannot read {path}: {exc}") from exc


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise _IOFailure(f"cannot write {path}: {exc}") from exc


def load_config(args) -> tuple[GenConfig, ClusterConfig]:
    """Config file sections ``generate`` and ``cluster``; flags win over file values."""
    data = {}
    if args.config:
        try:
            data = json.loads(_read(args.config))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: {exc}") from exc
        if not isinstance(data, dict) or set(data) - {"generate", "cluster"}:
            raise ConfigError("config must be an object with 'generate' and/or 'cluster' sections")
    gen = dict(data.get("generate", {}))
    if getattr(args, "seed", None) is not None:
        gen["seed"] = args.seed
    if getattr(args, "riders", None) is not None:
        gen["riders"] = args.riders
    return GenConfig.from_dict(gen), ClusterConfig.from_dict(dict(data.get("cluster", {})))


def _instance(args, gen: GenConfig) -> Instance:
    if getattr(args, "instance", None):
        try:
            inst = Instance.from_json(_read(args.instance))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{args.instance}: malformed instance ({exc})") from exc
        problems = validate_instance(inst)
        if problems:
            raise ConfigError(f"{args.instance}: " + "; ".join(problems[:5]))
        return inst
    return gen_interval_instance(gen, args.interval * gen.interval_length)


def _run(inst: Instance, args, ccfg: ClusterConfig, checker=None):
    if args.cluster:
        return solve_clustered(inst, ccfg, args.problem, args.algo, args.time_limit, checker=checker)
    return solve_instance(inst, args.problem, args.algo, args.time_limit, checker=checker)


def _emit_reports(args, reports) -> None:
    text = to_json(reports) if args.format == "json" else to_csv(reports)
    _write(args.out, text)


# ---- subcommands ------------------------------------------------------------

def cmd_generate(args) -> int:
    gen, _ = load_config(args)
    inst = gen_interval_instance(gen, args.interval * gen.interval_length)
    _write(args.out, inst.to_json())
    return EXIT_OK


def cmd_match(args) -> int:
    gen, _ = load_config(args)
    inst = _instance(args, gen)
    H = enumerate_hypergraph(inst, args.problem)
    _write(args.out, H.to_json())
    return EXIT_OK


def cmd_solve(args) -> int:
    gen, ccfg = load_config(args)
    inst = _instance(args, gen)
    result = _run(inst, args, ccfg)
    report = report_for(inst, result, args.interval, args.cluster, timing=not args.no_timing)
    if args.solution:
        _write(args.solution, result.solution.to_json(result.hypergraph))
    _emit_reports(args, [report])
    return EXIT_OK


def cmd_bench(args) -> int:
    gen, ccfg = load_config(args)
    net = gen_road_network(gen)
    reports = []
    for k in range(args.intervals):
        inst = gen_interval_instance(gen, k * gen.interval_length, net=net)
        result = _run(inst, args, ccfg)
        reports.append(report_for(inst, result, k, args.cluster, timing=not args.no_timing))
        log.info("interval %d: objective %s", k, result.solution.objective)
    reports.append(aggregate(reports))
    _emit_reports(args, reports)
    return EXIT_OK


def cmd_export_lp(args) -> int:
    if args.hypergraph:
        try:
            H = Hypergraph.from_json(_read(args.hypergraph))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{args.hypergraph}: malformed hypergraph ({exc})") from exc
    else:
        gen, _ = load_config(args)
        H = enumerate_hypergraph(_instance(args, gen), args.problem)
    _write(args.out, export_lp(H, args.problem))
    return EXIT_OK


def cmd_cluster(args) -> int:
    gen, ccfg = load_config(args)
    inst = _instance(args, gen)
    _write(args.out, cluster_instance(inst, ccfg).to_json() + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mtrs", description="Match ridesharing drivers to transit riders.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, instance=True, solve=False):
        sp.add_argument("--config", help="JSON file with 'generate' and 'cluster' sections")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--riders", type=int, help="riders per generated interval")
        sp.add_argument("--out", help="output path (default stdout)")
        sp.add_argument("--problem", choices=[p.value for p in Problem], default="mindist")
        if instance:
            sp.add_argument("--instance", help="instance JSON instead of generating one")
            sp.add_argument("--interval", type=int, default=0, help="index of the generated interval")
        if solve:
            sp.add_argument("--algo", choices=ALGOS, default="exact")
            sp.add_argument("--cluster", action="store_true", help="solve cluster by cluster")
            sp.add_argument("--time-limit", type=float, dest="time_limit")
            sp.add_argument("--format", choices=("csv", "json"), default="csv")
            sp.add_argument("--no-timing", action="store_true",
                            help="write 0 in the timing columns so reports are reproducible")

    sp = sub.add_parser("generate", help="write a generated interval instance")
    common(sp, instance=False)
    sp.add_argument("--interval", type=int, default=0)
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("match", help="enumerate feasible matches into a hypergraph")
    common(sp)
    sp.set_defaults(func=cmd_match)

    sp = sub.add_parser("solve", help="solve one interval and report")
    common(sp, solve=True)
    sp.add_argument("--solution", help="also write the chosen edges here")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("bench", help="solve consecutive intervals and report each plus totals")
    common(sp, instance=False, solve=True)
    sp.add_argument("--intervals", type=int, default=1)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("export-lp", help="write the integer program in LP format")
    common(sp)
    sp.add_argument("--hypergraph", help="hypergraph JSON instead of an instance")
    sp.set_defaults(func=cmd_export_lp)

    sp = sub.add_parser("cluster", help="write the cluster partition as JSON")
    common(sp)
    sp.set_defaults(func=cmd_cluster)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if getattr(args, "algo", None) == "ls" and args.problem != "minnum":
        print("error: --algo ls needs --problem minnum", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except Infeasible as exc:
        where = f" (cluster {exc.cluster_id})" if exc.cluster_id is not None else ""
        print(f"infeasible{where}: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, CardinalityMismatch, GenerationExhausted) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _IOFailure as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except MTRSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
