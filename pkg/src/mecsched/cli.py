"""Command-line interface.

Every subcommand reads and writes the JSON documents of ``documents``. On
failure a single JSON object ``{"error": ..., "message": ...}`` is written to
stderr and the exit status is nonzero (2 for usage errors, 1 otherwise).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import documents as docs
from .bench import SuiteConfig, generate_workflow, run_suite, write_suite
from .metrics import evaluate
from .model import SchedulerConfig
from .oracle import brute_force_joint, brute_force_partition
from .pipeline import PARTITIONERS, PLACERS, partition, place

SEED_ENV = "MECSCHED_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _emit(doc, out: str | None) -> None:
    if out:
        docs.write_json(doc, out)
    else:
        sys.stdout.write(docs.dumps(doc))


def _config(args, containers: int) -> SchedulerConfig:
    return SchedulerConfig(
        mu_c=args.mu_c,
        mu_b=args.mu_b,
        theta=args.theta,
        container_count=containers,
        seed=args.seed if args.seed is not None else default_seed(),
        cut_counting=args.cut_counting,
        balance_scale=args.balance_scale,
        edge_scale=args.edge_scale,
        resource_mode=args.resource_mode,
        assign_order=args.assign_order,
        comm_normalization=args.comm_normalization,
    )


def _add_objective_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mu-c", type=float, default=0.5)
    p.add_argument("--mu-b", type=float, default=0.5)
    p.add_argument("--theta", type=float, default=1.5)
    p.add_argument("--seed", type=int, default=None, help=f"defaults to ${SEED_ENV} or 0")
    p.add_argument("--cut-counting", choices=("double", "single"), default="double")
    p.add_argument("--balance-scale", choices=("tasks", "demand"), default="tasks")
    p.add_argument("--edge-scale", choices=("count", "weight"), default="count")
    p.add_argument("--resource-mode", choices=("aggregate", "per_resource"), default="aggregate")
    p.add_argument("--assign-order", choices=("id", "topological"), default="id")
    p.add_argument("--comm-normalization", choices=("edges", "send_time"), default="edges")


def cmd_generate(args) -> None:
    seed = args.seed if args.seed is not None else default_seed()
    dag = generate_workflow(args.size, args.density, seed, demand_max=args.demand_max, weight_max=args.weight_max)
    _emit(docs.workflow_to_doc(dag), args.out)


def cmd_partition(args) -> None:
    dag = docs.load_workflow(args.workflow)
    cfg = _config(args, args.containers)
    p = partition(dag, cfg, args.algo)
    _emit(docs.partition_to_doc(p, dag), args.out)


def cmd_place(args) -> None:
    dag = docs.load_workflow(args.workflow)
    fleet = docs.load_fleet(args.fleet)
    p = docs.partition_from_doc(docs.read_json(args.partition))
    m = place(p, dag, fleet, args.algo)
    _emit(docs.placement_to_doc(m, fleet), args.out)


def cmd_evaluate(args) -> None:
    dag = docs.load_workflow(args.workflow)
    fleet = docs.load_fleet(args.fleet)
    p = docs.partition_from_doc(docs.read_json(args.partition))
    m = docs.placement_from_doc(docs.read_json(args.placement), fleet)
    cfg = _config(args, p.n_sets)
    metrics = evaluate(p, m, dag, fleet, cfg)
    _emit(
        {
            "comm_overhead": metrics.comm_overhead,
            "b_tot": metrics.balance_total,
            "per_server_balance": list(metrics.per_server_balance),
            "lambda": metrics.normalized_max_load,
            "lambda_cpu": metrics.cpu_util,
            "lambda_mem": metrics.mem_util,
            "n_servers": metrics.occupied_servers,
            "joint_objective": metrics.joint_objective,
        },
        args.out,
    )


def cmd_oracle(args) -> None:
    dag = docs.load_workflow(args.workflow)
    cfg = _config(args, args.containers)
    if args.mode == "partition":
        p, value = brute_force_partition(dag, cfg)
        doc = {"mode": "partition", "value": value, "partition": docs.partition_to_doc(p, dag)}
    else:
        fleet = docs.load_fleet(args.fleet)
        p, m, value = brute_force_joint(dag, fleet, cfg)
        doc = {
            "mode": "joint",
            "value": value,
            "partition": docs.partition_to_doc(p, dag),
            "placement": docs.placement_to_doc(m, fleet),
        }
    _emit(doc, args.out)


def cmd_bench(args) -> None:
    suite = SuiteConfig.from_dict(docs.read_json(args.suite)) if args.suite else SuiteConfig()
    if args.seeds is not None:
        suite.seeds = args.seeds
    fleet = docs.load_fleet(args.fleet)
    result = run_suite(suite, fleet, jobs=args.jobs)
    written = write_suite(result, args.out, args.fig_dir)
    sys.stdout.write(json.dumps({"rows": len(result.rows), "written": [str(p) for p in written]}) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mecsched", description="Workflow containerization and placement toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a random workflow document")
    g.add_argument("--size", type=int, required=True)
    g.add_argument("--density", type=float, required=True)
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--demand-max", type=float, default=0.05)
    g.add_argument("--weight-max", type=float, default=5.0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    p = sub.add_parser("partition", help="group a workflow's tasks into containers")
    p.add_argument("--workflow", required=True)
    p.add_argument("--algo", choices=PARTITIONERS, default="ncpi")
    p.add_argument("--containers", type=int, required=True)
    _add_objective_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_partition)

    pl = sub.add_parser("place", help="assign containers to servers")
    pl.add_argument("--workflow", required=True)
    pl.add_argument("--partition", required=True)
    pl.add_argument("--algo", choices=PLACERS, default="dp")
    pl.add_argument("--fleet", default="default", help='fleet document, or "default" for the bundled fleet')
    pl.add_argument("--out")
    pl.set_defaults(func=cmd_place)

    e = sub.add_parser("evaluate", help="compute the metrics of a partition and placement")
    e.add_argument("--workflow", required=True)
    e.add_argument("--partition", required=True)
    e.add_argument("--placement", required=True)
    e.add_argument("--fleet", default="default")
    _add_objective_args(e)
    e.add_argument("--out")
    e.set_defaults(func=cmd_evaluate)

    o = sub.add_parser("oracle", help="exact solution of a small instance by enumeration")
    o.add_argument("--mode", choices=("partition", "joint"), required=True)
    o.add_argument("--workflow", required=True)
    o.add_argument("--containers", type=int, required=True)
    o.add_argument("--fleet", default="default")
    _add_objective_args(o)
    o.add_argument("--out")
    o.set_defaults(func=cmd_oracle)

    b = sub.add_parser("bench", help="run the comparison suite and write CSV tables")
    b.add_argument("--suite", help="suite config JSON; defaults to the built-in suite")
    b.add_argument("--out", required=True, help="CSV path for the seed-averaged rows")
    b.add_argument("--fig-dir", help="directory for per-figure CSV tables")
    b.add_argument("--fleet", default="default")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--seeds", type=int, default=None)
    b.set_defaults(func=cmd_bench)
    return parser


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
    except UsageError as exc:
        return _fail("usage", str(exc), 2)
    except FileNotFoundError as exc:
        return _fail("FileNotFoundError", f"{exc.filename}: no such file", 1)
    except Exception as exc:  # every other failure becomes one JSON line
        return _fail(type(exc).__name__, str(exc), 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
