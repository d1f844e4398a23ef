"""Synthetic workflows and the seed-averaged comparison suite."""
from __future__ import annotations

import csv
import io
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .documents import workflow_digest
from .model import Edge, SchedulerConfig, ServerFleet, Task, WorkflowDag
from .pipeline import PARTITIONERS, PLACERS, RANDOMIZED, partition, run_pipeline, with_seed

SUITE_SIZES = (5, 9, 17, 24, 30, 47, 57, 63, 91, 93)

CSV_COLUMNS = (
    "workflow_id", "T", "C", "S", "algo_partition", "algo_place",
    "comm_overhead", "b_tot", "lambda", "lambda_cpu", "lambda_mem",
    "n_servers", "joint_objective", "runtime_ms", "seed", "status",
)
METRIC_COLUMNS = (
    "comm_overhead", "b_tot", "lambda", "lambda_cpu", "lambda_mem",
    "n_servers", "joint_objective", "runtime_ms",
)


def generate_workflow(
    size: int,
    density: float,
    seed: int,
    demand_max: float = 0.05,
    weight_max: float = 5.0,
    resources: Sequence[str] = ("cpu", "mem"),
) -> WorkflowDag:
    """Random forward DAG on tasks 1..size, made weakly connected.

    Every pair i < j becomes an edge i -> j with probability ``density``.
    Weights are uniform on (0, weight_max], demands uniform on
    (0, demand_max] per resource. Wherever task j is not yet connected to
    task j-1 an edge j-1 -> j is added. A task's send time is the total
    weight of its outgoing edges.
    """
    if size < 1:
        raise ValueError("workflow size must be >= 1")
    if not 0.0 <= density <= 1.0:
        raise ValueError(f"density must lie in [0, 1], got {density}")
    rng = np.random.default_rng(seed)
    pairs = [(i, j) for i in range(1, size + 1) for j in range(i + 1, size + 1)]
    coins = rng.random(len(pairs))
    chosen = [pr for pr, c in zip(pairs, coins) if c < density]
    weights = weight_max * (1.0 - rng.random(len(chosen)))
    demands = demand_max * (1.0 - rng.random((size, len(resources))))

    edges = {pr: float(w) for pr, w in zip(chosen, weights)}
    parent = list(range(size + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        parent[find(b)] = find(a)
    for j in range(2, size + 1):
        if find(j) != find(j - 1):
            edges[(j - 1, j)] = float(weight_max * (1.0 - rng.random()))
            parent[find(j)] = find(j - 1)

    send = [0.0] * (size + 1)
    for (a, _), w in sorted(edges.items()):
        send[a] += w
    tasks = [Task(i, tuple(float(x) for x in demands[i - 1]), send[i]) for i in range(1, size + 1)]
    return WorkflowDag.build(tasks, [Edge(a, b, w) for (a, b), w in edges.items()], resources)


def auto_density(size: int) -> float:
    # about 1.5 edges per task
    return min(1.0, 3.0 / max(size - 1, 1))


def auto_containers(size: int, tasks_per_container: int = 10) -> int:
    return min(size, max(2, math.ceil(size / tasks_per_container)))


@dataclass
class SuiteConfig:
    """Harness settings for the comparison suite.

    ``density=None`` switches to ``auto_density`` (about 1.5 edges per task).
    Per-task demand bounds are scaled per workflow so that an average
    container asks for roughly ``demand_per_container`` of each resource,
    which keeps the whole application well inside the bundled fleet. The
    partitioner runs with the demand- and weight-based normalization and a
    per-resource balance cost; set the three fields below to "tasks",
    "count" and "aggregate" for the literal unit-weight forms.
    """

    sizes: list[int] = field(default_factory=lambda: list(SUITE_SIZES))
    density: float | None = 0.1
    seeds: int = 10
    seed_base: int = 0
    workflow_seed: int = 2023
    partitioners: list[str] = field(default_factory=lambda: list(PARTITIONERS))
    placers: list[str] = field(default_factory=lambda: list(PLACERS))
    containers: int | str = "auto"
    tasks_per_container: int = 10
    demand_per_container: float = 0.03
    mu_c: float = 0.5
    mu_b: float = 0.5
    theta: float = 1.5
    balance_scale: str = "demand"
    edge_scale: str = "weight"
    cut_counting: str = "double"
    resource_mode: str = "per_resource"
    assign_order: str = "id"

    @classmethod
    def from_dict(cls, doc: dict) -> "SuiteConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown suite config keys: {sorted(unknown)}")
        cfg = cls(**doc)
        for algo in cfg.partitioners:
            if algo not in PARTITIONERS:
                raise ValueError(f"unknown partitioner {algo!r}")
        for algo in cfg.placers:
            if algo not in PLACERS:
                raise ValueError(f"unknown placer {algo!r}")
        return cfg

    def container_count(self, size: int) -> int:
        if self.containers == "auto":
            return auto_containers(size, self.tasks_per_container)
        return int(self.containers)

    def demand_max(self, size: int) -> float:
        # keep expected per-container demand near demand_per_container
        return min(0.05, 2.0 * self.demand_per_container * self.container_count(size) / size)

    def workflows(self) -> list[WorkflowDag]:
        out = []
        for i, size in enumerate(self.sizes):
            dens = self.density if self.density is not None else auto_density(size)
            out.append(generate_workflow(size, dens, self.workflow_seed + i, demand_max=self.demand_max(size)))
        return out

    def scheduler_config(self, size: int, seed: int) -> SchedulerConfig:
        return SchedulerConfig(
            mu_c=self.mu_c, mu_b=self.mu_b, theta=self.theta,
            container_count=self.container_count(size), seed=seed,
            balance_scale=self.balance_scale, edge_scale=self.edge_scale, cut_counting=self.cut_counting,
            resource_mode=self.resource_mode, assign_order=self.assign_order,
        )


def _unit(args):
    """Partition once, then run every placer on that partition."""
    dag, fleet, cfg, algo, placers = args
    import time

    t0 = time.perf_counter()
    p = partition(dag, cfg, algo)
    part_ms = (time.perf_counter() - t0) * 1e3
    return [run_pipeline(dag, fleet, cfg, algo, pl, (p, part_ms)) for pl in placers]


def _row(wid, dag, fleet, cfg, algo, placer, seed, res) -> dict:
    row = {
        "workflow_id": wid, "T": dag.n_tasks, "C": cfg.container_count, "S": fleet.n_servers,
        "algo_partition": algo, "algo_place": placer, "seed": seed, "status": res.status,
        "runtime_ms": res.runtime_ms,
    }
    m = res.metrics
    if m is None:
        for col in METRIC_COLUMNS:
            row.setdefault(col, float("nan"))
    else:
        row.update(
            comm_overhead=m.comm_overhead, b_tot=m.balance_total, **{"lambda": m.normalized_max_load},
            lambda_cpu=m.cpu_util, lambda_mem=m.mem_util, n_servers=m.occupied_servers,
            joint_objective=m.joint_objective,
        )
    return row


@dataclass
class SuiteResult:
    rows: list[dict]
    raw_rows: list[dict]
    config: SuiteConfig


def run_suite(suite: SuiteConfig, fleet: ServerFleet, jobs: int = 1) -> SuiteResult:
    dags = suite.workflows()
    units, keys = [], []
    for wi, dag in enumerate(dags):
        for algo in suite.partitioners:
            seeds = range(suite.seed_base, suite.seed_base + suite.seeds) if algo in RANDOMIZED else [suite.seed_base]
            for seed in seeds:
                cfg = suite.scheduler_config(dag.n_tasks, seed)
                units.append((dag, fleet, cfg, algo, list(suite.placers)))
                keys.append((wi, algo, seed))
    if jobs > 1 and len(units) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_unit, units))
    else:
        results = [_unit(u) for u in units]

    ids = [f"w{dag.n_tasks}-{workflow_digest(dag)}" for dag in dags]
    raw = []
    for (wi, algo, seed), unit, res_list in zip(keys, units, results):
        for placer, res in zip(suite.placers, res_list):
            raw.append(_row(ids[wi], dags[wi], fleet, unit[2], algo, placer, seed, res))

    rows = []
    for wi, dag in enumerate(dags):
        for algo in suite.partitioners:
            for placer in suite.placers:
                group = [r for r in raw if r["workflow_id"] == ids[wi] and r["algo_partition"] == algo and r["algo_place"] == placer]
                rows.append(_average(group, algo, suite))
    return SuiteResult(rows, raw, suite)


def _average(group: list[dict], algo: str, suite: SuiteConfig) -> dict:
    if len(group) == 1:
        return dict(group[0])
    row = dict(group[0])
    ok = [r for r in group if r["status"] == "ok"]
    for col in METRIC_COLUMNS:
        vals = [r[col] for r in ok]
        row[col] = statistics.fmean(vals) if vals else float("nan")
    row["seed"] = f"{suite.seed_base}-{suite.seed_base + suite.seeds - 1}"
    if len(ok) == len(group):
        row["status"] = "ok"
    elif ok:
        row["status"] = f"partial:{len(ok)}/{len(group)}"
    else:
        row["status"] = "infeasible"
    return row


def _fmt(v):
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return v


def rows_to_csv(rows: Iterable[dict], columns: Sequence[str] = CSV_COLUMNS) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


FIGURES = {
    "fig3_lambda.csv": "lambda",
    "fig4_cpu.csv": "lambda_cpu",
    "fig5_mem.csv": "lambda_mem",
    "fig6_balance.csv": "b_tot",
    "fig7_runtime.csv": "runtime_ms",
    "fig8_comm.csv": "comm_overhead",
}


def figure_tables(rows: list[dict]) -> dict[str, str]:
    """Wide per-figure tables: one line per workflow, one column per scheme."""
    out = {}
    wids = list(dict.fromkeys(r["workflow_id"] for r in rows))
    for name, metric in FIGURES.items():
        if metric == "lambda":
            schemes = list(dict.fromkeys(r["algo_partition"] for r in rows))
            key = lambda r: r["algo_partition"]
        else:
            schemes = list(dict.fromkeys(f"{r['algo_partition']}-{r['algo_place']}" for r in rows))
            key = lambda r: f"{r['algo_partition']}-{r['algo_place']}"
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["workflow_id", "T", *schemes])
        for wid in wids:
            sub = [r for r in rows if r["workflow_id"] == wid]
            by = {}
            for r in sub:
                by.setdefault(key(r), r[metric])
            w.writerow([wid, sub[0]["T"], *(_fmt(by.get(s, float("nan"))) for s in schemes)])
        out[name] = buf.getvalue()
    return out


def write_suite(result: SuiteResult, out_csv: str | Path, fig_dir: str | Path | None = None) -> list[Path]:
    import json

    out_csv = Path(out_csv)
    out_csv.parent.mkdir(parents=True, exist_ok=True)
    out_csv.write_text(rows_to_csv(result.rows))
    raw_path = out_csv.with_name(out_csv.stem + "_raw.csv")
    raw_path.write_text(rows_to_csv(result.raw_rows))
    meta = {
        "config": asdict(result.config),
        "container_rule": "auto = max(2, ceil(T/10)), capped at T (harness choice; not given by the source model)"
        if result.config.containers == "auto" else "fixed",
        "columns": list(CSV_COLUMNS),
    }
    meta_path = out_csv.with_name(out_csv.stem + "_meta.json")
    meta_path.write_text(json.dumps(meta, indent=2) + "\n")
    written = [out_csv, raw_path, meta_path]
    if fig_dir is not None:
        fig_dir = Path(fig_dir)
        fig_dir.mkdir(parents=True, exist_ok=True)
        for name, text in figure_tables(result.rows).items():
            (fig_dir / name).write_text(text)
            written.append(fig_dir / name)
    return written
