"""Partition -> place -> evaluate, with per-stage wall-clock timing."""
from __future__ import annotations

import time
from dataclasses import dataclass, replace

from .baselines import kmeans_partition, spread_place
from .metrics import ScheduleMetrics, evaluate
from .model import SchedulerConfig, ServerFleet, WorkflowDag
from .partition import Partition, partition_tasks
from .placement import PlacementInfeasible, PlacementMap, containers_from_partition, dp_place, ffd_place

PARTITIONERS = ("ncpi", "ri", "kmeans")
PLACERS = ("dp", "ffd", "spread")
RANDOMIZED = frozenset({"ri", "kmeans"})


def partition(dag: WorkflowDag, cfg: SchedulerConfig, algo: str) -> Partition:
    algo = algo.lower()
    if algo in ("ncpi", "ri"):
        return partition_tasks(dag, cfg, algo)
    if algo == "kmeans":
        return kmeans_partition(dag, cfg)
    raise ValueError(f"unknown partitioning algorithm {algo!r}; expected one of {PARTITIONERS}")


def place(p: Partition, dag: WorkflowDag, fleet: ServerFleet, algo: str) -> PlacementMap:
    containers = containers_from_partition(p, dag)
    algo = algo.lower()
    if algo == "dp":
        return dp_place(containers, fleet)
    if algo == "ffd":
        return ffd_place(containers, fleet)
    if algo == "spread":
        return spread_place(containers, fleet)
    raise ValueError(f"unknown placement algorithm {algo!r}; expected one of {PLACERS}")


@dataclass(frozen=True)
class PipelineResult:
    partition: Partition
    placement: PlacementMap | None
    metrics: ScheduleMetrics | None
    partition_ms: float
    place_ms: float
    status: str

    @property
    def runtime_ms(self) -> float:
        return self.partition_ms + self.place_ms


def run_pipeline(
    dag: WorkflowDag,
    fleet: ServerFleet,
    cfg: SchedulerConfig,
    partitioner: str,
    placer: str,
    partition_result: tuple[Partition, float] | None = None,
) -> PipelineResult:
    """Run one pipeline; an infeasible placement yields status "infeasible", not an error."""
    if partition_result is None:
        t0 = time.perf_counter()
        p = partition(dag, cfg, partitioner)
        part_ms = (time.perf_counter() - t0) * 1e3
    else:
        p, part_ms = partition_result
    t0 = time.perf_counter()
    try:
        m = place(p, dag, fleet, placer)
    except PlacementInfeasible:
        return PipelineResult(p, None, None, part_ms, (time.perf_counter() - t0) * 1e3, "infeasible")
    place_ms = (time.perf_counter() - t0) * 1e3
    return PipelineResult(p, m, evaluate(p, m, dag, fleet, cfg), part_ms, place_ms, "ok")


def with_seed(cfg: SchedulerConfig, seed: int) -> SchedulerConfig:
    return replace(cfg, seed=seed)
