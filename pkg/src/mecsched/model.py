"""Workflow DAG, server fleet and scheduler configuration types.

Tasks are identified by small integers; wherever a dense index is needed
(numpy arrays, kernels) tasks are ordered by ascending id.
"""
from __future__ import annotations

import heapq
import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

# Absolute tolerance used when comparing accumulated path lengths.
PATH_TOL = 1e-9


class CycleError(ValueError):
    """Raised when a workflow graph contains a directed cycle."""

    def __init__(self, member: int):
        super().__init__(f"workflow contains a cycle through task {member}")
        self.member = member


@dataclass(frozen=True)
class Task:
    id: int
    demand: tuple[float, ...]
    send_time: float = 0.0


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    weight: float


@dataclass(frozen=True)
class WorkflowDag:
    tasks: tuple[Task, ...]
    edges: tuple[Edge, ...]
    resources: tuple[str, ...] = ("cpu", "mem")

    @classmethod
    def build(
        cls,
        tasks: Iterable[Task],
        edges: Iterable[Edge],
        resources: Sequence[str] = ("cpu", "mem"),
    ) -> "WorkflowDag":
        tasks = tuple(sorted(tasks, key=lambda t: t.id))
        edges = tuple(sorted(edges, key=lambda e: (e.src, e.dst)))
        return cls(tasks, edges, tuple(resources))

    @property
    def n_tasks(self) -> int:
        return len(self.tasks)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_resources(self) -> int:
        return len(self.resources)

    @cached_property
    def task_ids(self) -> tuple[int, ...]:
        return tuple(t.id for t in self.tasks)

    @cached_property
    def index(self) -> dict[int, int]:
        return {tid: i for i, tid in enumerate(self.task_ids)}

    @cached_property
    def task_by_id(self) -> dict[int, Task]:
        return {t.id: t for t in self.tasks}

    @cached_property
    def successors(self) -> dict[int, list[tuple[int, float]]]:
        out: dict[int, list[tuple[int, float]]] = {tid: [] for tid in self.task_ids}
        for e in self.edges:
            out.setdefault(e.src, []).append((e.dst, e.weight))
        return out

    @cached_property
    def predecessors(self) -> dict[int, list[tuple[int, float]]]:
        out: dict[int, list[tuple[int, float]]] = {tid: [] for tid in self.task_ids}
        for e in self.edges:
            out.setdefault(e.dst, []).append((e.src, e.weight))
        return out

    @cached_property
    def neighbor_weights(self) -> dict[int, dict[int, float]]:
        """Undirected view: task -> {neighbor: summed weight of edges either way}."""
        nbrs: dict[int, dict[int, float]] = {tid: {} for tid in self.task_ids}
        for e in self.edges:
            nbrs[e.src][e.dst] = nbrs[e.src].get(e.dst, 0.0) + e.weight
            nbrs[e.dst][e.src] = nbrs[e.dst].get(e.src, 0.0) + e.weight
        return nbrs

    def incident_weight(self, tid: int) -> float:
        return sum(self.neighbor_weights[tid].values())

    def demand_matrix(self) -> np.ndarray:
        """T x R array of task demands, rows in ascending id order."""
        if not self.tasks:
            return np.zeros((0, self.n_resources))
        return np.array([t.demand for t in self.tasks], dtype=np.float64)

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Edge endpoints as dense task indices plus weights."""
        idx = self.index
        src = np.array([idx[e.src] for e in self.edges], dtype=np.int64)
        dst = np.array([idx[e.dst] for e in self.edges], dtype=np.int64)
        w = np.array([e.weight for e in self.edges], dtype=np.float64)
        return src, dst, w


@dataclass(frozen=True)
class Server:
    id: int
    capacity: tuple[float, ...]


@dataclass(frozen=True)
class ServerFleet:
    servers: tuple[Server, ...]
    resource_names: tuple[str, ...] = ("cpu", "mem")

    @property
    def n_servers(self) -> int:
        return len(self.servers)

    @cached_property
    def position(self) -> dict[int, int]:
        return {s.id: i for i, s in enumerate(self.servers)}

    def capacity_matrix(self) -> np.ndarray:
        return np.array([s.capacity for s in self.servers], dtype=np.float64)


@dataclass(frozen=True)
class SchedulerConfig:
    """Weights and knobs shared by the partitioning and placement stages.

    ``cut_counting`` selects whether a cross-set edge contributes to the cut
    once per incident set ("double", the literal sum over sets) or once in
    total ("single"). ``balance_scale`` sets the reference set weight used by
    the convex balance cost: "tasks" uses T / C (unit-weight vertices), while
    "demand" uses total demand / C. ``edge_scale`` normalizes the cut by the
    edge count or by the total edge weight. ``resource_mode`` either
    aggregates a set's demand over resource types into one scalar or applies
    the cost per type.

    The defaults are the literal unit-weight forms. Workloads whose demands
    are small fractions and whose edges carry real weights are better served
    by ``balance_scale="demand", edge_scale="weight"``, where both terms of
    the objective are measured in the units of the data.
    """

    mu_c: float = 0.5
    mu_b: float = 0.5
    theta: float = 1.5
    container_count: int = 2
    seed: int = 0
    cut_counting: str = "double"
    balance_scale: str = "tasks"
    edge_scale: str = "count"
    resource_mode: str = "aggregate"
    assign_order: str = "id"
    comm_normalization: str = "edges"

    def __post_init__(self):
        if not 0.0 <= self.mu_c <= 1.0:
            raise ValueError(f"mu_c must lie in [0, 1], got {self.mu_c}")
        if not 0.0 <= self.mu_b <= 1.0:
            raise ValueError(f"mu_b must lie in [0, 1], got {self.mu_b}")
        if self.theta < 1.0:
            raise ValueError(f"theta must be >= 1, got {self.theta}")
        if self.container_count < 1:
            raise ValueError(f"container_count must be >= 1, got {self.container_count}")
        _check_choice("cut_counting", self.cut_counting, ("double", "single"))
        _check_choice("balance_scale", self.balance_scale, ("demand", "tasks"))
        _check_choice("edge_scale", self.edge_scale, ("weight", "count"))
        _check_choice("resource_mode", self.resource_mode, ("aggregate", "per_resource"))
        _check_choice("assign_order", self.assign_order, ("id", "topological"))
        _check_choice("comm_normalization", self.comm_normalization, ("edges", "send_time"))


def _check_choice(name, value, allowed):
    if value not in allowed:
        raise ValueError(f"{name} must be one of {allowed}, got {value!r}")


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate(dag: WorkflowDag, fleet: ServerFleet | None = None) -> ValidationReport:
    """Check every model invariant; violations are returned, never raised."""
    report = ValidationReport()
    add = report.violations.append
    R = dag.n_resources

    seen: set[int] = set()
    for t in dag.tasks:
        if t.id in seen:
            add(f"duplicate task id {t.id}")
        seen.add(t.id)
        if len(t.demand) != R:
            add(f"task {t.id}: demand has {len(t.demand)} components, expected {R}")
        for k, v in enumerate(t.demand):
            if not (v >= 0.0):
                add(f"task {t.id}: negative demand {v} for resource {k}")
            elif v > 1.0:
                add(f"task {t.id}: demand {v} for resource {k} exceeds 1")
        if not (t.send_time >= 0.0):
            add(f"task {t.id}: negative send_time {t.send_time}")

    pairs: set[tuple[int, int]] = set()
    for e in dag.edges:
        if e.src == e.dst:
            add(f"self-loop on task {e.src} (cycle)")
        if e.src not in seen or e.dst not in seen:
            add(f"dangling edge {e.src}->{e.dst}")
        if (e.src, e.dst) in pairs:
            add(f"duplicate edge {e.src}->{e.dst}")
        pairs.add((e.src, e.dst))
        if not (e.weight >= 0.0):
            add(f"edge {e.src}->{e.dst}: negative weight {e.weight}")

    structural = ("dangling", "self-loop", "duplicate task")
    if not any(word in v for v in report.violations for word in structural):
        try:
            topological_order(dag)
        except CycleError as exc:
            add(f"cycle detected through task {exc.member}")

    if fleet is not None:
        if len(fleet.resource_names) != R:
            add(f"resource count mismatch: workflow has {R}, fleet has {len(fleet.resource_names)}")
        ids: set[int] = set()
        for s in fleet.servers:
            if s.id in ids:
                add(f"duplicate server id {s.id}")
            ids.add(s.id)
            if len(s.capacity) != len(fleet.resource_names):
                add(f"server {s.id}: capacity has {len(s.capacity)} components")
            if any(not (c > 0.0) for c in s.capacity):
                add(f"server {s.id}: non-positive capacity {s.capacity}")
    return report


def topological_order(dag: WorkflowDag) -> list[int]:
    """Kahn's algorithm with a min-heap, so ties resolve to the smallest id."""
    indeg = {tid: 0 for tid in dag.task_ids}
    for e in dag.edges:
        indeg[e.dst] += 1
    heap = [tid for tid, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        tid = heapq.heappop(heap)
        order.append(tid)
        for nxt, _ in dag.successors[tid]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                heapq.heappush(heap, nxt)
    if len(order) != dag.n_tasks:
        member = min(tid for tid, d in indeg.items() if d > 0)
        raise CycleError(member)
    return order


@dataclass(frozen=True)
class CriticalPath:
    edges: frozenset[tuple[int, int]]
    tasks: frozenset[int]
    length: float
    earliest: dict[int, float]
    latest: dict[int, float]


def critical_path(dag: WorkflowDag) -> CriticalPath:
    """Maximum-weight path structure from a forward and a backward pass.

    ``earliest[v]`` is the heaviest path weight ending at v; ``latest[v]`` is
    the latest value v may take without lengthening the global maximum. An
    edge is critical when it has zero slack. Components whose longest path is
    shorter than the global one carry slack everywhere and so contribute
    nothing.
    """
    order = topological_order(dag)
    earliest = {tid: 0.0 for tid in order}
    for tid in order:
        for nxt, w in dag.successors[tid]:
            if earliest[tid] + w > earliest[nxt]:
                earliest[nxt] = earliest[tid] + w
    length = max(earliest.values(), default=0.0)

    latest = {tid: length for tid in order}
    for tid in reversed(order):
        for nxt, w in dag.successors[tid]:
            if latest[nxt] - w < latest[tid]:
                latest[tid] = latest[nxt] - w

    tol = PATH_TOL * max(1.0, length)
    crit_edges = set()
    for e in dag.edges:
        slack = latest[e.dst] - e.weight - earliest[e.src]
        if abs(slack) <= tol:
            crit_edges.add((e.src, e.dst))
    crit_tasks = {v for pair in crit_edges for v in pair}
    return CriticalPath(frozenset(crit_edges), frozenset(crit_tasks), length, earliest, latest)


def total_edge_weight(dag: WorkflowDag) -> float:
    return math.fsum(e.weight for e in dag.edges)


def total_send_time(dag: WorkflowDag) -> float:
    return math.fsum(t.send_time for t in dag.tasks)


def weakly_connected_components(dag: WorkflowDag) -> list[list[int]]:
    parent = {tid: tid for tid in dag.task_ids}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in dag.edges:
        a, b = find(e.src), find(e.dst)
        if a != b:
            parent[max(a, b)] = min(a, b)
    groups = defaultdict(list)
    for tid in dag.task_ids:
        groups[find(tid)].append(tid)
    return [groups[k] for k in sorted(groups)]
