"""Task containerization as weighted graph partitioning.

A partition groups task ids into C disjoint sets, one per container. The
objective trades the weight of edges cut between sets against a convex
(power-law) penalty on each set's resource demand:

    f(P) = mu_c * cut(P) / E  +  mu_b / C * sum_i sum_k (V_ik / (S_k / C)) ** theta

where V_ik is set i's demand on column k, S_k the reference total for
column k (see ``SchedulerConfig.balance_scale``) and E the edge count or
total edge weight (``SchedulerConfig.edge_scale``). The greedy assignment
scores candidate sets on the unnormalized scale (f multiplied by E), which
leaves the argmax unchanged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .model import SchedulerConfig, WorkflowDag, critical_path, topological_order

# Relative tolerance for treating two candidate scores as tied.
SCORE_TIE_TOL = 1e-12


class PartitionError(ValueError):
    pass


@dataclass(frozen=True)
class Partition:
    sets: tuple[tuple[int, ...], ...]
    dag_ref: str = ""

    @classmethod
    def from_sets(cls, sets: Iterable[Iterable[int]], dag_ref: str = "") -> "Partition":
        return cls(tuple(tuple(sorted(s)) for s in sets), dag_ref)

    @classmethod
    def from_labels(cls, labels: Sequence[int], dag: WorkflowDag, n_sets: int) -> "Partition":
        sets: list[list[int]] = [[] for _ in range(n_sets)]
        for tid, lab in zip(dag.task_ids, labels):
            sets[int(lab)].append(tid)
        return cls.from_sets(sets)

    @property
    def n_sets(self) -> int:
        return len(self.sets)

    def assigned(self) -> set[int]:
        return {t for s in self.sets for t in s}

    def label_of(self) -> dict[int, int]:
        return {t: i for i, s in enumerate(self.sets) for t in s}

    def labels(self, dag: WorkflowDag) -> list[int]:
        lab = self.label_of()
        return [lab[t] for t in dag.task_ids]

    def is_complete(self, dag: WorkflowDag) -> bool:
        return self.assigned() == set(dag.task_ids) and all(self.sets)

    def with_task(self, tid: int, target: int) -> "Partition":
        sets = list(self.sets)
        sets[target] = tuple(sorted(sets[target] + (tid,)))
        return Partition(tuple(sets), self.dag_ref)


@dataclass(frozen=True)
class BalanceFunctionParams:
    """g(x) = alpha * x ** theta, one alpha per demand column."""

    alphas: tuple[float, ...]
    theta: float

    def __call__(self, weights: Sequence[float]) -> float:
        return sum(a * x**self.theta for a, x in zip(self.alphas, weights))


@dataclass(frozen=True)
class ScoreBreakdown:
    comm_term: float
    balance_term: float
    total: float


def check_partition(p: Partition, dag: WorkflowDag, complete: bool = True) -> None:
    known = set(dag.task_ids)
    seen: set[int] = set()
    for i, s in enumerate(p.sets):
        for t in s:
            if t not in known:
                raise PartitionError(f"unknown task id {t} in set {i}")
            if t in seen:
                raise PartitionError(f"task {t} appears in more than one set")
            seen.add(t)
    if complete:
        if seen != known:
            missing = sorted(known - seen)
            raise PartitionError(f"partition does not cover tasks {missing}")
        empty = [i for i, s in enumerate(p.sets) if not s]
        if empty:
            raise PartitionError(f"sets {empty} are empty")


def vertex_weight(tasks: Iterable[int], dag: WorkflowDag) -> float:
    """Aggregate demand of a task set summed over every resource type."""
    lookup = dag.task_by_id
    total = 0.0
    for t in tasks:
        if t not in lookup:
            raise PartitionError(f"unknown task id {t}")
        total += sum(lookup[t].demand)
    return total


def _task_columns(dag: WorkflowDag, cfg: SchedulerConfig) -> dict[int, tuple[float, ...]]:
    if cfg.resource_mode == "aggregate":
        return {t.id: (sum(t.demand),) for t in dag.tasks}
    return {t.id: tuple(t.demand) for t in dag.tasks}


def _set_columns(tasks: Iterable[int], cols: dict[int, tuple[float, ...]], width: int) -> list[float]:
    acc = [0.0] * width
    for t in tasks:
        for k, v in enumerate(cols[t]):
            acc[k] += v
    return acc


def balance_scales(dag: WorkflowDag, cfg: SchedulerConfig) -> tuple[float, ...]:
    """Reference totals S_k; a set of weight S_k / C is perfectly balanced."""
    width = 1 if cfg.resource_mode == "aggregate" else dag.n_resources
    if cfg.balance_scale == "tasks":
        return (float(dag.n_tasks),) * width
    cols = _task_columns(dag, cfg)
    totals = _set_columns(dag.task_ids, cols, width)
    return tuple(s if s > 0.0 else 1.0 for s in totals)


def edge_norm(dag: WorkflowDag, cfg: SchedulerConfig) -> float:
    """Cut normalizer: edge count ("count") or total edge weight ("weight")."""
    if cfg.edge_scale == "count":
        norm = float(dag.n_edges)
    else:
        norm = math.fsum(e.weight for e in dag.edges)
    # an edgeless graph would make the normalized objective 0/0
    return norm if norm > 0.0 else 1.0


def balance_params(dag: WorkflowDag, cfg: SchedulerConfig, n_sets: int | None = None) -> BalanceFunctionParams:
    C = n_sets if n_sets is not None else cfg.container_count
    E = edge_norm(dag, cfg)
    th = cfg.theta
    alphas = tuple(E * C ** (th - 1.0) / s**th for s in balance_scales(dag, cfg))
    return BalanceFunctionParams(alphas, th)


def cut_weight(p: Partition, dag: WorkflowDag, counting: str = "double") -> float:
    """Weight of edges leaving the sets of a (possibly partial) partition.

    "double" sums Omega(E(A_i, T minus A_i)) over sets, so an edge joining
    two different sets is counted twice and an edge from a set to an
    unassigned task once. "single" counts every such edge once.
    """
    lab = p.label_of()
    total = 0.0
    for e in dag.edges:
        a, b = lab.get(e.src), lab.get(e.dst)
        if a is None and b is None or a == b:
            continue
        if counting == "double" and a is not None and b is not None:
            total += 2.0 * e.weight
        else:
            total += e.weight
    return total


def objective_f(p: Partition, dag: WorkflowDag, cfg: SchedulerConfig) -> tuple[float, ScoreBreakdown]:
    check_partition(p, dag, complete=False)
    C = p.n_sets
    cols = _task_columns(dag, cfg)
    width = len(next(iter(cols.values()))) if cols else 1
    scales = balance_scales(dag, cfg)

    comm = cfg.mu_c * cut_weight(p, dag, cfg.cut_counting) / edge_norm(dag, cfg)
    bal = 0.0
    for s in p.sets:
        weights = _set_columns(s, cols, width)
        bal += sum((w / (sk / C)) ** cfg.theta for w, sk in zip(weights, scales))
    bal *= cfg.mu_b / C
    return comm + bal, ScoreBreakdown(comm, bal, comm + bal)


def internal_weight(tasks: Iterable[int], dag: WorkflowDag) -> float:
    members = set(tasks)
    return sum(e.weight for e in dag.edges if e.src in members and e.dst in members)


def h_value(p: Partition, dag: WorkflowDag, cfg: SchedulerConfig) -> float:
    """Internal edge weight minus balance cost, both on the unnormalized scale."""
    g = balance_params(dag, cfg, p.n_sets)
    cols = _task_columns(dag, cfg)
    width = len(g.alphas)
    return sum(
        cfg.mu_c * internal_weight(s, dag) - cfg.mu_b * g(_set_columns(s, cols, width))
        for s in p.sets
    )


def _check_seed_count(dag: WorkflowDag, C: int) -> None:
    if C > dag.n_tasks:
        raise PartitionError(f"cannot seed {C} sets from {dag.n_tasks} tasks")


def init_random(dag: WorkflowDag, cfg: SchedulerConfig) -> Partition:
    C = cfg.container_count
    _check_seed_count(dag, C)
    rng = np.random.default_rng(cfg.seed)
    picks = rng.choice(dag.n_tasks, size=C, replace=False)
    return Partition(tuple((dag.task_ids[int(i)],) for i in picks))


def ncpi_seeds(dag: WorkflowDag, C: int) -> list[int]:
    """Seed tasks: off-critical-path first, least incident weight first."""
    _check_seed_count(dag, C)
    crit = critical_path(dag).tasks
    key = lambda t: (dag.incident_weight(t), t)
    off = sorted((t for t in dag.task_ids if t not in crit), key=key)
    on = sorted((t for t in dag.task_ids if t in crit), key=key)
    return (off + on)[:C]


def init_ncpi(dag: WorkflowDag, cfg: SchedulerConfig) -> Partition:
    return Partition(tuple((t,) for t in ncpi_seeds(dag, cfg.container_count)))


def delta_score(t: int, target: int, p: Partition, dag: WorkflowDag, cfg: SchedulerConfig) -> ScoreBreakdown:
    """Gain of inserting unassigned task ``t`` into set ``target``.

    The comm part credits the edge weight between t and the target set once
    per cut it stops contributing to (twice under double counting); the
    balance part is the growth of g on the target set, entered negatively.
    """
    if t in p.assigned():
        raise PartitionError(f"task {t} is already assigned")
    if not 0 <= target < p.n_sets:
        raise PartitionError(f"set index {target} out of range")
    g = balance_params(dag, cfg, p.n_sets)
    cols = _task_columns(dag, cfg)
    width = len(g.alphas)
    members = set(p.sets[target])
    link = sum(w for nb, w in dag.neighbor_weights[t].items() if nb in members)
    factor = 2.0 if cfg.cut_counting == "double" else 1.0
    comm = factor * cfg.mu_c * link
    before = _set_columns(members, cols, width)
    after = [b + v for b, v in zip(before, cols[t])]
    penalty = cfg.mu_b * (g(after) - g(before))
    return ScoreBreakdown(comm, -penalty, comm - penalty)


def pick_best(scores: Sequence[float]) -> int:
    """Index of the maximum score; near-ties go to the lowest index."""
    best = max(scores)
    tol = SCORE_TIE_TOL * max(1.0, abs(best))
    for i, s in enumerate(scores):
        if s >= best - tol:
            return i
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class AssignmentStep:
    task: int
    before: Partition
    scores: tuple[float, ...]
    chosen: int


def iter_assignments(dag: WorkflowDag, cfg: SchedulerConfig, seeded: Partition) -> Iterator[AssignmentStep]:
    """Greedily place every unassigned task, yielding one step per task."""
    C = seeded.n_sets
    g = balance_params(dag, cfg, C)
    cols = _task_columns(dag, cfg)
    width = len(g.alphas)
    factor = 2.0 if cfg.cut_counting == "double" else 1.0

    label = seeded.label_of()
    weights = [_set_columns(s, cols, width) for s in seeded.sets]
    g_now = [g(w) for w in weights]
    sets = [list(s) for s in seeded.sets]

    if cfg.assign_order == "topological":
        order = topological_order(dag)
    else:
        order = list(dag.task_ids)
    for t in order:
        if t in label:
            continue
        link = [0.0] * C
        for nb, w in dag.neighbor_weights[t].items():
            j = label.get(nb)
            if j is not None:
                link[j] += w
        scores = []
        for i in range(C):
            after = [b + v for b, v in zip(weights[i], cols[t])]
            scores.append(factor * cfg.mu_c * link[i] - cfg.mu_b * (g(after) - g_now[i]))
        k = pick_best(scores)
        before = Partition.from_sets(sets)
        yield AssignmentStep(t, before, tuple(scores), k)
        label[t] = k
        sets[k].append(t)
        weights[k] = [b + v for b, v in zip(weights[k], cols[t])]
        g_now[k] = g(weights[k])


def initial_partition(dag: WorkflowDag, cfg: SchedulerConfig, init: str) -> Partition:
    init = init.lower()
    if init == "ri":
        return init_random(dag, cfg)
    if init == "ncpi":
        return init_ncpi(dag, cfg)
    raise PartitionError(f"unknown initializer {init!r}; expected 'ri' or 'ncpi'")


def partition_tasks(dag: WorkflowDag, cfg: SchedulerConfig, init: str = "ncpi") -> Partition:
    seeded = initial_partition(dag, cfg, init)
    sets = [list(s) for s in seeded.sets]
    for step in iter_assignments(dag, cfg, seeded):
        sets[step.chosen].append(step.task)
    return Partition.from_sets(sets, seeded.dag_ref)


def container_demands(p: Partition, dag: WorkflowDag) -> np.ndarray:
    """C x R matrix of per-container demand (the sum of member task demands)."""
    out = np.zeros((p.n_sets, dag.n_resources))
    lookup = dag.task_by_id
    for j, s in enumerate(p.sets):
        for t in s:
            out[j] += lookup[t].demand
    return out


def normalized_max_load(p: Partition, dag: WorkflowDag) -> float:
    if any(not s for s in p.sets):
        raise PartitionError("normalized max load is undefined with an empty container")
    loads = [vertex_weight(s, dag) for s in p.sets]
    total = math.fsum(loads)
    if total == 0.0:
        return 1.0
    return p.n_sets * max(loads) / total
