"""Exact solvers for small instances, by exhaustive enumeration."""
from __future__ import annotations

import itertools
from math import comb, factorial
from typing import Iterator

import numpy as np

from . import _backend
from .model import SchedulerConfig, ServerFleet, WorkflowDag, total_edge_weight, total_send_time
from .partition import Partition, _task_columns, balance_scales, edge_norm
from .placement import FEAS_EPS, PlacementMap

MAX_PARTITION_TASKS = 12
MAX_PARTITION_SETS = 4
MAX_JOINT_TASKS = 8
MAX_JOINT_SETS = 3
MAX_JOINT_SERVERS = 3


class OracleGuardError(ValueError):
    pass


class InfeasibleInstance(RuntimeError):
    pass


def surjection_count(n: int, k: int) -> int:
    """Number of maps from n labeled items onto k labeled non-empty sets."""
    return sum((-1) ** j * comb(k, j) * (k - j) ** n for j in range(k + 1))


def stirling2(n: int, k: int) -> int:
    return surjection_count(n, k) // factorial(k)


def iter_surjections(n: int, k: int) -> Iterator[tuple[int, ...]]:
    """All label vectors in {0..k-1}^n using every label, lexicographically."""
    for labels in itertools.product(range(k), repeat=n):
        if len(set(labels)) == k:
            yield labels


def _kernels(backend: str | None):
    if backend is None:
        return _backend.kernels
    return _backend.available_backends()[backend]


def brute_force_partition(dag: WorkflowDag, cfg: SchedulerConfig, backend: str | None = None) -> tuple[Partition, float]:
    T, C = dag.n_tasks, cfg.container_count
    if T > MAX_PARTITION_TASKS or C > MAX_PARTITION_SETS:
        raise OracleGuardError(
            f"partition oracle limited to T <= {MAX_PARTITION_TASKS}, C <= {MAX_PARTITION_SETS}; got T={T}, C={C}"
        )
    if C > T:
        raise OracleGuardError(f"cannot split {T} tasks into {C} non-empty sets")
    cols_by_id = _task_columns(dag, cfg)
    cols = np.array([cols_by_id[t] for t in dag.task_ids], dtype=np.float64)
    src, dst, w = dag.edge_arrays()
    labels, value, _ = _kernels(backend).search_partitions(
        T, C, src, dst, w, cols,
        np.array(balance_scales(dag, cfg), dtype=np.float64),
        cfg.mu_c, cfg.mu_b, cfg.theta,
        2.0 if cfg.cut_counting == "double" else 1.0,
        edge_norm(dag, cfg),
    )
    return Partition.from_labels(labels, dag, C), float(value)


def brute_force_joint(
    dag: WorkflowDag, fleet: ServerFleet, cfg: SchedulerConfig, backend: str | None = None
) -> tuple[Partition, PlacementMap, float]:
    T, C, S = dag.n_tasks, cfg.container_count, fleet.n_servers
    if T > MAX_JOINT_TASKS or C > MAX_JOINT_SETS or S > MAX_JOINT_SERVERS:
        raise OracleGuardError(
            f"joint oracle limited to T <= {MAX_JOINT_TASKS}, C <= {MAX_JOINT_SETS}, "
            f"S <= {MAX_JOINT_SERVERS}; got T={T}, C={C}, S={S}"
        )
    if C > T:
        raise OracleGuardError(f"cannot split {T} tasks into {C} non-empty sets")
    if cfg.comm_normalization == "edges":
        den = total_edge_weight(dag)
    else:
        den = total_send_time(dag)
    src, dst, w = dag.edge_arrays()
    demand = dag.demand_matrix()
    capacity = fleet.capacity_matrix()
    labels, servers, value, _ = _kernels(backend).search_joint(
        T, C, src, dst, w, demand, capacity, cfg.mu_c, cfg.mu_b, den, FEAS_EPS
    )
    if labels is None:
        raise InfeasibleInstance("no partition and placement satisfy the capacity constraints")
    p = Partition.from_labels(labels, dag, C)
    residual = capacity.copy()
    for j, s in enumerate(servers):
        residual[s] -= demand[np.asarray(labels) == j].sum(axis=0)
    m = PlacementMap(
        {j: fleet.servers[int(s)].id for j, s in enumerate(servers)},
        {srv.id: tuple(float(x) for x in residual[i]) for i, srv in enumerate(fleet.servers)},
    )
    return p, m, float(value)
