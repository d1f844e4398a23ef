"""Schedule evaluation: communication overhead, balance and utilization."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .model import SchedulerConfig, ServerFleet, WorkflowDag, total_edge_weight, total_send_time
from .partition import Partition, check_partition, normalized_max_load
from .placement import ContainerProfile, PlacementMap, containers_from_partition

# Utilization above 1 + UTIL_TOL means capacity was breached upstream.
UTIL_TOL = 1e-9


class ConstraintViolation(ValueError):
    pass


@dataclass(frozen=True)
class ScheduleMetrics:
    comm_overhead: float
    balance_total: float
    per_server_balance: tuple[float, ...]
    normalized_max_load: float
    cpu_util: float
    mem_util: float
    occupied_servers: int
    joint_objective: float

    def as_dict(self) -> dict:
        return asdict(self)


def container_dependency(p: Partition, dag: WorkflowDag) -> np.ndarray:
    """C x C matrix of edge weight flowing from container i to container j."""
    lab = p.label_of()
    F = np.zeros((p.n_sets, p.n_sets))
    for e in dag.edges:
        i, j = lab[e.src], lab[e.dst]
        if i != j:
            F[i, j] += e.weight
    return F


def placement_matrix(m: PlacementMap, n_containers: int, fleet: ServerFleet) -> np.ndarray:
    M = np.zeros((n_containers, fleet.n_servers))
    for c, s in m.assignments.items():
        M[c, fleet.position[s]] = 1.0
    return M


def server_dependency(m: PlacementMap, F: np.ndarray, fleet: ServerFleet) -> np.ndarray:
    M = placement_matrix(m, F.shape[0], fleet)
    G = M.T @ F @ M
    np.fill_diagonal(G, 0.0)
    return G


def comm_overhead(G: np.ndarray, dag: WorkflowDag, normalization: str = "edges") -> float:
    """Cross-server communication time as a share of the reference total.

    "edges" divides by the total edge weight, which keeps the value in
    [0, 1]; "send_time" divides by the sum of task send times instead.
    """
    num = float(G.sum())
    den = total_edge_weight(dag) if normalization == "edges" else total_send_time(dag)
    if den == 0.0:
        if num == 0.0:
            return 0.0
        raise ZeroDivisionError("cross-server traffic with zero reference communication time")
    return num / den


def server_loads(m: PlacementMap, containers: Sequence[ContainerProfile], fleet: ServerFleet) -> np.ndarray:
    loads = np.zeros((fleet.n_servers, len(fleet.resource_names)))
    for c in containers:
        loads[fleet.position[m.assignments[c.id]]] += c.demand
    return loads


def utilization(m: PlacementMap, containers: Sequence[ContainerProfile], fleet: ServerFleet) -> np.ndarray:
    u = server_loads(m, containers, fleet) / fleet.capacity_matrix()
    if (u > 1.0 + UTIL_TOL).any():
        s, k = np.argwhere(u > 1.0 + UTIL_TOL)[0]
        raise ConstraintViolation(
            f"server {fleet.servers[s].id} resource {fleet.resource_names[k]} at utilization {u[s, k]:.6g}"
        )
    return u


def server_balance(m: PlacementMap, containers: Sequence[ContainerProfile], fleet: ServerFleet) -> tuple[list[float], float]:
    u = utilization(m, containers, fleet)
    if u.size == 0:
        return [], 0.0
    b = ((u - u.mean(axis=1, keepdims=True)) ** 2).mean(axis=1)
    per_server = [float(x) for x in b]
    return per_server, float(sum(per_server))


def _resource_index(fleet: ServerFleet, name: str) -> int:
    try:
        return fleet.resource_names.index(name)
    except ValueError:
        raise KeyError(f"fleet has no resource named {name!r}") from None


def utilization_averages(m: PlacementMap, containers: Sequence[ContainerProfile], fleet: ServerFleet) -> tuple[float, float, int]:
    """Mean CPU and memory utilization over occupied servers, and their count."""
    occupied = sorted({fleet.position[s] for s in m.assignments.values()})
    if not occupied:
        return 0.0, 0.0, 0
    u = utilization(m, containers, fleet)
    cpu = float(u[occupied, _resource_index(fleet, "cpu")].mean())
    mem = float(u[occupied, _resource_index(fleet, "mem")].mean())
    return cpu, mem, len(occupied)


def joint_objective(p: Partition, m: PlacementMap, dag: WorkflowDag, fleet: ServerFleet, cfg: SchedulerConfig) -> float:
    check_partition(p, dag)
    containers = containers_from_partition(p, dag)
    G = server_dependency(m, container_dependency(p, dag), fleet)
    coh = comm_overhead(G, dag, cfg.comm_normalization)
    _, btot = server_balance(m, containers, fleet)
    return cfg.mu_c * coh + cfg.mu_b * btot


def evaluate(p: Partition, m: PlacementMap, dag: WorkflowDag, fleet: ServerFleet, cfg: SchedulerConfig) -> ScheduleMetrics:
    check_partition(p, dag)
    containers = containers_from_partition(p, dag)
    G = server_dependency(m, container_dependency(p, dag), fleet)
    coh = comm_overhead(G, dag, cfg.comm_normalization)
    per_server, btot = server_balance(m, containers, fleet)
    try:
        cpu, mem, n_occ = utilization_averages(m, containers, fleet)
    except KeyError:
        cpu = mem = float("nan")
        n_occ = len(m.occupied())
    return ScheduleMetrics(
        comm_overhead=coh,
        balance_total=btot,
        per_server_balance=tuple(per_server),
        normalized_max_load=normalized_max_load(p, dag),
        cpu_util=cpu,
        mem_util=mem,
        occupied_servers=n_occ,
        joint_objective=cfg.mu_c * coh + cfg.mu_b * btot,
    )
