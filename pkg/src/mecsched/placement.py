"""Container placement onto capacity-constrained servers.

Both heuristics track residual capacity so that servers hosting several
containers never exceed any resource. ``mode="nominal"`` reproduces the
textbook variants that test and score against full capacity; the result is
still checked afterwards and rejected if a server overflows.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import ServerFleet, WorkflowDag
from .partition import Partition, container_demands

# Slack allowed when comparing demand to residual capacity.
FEAS_EPS = 1e-12


class PlacementInfeasible(RuntimeError):
    def __init__(self, container: int, message: str | None = None):
        super().__init__(message or f"no server can host container {container}")
        self.container = container


@dataclass(frozen=True)
class ContainerProfile:
    id: int
    demand: tuple[float, ...]


@dataclass(frozen=True)
class PlacementMap:
    assignments: dict[int, int]
    residual: dict[int, tuple[float, ...]]

    def server_of(self, container: int) -> int:
        return self.assignments[container]

    def occupied(self) -> set[int]:
        return set(self.assignments.values())


def containers_from_partition(p: Partition, dag: WorkflowDag) -> list[ContainerProfile]:
    demands = container_demands(p, dag)
    return [ContainerProfile(j, tuple(float(x) for x in row)) for j, row in enumerate(demands)]


def feasible(demand: Sequence[float], residual: Sequence[float]) -> bool:
    return all(d <= r + FEAS_EPS for d, r in zip(demand, residual))


class _Ledger:
    """Residual capacities for a fleet, indexed by fleet position."""

    def __init__(self, fleet: ServerFleet):
        if not fleet.servers:
            raise ValueError("fleet has no servers")
        self.fleet = fleet
        self.nominal = fleet.capacity_matrix()
        self.residual = self.nominal.copy()
        self.count = [0] * fleet.n_servers
        self.assignments: dict[int, int] = {}

    def place(self, c: ContainerProfile, pos: int) -> None:
        row = self.residual[pos] - np.asarray(c.demand)
        # clip round-off from exact fits; genuine overflow is caught in finish()
        row[(row < 0.0) & (row > -FEAS_EPS)] = 0.0
        self.residual[pos] = row
        self.count[pos] += 1
        self.assignments[c.id] = self.fleet.servers[pos].id

    def finish(self) -> PlacementMap:
        for pos, row in enumerate(self.residual):
            if (row < 0.0).any():
                victim = max(c for c, s in self.assignments.items() if s == self.fleet.servers[pos].id)
                raise PlacementInfeasible(victim, f"server {self.fleet.servers[pos].id} overflows")
        residual = {s.id: tuple(float(x) for x in self.residual[i]) for i, s in enumerate(self.fleet.servers)}
        return PlacementMap(dict(sorted(self.assignments.items())), residual)


def _check_mode(mode: str) -> None:
    if mode not in ("residual", "nominal"):
        raise ValueError(f"mode must be 'residual' or 'nominal', got {mode!r}")


def dp_scores(c: ContainerProfile, capacity: np.ndarray) -> list[float]:
    """Dot product of demand and each server's capacity row; 0 where it does not fit."""
    d = np.asarray(c.demand)
    out = []
    for row in capacity:
        out.append(float(np.dot(d, row)) if feasible(d, row) else 0.0)
    return out


def dp_place(containers: Sequence[ContainerProfile], fleet: ServerFleet, mode: str = "residual") -> PlacementMap:
    _check_mode(mode)
    ledger = _Ledger(fleet)
    for c in sorted(containers, key=lambda c: c.id):
        cap = ledger.residual if mode == "residual" else ledger.nominal
        scores = dp_scores(c, cap)
        candidates = [i for i, row in enumerate(cap) if feasible(c.demand, row)]
        if not candidates:
            raise PlacementInfeasible(c.id)
        best = max(candidates, key=lambda i: (scores[i], -i))
        ledger.place(c, best)
    return ledger.finish()


def ffd_order(containers: Sequence[ContainerProfile]) -> list[ContainerProfile]:
    return sorted(containers, key=lambda c: (-sum(c.demand), c.id))


def ffd_place(containers: Sequence[ContainerProfile], fleet: ServerFleet, mode: str = "residual") -> PlacementMap:
    _check_mode(mode)
    ledger = _Ledger(fleet)
    for c in ffd_order(containers):
        cap = ledger.residual if mode == "residual" else ledger.nominal
        for pos, row in enumerate(cap):
            if feasible(c.demand, row):
                ledger.place(c, pos)
                break
        else:
            raise PlacementInfeasible(c.id)
    return ledger.finish()


def check_placement(m: PlacementMap, containers: Sequence[ContainerProfile], fleet: ServerFleet, tol: float = 1e-9) -> list[str]:
    """Post-hoc check of single-server assignment and capacity; returns violations."""
    problems = []
    ids = {s.id for s in fleet.servers}
    load = {s.id: np.zeros(len(fleet.resource_names)) for s in fleet.servers}
    for c in containers:
        if c.id not in m.assignments:
            problems.append(f"container {c.id} unplaced")
            continue
        sid = m.assignments[c.id]
        if sid not in ids:
            problems.append(f"container {c.id} on unknown server {sid}")
            continue
        load[sid] += c.demand
    extra = set(m.assignments) - {c.id for c in containers}
    if extra:
        problems.append(f"unknown containers placed: {sorted(extra)}")
    for s in fleet.servers:
        over = load[s.id] - np.asarray(s.capacity)
        if (over > tol).any():
            problems.append(f"server {s.id} over capacity by {over.max():.3g}")
        if any(r < -tol for r in m.residual.get(s.id, ())):
            problems.append(f"server {s.id} has negative residual")
    return problems
