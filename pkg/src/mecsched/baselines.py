"""Comparison schemes: demand-space K-means clustering and Spread placement."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import SchedulerConfig, ServerFleet, WorkflowDag
from .partition import Partition, PartitionError
from .placement import ContainerProfile, PlacementInfeasible, PlacementMap, _Ledger, feasible

MAX_ITER = 100


@dataclass
class KMeansState:
    centroids: np.ndarray
    labels: np.ndarray
    iterations: int


def _assign(X: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d2 = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    return d2.argmin(axis=1)


def _refill_empty(X: np.ndarray, centroids: np.ndarray, labels: np.ndarray) -> np.ndarray:
    # Move the point farthest from its own centroid into each empty cluster.
    labels = labels.copy()
    C = len(centroids)
    for j in range(C):
        counts = np.bincount(labels, minlength=C)
        if counts[j]:
            continue
        donors = counts[labels] > 1
        dist = ((X - centroids[labels]) ** 2).sum(axis=1)
        dist[~donors] = -1.0
        i = int(np.flatnonzero(dist == dist.max())[-1])
        labels[i] = j
        centroids[j] = X[i]
    return labels


def kmeans(X: np.ndarray, k: int, seed: int, max_iter: int = MAX_ITER) -> KMeansState:
    n = len(X)
    if k > n:
        raise PartitionError(f"cannot form {k} clusters from {n} points")
    rng = np.random.default_rng(seed)
    centroids = X[rng.choice(n, size=k, replace=False)].astype(np.float64)
    labels = None
    it = 0
    while it < max_iter:
        it += 1
        new = _refill_empty(X, centroids, _assign(X, centroids))
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for j in range(k):
            centroids[j] = X[labels == j].mean(axis=0)
    return KMeansState(centroids, labels, it)


def kmeans_partition(dag: WorkflowDag, cfg: SchedulerConfig) -> Partition:
    """Cluster tasks by demand vector alone; edges are ignored."""
    state = kmeans(dag.demand_matrix(), cfg.container_count, cfg.seed)
    return Partition.from_labels(state.labels, dag, cfg.container_count)


def spread_place(containers: Sequence[ContainerProfile], fleet: ServerFleet) -> PlacementMap:
    """Fewest hosted containers wins; ties by lowest summed utilization, then position."""
    ledger = _Ledger(fleet)
    for c in sorted(containers, key=lambda c: c.id):
        candidates = [i for i, row in enumerate(ledger.residual) if feasible(c.demand, row)]
        if not candidates:
            raise PlacementInfeasible(c.id)
        used = 1.0 - ledger.residual / ledger.nominal
        best = min(candidates, key=lambda i: (ledger.count[i], float(used[i].sum()), i))
        ledger.place(c, best)
    return ledger.finish()
