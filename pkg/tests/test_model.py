import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings

from mecsched.model import (
    CycleError,
    Edge,
    SchedulerConfig,
    Server,
    ServerFleet,
    Task,
    WorkflowDag,
    critical_path,
    topological_order,
    total_edge_weight,
    validate,
    weakly_connected_components,
)

from conftest import chain, dags, make_w4


def all_path_weights(dag):
    """Weights of every path between a source and a sink, by DFS."""
    preds = {t: 0 for t in dag.task_ids}
    for e in dag.edges:
        preds[e.dst] += 1
    out = []

    def walk(t, acc):
        succ = dag.successors[t]
        if not succ:
            out.append(acc)
        for nxt, w in succ:
            walk(nxt, acc + w)

    for t in dag.task_ids:
        if preds[t] == 0:
            walk(t, 0.0)
    return out


def test_w4_validates_against_bundled_fleet(w4, fleet10):
    assert validate(w4, fleet10).violations == []


def test_self_loop_reported():
    dag = WorkflowDag.build([Task(1, (0.1, 0.1))], [Edge(1, 1, 1.0)])
    report = validate(dag)
    assert not report.ok
    assert any("self-loop" in v for v in report.violations)


def test_two_cycle_reported():
    dag = WorkflowDag.build([Task(1, (0.1, 0.1)), Task(2, (0.1, 0.1))], [Edge(1, 2, 1.0), Edge(2, 1, 1.0)])
    assert any("cycle" in v for v in validate(dag).violations)


@pytest.mark.parametrize(
    "tasks, edges, needle",
    [
        ([Task(1, (0.1, 0.1))], [Edge(1, 9, 1.0)], "dangling"),
        ([Task(1, (0.1, 0.1)), Task(2, (0.1, 0.1))], [Edge(1, 2, -1.0)], "negative weight"),
        ([Task(1, (0.1, -0.1))], [], "negative demand"),
        ([Task(1, (0.1, 1.5))], [], "exceeds 1"),
        ([Task(1, (0.1,))], [], "components"),
        ([Task(1, (0.1, 0.1), -2.0)], [], "send_time"),
        ([Task(1, (0.1, 0.1)), Task(1, (0.1, 0.1))], [], "duplicate task"),
        ([Task(1, (0.1, 0.1)), Task(2, (0.1, 0.1))], [Edge(1, 2, 1.0), Edge(1, 2, 2.0)], "duplicate edge"),
    ],
)
def test_validation_violations(tasks, edges, needle):
    report = validate(WorkflowDag.build(tasks, edges))
    assert any(needle in v for v in report.violations), report.violations


def test_fleet_violations(w4):
    fleet = ServerFleet((Server(0, (0.1, 0.0)), Server(0, (0.1, 0.1))))
    text = " ".join(validate(w4, fleet).violations)
    assert "non-positive" in text and "duplicate server" in text
    three = ServerFleet((Server(0, (0.1, 0.1, 0.1)),), ("cpu", "mem", "gpu"))
    assert any("resource count" in v for v in validate(w4, three).violations)


def test_topological_order_w4(w4):
    assert topological_order(w4) == [1, 2, 3, 4]


def test_topological_order_single():
    assert topological_order(WorkflowDag.build([Task(1, (0.0, 0.0))], [])) == [1]


def test_topological_order_cycle_error():
    w4 = make_w4()
    bad = WorkflowDag.build(w4.tasks, w4.edges + (Edge(4, 1, 1.0),))
    with pytest.raises(CycleError) as info:
        topological_order(bad)
    assert info.value.member in {1, 2, 3, 4}


def test_topological_order_is_lexicographic_minimum():
    rng = np.random.default_rng(5)
    from conftest import random_dag

    for _ in range(30):
        dag = random_dag(rng, 6, density=0.3)
        valid = []
        for perm in itertools.permutations(dag.task_ids):
            pos = {t: i for i, t in enumerate(perm)}
            if all(pos[e.src] < pos[e.dst] for e in dag.edges):
                valid.append(list(perm))
        assert topological_order(dag) == min(valid)


@given(dags(max_tasks=12))
def test_topological_order_respects_edges(dag):
    order = topological_order(dag)
    assert sorted(order) == sorted(dag.task_ids)
    pos = {t: i for i, t in enumerate(order)}
    assert all(pos[e.src] < pos[e.dst] for e in dag.edges)


def test_critical_path_w4(w4):
    cp = critical_path(w4)
    assert cp.edges == {(1, 3), (3, 4)}
    assert cp.tasks == {1, 3, 4}
    assert cp.length == 7.0


def test_critical_path_single_task():
    cp = critical_path(WorkflowDag.build([Task(1, (0.1, 0.1))], []))
    assert cp.edges == frozenset() and cp.length == 0.0


def test_critical_path_chain():
    cp = critical_path(chain(3))
    assert cp.edges == {(1, 2), (2, 3)}
    assert cp.length == 2.0


def test_critical_path_parallel_maxima():
    # two disjoint maximum paths are both critical; the shorter component is not
    tasks = [Task(i, (0.1, 0.1)) for i in range(1, 7)]
    edges = [Edge(1, 2, 3.0), Edge(3, 4, 3.0), Edge(5, 6, 1.0)]
    cp = critical_path(WorkflowDag.build(tasks, edges))
    assert cp.edges == {(1, 2), (3, 4)}
    assert cp.tasks == {1, 2, 3, 4}


@given(dags(max_tasks=10))
@settings(max_examples=150)
def test_critical_path_matches_enumeration(dag):
    cp = critical_path(dag)
    best = max(all_path_weights(dag), default=0.0)
    assert math.isclose(cp.length, best, rel_tol=1e-12, abs_tol=1e-12)


@given(dags(max_tasks=9, int_weights=True))
@settings(max_examples=150)
def test_critical_edges_are_exactly_edges_on_maximum_paths(dag):
    # integer weights make "lies on a maximum path" exact
    cp = critical_path(dag)
    best = max(all_path_weights(dag), default=0.0)
    on_max = set()
    preds = {t: 0 for t in dag.task_ids}
    for e in dag.edges:
        preds[e.dst] += 1

    def walk(t, acc, used):
        succ = dag.successors[t]
        if not succ and acc == best:
            on_max.update(used)
        for nxt, w in succ:
            walk(nxt, acc + w, used + [(t, nxt)])

    for t in dag.task_ids:
        if preds[t] == 0:
            walk(t, 0.0, [])
    assert set(cp.edges) == on_max


def test_total_edge_weight():
    assert total_edge_weight(make_w4()) == 10.0
    assert total_edge_weight(WorkflowDag.build([Task(1, (0.1, 0.1))], [])) == 0.0
    assert total_edge_weight(chain(3)) == 2.0


def test_weakly_connected_components():
    tasks = [Task(i, (0.1, 0.1)) for i in range(1, 6)]
    dag = WorkflowDag.build(tasks, [Edge(1, 3, 1.0), Edge(4, 5, 1.0)])
    assert weakly_connected_components(dag) == [[1, 3], [2], [4, 5]]


@pytest.mark.parametrize(
    "kwargs",
    [
        {"mu_c": 1.5},
        {"mu_b": -0.1},
        {"theta": 0.5},
        {"container_count": 0},
        {"cut_counting": "triple"},
        {"balance_scale": "x"},
        {"edge_scale": "x"},
        {"resource_mode": "x"},
        {"assign_order": "x"},
        {"comm_normalization": "x"},
    ],
)
def test_config_rejects_bad_values(kwargs):
    with pytest.raises(ValueError):
        SchedulerConfig(**kwargs)


def test_neighbor_weights_merge_both_directions(w4):
    assert w4.neighbor_weights[1] == {2: 2.0, 3: 3.0}
    assert w4.incident_weight(3) == 7.0
    src, dst, w = w4.edge_arrays()
    assert list(src) == [0, 0, 1, 2] and list(dst) == [1, 2, 3, 3]
    assert list(w) == [2.0, 3.0, 1.0, 4.0]
