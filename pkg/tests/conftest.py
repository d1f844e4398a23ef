import numpy as np
import pytest
from hypothesis import strategies as st

from mecsched.documents import load_fleet
from mecsched.model import Edge, SchedulerConfig, Server, ServerFleet, Task, WorkflowDag


def make_w4():
    tasks = [
        Task(1, (0.10, 0.20)),
        Task(2, (0.30, 0.10)),
        Task(3, (0.20, 0.20)),
        Task(4, (0.10, 0.10)),
    ]
    edges = [Edge(1, 2, 2.0), Edge(1, 3, 3.0), Edge(2, 4, 1.0), Edge(3, 4, 4.0)]
    return WorkflowDag.build(tasks, edges)


def chain(n, w=1.0, demand=(0.1, 0.1)):
    return WorkflowDag.build([Task(i, demand) for i in range(1, n + 1)], [Edge(i, i + 1, w) for i in range(1, n)])


def uniform_fleet(n, cap=(1.0, 1.0)):
    return ServerFleet(tuple(Server(i, tuple(cap)) for i in range(n)))


def random_dag(rng, n_tasks, density=0.4, demand_max=0.2, weight_max=5.0, int_weights=False, shuffle_ids=True):
    """Random DAG whose task ids are a shuffled labeling of a random topological order."""
    ids = list(range(1, n_tasks + 1))
    if shuffle_ids:
        rng.shuffle(ids)
    edges = []
    for a in range(n_tasks):
        for b in range(a + 1, n_tasks):
            if rng.random() < density:
                w = float(rng.integers(0, 6)) if int_weights else float(weight_max * rng.random())
                edges.append(Edge(ids[a], ids[b], w))
    demands = demand_max * rng.random((n_tasks, 2))
    sends = {t: 0.0 for t in ids}
    for e in edges:
        sends[e.src] += e.weight
    tasks = [Task(ids[i], (float(demands[i, 0]), float(demands[i, 1])), sends[ids[i]]) for i in range(n_tasks)]
    return WorkflowDag.build(tasks, edges)


@st.composite
def dags(draw, min_tasks=1, max_tasks=10, int_weights=False):
    n = draw(st.integers(min_tasks, max_tasks))
    seed = draw(st.integers(0, 2**32 - 1))
    density = draw(st.sampled_from([0.0, 0.2, 0.5, 1.0]))
    return random_dag(np.random.default_rng(seed), n, density=density, int_weights=int_weights)


@pytest.fixture
def w4():
    return make_w4()


@pytest.fixture
def fleet10():
    return load_fleet()


@pytest.fixture
def cfg2():
    return SchedulerConfig(container_count=2)


# one line per acceptance criterion, echoed again at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
