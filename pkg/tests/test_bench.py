import csv
import io
import json

import numpy as np
import pytest

from mecsched.bench import (
    CSV_COLUMNS,
    FIGURES,
    SUITE_SIZES,
    SuiteConfig,
    figure_tables,
    generate_workflow,
    rows_to_csv,
    run_suite,
    write_suite,
)
from mecsched.documents import dumps, workflow_to_doc
from mecsched.model import validate, weakly_connected_components

from conftest import uniform_fleet


def test_generate_single_task():
    dag = generate_workflow(1, 0.5, seed=1)
    assert dag.n_tasks == 1 and dag.n_edges == 0


def test_generate_deterministic():
    a = dumps(workflow_to_doc(generate_workflow(20, 0.3, seed=4)))
    b = dumps(workflow_to_doc(generate_workflow(20, 0.3, seed=4)))
    assert a == b
    assert a != dumps(workflow_to_doc(generate_workflow(20, 0.3, seed=5)))


def test_generate_complete_forward_dag():
    dag = generate_workflow(5, 1.0, seed=0)
    assert dag.n_edges == 10
    assert all(e.src < e.dst for e in dag.edges)


@pytest.mark.parametrize("size, density", [(0, 0.5), (5, -0.1), (5, 1.5)])
def test_generate_rejects(size, density):
    with pytest.raises(ValueError):
        generate_workflow(size, density, seed=0)


@pytest.mark.parametrize("seed", range(10))
def test_generate_ranges_and_connectivity(seed):
    dag = generate_workflow(40, 0.02, seed=seed, demand_max=0.03)
    assert validate(dag).ok
    assert len(weakly_connected_components(dag)) == 1
    assert all(0.0 < e.weight <= 5.0 for e in dag.edges)
    assert all(0.0 < d <= 0.03 for t in dag.tasks for d in t.demand)
    sends = {t.id: t.send_time for t in dag.tasks}
    for tid in dag.task_ids:
        assert sends[tid] == pytest.approx(sum(w for _, w in dag.successors[tid]))


def test_empty_suite_gives_header_only(fleet10):
    result = run_suite(SuiteConfig(sizes=[]), fleet10)
    assert rows_to_csv(result.rows) == ",".join(CSV_COLUMNS) + "\n"


def test_unit_suite_single_row(fleet10):
    suite = SuiteConfig(sizes=[12], partitioners=["ncpi"], placers=["ffd"], seeds=3)
    result = run_suite(suite, fleet10)
    assert len(result.rows) == 1 and len(result.raw_rows) == 1
    row = result.rows[0]
    assert row["status"] == "ok" and row["algo_partition"] == "ncpi" and row["T"] == 12


def test_randomized_rows_are_seed_averages(fleet10):
    suite = SuiteConfig(sizes=[15], partitioners=["ri"], placers=["dp"], seeds=4)
    result = run_suite(suite, fleet10)
    assert len(result.raw_rows) == 4
    assert result.rows[0]["seed"] == "0-3"
    assert result.rows[0]["b_tot"] == pytest.approx(np.mean([r["b_tot"] for r in result.raw_rows]))


def test_infeasible_rows_recorded():
    suite = SuiteConfig(sizes=[10], partitioners=["ncpi"], placers=["dp", "ffd", "spread"], seeds=1)
    tiny = uniform_fleet(1, cap=(0.001, 0.001))
    result = run_suite(suite, tiny)
    assert [r["status"] for r in result.rows] == ["infeasible"] * 3
    assert "infeasible" in rows_to_csv(result.rows)


def test_full_suite_shape_and_outputs(tmp_path, fleet10):
    suite = SuiteConfig(seeds=2)
    result = run_suite(suite, fleet10)
    assert len(result.rows) == len(SUITE_SIZES) * 3 * 3
    written = write_suite(result, tmp_path / "out.csv", tmp_path / "figs")
    names = {p.name for p in written}
    assert {"out.csv", "out_raw.csv", "out_meta.json"} <= names
    assert set(FIGURES) <= names
    reader = csv.DictReader(io.StringIO((tmp_path / "out.csv").read_text()))
    assert tuple(reader.fieldnames) == CSV_COLUMNS
    meta = json.loads((tmp_path / "out_meta.json").read_text())
    assert "ceil(T/10)" in meta["container_rule"]
    fig3 = list(csv.reader(io.StringIO((tmp_path / "figs" / "fig3_lambda.csv").read_text())))
    assert fig3[0] == ["workflow_id", "T", "ncpi", "ri", "kmeans"] and len(fig3) == 11


def test_parallel_suite_matches_serial(fleet10):
    suite = SuiteConfig(sizes=[9, 17], seeds=2)
    a = run_suite(suite, fleet10, jobs=1)
    b = run_suite(suite, fleet10, jobs=2)
    drop = lambda rows: [{k: v for k, v in r.items() if k != "runtime_ms"} for r in rows]
    assert drop(a.rows) == drop(b.rows)


def test_suite_config_from_dict():
    assert SuiteConfig.from_dict({"sizes": [5], "seeds": 2}).sizes == [5]
    with pytest.raises(ValueError):
        SuiteConfig.from_dict({"nonsense": 1})
    with pytest.raises(ValueError):
        SuiteConfig.from_dict({"placers": ["binpack"]})


def test_container_rule():
    suite = SuiteConfig()
    assert [suite.container_count(t) for t in SUITE_SIZES] == [2, 2, 2, 3, 3, 5, 6, 7, 10, 10]
    assert SuiteConfig(containers=4).container_count(93) == 4
