import json

import pytest

from mecsched.cli import SEED_ENV, main
from mecsched.documents import load_workflow


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def files(tmp_path, capsys):
    wf = tmp_path / "w.json"
    assert main(["generate", "--size", "7", "--density", "0.4", "--seed", "2", "--demand-max", "0.02", "--out", str(wf)]) == 0
    part = tmp_path / "p.json"
    assert main(["partition", "--workflow", str(wf), "--containers", "2", "--out", str(part)]) == 0
    place = tmp_path / "m.json"
    assert main(["place", "--workflow", str(wf), "--partition", str(part), "--algo", "ffd", "--out", str(place)]) == 0
    capsys.readouterr()
    return wf, part, place


def test_pipeline_commands(files, capsys):
    wf, part, place = files
    assert load_workflow(wf).n_tasks == 7
    assert len(json.loads(part.read_text())["containers"]) == 2
    code, out, _ = run(["evaluate", "--workflow", str(wf), "--partition", str(part), "--placement", str(place)], capsys)
    assert code == 0
    metrics = json.loads(out)
    assert 0.0 <= metrics["comm_overhead"] <= 1.0 and metrics["lambda"] >= 1.0


@pytest.mark.parametrize("algo", ["ncpi", "ri", "kmeans"])
def test_partition_algorithms(files, capsys, algo):
    wf, _, _ = files
    code, out, _ = run(["partition", "--workflow", str(wf), "--algo", algo, "--containers", "3", "--seed", "1"], capsys)
    assert code == 0 and len(json.loads(out)["containers"]) == 3


def test_seed_from_environment(files, capsys, monkeypatch):
    wf, _, _ = files
    monkeypatch.setenv(SEED_ENV, "5")
    _, from_env, _ = run(["partition", "--workflow", str(wf), "--algo", "ri", "--containers", "3"], capsys)
    monkeypatch.delenv(SEED_ENV)
    _, explicit, _ = run(["partition", "--workflow", str(wf), "--algo", "ri", "--containers", "3", "--seed", "5"], capsys)
    assert from_env == explicit


def test_oracle_modes(files, capsys, tmp_path):
    wf, _, _ = files
    code, out, _ = run(["oracle", "--mode", "partition", "--workflow", str(wf), "--containers", "2"], capsys)
    assert code == 0 and json.loads(out)["mode"] == "partition"
    fleet = tmp_path / "f.json"
    fleet.write_text(json.dumps({"resources": ["cpu", "mem"], "servers": [{"id": 0, "capacity": [0.2, 0.2]}, {"id": 1, "capacity": [0.2, 0.2]}]}))
    code, out, _ = run(["oracle", "--mode", "joint", "--workflow", str(wf), "--containers", "2", "--fleet", str(fleet)], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["value"] >= 0.0 and len(doc["placement"]["placements"]) == 2


def test_bench_command(tmp_path, capsys):
    suite = tmp_path / "suite.json"
    suite.write_text(json.dumps({"sizes": [5, 9], "seeds": 2}))
    code, out, _ = run(["bench", "--suite", str(suite), "--out", str(tmp_path / "r.csv"), "--fig-dir", str(tmp_path / "figs")], capsys)
    assert code == 0 and json.loads(out)["rows"] == 18
    assert (tmp_path / "figs" / "fig8_comm.csv").exists()


@pytest.mark.parametrize(
    "argv, code, kind",
    [
        (["bogus"], 2, "usage"),
        (["generate", "--size", "3"], 2, "usage"),
        (["generate", "--size", "0", "--density", "0.5"], 1, "ValueError"),
        (["place", "--workflow", "/nonexistent.json", "--partition", "x"], 1, "FileNotFoundError"),
    ],
)
def test_errors_are_json_lines(argv, code, kind, capsys):
    got, out, err = run(argv, capsys)
    assert got == code
    line = json.loads(err.strip())
    assert line["error"] == kind and line["message"]


def test_oracle_guard_error(files, capsys):
    wf, _, _ = files
    code, _, err = run(["oracle", "--mode", "partition", "--workflow", str(wf), "--containers", "6"], capsys)
    assert code == 1 and json.loads(err)["error"] == "OracleGuardError"


def test_bad_seed_env(capsys, monkeypatch):
    monkeypatch.setenv(SEED_ENV, "abc")
    code, _, err = run(["generate", "--size", "3", "--density", "0.5"], capsys)
    assert code == 2 and SEED_ENV in json.loads(err)["message"]
