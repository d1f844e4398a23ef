import json

import pytest

from mecsched.documents import (
    DocumentError,
    dumps,
    fleet_from_doc,
    fleet_to_doc,
    load_fleet,
    partition_from_doc,
    partition_to_doc,
    placement_from_doc,
    placement_to_doc,
    default_fleet_doc,
    workflow_digest,
    workflow_from_doc,
    workflow_to_doc,
)
from mecsched.partition import Partition
from mecsched.placement import PlacementMap

FLEET_CPU = (7, 9, 10, 12, 6, 12, 14, 10, 9, 11)
FLEET_MEM = (7, 8, 8, 11, 11, 14, 8, 11, 14, 8)


def test_bundled_fleet_capacities(fleet10):
    assert fleet10.n_servers == 10
    assert fleet10.resource_names == ("cpu", "mem")
    for s, c, m in zip(fleet10.servers, FLEET_CPU, FLEET_MEM):
        assert s.capacity == (c / 100, m / 100)
    assert fleet10.servers[0].capacity == (0.07, 0.07)
    assert fleet10.servers[6].capacity == (0.14, 0.08)


def test_bundled_fleet_round_trip(tmp_path, fleet10):
    path = tmp_path / "fleet.json"
    path.write_text(dumps(fleet_to_doc(fleet10)))
    again = load_fleet(path)
    assert again == fleet10
    assert dumps(fleet_to_doc(again)) == dumps(default_fleet_doc())


@pytest.mark.parametrize(
    "doc",
    [
        {"resources": ["cpu", "mem"], "servers": [{"id": 0, "capacity": [0.0, 0.1]}]},
        {"resources": ["cpu", "mem"], "servers": [{"id": 0, "capacity": [-0.1, 0.1]}]},
        {"resources": ["cpu", "mem"], "servers": [{"id": 0, "capacity": [0.1]}]},
        {"resources": ["cpu", "mem"], "servers": []},
        {"resources": ["cpu"], "servers": [{"id": 1, "capacity": [0.1]}, {"id": 1, "capacity": [0.2]}]},
        {"servers": []},
    ],
)
def test_bad_fleets(doc):
    with pytest.raises(DocumentError):
        fleet_from_doc(doc)


def test_invalid_json(tmp_path):
    path = tmp_path / "x.json"
    path.write_text("{not json")
    with pytest.raises(DocumentError):
        load_fleet(path)


def test_workflow_round_trip(w4):
    doc = workflow_to_doc(w4)
    assert workflow_from_doc(json.loads(dumps(doc))) == w4
    assert workflow_digest(w4) == workflow_digest(workflow_from_doc(doc))


def test_missing_edge_weight_uses_send_time():
    doc = {
        "resources": ["cpu", "mem"],
        "tasks": [{"id": 1, "demand": [0.1, 0.2], "send_time": 2.5}, {"id": 2, "demand": [0.1, 0.1]}],
        "edges": [{"src": 1, "dst": 2}],
    }
    assert workflow_from_doc(doc).edges[0].weight == 2.5


def test_invalid_workflow_rejected():
    doc = {
        "resources": ["cpu", "mem"],
        "tasks": [{"id": 1, "demand": [0.1, 0.2]}, {"id": 2, "demand": [0.1, 0.1]}],
        "edges": [{"src": 1, "dst": 2, "weight": 1}, {"src": 2, "dst": 1, "weight": 1}],
    }
    with pytest.raises(DocumentError, match="cycle"):
        workflow_from_doc(doc)
    with pytest.raises(DocumentError, match="tasks"):
        workflow_from_doc({"resources": ["cpu"]})


def test_partition_doc(w4):
    p = Partition.from_sets([[1, 3, 4], [2]])
    doc = partition_to_doc(p, w4)
    assert doc["containers"] == [{"id": 0, "tasks": [1, 3, 4]}, {"id": 1, "tasks": [2]}]
    assert doc["assignment"] == [[1, 0], [2, 1], [3, 0], [4, 0]]
    assert doc["shape"] == [4, 2]
    assert partition_from_doc(doc).sets == p.sets
    with pytest.raises(DocumentError):
        partition_from_doc({"containers": [{"id": 1, "tasks": [1]}]})


def test_placement_doc(fleet10):
    residual = {s.id: s.capacity for s in fleet10.servers}
    m = PlacementMap({0: 3, 1: 5}, residual)
    doc = placement_to_doc(m, fleet10)
    assert doc["placements"] == [{"container": 0, "server": 3}, {"container": 1, "server": 5}]
    assert placement_from_doc(doc, fleet10) == m
    with pytest.raises(DocumentError):
        placement_from_doc({"placements": [], "residuals": [[0.1, 0.1]]}, fleet10)
