"""JSON documents for workflows, fleets, partitions and placements."""
from __future__ import annotations

import hashlib
import json
from importlib import resources
from pathlib import Path
from typing import Any

from .model import Edge, Server, ServerFleet, Task, WorkflowDag, validate
from .partition import Partition
from .placement import PlacementMap


class DocumentError(ValueError):
    pass


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2) + "\n"


def read_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path}: invalid JSON ({exc})") from None


def write_json(doc: Any, path: str | Path) -> None:
    Path(path).write_text(dumps(doc))


def _need(doc: dict, key: str, where: str):
    if not isinstance(doc, dict) or key not in doc:
        raise DocumentError(f"{where}: missing field {key!r}")
    return doc[key]


def workflow_to_doc(dag: WorkflowDag) -> dict:
    return {
        "resources": list(dag.resources),
        "tasks": [{"id": t.id, "demand": list(t.demand), "send_time": t.send_time} for t in dag.tasks],
        "edges": [{"src": e.src, "dst": e.dst, "weight": e.weight} for e in dag.edges],
    }


def workflow_from_doc(doc: dict) -> WorkflowDag:
    """Build and validate a workflow; a missing edge weight defaults to the source's send time."""
    resources_ = [str(r) for r in _need(doc, "resources", "workflow")]
    tasks = []
    for raw in _need(doc, "tasks", "workflow"):
        tasks.append(
            Task(
                int(_need(raw, "id", "task")),
                tuple(float(x) for x in _need(raw, "demand", "task")),
                float(raw.get("send_time", 0.0)),
            )
        )
    send = {t.id: t.send_time for t in tasks}
    edges = []
    for raw in doc.get("edges", []):
        src, dst = int(_need(raw, "src", "edge")), int(_need(raw, "dst", "edge"))
        weight = raw.get("weight")
        if weight is None:
            if src not in send:
                raise DocumentError(f"edge {src}->{dst}: unknown source task")
            weight = send[src]
        edges.append(Edge(src, dst, float(weight)))
    dag = WorkflowDag.build(tasks, edges, resources_)
    report = validate(dag)
    if not report.ok:
        raise DocumentError("invalid workflow: " + "; ".join(report.violations))
    return dag


def workflow_digest(dag: WorkflowDag) -> str:
    blob = json.dumps(workflow_to_doc(dag), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def fleet_to_doc(fleet: ServerFleet) -> dict:
    return {
        "resources": list(fleet.resource_names),
        "servers": [{"id": s.id, "capacity": list(s.capacity)} for s in fleet.servers],
    }


def fleet_from_doc(doc: dict) -> ServerFleet:
    names = tuple(str(r) for r in _need(doc, "resources", "fleet"))
    servers = []
    for raw in _need(doc, "servers", "fleet"):
        cap = tuple(float(x) for x in _need(raw, "capacity", "server"))
        sid = int(_need(raw, "id", "server"))
        if len(cap) != len(names):
            raise DocumentError(f"server {sid}: {len(cap)} capacities for {len(names)} resources")
        if any(not (c > 0.0) for c in cap):
            raise DocumentError(f"server {sid}: capacities must be positive, got {list(cap)}")
        servers.append(Server(sid, cap))
    if not servers:
        raise DocumentError("fleet has no servers")
    if len({s.id for s in servers}) != len(servers):
        raise DocumentError("duplicate server ids in fleet")
    return ServerFleet(tuple(sorted(servers, key=lambda s: s.id)), names)


def default_fleet_doc() -> dict:
    text = resources.files("mecsched").joinpath("data/edge10_fleet.json").read_text()
    return json.loads(text)


def load_fleet(path: str | Path | None = None) -> ServerFleet:
    """Load a fleet document; ``None`` or ``"default"`` gives the bundled ten-server fleet."""
    if path is None or str(path) == "default":
        return fleet_from_doc(default_fleet_doc())
    return fleet_from_doc(read_json(path))


def load_workflow(path: str | Path) -> WorkflowDag:
    return workflow_from_doc(read_json(path))


def partition_to_doc(p: Partition, dag: WorkflowDag | None = None) -> dict:
    doc: dict[str, Any] = {
        "containers": [{"id": j, "tasks": list(s)} for j, s in enumerate(p.sets)],
        "assignment": sorted([t, j] for j, s in enumerate(p.sets) for t in s),
    }
    if dag is not None:
        doc["workflow"] = workflow_digest(dag)
        doc["shape"] = [dag.n_tasks, p.n_sets]
    return doc


def partition_from_doc(doc: dict) -> Partition:
    containers = sorted(_need(doc, "containers", "partition"), key=lambda c: int(c["id"]))
    ids = [int(c["id"]) for c in containers]
    if ids != list(range(len(ids))):
        raise DocumentError(f"container ids must be 0..C-1, got {ids}")
    return Partition.from_sets(([int(t) for t in c["tasks"]] for c in containers), doc.get("workflow", ""))


def placement_to_doc(m: PlacementMap, fleet: ServerFleet) -> dict:
    return {
        "placements": [{"container": c, "server": s} for c, s in sorted(m.assignments.items())],
        "residuals": [list(m.residual[s.id]) for s in fleet.servers],
    }


def placement_from_doc(doc: dict, fleet: ServerFleet) -> PlacementMap:
    assignments = {int(r["container"]): int(r["server"]) for r in _need(doc, "placements", "placement")}
    rows = doc.get("residuals")
    if rows is None:
        residual = {}
    else:
        if len(rows) != fleet.n_servers:
            raise DocumentError("residuals must list one row per fleet server")
        residual = {s.id: tuple(float(x) for x in row) for s, row in zip(fleet.servers, rows)}
    return PlacementMap(assignments, residual)
