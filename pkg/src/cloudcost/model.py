"""Deployment-model document format, validation, and the simulation graph.

A model is a strict JSON document describing nodes (virtual machines,
virtual storage, hosted databases, remote nodes), the artifacts deployed
onto them, communication paths between them, and disjoint node groups
used for cost breakdowns.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Any

from .elasticity import parse_patterns
from .errors import Diagnostic, ModelError, PatternError

VIRTUAL_MACHINE = "virtual_machine"
VIRTUAL_STORAGE = "virtual_storage"
HOSTED_DATABASE = "hosted_database"
REMOTE_NODE = "remote_node"
NODE_KINDS = (VIRTUAL_MACHINE, VIRTUAL_STORAGE, HOSTED_DATABASE, REMOTE_NODE)

APPLICATION = "application"
DATA_SET = "data_set"
ARTIFACT_KINDS = (APPLICATION, DATA_SET)

VM_HOURS = "vm_hours"
STORAGE_GB = "storage_gb"
IO_IN_REQUESTS = "io_in_requests"
IO_OUT_REQUESTS = "io_out_requests"
IO_GB = "io_gb"
DATA_IN_GB = "data_in_gb"
DATA_OUT_GB = "data_out_gb"
DATA_LINK_GB = "data_link_gb"
REQUIREMENT_KINDS = (VM_HOURS, STORAGE_GB, IO_IN_REQUESTS, IO_OUT_REQUESTS,
                     IO_GB, DATA_IN_GB, DATA_OUT_GB, DATA_LINK_GB)

# storage_gb is a held level billed by time-average; everything else is a
# consumed monthly quantity.
KIND_CLASS = {kind: ("stock" if kind == STORAGE_GB else "flow") for kind in REQUIREMENT_KINDS}

# Which requirement kinds may appear on which node kinds. data_link_gb is
# path-only and therefore legal on no node kind.
LEGAL_REQUIREMENTS = {
    VIRTUAL_MACHINE: frozenset({VM_HOURS, DATA_IN_GB, DATA_OUT_GB}),
    HOSTED_DATABASE: frozenset({VM_HOURS, STORAGE_GB, IO_IN_REQUESTS, IO_OUT_REQUESTS,
                                IO_GB, DATA_IN_GB, DATA_OUT_GB}),
    VIRTUAL_STORAGE: frozenset({STORAGE_GB, IO_IN_REQUESTS, IO_OUT_REQUESTS,
                                IO_GB, DATA_IN_GB, DATA_OUT_GB}),
    REMOTE_NODE: frozenset({DATA_IN_GB, DATA_OUT_GB}),
}


@dataclass(frozen=True)
class Placement:
    provider: str
    region: str


@dataclass(frozen=True)
class VmSpec:
    operating_system: str
    sku: str | None = None
    cpu_ghz: float | None = None
    ram_gb: float | None = None


@dataclass(frozen=True)
class StorageSpec:
    storage_type: str


@dataclass(frozen=True)
class ResourceRequirement:
    kind: str
    baseline: float
    patterns: tuple[str, ...] = ()


@dataclass(frozen=True)
class Node:
    id: str
    kind: str
    placement: Placement | None = None
    vm_spec: VmSpec | None = None
    storage_spec: StorageSpec | None = None
    requirements: tuple[ResourceRequirement, ...] = ()


@dataclass(frozen=True)
class ArtifactItem:
    id: str
    kind: str
    label: str = ""


@dataclass(frozen=True)
class DeploymentBinding:
    artifact_id: str
    node_id: str


@dataclass(frozen=True)
class CommunicationPath:
    id: str
    from_node: str
    to_node: str
    volume: ResourceRequirement


@dataclass(frozen=True)
class Group:
    id: str
    label: str = ""
    node_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class DeploymentModel:
    name: str
    nodes: tuple[Node, ...] = ()
    artifacts: tuple[ArtifactItem, ...] = ()
    bindings: tuple[DeploymentBinding, ...] = ()
    paths: tuple[CommunicationPath, ...] = ()
    groups: tuple[Group, ...] = ()

    def node_by_id(self, node_id: str) -> Node | None:
        for node in self.nodes:
            if node.id == node_id:
                return node
        return None

    def group_of(self, node_id: str) -> str | None:
        for group in self.groups:
            if node_id in group.node_ids:
                return group.id
        return None

    def replaced(self, provider: str, region: str) -> DeploymentModel:
        """Copy of the model with every placed node moved to provider/region."""
        placement = Placement(provider, region)
        nodes = tuple(
            node if node.placement is None else replace(node, placement=placement)
            for node in self.nodes
        )
        return replace(self, nodes=nodes)


# --- structural parsing (strict: unknown keys are schema errors) ----------

def _fail(path: str, message: str) -> None:
    raise ModelError("schema violation", [Diagnostic("error", path, message)])


def _check_obj(value: Any, path: str, required: tuple[str, ...],
               optional: tuple[str, ...]) -> dict:
    if not isinstance(value, dict):
        _fail(path, f"expected an object, got {type(value).__name__}")
    allowed = set(required) | set(optional)
    unknown = sorted(set(value) - allowed)
    if unknown:
        _fail(path, f"unknown key(s): {', '.join(unknown)}")
    missing = sorted(set(required) - set(value))
    if missing:
        _fail(path, f"missing required key(s): {', '.join(missing)}")
    return value


def _str_at(obj: dict, key: str, path: str) -> str:
    value = obj[key]
    if not isinstance(value, str):
        _fail(f"{path}.{key}", f"expected a string, got {type(value).__name__}")
    return value


def _num_at(obj: dict, key: str, path: str) -> float:
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(f"{path}.{key}", f"expected a number, got {type(value).__name__}")
    return float(value)


def _list_at(data: dict, key: str, path: str) -> list:
    value = data.get(key, [])
    if not isinstance(value, list):
        _fail(f"{path}.{key}" if path else key, "expected an array")
    return value


def _parse_requirement(value: Any, path: str) -> ResourceRequirement:
    obj = _check_obj(value, path, ("kind", "baseline"), ("patterns",))
    kind = _str_at(obj, "kind", path)
    if kind not in REQUIREMENT_KINDS:
        _fail(f"{path}.kind", f"unknown requirement kind {kind!r}")
    baseline = _num_at(obj, "baseline", path)
    patterns = obj.get("patterns", [])
    if not isinstance(patterns, list) or not all(isinstance(p, str) for p in patterns):
        _fail(f"{path}.patterns", "expected an array of pattern strings")
    return ResourceRequirement(kind, baseline, tuple(patterns))


def _parse_node(value: Any, path: str) -> Node:
    obj = _check_obj(value, path, ("id", "kind"),
                     ("placement", "vm_spec", "storage_spec", "requirements"))
    node_id = _str_at(obj, "id", path)
    kind = _str_at(obj, "kind", path)
    if kind not in NODE_KINDS:
        _fail(f"{path}.kind", f"unknown node kind {kind!r}")
    placement = None
    if obj.get("placement") is not None:
        p = _check_obj(obj["placement"], f"{path}.placement", ("provider", "region"), ())
        placement = Placement(_str_at(p, "provider", f"{path}.placement"),
                              _str_at(p, "region", f"{path}.placement"))
    vm_spec = None
    if obj.get("vm_spec") is not None:
        v = _check_obj(obj["vm_spec"], f"{path}.vm_spec", ("operating_system",),
                       ("sku", "cpu_ghz", "ram_gb"))
        sku = _str_at(v, "sku", f"{path}.vm_spec") if "sku" in v else None
        cpu = _num_at(v, "cpu_ghz", f"{path}.vm_spec") if "cpu_ghz" in v else None
        ram = _num_at(v, "ram_gb", f"{path}.vm_spec") if "ram_gb" in v else None
        vm_spec = VmSpec(_str_at(v, "operating_system", f"{path}.vm_spec"), sku, cpu, ram)
    storage_spec = None
    if obj.get("storage_spec") is not None:
        st = _check_obj(obj["storage_spec"], f"{path}.storage_spec", ("storage_type",), ())
        storage_spec = StorageSpec(_str_at(st, "storage_type", f"{path}.storage_spec"))
    requirements = tuple(
        _parse_requirement(req, f"{path}.requirements[{i}]")
        for i, req in enumerate(_list_at(obj, "requirements", path))
    )
    return Node(node_id, kind, placement, vm_spec, storage_spec, requirements)


def _build_model(data: Any) -> DeploymentModel:
    top = _check_obj(data, "$", ("name", "nodes"),
                     ("artifacts", "bindings", "paths", "groups"))
    name = _str_at(top, "name", "$")
    nodes = tuple(_parse_node(n, f"nodes[{i}]")
                  for i, n in enumerate(_list_at(top, "nodes", "")))
    artifacts = []
    for i, a in enumerate(_list_at(top, "artifacts", "")):
        obj = _check_obj(a, f"artifacts[{i}]", ("id", "kind"), ("label",))
        kind = _str_at(obj, "kind", f"artifacts[{i}]")
        if kind not in ARTIFACT_KINDS:
            _fail(f"artifacts[{i}].kind", f"unknown artifact kind {kind!r}")
        label = _str_at(obj, "label", f"artifacts[{i}]") if "label" in obj else ""
        artifacts.append(ArtifactItem(_str_at(obj, "id", f"artifacts[{i}]"), kind, label))
    bindings = []
    for i, b in enumerate(_list_at(top, "bindings", "")):
        obj = _check_obj(b, f"bindings[{i}]", ("artifact_id", "node_id"), ())
        bindings.append(DeploymentBinding(_str_at(obj, "artifact_id", f"bindings[{i}]"),
                                          _str_at(obj, "node_id", f"bindings[{i}]")))
    paths = []
    for i, p in enumerate(_list_at(top, "paths", "")):
        obj = _check_obj(p, f"paths[{i}]", ("id", "from_node", "to_node", "volume"), ())
        volume = _parse_requirement(obj["volume"], f"paths[{i}].volume")
        paths.append(CommunicationPath(_str_at(obj, "id", f"paths[{i}]"),
                                       _str_at(obj, "from_node", f"paths[{i}]"),
                                       _str_at(obj, "to_node", f"paths[{i}]"),
                                       volume))
    groups = []
    for i, g in enumerate(_list_at(top, "groups", "")):
        obj = _check_obj(g, f"groups[{i}]", ("id",), ("label", "node_ids"))
        node_ids = obj.get("node_ids", [])
        if not isinstance(node_ids, list) or not all(isinstance(n, str) for n in node_ids):
            _fail(f"groups[{i}].node_ids", "expected an array of node ids")
        label = _str_at(obj, "label", f"groups[{i}]") if "label" in obj else ""
        groups.append(Group(_str_at(obj, "id", f"groups[{i}]"), label, tuple(node_ids)))
    return DeploymentModel(name, nodes, tuple(artifacts), tuple(bindings),
                           tuple(paths), tuple(groups))


def parse_model(text: str) -> DeploymentModel:
    """Parse and validate a model document; raises ModelError on any defect."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(
            f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    model = _build_model(data)
    diagnostics = validate(model)
    if any(d.severity == "error" for d in diagnostics):
        raise ModelError("model validation failed", diagnostics)
    return model


def load_model(path: str) -> DeploymentModel:
    with open(path, encoding="utf-8") as handle:
        return parse_model(handle.read())


# --- semantic validation ---------------------------------------------------

def validate(model: DeploymentModel) -> list[Diagnostic]:
    """All invariant violations as diagnostics, sorted by location path."""
    diags: list[Diagnostic] = []

    def err(path: str, message: str) -> None:
        diags.append(Diagnostic("error", path, message))

    node_ids: dict[str, int] = {}
    for i, node in enumerate(model.nodes):
        if node.id in node_ids:
            err(f"nodes[{i}].id", f"duplicate node id {node.id!r}")
        else:
            node_ids[node.id] = i
        if node.kind == REMOTE_NODE:
            if node.placement is not None:
                err(f"nodes[{i}].placement", "remote nodes carry no placement")
        elif node.placement is None:
            err(f"nodes[{i}].placement", f"{node.kind} requires a placement")
        else:
            if not node.placement.provider:
                err(f"nodes[{i}].placement.provider", "provider must be non-empty")
            if not node.placement.region:
                err(f"nodes[{i}].placement.region", "region must be non-empty")
        if node.kind == VIRTUAL_MACHINE:
            if node.vm_spec is None:
                err(f"nodes[{i}].vm_spec", "virtual machines require a vm_spec")
            else:
                has_sku = node.vm_spec.sku is not None
                has_raw = node.vm_spec.cpu_ghz is not None and node.vm_spec.ram_gb is not None
                partial_raw = (node.vm_spec.cpu_ghz is None) != (node.vm_spec.ram_gb is None)
                if partial_raw:
                    err(f"nodes[{i}].vm_spec", "raw spec needs both cpu_ghz and ram_gb")
                elif has_sku == has_raw:
                    err(f"nodes[{i}].vm_spec",
                        "exactly one of sku or raw spec (cpu_ghz + ram_gb) is required")
        elif node.vm_spec is not None:
            err(f"nodes[{i}].vm_spec", f"vm_spec is not allowed on a {node.kind}")
        if node.kind != VIRTUAL_STORAGE and node.storage_spec is not None:
            err(f"nodes[{i}].storage_spec", f"storage_spec is not allowed on a {node.kind}")
        seen_kinds: set[str] = set()
        for j, req in enumerate(node.requirements):
            path = f"nodes[{i}].requirements[{j}]"
            if req.kind in seen_kinds:
                err(f"{path}.kind", f"duplicate requirement kind {req.kind!r} on node {node.id!r}")
            seen_kinds.add(req.kind)
            if req.kind not in LEGAL_REQUIREMENTS.get(node.kind, frozenset()):
                err(f"{path}.kind",
                    f"requirement kind {req.kind!r} is not legal on a {node.kind}")
            _check_requirement(req, path, err)

    artifact_ids: set[str] = set()
    for i, artifact in enumerate(model.artifacts):
        if artifact.id in artifact_ids:
            err(f"artifacts[{i}].id", f"duplicate artifact id {artifact.id!r}")
        artifact_ids.add(artifact.id)

    artifact_by_id = {a.id: a for a in model.artifacts}
    for i, binding in enumerate(model.bindings):
        artifact = artifact_by_id.get(binding.artifact_id)
        if artifact is None:
            err(f"bindings[{i}].artifact_id",
                f"binding references unknown artifact {binding.artifact_id!r}")
        node_index = node_ids.get(binding.node_id)
        if node_index is None:
            err(f"bindings[{i}].node_id",
                f"binding references unknown node {binding.node_id!r}")
        if artifact is not None and node_index is not None:
            node = model.nodes[node_index]
            legal = ((VIRTUAL_MACHINE, REMOTE_NODE) if artifact.kind == APPLICATION
                     else (VIRTUAL_STORAGE, HOSTED_DATABASE))
            if node.kind not in legal:
                err(f"bindings[{i}]",
                    f"{artifact.kind} {artifact.id!r} cannot be deployed on a {node.kind}")

    path_ids: set[str] = set()
    for i, path in enumerate(model.paths):
        if path.id in path_ids:
            err(f"paths[{i}].id", f"duplicate path id {path.id!r}")
        path_ids.add(path.id)
        if path.id in node_ids:
            err(f"paths[{i}].id", f"path id {path.id!r} collides with a node id")
        for key, ref in (("from_node", path.from_node), ("to_node", path.to_node)):
            if ref not in node_ids:
                err(f"paths[{i}].{key}", f"path references unknown node {ref!r}")
        if path.volume.kind != DATA_LINK_GB:
            err(f"paths[{i}].volume.kind", "path volume must have kind 'data_link_gb'")
        _check_requirement(path.volume, f"paths[{i}].volume", err)

    group_ids: set[str] = set()
    grouped: dict[str, str] = {}
    for i, group in enumerate(model.groups):
        if group.id in group_ids:
            err(f"groups[{i}].id", f"duplicate group id {group.id!r}")
        group_ids.add(group.id)
        for j, node_id in enumerate(group.node_ids):
            if node_id not in node_ids:
                err(f"groups[{i}].node_ids[{j}]",
                    f"group references unknown node {node_id!r}")
            elif node_id in grouped:
                err(f"groups[{i}].node_ids[{j}]",
                    f"node {node_id!r} already belongs to group {grouped[node_id]!r}")
            else:
                grouped[node_id] = group.id

    diags.sort(key=lambda d: (d.path, d.message))
    return diags


def _check_requirement(req: ResourceRequirement, path: str, err) -> None:
    if req.baseline < 0:
        err(f"{path}.baseline", f"baseline must be >= 0, got {req.baseline}")
    for k, text in enumerate(req.patterns):
        try:
            parse_patterns(text)
        except PatternError as exc:
            err(f"{path}.patterns[{k}]", str(exc))


# --- serialization ----------------------------------------------------------

def to_document(model: DeploymentModel) -> dict:
    """Model as a JSON-ready dict; parse_model(serialize(m)) == m."""
    doc: dict[str, Any] = {"name": model.name, "nodes": []}
    for node in model.nodes:
        entry: dict[str, Any] = {"id": node.id, "kind": node.kind}
        if node.placement is not None:
            entry["placement"] = {"provider": node.placement.provider,
                                  "region": node.placement.region}
        if node.vm_spec is not None:
            spec: dict[str, Any] = {"operating_system": node.vm_spec.operating_system}
            if node.vm_spec.sku is not None:
                spec["sku"] = node.vm_spec.sku
            if node.vm_spec.cpu_ghz is not None:
                spec["cpu_ghz"] = node.vm_spec.cpu_ghz
            if node.vm_spec.ram_gb is not None:
                spec["ram_gb"] = node.vm_spec.ram_gb
            entry["vm_spec"] = spec
        if node.storage_spec is not None:
            entry["storage_spec"] = {"storage_type": node.storage_spec.storage_type}
        entry["requirements"] = [_requirement_doc(r) for r in node.requirements]
        doc["nodes"].append(entry)
    doc["artifacts"] = [{"id": a.id, "kind": a.kind, "label": a.label}
                        for a in model.artifacts]
    doc["bindings"] = [{"artifact_id": b.artifact_id, "node_id": b.node_id}
                       for b in model.bindings]
    doc["paths"] = [{"id": p.id, "from_node": p.from_node, "to_node": p.to_node,
                     "volume": _requirement_doc(p.volume)} for p in model.paths]
    doc["groups"] = [{"id": g.id, "label": g.label, "node_ids": list(g.node_ids)}
                     for g in model.groups]
    return doc


def _requirement_doc(req: ResourceRequirement) -> dict:
    return {"kind": req.kind, "baseline": req.baseline, "patterns": list(req.patterns)}


def serialize(model: DeploymentModel) -> str:
    return json.dumps(to_document(model), indent=2) + "\n"


# --- simulation graph -------------------------------------------------------

@dataclass(frozen=True)
class ModelGraph:
    """Directed (possibly cyclic) graph: vertices are nodes, edges are paths."""

    nodes: dict[str, Node]
    edges: tuple[CommunicationPath, ...]
    outgoing: dict[str, tuple[CommunicationPath, ...]]
    incoming: dict[str, tuple[CommunicationPath, ...]]

    @property
    def vertex_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def requirements_for(self, subject_id: str) -> tuple[ResourceRequirement, ...]:
        if subject_id in self.nodes:
            return self.nodes[subject_id].requirements
        for edge in self.edges:
            if edge.id == subject_id:
                return (edge.volume,)
        raise KeyError(subject_id)


def build_graph(model: DeploymentModel) -> ModelGraph:
    """Build the simulation graph from a valid model; no edges are synthesized."""
    nodes = {node.id: node for node in model.nodes}
    outgoing: dict[str, list[CommunicationPath]] = {node_id: [] for node_id in nodes}
    incoming: dict[str, list[CommunicationPath]] = {node_id: [] for node_id in nodes}
    for path in model.paths:
        outgoing[path.from_node].append(path)
        incoming[path.to_node].append(path)
    return ModelGraph(
        nodes=nodes,
        edges=tuple(model.paths),
        outgoing={k: tuple(v) for k, v in outgoing.items()},
        incoming={k: tuple(v) for k, v in incoming.items()},
    )
