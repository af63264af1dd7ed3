import json

import pytest

from cloudcost import model as m
from cloudcost.errors import ModelError

MINIMAL = """
{
  "name": "tiny",
  "nodes": [
    {"id": "web1", "kind": "virtual_machine",
     "placement": {"provider": "aws", "region": "us-east"},
     "vm_spec": {"operating_system": "linux", "sku": "standard.small"},
     "requirements": [{"kind": "vm_hours", "baseline": 720}]}
  ]
}
"""


def minimal_model():
    return m.parse_model(MINIMAL)


class TestParse:
    def test_minimal_model(self):
        parsed = minimal_model()
        assert len(parsed.nodes) == 1
        assert parsed.paths == ()
        assert parsed.nodes[0].vm_spec.sku == "standard.small"

    def test_syntax_error_reports_position(self):
        with pytest.raises(ModelError) as exc:
            m.parse_model("{ not json")
        assert "line 1" in str(exc.value)

    def test_unknown_top_level_key(self):
        doc = json.loads(MINIMAL)
        doc["surprise"] = 1
        with pytest.raises(ModelError) as exc:
            m.parse_model(json.dumps(doc))
        assert "surprise" in str(exc.value)

    def test_unknown_node_kind(self):
        doc = json.loads(MINIMAL)
        doc["nodes"][0]["kind"] = "mainframe"
        with pytest.raises(ModelError) as exc:
            m.parse_model(json.dumps(doc))
        assert "mainframe" in str(exc.value)

    def test_dangling_binding_names_the_node(self):
        doc = json.loads(MINIMAL)
        doc["artifacts"] = [{"id": "app", "kind": "application"}]
        doc["bindings"] = [{"artifact_id": "app", "node_id": "web9"}]
        with pytest.raises(ModelError) as exc:
            m.parse_model(json.dumps(doc))
        assert "web9" in str(exc.value)

    def test_bad_pattern_text_rejected_with_path(self):
        doc = json.loads(MINIMAL)
        doc["nodes"][0]["requirements"][0]["patterns"] = ["perm: every month %5"]
        with pytest.raises(ModelError) as exc:
            m.parse_model(json.dumps(doc))
        assert "patterns[0]" in str(exc.value)

    def test_digital_library_case(self, demo_model_text):
        parsed = m.parse_model(demo_model_text)
        vms = [n for n in parsed.nodes if n.kind == m.VIRTUAL_MACHINE]
        stores = [n for n in parsed.nodes if n.kind == m.VIRTUAL_STORAGE]
        assert len(vms) == 15
        primary = [r for n in stores for r in n.requirements if r.kind == m.STORAGE_GB]
        assert max(r.baseline for r in primary) == 2000
        assert m.validate(parsed) == []


class TestValidate:
    def test_valid_model_has_no_diagnostics(self):
        assert m.validate(minimal_model()) == []

    def test_node_in_two_groups(self):
        parsed = minimal_model()
        bad = m.DeploymentModel(
            parsed.name, parsed.nodes, groups=(
                m.Group("a", "", ("web1",)),
                m.Group("b", "", ("web1",)),
            ))
        diags = m.validate(bad)
        assert len(diags) == 1
        assert diags[0].severity == "error"
        assert "already belongs" in diags[0].message

    def test_requirement_legality_table(self):
        # independent statement of which requirement kinds belong where
        expected_legal = {
            ("virtual_machine", "vm_hours"), ("virtual_machine", "data_in_gb"),
            ("virtual_machine", "data_out_gb"),
            ("hosted_database", "vm_hours"), ("hosted_database", "storage_gb"),
            ("hosted_database", "io_in_requests"), ("hosted_database", "io_out_requests"),
            ("hosted_database", "io_gb"), ("hosted_database", "data_in_gb"),
            ("hosted_database", "data_out_gb"),
            ("virtual_storage", "storage_gb"), ("virtual_storage", "io_in_requests"),
            ("virtual_storage", "io_out_requests"), ("virtual_storage", "io_gb"),
            ("virtual_storage", "data_in_gb"), ("virtual_storage", "data_out_gb"),
            ("remote_node", "data_in_gb"), ("remote_node", "data_out_gb"),
        }
        for node_kind in m.NODE_KINDS:
            for req_kind in m.REQUIREMENT_KINDS:
                node = _node_of_kind(node_kind, req_kind)
                diags = m.validate(m.DeploymentModel("legality", (node,)))
                illegal = [d for d in diags if "not legal" in d.message]
                if (node_kind, req_kind) in expected_legal:
                    assert not illegal, (node_kind, req_kind)
                else:
                    assert illegal, (node_kind, req_kind)

    def test_storage_requirement_on_vm_flagged(self):
        node = _node_of_kind(m.VIRTUAL_MACHINE, m.STORAGE_GB)
        diags = m.validate(m.DeploymentModel("bad", (node,)))
        assert any("not legal" in d.message for d in diags)

    def test_vm_spec_requires_exactly_one_shape(self):
        both = m.Node("n", m.VIRTUAL_MACHINE, m.Placement("p", "r"),
                      m.VmSpec("linux", sku="s", cpu_ghz=2.0, ram_gb=4.0))
        neither = m.Node("n", m.VIRTUAL_MACHINE, m.Placement("p", "r"),
                         m.VmSpec("linux"))
        for node in (both, neither):
            diags = m.validate(m.DeploymentModel("x", (node,)))
            assert any("exactly one of" in d.message for d in diags)

    def test_remote_node_must_not_be_placed(self):
        node = m.Node("r", m.REMOTE_NODE, m.Placement("p", "r"))
        diags = m.validate(m.DeploymentModel("x", (node,)))
        assert any("no placement" in d.message for d in diags)

    def test_duplicate_requirement_kind_flagged(self):
        node = m.Node("n", m.VIRTUAL_MACHINE, m.Placement("p", "r"),
                      m.VmSpec("linux", sku="s"),
                      requirements=(m.ResourceRequirement(m.VM_HOURS, 1),
                                    m.ResourceRequirement(m.VM_HOURS, 2)))
        diags = m.validate(m.DeploymentModel("x", (node,)))
        assert any("duplicate requirement" in d.message for d in diags)

    def test_diagnostics_sorted_and_stable(self, demo_model_text):
        parsed = m.parse_model(demo_model_text)
        broken = m.DeploymentModel(
            parsed.name, parsed.nodes, parsed.artifacts,
            (m.DeploymentBinding("nope", "web9"),), parsed.paths, parsed.groups)
        first = m.validate(broken)
        second = m.validate(broken)
        assert first == second
        assert [d.path for d in first] == sorted(d.path for d in first)


class TestRoundTrip:
    def test_serialize_reparses_equal(self, demo_model_text):
        parsed = m.parse_model(demo_model_text)
        again = m.parse_model(m.serialize(parsed))
        assert again == parsed

    def test_minimal_round_trip(self):
        parsed = minimal_model()
        assert m.parse_model(m.serialize(parsed)) == parsed


class TestGraph:
    def test_two_cycle(self):
        doc = {
            "name": "pair",
            "nodes": [_vm_doc("a"), _vm_doc("b")],
            "paths": [
                {"id": "ab", "from_node": "a", "to_node": "b",
                 "volume": {"kind": "data_link_gb", "baseline": 1}},
                {"id": "ba", "from_node": "b", "to_node": "a",
                 "volume": {"kind": "data_link_gb", "baseline": 1}},
            ],
        }
        graph = m.build_graph(m.parse_model(json.dumps(doc)))
        assert graph.vertex_count == 2
        assert graph.edge_count == 2
        assert [p.id for p in graph.outgoing["a"]] == ["ab"]
        assert [p.id for p in graph.incoming["a"]] == ["ba"]

    def test_edgeless_graph(self):
        graph = m.build_graph(minimal_model())
        assert graph.edge_count == 0
        assert graph.vertex_count == 1

    def test_demo_adjacency_matches_naive_scan(self, demo_model_text):
        parsed = m.parse_model(demo_model_text)
        graph = m.build_graph(parsed)
        assert graph.vertex_count == len(parsed.nodes)
        assert graph.edge_count == len(parsed.paths)
        # oracle: adjacency from a flat scan of the declared path list
        for node in parsed.nodes:
            out = [p.id for p in parsed.paths if p.from_node == node.id]
            incoming = [p.id for p in parsed.paths if p.to_node == node.id]
            assert [p.id for p in graph.outgoing[node.id]] == out
            assert [p.id for p in graph.incoming[node.id]] == incoming

    def test_requirements_lookup(self, demo_model_text):
        parsed = m.parse_model(demo_model_text)
        graph = m.build_graph(parsed)
        assert graph.requirements_for("store-1") == parsed.node_by_id("store-1").requirements
        assert graph.requirements_for("p-backup")[0].kind == m.DATA_LINK_GB
        with pytest.raises(KeyError):
            graph.requirements_for("missing")


def _vm_doc(node_id):
    return {"id": node_id, "kind": "virtual_machine",
            "placement": {"provider": "p", "region": "r"},
            "vm_spec": {"operating_system": "linux", "sku": "s"},
            "requirements": [{"kind": "vm_hours", "baseline": 10}]}


def _node_of_kind(node_kind, req_kind):
    placement = None if node_kind == m.REMOTE_NODE else m.Placement("p", "r")
    vm_spec = m.VmSpec("linux", sku="s") if node_kind == m.VIRTUAL_MACHINE else None
    return m.Node("n", node_kind, placement, vm_spec, None,
                  (m.ResourceRequirement(req_kind, 1.0),))
