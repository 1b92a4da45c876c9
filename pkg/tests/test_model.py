"""Model parsing, serialization, validation, mutation, and diff tests."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from threatscope.errors import ModelValidationError, MutationError, ParseError
from threatscope.model import (
    Attribute,
    Component,
    Connection,
    Mutation,
    SystemModel,
    apply_diff,
    apply_mutation,
    apply_mutations,
    diff_models,
    mutation_from_json,
    parse_model,
    serialize_model,
    validate_model,
)

DEMO_NAMES = {"Programming WS", "Control firewall", "SIS platform",
              "BPCS platform", "Temperature sensor", "Centrifuge"}

EMPTY_DOC = '<graphml><graph id="empty" edgedefault="directed"></graph></graphml>'


def small_model():
    return SystemModel(
        id="m",
        components=(
            Component("c1", "alpha", (Attribute("os", "Windows XP"),)),
            Component("c2", "beta"),
        ),
        connections=(Connection("e1", "c1", "c2", (Attribute("protocol", "MODBUS"),)),),
        metadata={"version": "1"})


# ---------------------------------------------------------------------------
# parse_model
# ---------------------------------------------------------------------------


def test_parse_empty_document():
    model = parse_model(EMPTY_DOC)
    assert model.id == "empty"
    assert model.components == ()
    assert model.connections == ()


def test_parse_demo_fixture(demo_model):
    assert {c.name for c in demo_model.components} == DEMO_NAMES
    assert len(demo_model.components) == 6
    assert len(demo_model.connections) == 7
    bpcs = demo_model.component("BPCS platform")
    assert bpcs.attribute("protocol") == "MODBUS"
    assert demo_model.metadata == {"version": "baseline"}


def test_parse_dangling_edge_names_the_edge():
    doc = """<graphml><graph edgedefault="directed">
      <node id="c1"><data key="name">alpha</data></node>
      <edge id="bad" source="c1" target="c9"/>
    </graph></graphml>"""
    with pytest.raises(ModelValidationError) as err:
        parse_model(doc)
    violations = err.value.violations
    assert any(v.code == "DANGLING_ENDPOINT" and v.subject == "bad" for v in violations)


def test_parse_duplicate_node_id():
    doc = """<graphml><graph edgedefault="directed">
      <node id="c1"><data key="name">alpha</data></node>
      <node id="c1"><data key="name">beta</data></node>
    </graph></graphml>"""
    with pytest.raises(ModelValidationError) as err:
        parse_model(doc)
    assert any(v.code == "DUPLICATE_ID" for v in err.value.violations)


def test_parse_malformed_xml_reports_position():
    with pytest.raises(ParseError) as err:
        parse_model("<graphml>\n  <graph><node\n</graphml>")
    assert err.value.line is not None
    assert err.value.column is not None


def test_parse_unknown_key_warns_but_succeeds():
    doc = """<graphml><graph edgedefault="directed">
      <node id="c1"><data key="name">alpha</data><data key="color">red</data></node>
    </graph></graphml>"""
    warnings = []
    model = parse_model(doc, warnings=warnings)
    assert model.component("c1").attributes == ()
    assert any("color" in w for w in warnings)


def test_parse_missing_name_is_a_violation():
    doc = """<graphml><graph edgedefault="directed">
      <node id="c1"/>
    </graph></graphml>"""
    with pytest.raises(ModelValidationError) as err:
        parse_model(doc)
    assert any(v.code == "EMPTY_NAME" for v in err.value.violations)


def test_parse_synthesizes_missing_edge_ids():
    doc = """<graphml><graph edgedefault="directed">
      <node id="c1"><data key="name">alpha</data></node>
      <edge source="c1" target="c1"/>
    </graph></graphml>"""
    model = parse_model(doc)
    assert len(model.connections) == 1
    assert model.connections[0].id


# ---------------------------------------------------------------------------
# serialize_model
# ---------------------------------------------------------------------------


def test_serialize_empty_model_round_trips():
    model = SystemModel(id="empty")
    assert parse_model(serialize_model(model)) == model


def test_serialize_demo_round_trips(demo_model):
    assert parse_model(serialize_model(demo_model)) == demo_model


def test_serialize_escapes_markup():
    model = SystemModel("m", (Component("c1", "a & b",
                                        (Attribute("note", 'x < "y" > z'),)),))
    text = serialize_model(model)
    assert "<data" in text
    assert parse_model(text) == model


def test_serialize_deterministic_regardless_of_construction_order():
    a = small_model()
    b = SystemModel(
        id="m",
        components=(
            Component("c2", "beta"),
            Component("c1", "alpha", (Attribute("os", "Windows XP"),)),
        ),
        connections=a.connections,
        metadata={"version": "1"})
    assert a == b
    assert serialize_model(a) == serialize_model(b)


def test_serialize_rejects_invalid_model():
    bad = SystemModel("m", (), (Connection("e1", "c1", "c2"),))
    with pytest.raises(ModelValidationError):
        serialize_model(bad)


# ---------------------------------------------------------------------------
# validate_model
# ---------------------------------------------------------------------------


def test_validate_demo_fixture_is_clean(demo_model):
    assert validate_model(demo_model) == []


def test_validate_duplicate_component_id():
    model = SystemModel("m", (Component("c1", "a"), Component("c1", "b")))
    violations = validate_model(model)
    assert [v.code for v in violations] == ["DUPLICATE_ID"]
    assert violations[0].subject == "c1"


def test_validate_dangling_connection():
    model = SystemModel("m", (Component("c1", "a"),),
                        (Connection("e1", "c1", "c9"),))
    violations = validate_model(model)
    assert [v.code for v in violations] == ["DANGLING_ENDPOINT"]


def test_validate_attribute_rules():
    model = SystemModel("m", (Component("c1", "a", (
        Attribute("os", "xp"), Attribute("os", "nt"), Attribute("blank", "   "))),))
    codes = {v.code for v in validate_model(model)}
    assert codes == {"DUPLICATE_ATTRIBUTE", "EMPTY_ATTRIBUTE_VALUE"}


# ---------------------------------------------------------------------------
# apply_mutation
# ---------------------------------------------------------------------------


def test_set_attribute_on_component(demo_model):
    mutated = apply_mutation(demo_model,
                             Mutation.set_attribute("BPCS platform", "os", "VxWorks"))
    assert mutated.component("BPCS platform").attribute("os") == "VxWorks"
    assert demo_model.component("BPCS platform").attribute("os") is None


def test_remove_then_readd_attribute_restores_model(demo_model):
    removed = apply_mutation(demo_model,
                             Mutation.remove_attribute("BPCS platform", "protocol"))
    assert removed != demo_model
    restored = apply_mutation(removed,
                              Mutation.set_attribute("BPCS platform", "protocol", "MODBUS"))
    assert restored == demo_model


def test_remove_component_with_connections_conflicts(demo_model):
    with pytest.raises(MutationError) as err:
        apply_mutation(demo_model, Mutation.remove_component("Centrifuge"))
    assert err.value.code == "CONFLICT"
    assert err.value.detail == {"connections": ["e4", "e5"]}


def test_set_attribute_on_unknown_component(demo_model):
    with pytest.raises(MutationError) as err:
        apply_mutation(demo_model, Mutation.set_attribute("ghost", "os", "xp"))
    assert err.value.code == "NOT_FOUND"


def test_set_attribute_on_connection(demo_model):
    mutated = apply_mutation(demo_model, Mutation.set_attribute("e4", "protocol", "analog"))
    assert mutated.connection("e4").attributes == (Attribute("protocol", "analog"),)


def test_add_then_remove_connection(demo_model):
    added = apply_mutation(demo_model, Mutation.add_connection(
        "e8", "Centrifuge", "Centrifuge", (Attribute("protocol", "local"),)))
    assert added.connection("e8").source == "Centrifuge"  # self-loops permitted
    assert apply_mutation(added, Mutation.remove_connection("e8")) == demo_model


def test_add_connection_with_unknown_endpoint_rejected(demo_model):
    with pytest.raises(MutationError) as err:
        apply_mutation(demo_model, Mutation.add_connection("e9", "ghost", "Centrifuge"))
    assert err.value.code == "CONFLICT"


def test_add_component_duplicate_id(demo_model):
    with pytest.raises(MutationError) as err:
        apply_mutation(demo_model, Mutation.add_component("Centrifuge", "Another"))
    assert err.value.code == "CONFLICT"


def test_apply_mutations_is_sequential(demo_model):
    mutated = apply_mutations(demo_model, [
        Mutation.add_component("Historian", "Historian",
                               (Attribute("software", "time series database"),)),
        Mutation.add_connection("e8", "Programming WS", "Historian"),
    ])
    assert mutated.component("Historian") is not None
    assert mutated.connection("e8") is not None


def test_mutation_from_json_round_trip():
    mutation = mutation_from_json({"op": "set_attribute", "id": "c1",
                                   "key": "os", "value": "xp"})
    assert mutation == Mutation.set_attribute("c1", "os", "xp")
    with pytest.raises(MutationError):
        mutation_from_json({"op": "explode", "id": "c1"})
    with pytest.raises(MutationError):
        mutation_from_json({"op": "set_attribute"})


# ---------------------------------------------------------------------------
# diff_models
# ---------------------------------------------------------------------------


def test_diff_identity(demo_model):
    assert diff_models(demo_model, demo_model).empty


def test_diff_added_attribute(demo_model):
    after = apply_mutation(demo_model,
                           Mutation.set_attribute("Programming WS", "os", "Windows XP"))
    diff = diff_models(demo_model, after)
    assert set(diff.changed_components) == {"Programming WS"}
    change = diff.changed_components["Programming WS"]
    assert change.added == {"os": "Windows XP"}
    assert not change.removed and not change.changed and change.renamed is None
    assert not diff.added_components and not diff.removed_components


def test_diff_removed_component_with_connections(demo_model):
    after = apply_mutations(demo_model, [
        Mutation.remove_connection("e1"),
        Mutation.remove_component("Control firewall"),
    ])
    diff = diff_models(demo_model, after)
    assert diff.removed_components == frozenset({"Control firewall"})
    assert diff.removed_connections == frozenset({"e1"})


def test_diff_rewired_connection_is_remove_plus_add(demo_model):
    after = apply_mutations(demo_model, [
        Mutation.remove_connection("e7"),
        Mutation.add_connection("e7", "Temperature sensor", "Centrifuge"),
    ])
    diff = diff_models(demo_model, after)
    assert "e7" in diff.removed_connections
    assert "e7" in diff.added_connections


# ---------------------------------------------------------------------------
# Property tests
# ---------------------------------------------------------------------------

_names = st.sampled_from(["alpha", "beta", "controller", "sensor gateway", "üplink"])
_keys = st.sampled_from(["os", "software", "protocol", "role"])
_values = st.sampled_from(["Windows XP", "MODBUS", "a < b & c", "plc runtime", "42"])


@st.composite
def models(draw):
    component_ids = draw(st.lists(
        st.sampled_from([f"c{i}" for i in range(6)]), unique=True, max_size=5))
    components = []
    for cid in component_ids:
        keys = draw(st.lists(_keys, unique=True, max_size=3))
        components.append(Component(
            cid, draw(_names),
            tuple(Attribute(k, draw(_values)) for k in keys)))
    connections = []
    if component_ids:
        n_edges = draw(st.integers(min_value=0, max_value=4))
        for i in range(n_edges):
            connections.append(Connection(
                f"e{i}",
                draw(st.sampled_from(component_ids)),
                draw(st.sampled_from(component_ids)),
                tuple(Attribute(k, draw(_values))
                      for k in draw(st.lists(_keys, unique=True, max_size=2)))))
    metadata = draw(st.dictionaries(st.sampled_from(["version", "name"]),
                                    st.sampled_from(["1", "draft"]), max_size=2))
    return SystemModel(draw(st.sampled_from(["m", "other"])),
                       tuple(components), tuple(connections), metadata)


@settings(max_examples=100, deadline=None)
@given(models())
def test_round_trip_property(model):
    assert parse_model(serialize_model(model)) == model


@settings(max_examples=100, deadline=None)
@given(models(), models())
def test_diff_apply_property(before, after):
    assert apply_diff(before, diff_models(before, after)) == after


@settings(max_examples=100, deadline=None)
@given(models(), st.data())
def test_mutation_atomicity_property(model, data):
    op = data.draw(st.sampled_from(["add_component", "remove_component",
                                    "add_connection", "remove_connection",
                                    "set_attribute", "remove_attribute"]))
    entity = data.draw(st.sampled_from(
        [c.id for c in model.components] + [k.id for k in model.connections]
        + ["ghost", "c0", "e0"]))
    mutation = Mutation(op, entity, name="thing", source=entity, target=entity,
                        key=data.draw(_keys), value=data.draw(_values))
    try:
        result = apply_mutation(model, mutation)
    except MutationError:
        return  # rejected atomically; the input model is untouched by design
    assert validate_model(result) == []
