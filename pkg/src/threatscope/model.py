"""Directed attributed graph model of a system architecture.

Models are exchanged as a GraphML subset: ``<graphml><graph
edgedefault="directed">`` containing ``<node>`` elements with a ``<data
key="name">`` entry plus zero or more ``<data key="attr:KEY">VALUE</data>``
descriptors, and ``<edge>`` elements with ``source``/``target`` and optional
``attr:`` data. Graph-level ``<data key="meta:KEY">`` entries carry model
metadata such as a version label. Every used key requires a ``<key>``
declaration; data keys outside the ``attr:``/``meta:``/``name`` namespaces
are ignored with a recorded warning.

All values are immutable after construction; mutations and diffs produce
new models, so models can be shared freely between threads.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from xml.sax.saxutils import escape, quoteattr

from .errors import ModelValidationError, MutationError, ParseError

GRAPHML_NS = "http://graphml.graphdrawing.org/xmlns"
ATTR_PREFIX = "attr:"
META_PREFIX = "meta:"

# Carriage returns would be folded to newlines by XML line-end
# normalization, so they are emitted as character references.
_TEXT_ESCAPES = {"\r": "&#13;"}


@dataclass(frozen=True, order=True)
class Attribute:
    """One key/value descriptor; the value is free text."""

    key: str
    value: str


def _attr_signature(attributes):
    return tuple(sorted((a.key, a.value) for a in attributes))


@dataclass(frozen=True, eq=False)
class Component:
    id: str
    name: str
    attributes: tuple[Attribute, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))

    def __eq__(self, other):
        if not isinstance(other, Component):
            return NotImplemented
        return (self.id, self.name, _attr_signature(self.attributes)) == (
            other.id, other.name, _attr_signature(other.attributes))

    def __hash__(self):
        return hash((self.id, self.name, _attr_signature(self.attributes)))

    def attribute(self, key: str) -> str | None:
        for a in self.attributes:
            if a.key == key:
                return a.value
        return None


@dataclass(frozen=True, eq=False)
class Connection:
    id: str
    source: str
    target: str
    attributes: tuple[Attribute, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))

    def __eq__(self, other):
        if not isinstance(other, Connection):
            return NotImplemented
        return (self.id, self.source, self.target,
                _attr_signature(self.attributes)) == (
            other.id, other.source, other.target,
            _attr_signature(other.attributes))

    def __hash__(self):
        return hash((self.id, self.source, self.target,
                     _attr_signature(self.attributes)))


@dataclass(frozen=True, eq=False)
class SystemModel:
    """A validated architectural model: components wired by connections.

    Structural equality ignores component/connection order and attribute
    order, but not the attribute multiset.
    """

    id: str = "model"
    components: tuple[Component, ...] = ()
    connections: tuple[Connection, ...] = ()
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(self, "connections", tuple(self.connections))
        object.__setattr__(self, "metadata", dict(self.metadata))

    def __eq__(self, other):
        if not isinstance(other, SystemModel):
            return NotImplemented
        return (self.id == other.id
                and {c.id: c for c in self.components} == {c.id: c for c in other.components}
                and {k.id: k for k in self.connections} == {k.id: k for k in other.connections}
                and self.metadata == other.metadata)

    def component(self, component_id: str) -> Component | None:
        for c in self.components:
            if c.id == component_id:
                return c
        return None

    def connection(self, connection_id: str) -> Connection | None:
        for k in self.connections:
            if k.id == connection_id:
                return k
        return None

    def connections_touching(self, component_id: str) -> list[Connection]:
        return [k for k in self.connections
                if k.source == component_id or k.target == component_id]


@dataclass(frozen=True)
class Violation:
    """One invariant violation; violations are data, not exceptions."""

    code: str
    subject: str
    message: str


def validate_model(model: SystemModel) -> list[Violation]:
    """Check every structural invariant; an empty list means the model is valid."""
    violations = []
    seen_components = set()
    for comp in model.components:
        if not comp.id:
            violations.append(Violation("EMPTY_ID", comp.name, "component with empty id"))
        elif comp.id in seen_components:
            violations.append(Violation("DUPLICATE_ID", comp.id,
                                        f"duplicate component id {comp.id!r}"))
        else:
            seen_components.add(comp.id)
        if not comp.name.strip():
            violations.append(Violation("EMPTY_NAME", comp.id,
                                        f"component {comp.id!r} has an empty name"))
        violations.extend(_validate_attributes(comp.id, comp.attributes))

    seen_connections = set()
    for conn in model.connections:
        if not conn.id:
            violations.append(Violation("EMPTY_ID", f"{conn.source}->{conn.target}",
                                        "connection with empty id"))
        elif conn.id in seen_connections:
            violations.append(Violation("DUPLICATE_ID", conn.id,
                                        f"duplicate connection id {conn.id!r}"))
        else:
            seen_connections.add(conn.id)
        for endpoint, label in ((conn.source, "source"), (conn.target, "target")):
            if not endpoint:
                violations.append(Violation("EMPTY_ENDPOINT", conn.id,
                                            f"connection {conn.id!r} has an empty {label}"))
            elif endpoint not in seen_components and model.component(endpoint) is None:
                violations.append(Violation(
                    "DANGLING_ENDPOINT", conn.id,
                    f"connection {conn.id!r} references unknown component {endpoint!r}"))
        violations.extend(_validate_attributes(conn.id, conn.attributes))
    return violations


def _validate_attributes(owner: str, attributes) -> list[Violation]:
    violations = []
    seen = set()
    for attr in attributes:
        if not attr.key:
            violations.append(Violation("EMPTY_ATTRIBUTE_KEY", owner,
                                        f"{owner!r} carries an attribute with an empty key"))
            continue
        if attr.key in seen:
            violations.append(Violation("DUPLICATE_ATTRIBUTE", owner,
                                        f"{owner!r} repeats attribute key {attr.key!r}"))
        seen.add(attr.key)
        if not attr.value.strip():
            violations.append(Violation("EMPTY_ATTRIBUTE_VALUE", owner,
                                        f"attribute {attr.key!r} on {owner!r} is empty"))
    return violations


# ---------------------------------------------------------------------------
# GraphML parsing / serialization
# ---------------------------------------------------------------------------


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def parse_model(document: str, *, warnings: list[str] | None = None) -> SystemModel:
    """Parse a GraphML-subset document into a validated SystemModel.

    Unknown data keys are ignored and reported through the optional
    ``warnings`` sink. Raises ParseError for malformed XML (with
    line/column) and ModelValidationError when the parsed graph violates
    a model invariant (duplicate ids, dangling edges, empty names).
    """
    sink = warnings if warnings is not None else []
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        line, column = exc.position
        raise ParseError(f"malformed XML: {exc.msg}", line=line, column=column) from exc

    if _local(root.tag) != "graphml":
        raise ParseError(f"root element is <{_local(root.tag)}>, expected <graphml>")
    graph = next((el for el in root if _local(el.tag) == "graph"), None)
    if graph is None:
        raise ParseError("document has no <graph> element")

    declared = {el.get("id") for el in root if _local(el.tag) == "key"}
    used_keys = set()

    model_id = graph.get("id") or "model"
    metadata: dict[str, str] = {}
    components: list[Component] = []
    connections: list[Connection] = []
    pending_edges = []

    for el in graph:
        tag = _local(el.tag)
        if tag == "data":
            key = el.get("key") or ""
            used_keys.add(key)
            if key.startswith(META_PREFIX):
                metadata[key[len(META_PREFIX):]] = el.text or ""
            else:
                sink.append(f"ignored unknown graph data key {key!r}")
        elif tag == "node":
            node_id = el.get("id") or ""
            name = ""
            attrs: list[Attribute] = []
            for data in el:
                if _local(data.tag) != "data":
                    continue
                key = data.get("key") or ""
                used_keys.add(key)
                text = data.text or ""
                if key == "name":
                    name = text
                elif key.startswith(ATTR_PREFIX):
                    attrs.append(Attribute(key[len(ATTR_PREFIX):], text))
                else:
                    sink.append(f"ignored unknown data key {key!r} on node {node_id!r}")
            components.append(Component(node_id, name, tuple(attrs)))
        elif tag == "edge":
            attrs = []
            for data in el:
                if _local(data.tag) != "data":
                    continue
                key = data.get("key") or ""
                used_keys.add(key)
                if key.startswith(ATTR_PREFIX):
                    attrs.append(Attribute(key[len(ATTR_PREFIX):], data.text or ""))
                else:
                    sink.append(f"ignored unknown data key {key!r} on edge "
                                f"{el.get('id') or '?'}")
            pending_edges.append((el.get("id"), el.get("source") or "",
                                  el.get("target") or "", tuple(attrs)))

    # Edges may omit ids; synthesize stable ones that avoid explicit ids.
    explicit = {eid for eid, *_ in pending_edges if eid}
    counter = 0
    for eid, source, target, attrs in pending_edges:
        if not eid:
            while f"edge-{counter}" in explicit:
                counter += 1
            eid = f"edge-{counter}"
            explicit.add(eid)
        connections.append(Connection(eid, source, target, attrs))

    for key in sorted(used_keys):
        if key and key not in declared:
            sink.append(f"data key {key!r} used without a <key> declaration")

    model = SystemModel(model_id, tuple(components), tuple(connections), metadata)
    violations = validate_model(model)
    if violations:
        raise ModelValidationError("model failed validation", violations)
    return model


def serialize_model(model: SystemModel) -> str:
    """Serialize a valid model to deterministic GraphML.

    Components, connections, attributes, and metadata are emitted in
    sorted id/key order, so equal models serialize byte-identically.
    """
    violations = validate_model(model)
    if violations:
        raise ModelValidationError("refusing to serialize an invalid model", violations)

    attr_keys = sorted({a.key for c in model.components for a in c.attributes}
                       | {a.key for k in model.connections for a in k.attributes})
    lines = ['<?xml version="1.0" encoding="UTF-8"?>',
             f'<graphml xmlns="{GRAPHML_NS}">',
             '  <key id="name" for="node" attr.name="name" attr.type="string"/>']
    for key in attr_keys:
        lines.append(f'  <key id={quoteattr(ATTR_PREFIX + key)} for="all"'
                     f' attr.name={quoteattr(key)} attr.type="string"/>')
    for key in sorted(model.metadata):
        lines.append(f'  <key id={quoteattr(META_PREFIX + key)} for="graph"'
                     f' attr.name={quoteattr(key)} attr.type="string"/>')
    lines.append(f'  <graph id={quoteattr(model.id)} edgedefault="directed">')
    for key in sorted(model.metadata):
        lines.append(f'    <data key={quoteattr(META_PREFIX + key)}>'
                     f'{escape(model.metadata[key], _TEXT_ESCAPES)}</data>')
    for comp in sorted(model.components, key=lambda c: c.id):
        lines.append(f'    <node id={quoteattr(comp.id)}>')
        lines.append(f'      <data key="name">{escape(comp.name, _TEXT_ESCAPES)}</data>')
        for attr in sorted(comp.attributes, key=lambda a: a.key):
            lines.append(f'      <data key={quoteattr(ATTR_PREFIX + attr.key)}>'
                         f'{escape(attr.value, _TEXT_ESCAPES)}</data>')
        lines.append('    </node>')
    for conn in sorted(model.connections, key=lambda k: k.id):
        opening = (f'    <edge id={quoteattr(conn.id)} source={quoteattr(conn.source)}'
                   f' target={quoteattr(conn.target)}')
        if conn.attributes:
            lines.append(opening + '>')
            for attr in sorted(conn.attributes, key=lambda a: a.key):
                lines.append(f'      <data key={quoteattr(ATTR_PREFIX + attr.key)}>'
                             f'{escape(attr.value, _TEXT_ESCAPES)}</data>')
            lines.append('    </edge>')
        else:
            lines.append(opening + '/>')
    lines.append('  </graph>')
    lines.append('</graphml>')
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Mutations
# ---------------------------------------------------------------------------

MUTATION_OPS = ("add_component", "remove_component", "add_connection",
                "remove_connection", "set_attribute", "remove_attribute")


@dataclass(frozen=True)
class Mutation:
    """One model edit; apply_mutation validates and applies it atomically."""

    op: str
    id: str
    name: str | None = None
    source: str | None = None
    target: str | None = None
    key: str | None = None
    value: str | None = None
    attributes: tuple[Attribute, ...] = ()

    @classmethod
    def add_component(cls, component_id, name, attributes=()):
        return cls("add_component", component_id, name=name, attributes=tuple(attributes))

    @classmethod
    def remove_component(cls, component_id):
        return cls("remove_component", component_id)

    @classmethod
    def add_connection(cls, connection_id, source, target, attributes=()):
        return cls("add_connection", connection_id, source=source, target=target,
                   attributes=tuple(attributes))

    @classmethod
    def remove_connection(cls, connection_id):
        return cls("remove_connection", connection_id)

    @classmethod
    def set_attribute(cls, entity_id, key, value):
        return cls("set_attribute", entity_id, key=key, value=value)

    @classmethod
    def remove_attribute(cls, entity_id, key):
        return cls("remove_attribute", entity_id, key=key)


def mutation_from_json(obj) -> Mutation:
    if not isinstance(obj, dict):
        raise MutationError("INVALID_MUTATION", "mutation must be a JSON object")
    op = obj.get("op")
    if op not in MUTATION_OPS:
        raise MutationError("INVALID_MUTATION", f"unknown mutation op {op!r}")
    entity_id = obj.get("id")
    if not isinstance(entity_id, str) or not entity_id:
        raise MutationError("INVALID_MUTATION", f"mutation {op!r} requires a non-empty id")
    attrs = tuple(Attribute(str(k), str(v))
                  for k, v in sorted((obj.get("attributes") or {}).items()))
    return Mutation(op, entity_id, name=obj.get("name"), source=obj.get("source"),
                    target=obj.get("target"), key=obj.get("key"),
                    value=obj.get("value"), attributes=attrs)


def apply_mutation(model: SystemModel, mutation: Mutation) -> SystemModel:
    """Apply one mutation, returning a new model; the input is never modified.

    Raises MutationError (NOT_FOUND, CONFLICT, INVALID_MUTATION) when the
    mutation cannot produce a valid model.
    """
    op = mutation.op
    if op == "add_component":
        if model.component(mutation.id) is not None:
            raise MutationError("CONFLICT", f"component {mutation.id!r} already exists")
        comp = Component(mutation.id, mutation.name or "", mutation.attributes)
        return _checked(SystemModel(model.id, model.components + (comp,),
                                    model.connections, model.metadata))
    if op == "remove_component":
        if model.component(mutation.id) is None:
            raise MutationError("NOT_FOUND", f"component {mutation.id!r} does not exist")
        attached = model.connections_touching(mutation.id)
        if attached:
            raise MutationError(
                "CONFLICT",
                f"component {mutation.id!r} still has connections",
                detail={"connections": sorted(k.id for k in attached)})
        return SystemModel(model.id,
                           tuple(c for c in model.components if c.id != mutation.id),
                           model.connections, model.metadata)
    if op == "add_connection":
        if model.connection(mutation.id) is not None:
            raise MutationError("CONFLICT", f"connection {mutation.id!r} already exists")
        conn = Connection(mutation.id, mutation.source or "", mutation.target or "",
                          mutation.attributes)
        return _checked(SystemModel(model.id, model.components,
                                    model.connections + (conn,), model.metadata))
    if op == "remove_connection":
        if model.connection(mutation.id) is None:
            raise MutationError("NOT_FOUND", f"connection {mutation.id!r} does not exist")
        return SystemModel(model.id, model.components,
                           tuple(k for k in model.connections if k.id != mutation.id),
                           model.metadata)
    if op in ("set_attribute", "remove_attribute"):
        return _apply_attribute_mutation(model, mutation)
    raise MutationError("INVALID_MUTATION", f"unknown mutation op {op!r}")


def _apply_attribute_mutation(model: SystemModel, mutation: Mutation) -> SystemModel:
    key = mutation.key or ""
    if not key:
        raise MutationError("INVALID_MUTATION", "attribute mutation requires a key")

    def rewrite(attributes):
        attrs = list(attributes)
        if mutation.op == "set_attribute":
            value = mutation.value if mutation.value is not None else ""
            if not value.strip():
                raise MutationError("INVALID_MUTATION",
                                    f"attribute {key!r} needs a non-empty value")
            for i, a in enumerate(attrs):
                if a.key == key:
                    attrs[i] = Attribute(key, value)
                    return tuple(attrs)
            attrs.append(Attribute(key, value))
            return tuple(attrs)
        if not any(a.key == key for a in attrs):
            raise MutationError("NOT_FOUND",
                                f"attribute {key!r} not present on {mutation.id!r}")
        return tuple(a for a in attrs if a.key != key)

    comp = model.component(mutation.id)
    if comp is not None:
        updated = Component(comp.id, comp.name, rewrite(comp.attributes))
        return SystemModel(model.id,
                           tuple(updated if c.id == comp.id else c for c in model.components),
                           model.connections, model.metadata)
    conn = model.connection(mutation.id)
    if conn is not None:
        updated = Connection(conn.id, conn.source, conn.target, rewrite(conn.attributes))
        return SystemModel(model.id, model.components,
                           tuple(updated if k.id == conn.id else k for k in model.connections),
                           model.metadata)
    raise MutationError("NOT_FOUND", f"no component or connection {mutation.id!r}")


def apply_mutations(model: SystemModel, mutations) -> SystemModel:
    """Apply a batch atomically: any failure leaves the input model usable."""
    current = model
    for mutation in mutations:
        current = apply_mutation(current, mutation)
    return current


def _checked(model: SystemModel) -> SystemModel:
    violations = validate_model(model)
    if violations:
        raise MutationError("CONFLICT", violations[0].message,
                            detail=[v.message for v in violations])
    return model


# ---------------------------------------------------------------------------
# Diffing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ComponentChange:
    """Attribute-level delta for one component present in both versions."""

    added: dict[str, str]
    removed: frozenset[str]
    changed: dict[str, str]
    renamed: str | None = None

    @property
    def empty(self) -> bool:
        return not (self.added or self.removed or self.changed or self.renamed)


@dataclass(frozen=True)
class ModelDiff:
    """Structural change between two model versions, carried with enough
    payload that applying the diff to the old version reproduces the new one.
    Connections whose endpoints or attributes changed appear as a
    remove/add pair under the same id.
    """

    added_components: dict[str, Component] = field(default_factory=dict)
    removed_components: frozenset[str] = frozenset()
    changed_components: dict[str, ComponentChange] = field(default_factory=dict)
    added_connections: dict[str, Connection] = field(default_factory=dict)
    removed_connections: frozenset[str] = frozenset()
    metadata_added: dict[str, str] = field(default_factory=dict)
    metadata_removed: frozenset[str] = frozenset()
    metadata_changed: dict[str, str] = field(default_factory=dict)
    id_changed: str | None = None

    @property
    def empty(self) -> bool:
        return not (self.added_components or self.removed_components
                    or self.changed_components or self.added_connections
                    or self.removed_connections or self.metadata_added
                    or self.metadata_removed or self.metadata_changed
                    or self.id_changed)


def diff_models(before: SystemModel, after: SystemModel) -> ModelDiff:
    """Compute the id-keyed structural diff from ``before`` to ``after``."""
    before_c = {c.id: c for c in before.components}
    after_c = {c.id: c for c in after.components}
    added_components = {cid: after_c[cid] for cid in sorted(after_c.keys() - before_c.keys())}
    removed_components = frozenset(before_c.keys() - after_c.keys())

    changed: dict[str, ComponentChange] = {}
    for cid in sorted(before_c.keys() & after_c.keys()):
        old, new = before_c[cid], after_c[cid]
        old_attrs = {a.key: a.value for a in old.attributes}
        new_attrs = {a.key: a.value for a in new.attributes}
        change = ComponentChange(
            added={k: new_attrs[k] for k in sorted(new_attrs.keys() - old_attrs.keys())},
            removed=frozenset(old_attrs.keys() - new_attrs.keys()),
            changed={k: new_attrs[k] for k in sorted(old_attrs.keys() & new_attrs.keys())
                     if old_attrs[k] != new_attrs[k]},
            renamed=new.name if new.name != old.name else None)
        if not change.empty:
            changed[cid] = change

    before_k = {k.id: k for k in before.connections}
    after_k = {k.id: k for k in after.connections}
    added_connections = {kid: after_k[kid] for kid in sorted(after_k.keys() - before_k.keys())}
    removed_connections = set(before_k.keys() - after_k.keys())
    for kid in sorted(before_k.keys() & after_k.keys()):
        if before_k[kid] != after_k[kid]:
            removed_connections.add(kid)
            added_connections[kid] = after_k[kid]

    return ModelDiff(
        added_components=added_components,
        removed_components=removed_components,
        changed_components=changed,
        added_connections=dict(sorted(added_connections.items())),
        removed_connections=frozenset(removed_connections),
        metadata_added={k: after.metadata[k]
                        for k in sorted(after.metadata.keys() - before.metadata.keys())},
        metadata_removed=frozenset(before.metadata.keys() - after.metadata.keys()),
        metadata_changed={k: after.metadata[k]
                          for k in sorted(before.metadata.keys() & after.metadata.keys())
                          if before.metadata[k] != after.metadata[k]},
        id_changed=after.id if after.id != before.id else None)


def apply_diff(model: SystemModel, diff: ModelDiff) -> SystemModel:
    """Replay a diff onto the model it was computed from."""
    connections = [k for k in model.connections if k.id not in diff.removed_connections]
    components = [c for c in model.components if c.id not in diff.removed_components]

    rebuilt = []
    for comp in components:
        change = diff.changed_components.get(comp.id)
        if change is None:
            rebuilt.append(comp)
            continue
        attrs = [a for a in comp.attributes if a.key not in change.removed]
        attrs = [Attribute(a.key, change.changed.get(a.key, a.value)) for a in attrs]
        attrs.extend(Attribute(k, v) for k, v in change.added.items())
        rebuilt.append(Component(comp.id, change.renamed or comp.name, tuple(attrs)))

    rebuilt.extend(diff.added_components.values())
    connections.extend(diff.added_connections.values())

    metadata = {k: v for k, v in model.metadata.items() if k not in diff.metadata_removed}
    metadata.update(diff.metadata_changed)
    metadata.update(diff.metadata_added)

    return SystemModel(diff.id_changed or model.id, tuple(rebuilt),
                       tuple(connections), metadata)


def diff_to_json(diff: ModelDiff) -> dict:
    return {
        "added_components": [
            {"id": c.id, "name": c.name,
             "attributes": {a.key: a.value for a in c.attributes}}
            for c in diff.added_components.values()],
        "removed_components": sorted(diff.removed_components),
        "changed_components": {
            cid: {"added": change.added, "removed": sorted(change.removed),
                  "changed": change.changed, "renamed": change.renamed}
            for cid, change in diff.changed_components.items()},
        "added_connections": [
            {"id": k.id, "source": k.source, "target": k.target,
             "attributes": {a.key: a.value for a in k.attributes}}
            for k in diff.added_connections.values()],
        "removed_connections": sorted(diff.removed_connections),
        "metadata_added": diff.metadata_added,
        "metadata_removed": sorted(diff.metadata_removed),
        "metadata_changed": diff.metadata_changed,
        "id_changed": diff.id_changed,
        "empty": diff.empty,
    }


def model_to_json(model: SystemModel) -> dict:
    """JSON view of a model for the HTTP API and the dashboard."""
    return {
        "id": model.id,
        "metadata": dict(sorted(model.metadata.items())),
        "components": [
            {"id": c.id, "name": c.name,
             "attributes": [{"key": a.key, "value": a.value} for a in c.attributes]}
            for c in sorted(model.components, key=lambda c: c.id)],
        "connections": [
            {"id": k.id, "source": k.source, "target": k.target,
             "attributes": [{"key": a.key, "value": a.value} for a in k.attributes]}
            for k in sorted(model.connections, key=lambda k: k.id)],
    }
