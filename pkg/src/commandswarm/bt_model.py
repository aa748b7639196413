"""Behavior-tree data model, strict XML wire format, and whitelist validation.

The parser is the execution gate: a model output is either Accepted (and
becomes a ``BehaviorTree``) or Rejected with exactly one failure category.
Categories are checked in a fixed order and the first match wins:

    NON_XML -> MALFORMED_XML -> INCOMPLETE_STRUCTURE -> UNSUPPORTED_NODE

Everything here is pure: identical input bytes produce identical reports.
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

CONTROL_TAGS = ("Sequence", "Fallback")


class NodeKind(Enum):
    SEQUENCE = "Sequence"
    FALLBACK = "Fallback"
    ACTION = "Action"
    CONDITION = "Condition"


LEAF_KINDS = (NodeKind.ACTION, NodeKind.CONDITION)


class FailureCategory(Enum):
    NON_XML = "NonXml"
    MALFORMED_XML = "MalformedXml"
    INCOMPLETE_STRUCTURE = "IncompleteStructure"
    UNSUPPORTED_NODE = "UnsupportedNode"


# Exit-code / ordering convention used by the CLI and the eval reports.
CATEGORY_ORDER = (
    FailureCategory.NON_XML,
    FailureCategory.MALFORMED_XML,
    FailureCategory.INCOMPLETE_STRUCTURE,
    FailureCategory.UNSUPPORTED_NODE,
)


@dataclass
class BtNode:
    kind: NodeKind
    name: str
    params: dict[str, str] = field(default_factory=dict)
    children: list["BtNode"] = field(default_factory=list)

    def is_leaf(self) -> bool:
        return self.kind in LEAF_KINDS

    def leaves(self):
        if self.is_leaf():
            yield self
        for child in self.children:
            yield from child.leaves()


@dataclass
class BehaviorTree:
    tree_id: str
    root_node: BtNode
    # (kind, name) pairs as declared in TreeNodesModel, in document order.
    declared_model: list[tuple[NodeKind, str]]


@dataclass(frozen=True)
class ParamSpec:
    key: str
    # None means free-form value; otherwise the closed set of legal values.
    allowed_values: Optional[tuple[str, ...]] = None

    def accepts(self, value: str) -> bool:
        if value == "":
            return False
        return self.allowed_values is None or value in self.allowed_values


@dataclass(frozen=True)
class LeafSpec:
    name: str
    required_params: tuple[ParamSpec, ...] = ()


class NodeWhitelist:
    """Closed set of executable action/condition names with param rules."""

    def __init__(self, actions: list[LeafSpec], conditions: list[LeafSpec]):
        self.actions = {spec.name: spec for spec in actions}
        self.conditions = {spec.name: spec for spec in conditions}
        overlap = set(self.actions) & set(self.conditions)
        if overlap:
            raise ValueError(f"action/condition name overlap: {sorted(overlap)}")

    def __len__(self) -> int:
        return len(self.actions) + len(self.conditions)

    def kind_of(self, name: str) -> Optional[NodeKind]:
        if name in self.actions:
            return NodeKind.ACTION
        if name in self.conditions:
            return NodeKind.CONDITION
        return None

    def spec_of(self, name: str) -> Optional[LeafSpec]:
        return self.actions.get(name) or self.conditions.get(name)

    def names(self) -> list[str]:
        return list(self.actions) + list(self.conditions)

    @classmethod
    def from_json(cls, text: str) -> "NodeWhitelist":
        doc = json.loads(text)

        def build(entry) -> LeafSpec:
            params = []
            for key, allowed in entry.get("params", {}).items():
                if allowed == "free":
                    params.append(ParamSpec(key))
                else:
                    params.append(ParamSpec(key, tuple(allowed)))
            return LeafSpec(entry["name"], tuple(params))

        return cls(
            actions=[build(e) for e in doc.get("actions", [])],
            conditions=[build(e) for e in doc.get("conditions", [])],
        )

    @classmethod
    def from_file(cls, path) -> "NodeWhitelist":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())

    def to_json(self) -> str:
        def dump(spec: LeafSpec) -> dict:
            entry: dict = {"name": spec.name}
            if spec.required_params:
                entry["params"] = {
                    p.key: "free" if p.allowed_values is None else list(p.allowed_values)
                    for p in spec.required_params
                }
            return entry

        return json.dumps(
            {
                "actions": [dump(s) for s in self.actions.values()],
                "conditions": [dump(s) for s in self.conditions.values()],
            },
            indent=2,
        )


COLOR_VALUES = ("red", "green", "blue", "yellow", "white")


def default_whitelist() -> NodeWhitelist:
    """The fixed 13-entry primitive vocabulary (8 actions, 5 conditions)."""
    return NodeWhitelist(
        actions=[
            LeafSpec("Wander"),
            LeafSpec("AvoidObstacle"),
            LeafSpec("ChangeColor", (ParamSpec("color", COLOR_VALUES),)),
            LeafSpec("ApproachTarget"),
            LeafSpec("FormLine"),
            LeafSpec("AlignWithSwarm"),
            LeafSpec("FreezeMovement"),
            LeafSpec("FindGoal"),
        ],
        conditions=[
            LeafSpec("ObstacleDetected"),
            LeafSpec("TargetDetected"),
            LeafSpec("PathClear"),
            LeafSpec("GoalFound"),
            LeafSpec("TargetReached"),
        ],
    )


@dataclass
class Diagnostic:
    location: str
    message: str


@dataclass
class ValidationReport:
    verdict: str  # "Accepted" | "Rejected"
    category: Optional[FailureCategory] = None
    diagnostics: list[Diagnostic] = field(default_factory=list)
    tree: Optional[BehaviorTree] = None

    @property
    def accepted(self) -> bool:
        return self.verdict == "Accepted"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "category": self.category.value if self.category else None,
            "diagnostics": [
                {"location": d.location, "message": d.message} for d in self.diagnostics
            ],
        }


def _reject(category: FailureCategory, location: str, message: str) -> ValidationReport:
    return ValidationReport(
        verdict="Rejected",
        category=category,
        diagnostics=[Diagnostic(location, message)],
    )


class _Reject(Exception):
    def __init__(self, report: ValidationReport):
        self.report = report


def parse_document(text: str, whitelist: Optional[NodeWhitelist] = None) -> ValidationReport:
    """Validate raw model output; never raises, all failures are data."""
    if whitelist is None:
        whitelist = default_whitelist()
    try:
        root = _parse_xml(text)
        tree = _check_structure(root)
        _check_whitelist(tree, whitelist)
    except _Reject as rej:
        return rej.report
    return ValidationReport(verdict="Accepted", tree=tree)


def classify_failure(text: str, whitelist: Optional[NodeWhitelist] = None):
    """Same decision procedure as parse_document, exposed for the eval harness.

    Returns a FailureCategory, or the string "Accepted".
    """
    report = parse_document(text, whitelist)
    return "Accepted" if report.accepted else report.category


def _parse_xml(text: str) -> ET.Element:
    trimmed = text.strip() if isinstance(text, str) else ""
    if not trimmed or not trimmed.startswith("<"):
        raise _Reject(
            _reject(FailureCategory.NON_XML, "document", "input is not an XML document")
        )
    try:
        return ET.fromstring(trimmed)
    except ET.ParseError as exc:
        line, col = exc.position
        # Trailing prose after a complete document counts as surrounding text.
        if "junk after document element" in str(exc):
            raise _Reject(
                _reject(
                    FailureCategory.NON_XML,
                    f"line {line}, column {col}",
                    "text after the XML document",
                )
            ) from exc
        raise _Reject(
            _reject(FailureCategory.MALFORMED_XML, f"line {line}, column {col}", str(exc))
        ) from exc


def _incomplete(location: str, message: str) -> _Reject:
    return _Reject(_reject(FailureCategory.INCOMPLETE_STRUCTURE, location, message))


def _unsupported(location: str, message: str) -> _Reject:
    return _Reject(_reject(FailureCategory.UNSUPPORTED_NODE, location, message))


def _check_no_text(elem: ET.Element, path: str) -> None:
    if elem.text and elem.text.strip():
        raise _incomplete(path, "unexpected text content")
    for child in elem:
        if child.tail and child.tail.strip():
            raise _incomplete(path, "unexpected text content")


def _check_structure(root: ET.Element) -> BehaviorTree:
    if root.tag != "root":
        raise _incomplete(root.tag, f"document element must be <root>, got <{root.tag}>")
    extra = set(root.attrib) - {"main_tree_to_execute"}
    if extra:
        raise _incomplete("root", f"unexpected attributes on <root>: {sorted(extra)}")
    _check_no_text(root, "root")

    bt_elems = [e for e in root if e.tag == "BehaviorTree"]
    model_elems = [e for e in root if e.tag == "TreeNodesModel"]
    others = [e for e in root if e.tag not in ("BehaviorTree", "TreeNodesModel")]
    if others:
        raise _incomplete("root", f"unexpected element <{others[0].tag}> under <root>")
    if len(bt_elems) != 1:
        raise _incomplete("root", f"expected exactly one <BehaviorTree>, got {len(bt_elems)}")
    if len(model_elems) != 1:
        raise _incomplete(
            "root", f"expected exactly one <TreeNodesModel>, got {len(model_elems)}"
        )

    bt_elem, model_elem = bt_elems[0], model_elems[0]
    extra = set(bt_elem.attrib) - {"ID"}
    if extra:
        raise _incomplete("root/BehaviorTree", f"unexpected attributes: {sorted(extra)}")
    tree_id = bt_elem.get("ID", "MainTree")
    main_id = root.get("main_tree_to_execute")
    if main_id is not None and main_id != tree_id:
        raise _incomplete(
            "root", f"main_tree_to_execute={main_id!r} does not match BehaviorTree ID={tree_id!r}"
        )
    _check_no_text(bt_elem, "root/BehaviorTree")
    if len(bt_elem) != 1:
        raise _incomplete(
            "root/BehaviorTree", f"expected exactly one top-level node, got {len(bt_elem)}"
        )

    declared = _read_declarations(model_elem)
    declared_kinds = dict((name, kind) for kind, name in declared)
    node = _build_node(bt_elem[0], "root/BehaviorTree", declared_kinds)
    return BehaviorTree(tree_id=tree_id, root_node=node, declared_model=declared)


def _read_declarations(model_elem: ET.Element) -> list[tuple[NodeKind, str]]:
    _check_no_text(model_elem, "root/TreeNodesModel")
    declared: list[tuple[NodeKind, str]] = []
    seen: dict[str, NodeKind] = {}
    for entry in model_elem:
        path = f"root/TreeNodesModel/{entry.tag}"
        if entry.tag not in ("Action", "Condition"):
            raise _incomplete(path, "declarations must be <Action> or <Condition>")
        if set(entry.attrib) != {"ID"} or not entry.get("ID"):
            raise _incomplete(path, "declaration requires exactly one non-empty ID attribute")
        if len(entry):
            raise _incomplete(path, "declarations must be empty elements")
        kind = NodeKind.ACTION if entry.tag == "Action" else NodeKind.CONDITION
        name = entry.get("ID", "")
        if name in seen:
            if seen[name] is not kind:
                raise _incomplete(path, f"{name!r} declared as both Action and Condition")
            continue  # kind-consistent duplicates are tolerated
        seen[name] = kind
        declared.append((kind, name))
    return declared


def _build_node(
    elem: ET.Element, parent_path: str, declared_kinds: dict[str, NodeKind]
) -> BtNode:
    path = f"{parent_path}/{elem.tag}"
    _check_no_text(elem, path)
    if elem.tag in CONTROL_TAGS:
        if elem.attrib:
            raise _incomplete(path, "control nodes take no attributes")
        if len(elem) == 0:
            raise _incomplete(path, f"<{elem.tag}> must have at least one child")
        kind = NodeKind.SEQUENCE if elem.tag == "Sequence" else NodeKind.FALLBACK
        children = [_build_node(c, path, declared_kinds) for c in elem]
        return BtNode(kind=kind, name=elem.tag, children=children)

    # Leaf node: must be empty and declared in TreeNodesModel.
    if len(elem):
        raise _incomplete(path, f"leaf <{elem.tag}> must not have children")
    if elem.tag not in declared_kinds:
        raise _incomplete(path, f"leaf <{elem.tag}> is not declared in TreeNodesModel")
    return BtNode(
        kind=declared_kinds[elem.tag],
        name=elem.tag,
        params=dict(elem.attrib),
    )


def _check_whitelist(tree: BehaviorTree, whitelist: NodeWhitelist) -> None:
    for kind, name in tree.declared_model:
        wl_kind = whitelist.kind_of(name)
        if wl_kind is None:
            raise _unsupported(
                f"root/TreeNodesModel/{name}", f"{name!r} is not a whitelisted node"
            )
        if wl_kind is not kind:
            raise _unsupported(
                f"root/TreeNodesModel/{name}",
                f"{name!r} declared as {kind.value} but whitelisted as {wl_kind.value}",
            )
    for leaf in tree.root_node.leaves():
        spec = whitelist.spec_of(leaf.name)
        if spec is None:
            raise _unsupported(f"leaf {leaf.name}", f"{leaf.name!r} is not a whitelisted node")
        required = {p.key: p for p in spec.required_params}
        for key in required:
            if key not in leaf.params:
                raise _unsupported(
                    f"leaf {leaf.name}", f"missing required param {key!r}"
                )
        for key, value in leaf.params.items():
            param = required.get(key)
            if param is None:
                raise _unsupported(f"leaf {leaf.name}", f"unexpected param {key!r}")
            if not param.accepts(value):
                raise _unsupported(
                    f"leaf {leaf.name}", f"illegal value {value!r} for param {key!r}"
                )


class SerializationError(ValueError):
    pass


def serialize_tree(tree: BehaviorTree, whitelist: Optional[NodeWhitelist] = None) -> str:
    """Emit the canonical wire format; round-trips through parse_document."""
    if whitelist is None:
        whitelist = default_whitelist()
    declared_kinds = {name: kind for kind, name in tree.declared_model}
    for leaf in tree.root_node.leaves():
        if whitelist.kind_of(leaf.name) is None:
            raise SerializationError(f"leaf {leaf.name!r} is not in the whitelist")
        if leaf.name not in declared_kinds:
            raise SerializationError(f"leaf {leaf.name!r} is not declared in the tree model")
        if declared_kinds[leaf.name] is not whitelist.kind_of(leaf.name):
            raise SerializationError(f"leaf {leaf.name!r} declared with the wrong kind")

    lines = [f'<root main_tree_to_execute="{tree.tree_id}">']
    lines.append(f'  <BehaviorTree ID="{tree.tree_id}">')
    _emit(tree.root_node, 2, lines)
    lines.append("  </BehaviorTree>")
    lines.append("  <TreeNodesModel>")
    for kind, name in tree.declared_model:
        tag = "Action" if kind is NodeKind.ACTION else "Condition"
        lines.append(f'    <{tag} ID="{name}"/>')
    lines.append("  </TreeNodesModel>")
    lines.append("</root>")
    return "\n".join(lines) + "\n"


def _emit(node: BtNode, depth: int, lines: list[str]) -> None:
    pad = "  " * depth
    if node.is_leaf():
        attrs = "".join(f' {k}="{v}"' for k, v in node.params.items())
        lines.append(f"{pad}<{node.name}{attrs}/>")
    else:
        lines.append(f"{pad}<{node.name}>")
        for child in node.children:
            _emit(child, depth + 1, lines)
        lines.append(f"{pad}</{node.name}>")


def make_tree(root_node: BtNode, tree_id: str = "MainTree",
              whitelist: Optional[NodeWhitelist] = None) -> BehaviorTree:
    """Build a BehaviorTree with the TreeNodesModel derived from the leaves."""
    if whitelist is None:
        whitelist = default_whitelist()
    declared: list[tuple[NodeKind, str]] = []
    seen = set()
    for leaf in root_node.leaves():
        kind = whitelist.kind_of(leaf.name)
        if kind is None:
            raise SerializationError(f"leaf {leaf.name!r} is not in the whitelist")
        leaf.kind = kind
        if leaf.name not in seen:
            seen.add(leaf.name)
            declared.append((kind, leaf.name))
    return BehaviorTree(tree_id=tree_id, root_node=root_node, declared_model=declared)
