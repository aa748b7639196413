"""Synthetic instruction-to-tree corpus generator.

Each template bank entry pairs a family of natural-language phrasings with a
parameterized tree builder; instruction and tree are filled from the same
sampled slots, so every generated reference is parser-valid by construction.
"""

from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass

from .bt_model import (
    BtNode,
    COLOR_VALUES,
    NodeKind,
    default_whitelist,
    make_tree,
    serialize_tree,
)

_MOVE_SYNONYMS = ("head to", "move toward", "go to", "navigate to", "proceed to")
_SEE_SYNONYMS = ("detect", "spot", "notice", "sense")
_SWARM_SYNONYMS = ("the swarm", "all drones", "every agent", "the robots")


def _node(tag: str, *children, **params):
    kind = NodeKind.SEQUENCE if tag == "Sequence" else (
        NodeKind.FALLBACK if tag == "Fallback" else NodeKind.ACTION)
    return BtNode(kind=kind, name=tag, children=list(children),
                  params={k: str(v) for k, v in params.items()})


@dataclass(frozen=True)
class TemplateEntry:
    name: str
    weight: float
    instructions: tuple[str, ...]
    # JSON-able nested tree spec; "$slot" strings are filled at sample time.
    tree_spec: dict
    slots: dict


DEFAULT_ENTRIES: tuple[TemplateEntry, ...] = (
    TemplateEntry(
        name="wander",
        weight=1.0,
        instructions=(
            "wander around the arena",
            "let {swarm} roam freely",
            "explore the area at random",
            "patrol the arena without a fixed route",
            "keep {swarm} moving randomly",
        ),
        tree_spec={"tag": "Wander"},
        slots={"swarm": _SWARM_SYNONYMS},
    ),
    TemplateEntry(
        name="change_color",
        weight=1.0,
        instructions=(
            "change color to {color}",
            "turn {color}",
            "set every agent's color to {color}",
            "have {swarm} light up {color}",
            "switch the swarm color to {color}",
        ),
        tree_spec={"tag": "ChangeColor", "params": {"color": "$color"}},
        slots={"color": COLOR_VALUES, "swarm": _SWARM_SYNONYMS},
    ),
    TemplateEntry(
        name="avoid_obstacle",
        weight=1.0,
        instructions=(
            "if you {see} an obstacle, avoid it",
            "steer clear of any obstacle you {see}",
            "avoid obstacles in the way",
            "when an obstacle is detected, move away from it",
        ),
        tree_spec={"tag": "Sequence", "children": [
            {"tag": "ObstacleDetected"}, {"tag": "AvoidObstacle"}]},
        slots={"see": _SEE_SYNONYMS},
    ),
    TemplateEntry(
        name="avoid_and_signal",
        weight=1.0,
        instructions=(
            "{see} an obstacle, avoid it, and change color to {color}",
            "avoid any obstacle and signal by turning {color}",
            "dodge obstacles and light up {color}, otherwise wander",
            "if an obstacle appears, evade it and turn {color}; wander otherwise",
        ),
        tree_spec={"tag": "Fallback", "children": [
            {"tag": "Sequence", "children": [
                {"tag": "ObstacleDetected"}, {"tag": "AvoidObstacle"},
                {"tag": "ChangeColor", "params": {"color": "$color"}}]},
            {"tag": "Wander"}]},
        slots={"see": _SEE_SYNONYMS, "color": COLOR_VALUES},
    ),
    TemplateEntry(
        name="approach_target",
        weight=1.0,
        instructions=(
            "when you {see} the target, {move} it",
            "approach the target once it is detected",
            "close in on the target after spotting it",
            "{move} the target when detected",
        ),
        tree_spec={"tag": "Sequence", "children": [
            {"tag": "TargetDetected"}, {"tag": "ApproachTarget"}]},
        slots={"see": _SEE_SYNONYMS, "move": _MOVE_SYNONYMS},
    ),
    TemplateEntry(
        name="search_and_signal",
        weight=1.0,
        instructions=(
            "find the goal and turn {color}",
            "search for the goal, then change color to {color}",
            "locate the goal and signal success in {color}",
            "hunt for the goal and light up {color} when you reach it",
            "seek out the goal and switch to {color}",
        ),
        tree_spec={"tag": "Sequence", "children": [
            {"tag": "FindGoal"},
            {"tag": "ChangeColor", "params": {"color": "$color"}}]},
        slots={"color": COLOR_VALUES},
    ),
    TemplateEntry(
        name="form_line",
        weight=1.0,
        instructions=(
            "check whether the path is clear and form a line at the center",
            "if the path is clear, line up in the middle of the arena",
            "verify the path is clear, then form a line",
            "form a line at the center when the way is clear",
        ),
        tree_spec={"tag": "Sequence", "children": [
            {"tag": "PathClear"}, {"tag": "FormLine"}]},
        slots={},
    ),
    TemplateEntry(
        name="align",
        weight=1.0,
        instructions=(
            "align movement with the other swarm agents",
            "have {swarm} move in the same direction",
            "synchronize headings across the swarm",
            "match your heading with nearby agents",
        ),
        tree_spec={"tag": "AlignWithSwarm"},
        slots={"swarm": _SWARM_SYNONYMS},
    ),
    TemplateEntry(
        name="freeze_on_target",
        weight=1.0,
        instructions=(
            "{see} the target and freeze movement after reaching it",
            "approach the detected target and stop there",
            "once the target is detected, {move} it and freeze",
            "go to the target and halt when you arrive",
        ),
        tree_spec={"tag": "Sequence", "children": [
            {"tag": "TargetDetected"}, {"tag": "ApproachTarget"},
            {"tag": "FreezeMovement"}]},
        slots={"see": _SEE_SYNONYMS, "move": _MOVE_SYNONYMS},
    ),
    TemplateEntry(
        name="goal_align",
        weight=1.0,
        instructions=(
            "find the goal, turn {color}, and align with the swarm",
            "reach the goal, signal in {color}, then move together",
            "locate the goal, change color to {color}, and synchronize headings",
            "after finding the goal, light up {color} and align movement",
        ),
        tree_spec={"tag": "Sequence", "children": [
            {"tag": "FindGoal"},
            {"tag": "ChangeColor", "params": {"color": "$color"}},
            {"tag": "AlignWithSwarm"}]},
        slots={"color": COLOR_VALUES},
    ),
    TemplateEntry(
        name="hold_at_goal",
        weight=1.0,
        instructions=(
            "search for the goal and freeze once it is found",
            "keep looking for the goal; when found, stop moving",
            "if the goal is found, freeze; otherwise keep searching",
            "hunt for the goal and hold position on arrival",
        ),
        tree_spec={"tag": "Fallback", "children": [
            {"tag": "Sequence", "children": [
                {"tag": "GoalFound"}, {"tag": "FreezeMovement"}]},
            {"tag": "FindGoal"}]},
        slots={},
    ),
    TemplateEntry(
        name="stop_when_reached",
        weight=1.0,
        instructions=(
            "{move} the target and freeze once you have reached it",
            "keep approaching the target until it is reached, then stop",
            "move to the target and freeze on arrival",
            "drive toward the target; once reached, freeze movement",
        ),
        tree_spec={"tag": "Fallback", "children": [
            {"tag": "Sequence", "children": [
                {"tag": "TargetReached"}, {"tag": "FreezeMovement"}]},
            {"tag": "ApproachTarget"}]},
        slots={"move": _MOVE_SYNONYMS},
    ),
)


class TemplateBank:
    def __init__(self, entries=DEFAULT_ENTRIES):
        self.entries = list(entries)
        if not self.entries:
            raise ValueError("template bank is empty")
        total = sum(e.weight for e in self.entries)
        if total <= 0:
            raise ValueError("template weights must sum to a positive value")
        self.probabilities = {e.name: e.weight / total for e in self.entries}
        # Every tree template must validate against the whitelist.
        whitelist = default_whitelist()
        for entry in self.entries:
            spec = _fill(entry.tree_spec, {k: v[0] for k, v in entry.slots.items()})
            serialize_tree(make_tree(_build(spec), whitelist=whitelist), whitelist)

    @classmethod
    def from_file(cls, path) -> "TemplateBank":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        entries = [
            TemplateEntry(
                name=e["name"],
                weight=float(e.get("weight", 1.0)),
                instructions=tuple(e["instructions"]),
                tree_spec=e["tree"],
                slots={k: tuple(v) for k, v in e.get("slots", {}).items()},
            )
            for e in doc["entries"]
        ]
        return cls(entries)

    def to_json(self) -> str:
        return json.dumps(
            {
                "entries": [
                    {
                        "name": e.name,
                        "weight": e.weight,
                        "instructions": list(e.instructions),
                        "tree": e.tree_spec,
                        "slots": {k: list(v) for k, v in e.slots.items()},
                    }
                    for e in self.entries
                ]
            },
            indent=2,
        )


def _fill(spec: dict, values: dict) -> dict:
    filled = {"tag": spec["tag"]}
    if "params" in spec:
        filled["params"] = {
            k: values[v[1:]] if isinstance(v, str) and v.startswith("$") else v
            for k, v in spec["params"].items()
        }
    if "children" in spec:
        filled["children"] = [_fill(c, values) for c in spec["children"]]
    return filled


def _build(spec: dict) -> BtNode:
    children = [_build(c) for c in spec.get("children", [])]
    return _node(spec["tag"], *children, **spec.get("params", {}))


def sample_pair(entry: TemplateEntry, rng: random.Random) -> tuple[str, str]:
    values = {key: rng.choice(options) for key, options in entry.slots.items()}
    instruction = rng.choice(entry.instructions).format(**values)
    tree = make_tree(_build(_fill(entry.tree_spec, values)))
    return instruction, serialize_tree(tree)


def generate_corpus(n: int, seed: int, bank: TemplateBank | None = None,
                    with_names: bool = False):
    """Generate n (instruction, reference_xml) pairs, deterministic per seed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    bank = bank or TemplateBank()
    rng = random.Random(seed)
    names = [e.name for e in bank.entries]
    weights = [e.weight for e in bank.entries]
    by_name = {e.name: e for e in bank.entries}
    pairs = []
    for _ in range(n):
        name = rng.choices(names, weights=weights, k=1)[0]
        instruction, xml = sample_pair(by_name[name], rng)
        pairs.append((name, instruction, xml) if with_names else (instruction, xml))
    return pairs


def behavior_histogram(corpus) -> Counter:
    """Counts of leaf node names across reference trees of a corpus."""
    from .bt_model import parse_document

    counts: Counter = Counter()
    for _, xml in corpus:
        report = parse_document(xml)
        if report.tree is None:
            continue
        for leaf in report.tree.root_node.leaves():
            counts[leaf.name] += 1
    return counts


def write_corpus(pairs, path, id_prefix: str = "synth") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i, (instruction, xml) in enumerate(pairs):
            fh.write(json.dumps({
                "id": f"{id_prefix}-{i:05d}",
                "instruction": instruction,
                "reference_xml": xml,
            }) + "\n")


def split_corpus(pairs, seed: int, fractions=(0.8, 0.1, 0.1)):
    """Seeded train/validation/test split."""
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError("fractions must sum to 1")
    indices = list(range(len(pairs)))
    random.Random(seed).shuffle(indices)
    n_train = int(len(pairs) * fractions[0])
    n_val = int(len(pairs) * fractions[1])
    train = [pairs[i] for i in indices[:n_train]]
    val = [pairs[i] for i in indices[n_train:n_train + n_val]]
    test = [pairs[i] for i in indices[n_train + n_val:]]
    return train, val, test
