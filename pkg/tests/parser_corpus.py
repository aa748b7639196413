"""Hand-labeled validation corpus: at least 8 documents per outcome."""

VALID_SCENARIO_1 = """<root main_tree_to_execute="MainTree">
  <BehaviorTree ID="MainTree">
    <Sequence>
      <ObstacleDetected/>
      <AvoidObstacle/>
      <ChangeColor color="green"/>
    </Sequence>
  </BehaviorTree>
  <TreeNodesModel>
    <Condition ID="ObstacleDetected"/>
    <Action ID="AvoidObstacle"/>
    <Action ID="ChangeColor"/>
  </TreeNodesModel>
</root>
"""


def _doc(body, model):
    return (
        '<root main_tree_to_execute="MainTree">\n'
        '  <BehaviorTree ID="MainTree">\n'
        f"{body}\n"
        "  </BehaviorTree>\n"
        "  <TreeNodesModel>\n"
        f"{model}\n"
        "  </TreeNodesModel>\n"
        "</root>\n"
    )


ACCEPTED = [
    VALID_SCENARIO_1,
    _doc("    <Wander/>", '    <Action ID="Wander"/>'),
    # Depth-3 mixed tree.
    _doc(
        "    <Fallback>\n"
        "      <Sequence>\n"
        "        <TargetDetected/>\n"
        "        <ApproachTarget/>\n"
        "      </Sequence>\n"
        "      <Wander/>\n"
        "    </Fallback>",
        '    <Condition ID="TargetDetected"/>\n'
        '    <Action ID="ApproachTarget"/>\n'
        '    <Action ID="Wander"/>',
    ),
    # XML declaration header is permitted.
    '<?xml version="1.0" encoding="UTF-8"?>\n' + VALID_SCENARIO_1,
    # Comments are permitted and ignored.
    "<!-- generated -->\n" + VALID_SCENARIO_1.replace(
        "<Sequence>", "<Sequence>\n      <!-- leaves -->"
    ),
    # Kind-consistent duplicate declarations are tolerated.
    _doc("    <FreezeMovement/>",
         '    <Action ID="FreezeMovement"/>\n    <Action ID="FreezeMovement"/>'),
    # main_tree_to_execute attribute is optional.
    _doc("    <FormLine/>", '    <Action ID="FormLine"/>').replace(
        ' main_tree_to_execute="MainTree"', ""
    ),
    # Declared-but-unused whitelisted node is harmless.
    _doc("    <AlignWithSwarm/>",
         '    <Action ID="AlignWithSwarm"/>\n    <Condition ID="PathClear"/>'),
    _doc(
        "    <Sequence>\n"
        "      <GoalFound/>\n"
        '      <ChangeColor color="blue"/>\n'
        "      <FreezeMovement/>\n"
        "    </Sequence>",
        '    <Condition ID="GoalFound"/>\n'
        '    <Action ID="ChangeColor"/>\n'
        '    <Action ID="FreezeMovement"/>',
    ),
]

NON_XML = [
    "",
    "   \n\t  ",
    "I cannot generate a tree for that command.",
    "Sure! Here is your tree: " + VALID_SCENARIO_1,
    VALID_SCENARIO_1 + "\nHope this helps!",
    "```xml\n" + VALID_SCENARIO_1 + "```",
    "42",
    '{"tree": "<root/>"}',
]

MALFORMED_XML = [
    "<root><BehaviorTree>",
    "<root>",
    "<root main_tree_to_execute=MainTree></root>",
    "<root><BehaviorTree ID='MainTree'><Wander/></Behavior_Tree></root>",
    "<root><<BehaviorTree/></root>",
    "< root></root>",
    "<root>&undefined;</root>",
    '<root a="1" a="2"></root>',
]

INCOMPLETE_STRUCTURE = [
    # Wrong document element.
    "<tree><BehaviorTree><Wander/></BehaviorTree></tree>",
    # Missing TreeNodesModel.
    '<root><BehaviorTree ID="MainTree"><Wander/></BehaviorTree></root>',
    # Missing BehaviorTree.
    '<root><TreeNodesModel><Action ID="Wander"/></TreeNodesModel></root>',
    # Two BehaviorTree elements.
    _doc("    <Wander/>", '    <Action ID="Wander"/>').replace(
        "  </BehaviorTree>",
        '  </BehaviorTree>\n  <BehaviorTree ID="Second">\n    <Wander/>\n  </BehaviorTree>',
    ),
    # BehaviorTree with two top-level nodes.
    _doc("    <Wander/>\n    <FormLine/>",
         '    <Action ID="Wander"/>\n    <Action ID="FormLine"/>'),
    # Empty Sequence control node.
    _doc("    <Sequence>\n    </Sequence>", '    <Action ID="Wander"/>'),
    # Leaf used but not declared.
    _doc("    <Wander/>", '    <Action ID="FormLine"/>'),
    # Same name declared with two kinds.
    _doc("    <Wander/>",
         '    <Action ID="Wander"/>\n    <Condition ID="Wander"/>'),
    # Stray text content inside the tree.
    _doc("    here you go\n    <Wander/>", '    <Action ID="Wander"/>'),
    # Leaf with children.
    _doc("    <Wander>\n      <FormLine/>\n    </Wander>",
         '    <Action ID="Wander"/>\n    <Action ID="FormLine"/>'),
]

UNSUPPORTED_NODE = [
    # Declared and used, but not whitelisted.
    _doc("    <LaunchRocket/>", '    <Action ID="LaunchRocket"/>'),
    # Unknown condition name.
    _doc(
        "    <Sequence>\n      <EnemySpotted/>\n      <Wander/>\n    </Sequence>",
        '    <Condition ID="EnemySpotted"/>\n    <Action ID="Wander"/>',
    ),
    # Missing required param.
    _doc("    <ChangeColor/>", '    <Action ID="ChangeColor"/>'),
    # Illegal param value.
    _doc('    <ChangeColor color="purple"/>', '    <Action ID="ChangeColor"/>'),
    # Empty param value.
    _doc('    <ChangeColor color=""/>', '    <Action ID="ChangeColor"/>'),
    # Unexpected param on a paramless action.
    _doc('    <Wander speed="9"/>', '    <Action ID="Wander"/>'),
    # Whitelisted condition declared and used as an action.
    _doc("    <ObstacleDetected/>", '    <Action ID="ObstacleDetected"/>'),
    # Declared-but-unused node outside the whitelist.
    _doc("    <Wander/>",
         '    <Action ID="Wander"/>\n    <Action ID="SelfDestruct"/>'),
]

LABELED = (
    [("Accepted", doc) for doc in ACCEPTED]
    + [("NonXml", doc) for doc in NON_XML]
    + [("MalformedXml", doc) for doc in MALFORMED_XML]
    + [("IncompleteStructure", doc) for doc in INCOMPLETE_STRUCTURE]
    + [("UnsupportedNode", doc) for doc in UNSUPPORTED_NODE]
)
