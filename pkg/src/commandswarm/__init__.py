"""CommandSwarm: whitelist-validated natural-language swarm control.

Operator commands are normalized, safety-gated, turned into XML behavior
trees by a pluggable language-model endpoint, validated against a closed
primitive whitelist, and executed in a deterministic 2D swarm simulator.
"""

from .bt_model import (
    BehaviorTree,
    BtNode,
    FailureCategory,
    NodeKind,
    NodeWhitelist,
    ValidationReport,
    classify_failure,
    default_whitelist,
    parse_document,
    serialize_tree,
)
from .bt_runtime import TickStatus, TreeExecutor, RuntimeFault, run_to_completion

__version__ = "0.1.0"

__all__ = [
    "BehaviorTree",
    "BtNode",
    "FailureCategory",
    "NodeKind",
    "NodeWhitelist",
    "RuntimeFault",
    "TickStatus",
    "TreeExecutor",
    "ValidationReport",
    "classify_failure",
    "default_whitelist",
    "parse_document",
    "run_to_completion",
    "serialize_tree",
]
