"""Tick interpreter for validated behavior trees.

Sequence and Fallback are memoryful: while a child is Running the control
node resumes at that child on the next tick instead of re-ticking resolved
siblings. Memory is cleared when the control node itself resolves to
Success or Failure. Conditions are instantaneous predicates and must never
return Running.
"""

from __future__ import annotations

from enum import Enum
from typing import Optional, Protocol

from .bt_model import BehaviorTree, BtNode, NodeKind


class TickStatus(Enum):
    SUCCESS = "Success"
    FAILURE = "Failure"
    RUNNING = "Running"


class RuntimeFault(Exception):
    """Execution halt distinct from validation failure (binding gap etc.)."""


class LeafBinding(Protocol):
    def tick_action(self, name: str, params: dict[str, str], world) -> TickStatus: ...

    def tick_condition(self, name: str, params: dict[str, str], world) -> TickStatus: ...


class TreeExecutor:
    def __init__(self, tree: BehaviorTree, binding: LeafBinding):
        self.tree = tree
        self.binding = binding
        # Resume index per control node, keyed by id(node).
        self._memory: dict[int, int] = {}

    def reset(self) -> None:
        self._memory.clear()

    def tick(self, world) -> TickStatus:
        return self._tick_node(self.tree.root_node, world)

    def _tick_node(self, node: BtNode, world) -> TickStatus:
        if node.kind is NodeKind.SEQUENCE:
            return self._tick_control(node, world, stop_on=TickStatus.FAILURE,
                                      all_resolved=TickStatus.SUCCESS)
        if node.kind is NodeKind.FALLBACK:
            return self._tick_control(node, world, stop_on=TickStatus.SUCCESS,
                                      all_resolved=TickStatus.FAILURE)
        return self._tick_leaf(node, world)

    def _tick_control(self, node: BtNode, world, stop_on: TickStatus,
                      all_resolved: TickStatus) -> TickStatus:
        start = self._memory.get(id(node), 0)
        for index in range(start, len(node.children)):
            status = self._tick_node(node.children[index], world)
            if status is TickStatus.RUNNING:
                self._memory[id(node)] = index
                return TickStatus.RUNNING
            if status is stop_on:
                self._clear(node)
                return stop_on
        self._clear(node)
        return all_resolved

    def _clear(self, node: BtNode) -> None:
        self._memory.pop(id(node), None)
        for child in node.children:
            if child.children or id(child) in self._memory:
                self._clear(child)

    def _tick_leaf(self, node: BtNode, world) -> TickStatus:
        if node.kind is NodeKind.CONDITION:
            status = self.binding.tick_condition(node.name, node.params, world)
            if status is TickStatus.RUNNING:
                raise RuntimeFault(f"condition {node.name!r} returned Running")
        else:
            status = self.binding.tick_action(node.name, node.params, world)
        if not isinstance(status, TickStatus):
            raise RuntimeFault(f"leaf {node.name!r} returned non-status {status!r}")
        return status


TIMEOUT = "Timeout"


def run_to_completion(executor: TreeExecutor, world, max_ticks: int, step=None):
    """Tick until the tree resolves or the budget runs out.

    Returns (TickStatus or TIMEOUT, ticks_used). ``step`` defaults to a bare
    executor tick; the simulator passes its own world-advancing step.
    """
    if max_ticks < 1:
        raise ValueError("max_ticks must be >= 1")
    if step is None:
        step = lambda w, e: e.tick(w)
    status = TickStatus.RUNNING
    ticks = 0
    for _ in range(max_ticks):
        status = step(world, executor)
        ticks += 1
        if status is not TickStatus.RUNNING:
            return status, ticks
    return TIMEOUT, ticks
