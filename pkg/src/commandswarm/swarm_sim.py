"""Deterministic 2D swarm simulator implementing the whitelist primitives.

One behavior tree commands the whole swarm: every primitive acts on all
agents collectively. All randomness flows through the world's single seeded
generator (python-random-mt19937), consumed in a fixed order (agents by
ascending id), so a (seed, scenario, tree) triple fully determines the
trajectory.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import dataclass, field, asdict
from typing import Callable, Optional

from . import bt_model
from .bt_model import BehaviorTree, BtNode, NodeKind, make_tree
from .bt_runtime import LeafBinding, RuntimeFault, TickStatus, TreeExecutor

RNG_ALGORITHM = "python-random-mt19937"

SUCCESS = TickStatus.SUCCESS
FAILURE = TickStatus.FAILURE
RUNNING = TickStatus.RUNNING


@dataclass
class SimParams:
    detection_radius: float = 50.0
    avoidance_gain: float = 1.0
    alignment_radius: float = 60.0
    line_spacing: float = 20.0
    wander_turn_stddev: float = 0.3
    max_turn_per_tick: float = 0.2
    agent_speed: float = 2.0
    # Targeted motions slow down below this distance so the turn radius
    # (speed / max_turn_per_tick) stays under half the remaining distance.
    slow_radius: float = 20.0
    line_tolerance: float = 0.5
    alignment_tolerance: float = 0.1
    path_cone_half_angle: float = math.radians(30.0)

    def __post_init__(self):
        for name, value in asdict(self).items():
            if value <= 0:
                raise ValueError(f"SimParams.{name} must be strictly positive")


@dataclass
class Circle:
    x: float
    y: float
    r: float


@dataclass
class Agent:
    id: int
    x: float
    y: float
    heading: float
    speed: float
    color: str = "white"
    frozen: bool = False
    # Steering intent for the current tick; applied (clamped) by step().
    heading_target: float = 0.0

    def __post_init__(self):
        self.heading_target = self.heading


class SwarmWorld:
    def __init__(self, width: float, height: float, agents: list[Agent],
                 obstacles: list[Circle], targets: list[Circle],
                 seed: int, params: Optional[SimParams] = None):
        self.width = width
        self.height = height
        self.agents = sorted(agents, key=lambda a: a.id)
        self.obstacles = obstacles
        self.targets = targets
        self.tick = 0
        self.seed = seed
        self.rng = random.Random(seed)
        self.rng_algorithm = RNG_ALGORITHM
        self.params = params or SimParams()
        # History flags consumed by scenario success predicates.
        self.obstacle_ever_detected = False
        self.obstacle_ever_hit = False
        self.target_ever_detected = False
        self._update_flags()

    def _update_flags(self) -> None:
        if obstacle_detected(self) is SUCCESS:
            self.obstacle_ever_detected = True
        if target_detected(self) is SUCCESS:
            self.target_ever_detected = True
        for agent in self.agents:
            for obs in self.obstacles:
                if math.hypot(agent.x - obs.x, agent.y - obs.y) < obs.r:
                    self.obstacle_ever_hit = True

    def snapshot(self) -> dict:
        return {
            "tick": self.tick,
            "agents": [
                {
                    "id": a.id,
                    "x": round(a.x, 9),
                    "y": round(a.y, 9),
                    "heading": round(a.heading, 9),
                    "color": a.color,
                    "frozen": a.frozen,
                }
                for a in self.agents
            ],
            "obstacles": [{"x": c.x, "y": c.y, "r": c.r} for c in self.obstacles],
            "targets": [{"x": c.x, "y": c.y, "r": c.r} for c in self.targets],
        }

    def state_hash(self) -> str:
        blob = json.dumps(self.snapshot(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def wrap_angle(angle: float) -> float:
    """Normalize to [-pi, pi)."""
    return (angle + math.pi) % (2 * math.pi) - math.pi


def step(world: SwarmWorld, executor: Optional[TreeExecutor] = None):
    """Advance one tick: tick the tree, apply motion, handle boundaries.

    Returns the executor's TickStatus (None when no executor is installed).
    """
    status = executor.tick(world) if executor is not None else None
    p = world.params
    for agent in world.agents:
        delta = wrap_angle(agent.heading_target - agent.heading)
        delta = max(-p.max_turn_per_tick, min(p.max_turn_per_tick, delta))
        agent.heading = wrap_angle(agent.heading + delta)
        agent.heading_target = agent.heading
        if not agent.frozen:
            agent.x += agent.speed * math.cos(agent.heading)
            agent.y += agent.speed * math.sin(agent.heading)
            # Clamp to bounds and reflect heading off the wall.
            if agent.x < 0 or agent.x > world.width:
                agent.x = min(max(agent.x, 0.0), world.width)
                agent.heading = wrap_angle(math.pi - agent.heading)
                agent.heading_target = agent.heading
            if agent.y < 0 or agent.y > world.height:
                agent.y = min(max(agent.y, 0.0), world.height)
                agent.heading = wrap_angle(-agent.heading)
                agent.heading_target = agent.heading
    world.tick += 1
    world._update_flags()
    return status


# --- geometry helpers -------------------------------------------------------

def _surface_distance(agent: Agent, circle: Circle) -> float:
    return math.hypot(agent.x - circle.x, agent.y - circle.y) - circle.r


def _nearest(agent: Agent, circles: list[Circle]) -> Optional[Circle]:
    if not circles:
        return None
    return min(circles, key=lambda c: math.hypot(agent.x - c.x, agent.y - c.y))


def _cone_intersects(agent: Agent, circle: Circle, length: float, half_angle: float) -> bool:
    dx, dy = circle.x - agent.x, circle.y - agent.y
    dist = math.hypot(dx, dy)
    if dist <= circle.r:
        return True
    if dist - circle.r > length:
        return False
    bearing = abs(wrap_angle(math.atan2(dy, dx) - agent.heading))
    return bearing <= half_angle + math.asin(min(1.0, circle.r / dist))


# --- condition primitives ---------------------------------------------------

def obstacle_detected(world: SwarmWorld) -> TickStatus:
    p = world.params
    for agent in world.agents:
        for obs in world.obstacles:
            if _surface_distance(agent, obs) <= p.detection_radius:
                return SUCCESS
    return FAILURE


def target_detected(world: SwarmWorld) -> TickStatus:
    p = world.params
    for agent in world.agents:
        for tgt in world.targets:
            if _surface_distance(agent, tgt) <= p.detection_radius:
                return SUCCESS
    return FAILURE


def goal_found(world: SwarmWorld) -> TickStatus:
    return target_detected(world)


def path_clear(world: SwarmWorld) -> TickStatus:
    p = world.params
    for agent in world.agents:
        for obs in world.obstacles:
            if _cone_intersects(agent, obs, p.detection_radius, p.path_cone_half_angle):
                return FAILURE
    return SUCCESS


def target_reached(world: SwarmWorld) -> TickStatus:
    if not world.targets:
        return FAILURE
    for agent in world.agents:
        if agent.frozen:
            continue
        nearest = _nearest(agent, world.targets)
        if math.hypot(agent.x - nearest.x, agent.y - nearest.y) > nearest.r:
            return FAILURE
    return SUCCESS


# --- action primitives ------------------------------------------------------

def _steer_to(agent: Agent, x: float, y: float, params: SimParams) -> float:
    """Point the agent at (x, y), slowing near it; returns the distance."""
    dist = math.hypot(x - agent.x, y - agent.y)
    if dist > 1e-12:
        agent.heading_target = math.atan2(y - agent.y, x - agent.x)
    if dist < params.slow_radius:
        agent.speed = min(params.agent_speed, 0.1 * dist)
    else:
        agent.speed = params.agent_speed
    return dist


def _wander_agent(agent: Agent, world: SwarmWorld) -> None:
    agent.heading_target = wrap_angle(
        agent.heading + world.rng.gauss(0.0, world.params.wander_turn_stddev)
    )
    agent.speed = world.params.agent_speed


def wander(world: SwarmWorld) -> TickStatus:
    for agent in world.agents:
        _wander_agent(agent, world)
    return RUNNING


def avoid_obstacle(world: SwarmWorld) -> TickStatus:
    p = world.params
    any_near = False
    for agent in world.agents:
        nearest = _nearest(agent, world.obstacles)
        if nearest is None:
            continue
        if _surface_distance(agent, nearest) <= p.detection_radius:
            any_near = True
            away = math.atan2(agent.y - nearest.y, agent.x - nearest.x)
            # avoidance_gain blends the escape direction with the current
            # heading (gain 1.0 turns straight down the surface normal).
            agent.heading_target = wrap_angle(
                agent.heading + p.avoidance_gain * wrap_angle(away - agent.heading)
            )
            agent.speed = p.agent_speed
    return RUNNING if any_near else SUCCESS


def approach_target(world: SwarmWorld) -> TickStatus:
    if target_reached(world) is SUCCESS:
        return SUCCESS
    for agent in world.agents:
        nearest = _nearest(agent, world.targets)
        if nearest is not None and not agent.frozen:
            _steer_to(agent, nearest.x, nearest.y, world.params)
    return RUNNING


def find_goal(world: SwarmWorld) -> TickStatus:
    """Wander until any agent senses a target, then approach it as a swarm."""
    if target_reached(world) is SUCCESS:
        return SUCCESS
    if goal_found(world) is SUCCESS:
        for agent in world.agents:
            nearest = _nearest(agent, world.targets)
            if nearest is not None and not agent.frozen:
                _steer_to(agent, nearest.x, nearest.y, world.params)
    else:
        for agent in world.agents:
            _wander_agent(agent, world)
    return RUNNING


def line_slots(world: SwarmWorld) -> list[tuple[float, float]]:
    n = len(world.agents)
    cx, cy = world.width / 2.0, world.height / 2.0
    spacing = world.params.line_spacing
    return [(cx + (i - (n - 1) / 2.0) * spacing, cy) for i in range(n)]


def form_line(world: SwarmWorld) -> TickStatus:
    slots = line_slots(world)
    done = True
    for agent, (sx, sy) in zip(world.agents, slots):
        dist = math.hypot(agent.x - sx, agent.y - sy)
        if dist <= world.params.line_tolerance:
            agent.speed = 0.0  # parked on the slot
        else:
            _steer_to(agent, sx, sy, world.params)
            done = False
    return SUCCESS if done else RUNNING


def _max_pairwise_heading_diff(world: SwarmWorld) -> float:
    worst = 0.0
    agents = world.agents
    for i in range(len(agents)):
        for j in range(i + 1, len(agents)):
            diff = abs(wrap_angle(agents[i].heading - agents[j].heading))
            worst = max(worst, diff)
    return worst


def align_with_swarm(world: SwarmWorld) -> TickStatus:
    p = world.params
    if _max_pairwise_heading_diff(world) < p.alignment_tolerance:
        return SUCCESS
    targets = []
    for agent in world.agents:
        sin_sum = cos_sum = 0.0
        for other in world.agents:
            if math.hypot(agent.x - other.x, agent.y - other.y) <= p.alignment_radius:
                sin_sum += math.sin(other.heading)
                cos_sum += math.cos(other.heading)
        targets.append(math.atan2(sin_sum, cos_sum))
    for agent, mean_heading in zip(world.agents, targets):
        agent.heading_target = mean_heading
        agent.speed = p.agent_speed
    return RUNNING


def change_color(world: SwarmWorld, color: str) -> TickStatus:
    if color not in bt_model.COLOR_VALUES:
        raise RuntimeFault(f"illegal color {color!r}")
    for agent in world.agents:
        agent.color = color
    return SUCCESS


def freeze_movement(world: SwarmWorld) -> TickStatus:
    for agent in world.agents:
        agent.frozen = True
    return SUCCESS


# --- leaf binding -----------------------------------------------------------

class SwarmBinding(LeafBinding):
    """Maps whitelist leaf names onto the simulator primitives."""

    CONDITIONS: dict[str, Callable] = {
        "ObstacleDetected": obstacle_detected,
        "TargetDetected": target_detected,
        "PathClear": path_clear,
        "GoalFound": goal_found,
        "TargetReached": target_reached,
    }

    def tick_condition(self, name, params, world) -> TickStatus:
        fn = self.CONDITIONS.get(name)
        if fn is None:
            raise RuntimeFault(f"no condition binding for {name!r}")
        return fn(world)

    def tick_action(self, name, params, world) -> TickStatus:
        if name == "Wander":
            return wander(world)
        if name == "AvoidObstacle":
            return avoid_obstacle(world)
        if name == "ChangeColor":
            return change_color(world, params.get("color", ""))
        if name == "ApproachTarget":
            return approach_target(world)
        if name == "FormLine":
            return form_line(world)
        if name == "AlignWithSwarm":
            return align_with_swarm(world)
        if name == "FreezeMovement":
            return freeze_movement(world)
        if name == "FindGoal":
            return find_goal(world)
        raise RuntimeFault(f"no action binding for {name!r}")


def make_executor(tree: BehaviorTree) -> TreeExecutor:
    return TreeExecutor(tree, SwarmBinding())


# --- scenarios --------------------------------------------------------------

@dataclass
class Scenario:
    id: int
    description: str
    build_world: Callable[[int], SwarmWorld]
    reference_tree: BehaviorTree
    success_predicate: Callable[[SwarmWorld], bool]

    def to_json(self) -> dict:
        world = self.build_world(0)
        return {
            "id": self.id,
            "description": self.description,
            "layout": {
                "width": world.width,
                "height": world.height,
                "agents": [
                    {"id": a.id, "x": a.x, "y": a.y, "heading": a.heading, "speed": a.speed}
                    for a in world.agents
                ],
                "obstacles": [asdict(c) for c in world.obstacles],
                "targets": [asdict(c) for c in world.targets],
            },
            "reference_tree_xml": bt_model.serialize_tree(self.reference_tree),
        }


N_AGENTS = 10
WORLD_SIZE = 500.0


def _agents_on_ring(cx, cy, radius, headings_out=True) -> list[Agent]:
    agents = []
    for i in range(N_AGENTS):
        angle = 2 * math.pi * i / N_AGENTS
        heading = wrap_angle(angle) if headings_out else wrap_angle(angle + math.pi)
        agents.append(Agent(id=i, x=cx + radius * math.cos(angle),
                            y=cy + radius * math.sin(angle),
                            heading=heading, speed=2.0))
    return agents


def _agents_cluster(cx, cy) -> list[Agent]:
    agents = []
    for i in range(N_AGENTS):
        row, col = divmod(i, 5)
        agents.append(Agent(id=i, x=cx + (col - 2) * 12.0, y=cy + (row - 0.5) * 16.0,
                            heading=wrap_angle(0.3 * (i - 4.5) / 4.5), speed=2.0))
    return agents


def _leaf(name, **params):
    return BtNode(kind=NodeKind.ACTION, name=name, params={k: str(v) for k, v in params.items()})


def _seq(*children):
    return BtNode(kind=NodeKind.SEQUENCE, name="Sequence", children=list(children))


def _fallback(*children):
    return BtNode(kind=NodeKind.FALLBACK, name="Fallback", children=list(children))


def _scenario_1() -> Scenario:
    def build(seed: int) -> SwarmWorld:
        return SwarmWorld(WORLD_SIZE, WORLD_SIZE,
                          _agents_on_ring(250, 250, 70),
                          obstacles=[Circle(250, 250, 30)], targets=[], seed=seed)

    tree = make_tree(_fallback(
        _seq(_leaf("ObstacleDetected"), _leaf("AvoidObstacle"), _leaf("ChangeColor", color="green")),
        _leaf("Wander"),
    ))

    def success(world: SwarmWorld) -> bool:
        return (world.obstacle_ever_detected
                and not world.obstacle_ever_hit
                and all(a.color == "green" for a in world.agents))

    return Scenario(1, "Detect an obstacle, avoid it, and change color to green.",
                    build, tree, success)


def _scenario_2() -> Scenario:
    target = Circle(400, 250, 25)

    def build(seed: int) -> SwarmWorld:
        return SwarmWorld(WORLD_SIZE, WORLD_SIZE, _agents_cluster(290, 250),
                          obstacles=[], targets=[target], seed=seed)

    tree = make_tree(_seq(_leaf("FindGoal"), _leaf("ChangeColor", color="red")))

    def success(world: SwarmWorld) -> bool:
        on_target = all(
            math.hypot(a.x - target.x, a.y - target.y) <= target.r for a in world.agents
        )
        return (world.target_ever_detected and on_target
                and all(a.color == "red" for a in world.agents))

    return Scenario(
        2,
        "Wander until a target is detected, approach it, and signal achievement "
        "by changing color to red.",
        build, tree, success,
    )


def _scenario_3() -> Scenario:
    def build(seed: int) -> SwarmWorld:
        agents = []
        for i in range(N_AGENTS):
            agents.append(Agent(id=i, x=120.0 + 29.0 * i, y=180.0 + 23.0 * (i % 4),
                                heading=wrap_angle(0.7 * i), speed=2.0))
        return SwarmWorld(WORLD_SIZE, WORLD_SIZE, agents, obstacles=[], targets=[], seed=seed)

    tree = make_tree(_seq(_leaf("PathClear"), _leaf("FormLine")))

    def success(world: SwarmWorld) -> bool:
        slots = line_slots(world)
        return all(
            math.hypot(a.x - sx, a.y - sy) <= world.params.line_tolerance
            for a, (sx, sy) in zip(world.agents, slots)
        )

    return Scenario(3, "Check whether the path is clear and form a line at the center.",
                    build, tree, success)


def _scenario_4() -> Scenario:
    target = Circle(350, 250, 25)

    def build(seed: int) -> SwarmWorld:
        return SwarmWorld(WORLD_SIZE, WORLD_SIZE, _agents_cluster(250, 250),
                          obstacles=[], targets=[target], seed=seed)

    tree = make_tree(_seq(_leaf("FindGoal"), _leaf("ChangeColor", color="red"),
                          _leaf("AlignWithSwarm")))

    def success(world: SwarmWorld) -> bool:
        return (world.target_ever_detected
                and all(a.color == "red" for a in world.agents)
                and _max_pairwise_heading_diff(world) < world.params.alignment_tolerance)

    return Scenario(
        4,
        "Find the goal, signal success by changing color to red, and align "
        "movement with other swarm agents.",
        build, tree, success,
    )


def _scenario_5() -> Scenario:
    target = Circle(300, 250, 20)

    def build(seed: int) -> SwarmWorld:
        return SwarmWorld(WORLD_SIZE, WORLD_SIZE, _agents_cluster(250, 250),
                          obstacles=[], targets=[target], seed=seed)

    tree = make_tree(_seq(_leaf("TargetDetected"), _leaf("ApproachTarget"),
                          _leaf("FreezeMovement")))

    def success(world: SwarmWorld) -> bool:
        on_target = all(
            math.hypot(a.x - target.x, a.y - target.y) <= target.r for a in world.agents
        )
        return on_target and all(a.frozen for a in world.agents)

    return Scenario(5, "Detect the target and freeze movement after reaching it.",
                    build, tree, success)


_SCENARIOS = {s.id: s for s in (_scenario_1(), _scenario_2(), _scenario_3(),
                                _scenario_4(), _scenario_5())}


def load_scenario(scenario_id: int) -> Scenario:
    if scenario_id not in _SCENARIOS:
        raise KeyError(f"unknown scenario id {scenario_id!r} (valid: 1..5)")
    return _SCENARIOS[scenario_id]


def scenario_ids() -> list[int]:
    return sorted(_SCENARIOS)


def run_scenario(scenario: Scenario, tree: Optional[BehaviorTree] = None,
                 seed: int = 42, max_ticks: int = 2000):
    """Run a tree (the reference tree by default) in the scenario's world.

    Returns (status, ticks_used, world).
    """
    from .bt_runtime import run_to_completion

    world = scenario.build_world(seed)
    executor = make_executor(tree if tree is not None else scenario.reference_tree)
    status, ticks = run_to_completion(executor, world, max_ticks, step=step)
    return status, ticks, world
