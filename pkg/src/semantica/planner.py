"""Topological route planning: grounded goal -> behavior sequence."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Any, Optional

from .errors import NoRoute, RobotOutsideMap, SchemaViolation
from .geometry import Pose2D
from .grounding import FALLBACK_AREA, REFERENT, Command, GroundingResult
from .topograph import DYNAMIC, instantiate_dynamic
from .world import WorldModel


@dataclass(frozen=True)
class Step:
    behavior: str
    node: str
    pose: Pose2D
    door: Optional[str] = None


@dataclass(frozen=True)
class BehaviorSequence:
    start_node: str
    steps: tuple[Step, ...]
    total_cost: float

    def node_ids(self) -> list[str]:
        return [self.start_node] + [s.node for s in self.steps]


def _region_area_of_robot(world: WorldModel, pose: Pose2D) -> str:
    cm = world.require_cellmap()
    cid = cm.cell_of_world(pose.x, pose.y)
    if cid < 0:
        raise RobotOutsideMap(f"robot at ({pose.x:.2f}, {pose.y:.2f}) is not in free space")
    return cm.area_label_of_cell(cid)


def _goal_area_for_referent(world: WorldModel, label: str) -> str:
    """Area containing the referent: majority area among the cells that
    carry its label, lexicographic least on ties."""
    cm = world.require_cellmap()
    counts: dict[str, int] = {}
    for cid in cm.cells_with_label(label):
        area = cm.area_label_of_cell(cid)
        weight = int((cm.cell_index == cid).sum())
        counts[area] = counts.get(area, 0) + weight
    if not counts:
        sig = world.store.get(label)
        if sig.position is not None:
            cid = cm.cell_of_world(sig.position.x, sig.position.y)
            if cid >= 0:
                return cm.area_label_of_cell(cid)
        raise NoRoute(f"{label!r} is not reachable anywhere in the map")
    top = max(counts.values())
    return sorted(a for a, c in counts.items() if c == top)[0]


def _goal_area_for_fallback(world: WorldModel, area_concept: str) -> str:
    cm = world.require_cellmap()
    present = set(cm.region_labels)
    labels = sorted(
        s.label for s in world.store.all()
        if s.label in present and world.kb.is_a(s.concept, area_concept))
    if not labels:
        raise NoRoute(f"no mapped area for concept {area_concept}")
    return labels[0]


def shortest_path(world: WorldModel, start: str, goal: str) -> tuple[list[str], float]:
    """Dijkstra over the topological graph; ties prefer the
    lexicographically smaller node-id sequence."""
    topo = world.require_topo()
    if start not in topo.nodes or goal not in topo.nodes:
        raise NoRoute(f"unknown topological node {start!r} or {goal!r}")
    heap: list[tuple[float, tuple[str, ...]]] = [(0.0, (start,))]
    done: set[str] = set()
    while heap:
        cost, path = heapq.heappop(heap)
        node = path[-1]
        if node in done:
            continue
        done.add(node)
        if node == goal:
            return list(path), cost
        for edge in topo.neighbors(node):
            nxt = edge.other(node)
            if nxt not in done:
                heapq.heappush(heap, (cost + edge.cost, path + (nxt,)))
    raise NoRoute(f"no topological route from {start!r} to {goal!r}")


def plan_route(from_pose: Pose2D, grounding: GroundingResult,
               world: WorldModel) -> BehaviorSequence:
    """Shortest behavior sequence from the robot's area to the goal.

    The final dynamic node is instantiated with the referent as hint so
    the run ends adjacent to (and facing) the target object.
    """
    if grounding.kind == REFERENT:
        goal_area = _goal_area_for_referent(world, grounding.referent)
        hint = grounding.referent
    elif grounding.kind == FALLBACK_AREA:
        goal_area = _goal_area_for_fallback(world, grounding.area_concept)
        hint = goal_area
    else:
        raise SchemaViolation(f"cannot plan for grounding kind {grounding.kind!r}")

    topo = world.require_topo()
    cm = world.require_cellmap()
    start_area = _region_area_of_robot(world, from_pose)
    start = topo.dynamic_for_area(start_area)
    goal = topo.dynamic_for_area(goal_area)

    final_pose = instantiate_dynamic(goal, hint, cm, world.store)
    if start.id == goal.id:
        step = Step(behavior="Reach", node=goal.id, pose=final_pose)
        return BehaviorSequence(start_node=start.id, steps=(step,), total_cost=0.0)

    path, cost = shortest_path(world, start.id, goal.id)
    steps = []
    edges_by_pair = {}
    for edge in topo.edges:
        edges_by_pair[(edge.a, edge.b)] = edge
        edges_by_pair[(edge.b, edge.a)] = edge
    for a, b in zip(path, path[1:]):
        edge = edges_by_pair[(a, b)]
        target = topo.nodes[b]
        if target.kind == DYNAMIC:
            pose = final_pose if b == goal.id else instantiate_dynamic(
                target, None, cm, world.store)
        else:
            pose = target.position
        steps.append(Step(behavior=edge.behavior, node=b, pose=pose,
                          door=edge.door_label))
    return BehaviorSequence(start_node=start.id, steps=tuple(steps), total_cost=cost)


@dataclass(frozen=True)
class CheckAnswer:
    known: bool
    value: Any = None


def answer_check(command: Command, grounding: GroundingResult,
                 world: WorldModel) -> CheckAnswer:
    """Answer a query command from stored knowledge only."""
    if command.query_attribute is None:
        raise SchemaViolation("not a check command")
    if grounding.kind != REFERENT:
        raise SchemaViolation("check needs a grounded referent")
    value = world.store.effective_property(grounding.referent, command.query_attribute)
    if value is None:
        return CheckAnswer(known=False)
    return CheckAnswer(known=True, value=value)
