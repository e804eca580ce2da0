"""Discrete world simulator for replaying skill plans.

World state is a value: each skill application returns a new state plus
an outcome, leaving the input untouched. Perception is room-scoped (a
robot only finds objects on furniture in its current room) and there is
a single gripper. Failures never raise; they come back as outcomes so a
whole plan can be folded into a trace.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from typing import IO, Optional, Union

from .errors import InvalidGoalSpec, NoPath, OutsideArena, ParseError, UnknownSkill, ValidationError
from .geometry import Point2, centroid, euclidean
from .nav import plan_path
from .semantic_map import SemanticMap, furniture_anchor, room_of
from .skills import SkillInstance

HANDOVER_RANGE = 1.0

GRIPPER_OCCUPIED = "GripperOccupied"
NOT_FOUND = "NotFound"
NOT_VISIBLE = "NotVisible"
NOTHING_HELD = "NothingHeld"
TOO_FAR = "TooFar"
NO_PATH = "NoPath"
UNKNOWN_LOCATION = "UnknownLocation"
NOT_IN_ROOM = "NotInRoom"


@dataclass(frozen=True)
class SkillOutcome:
    ok: bool
    reason: Optional[str] = None

    @classmethod
    def success(cls) -> "SkillOutcome":
        return cls(ok=True)

    @classmethod
    def failed(cls, reason: str) -> "SkillOutcome":
        return cls(ok=False, reason=reason)


@dataclass(frozen=True)
class WorldState:
    """Placements, robot and operator poses, gripper and found-set."""

    placements: dict
    robot: Point2
    operator: Point2
    held: Optional[str] = None
    found: frozenset = frozenset()
    delivered: tuple = ()


@dataclass(frozen=True)
class ExecTrace:
    steps: tuple
    final: WorldState

    def all_ok(self) -> bool:
        return all(outcome.ok for _, outcome in self.steps)


def load_world(smap: SemanticMap, source: Union[str, IO]) -> WorldState:
    """Parse a world fixture: {objects: {name: furniture}, robot, operator}."""
    text = source if isinstance(source, str) else source.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(f"world is not valid JSON: {err}") from err
    if not isinstance(doc, dict):
        raise ParseError("world document must be an object")
    unknown = set(doc) - {"objects", "robot", "operator"}
    if unknown:
        raise ParseError(f"unknown world keys: {sorted(unknown)}")

    objects = doc.get("objects", {})
    if not isinstance(objects, dict):
        raise ParseError("objects must be an object of name -> furniture")
    known_furniture = {f.name for f in smap.furniture}
    for name, furniture in objects.items():
        if not isinstance(name, str) or not isinstance(furniture, str):
            raise ParseError(f"malformed object placement: {name!r}")
        if furniture not in known_furniture:
            raise ValidationError(name, f"unknown furniture {furniture!r}")

    def read_point(key: str) -> Point2:
        value = doc.get(key)
        if (
            not isinstance(value, list)
            or len(value) != 2
            or any(isinstance(c, bool) or not isinstance(c, (int, float)) for c in value)
        ):
            raise ParseError(f"{key} must be an [x, y] pair")
        point = Point2(value[0], value[1])
        if room_of(smap, point) is None:
            raise ValidationError(key, "outside every room")
        return point

    return WorldState(
        placements=dict(sorted(objects.items())),
        robot=read_point("robot"),
        operator=read_point("operator"),
    )


def _resolve_location(smap: SemanticMap, world: WorldState, name: str) -> Optional[Point2]:
    if name == "operator":
        return world.operator
    for furniture in smap.furniture:
        if furniture.name == name:
            return furniture_anchor(smap, name)
    for room in smap.rooms:
        if room.name == name:
            return centroid(room.contour)
    return None


def _go_to(smap: SemanticMap, world: WorldState, target: Point2):
    try:
        plan_path(smap, world.robot, target)
    except (NoPath, OutsideArena):
        return world, SkillOutcome.failed(NO_PATH)
    return replace(world, robot=target), SkillOutcome.success()


def apply_skill(smap: SemanticMap, world: WorldState, skill: SkillInstance):
    """One skill transition; failures return the input world unchanged."""
    name = skill.name
    if name == "move_to":
        target = _resolve_location(smap, world, skill.args[0])
        if target is None:
            return world, SkillOutcome.failed(UNKNOWN_LOCATION)
        return _go_to(smap, world, target)

    if name == "follow_person":
        return _go_to(smap, world, world.operator)

    if name == "find_obj":
        obj = skill.args[0]
        furniture = world.placements.get(obj)
        if furniture is None:
            return world, SkillOutcome.failed(NOT_FOUND)
        if smap.find_furniture(furniture).room != room_of(smap, world.robot):
            return world, SkillOutcome.failed(NOT_VISIBLE)
        return replace(world, found=world.found | {obj}), SkillOutcome.success()

    if name == "grasp":
        obj = skill.args[0]
        if world.held is not None:
            return world, SkillOutcome.failed(GRIPPER_OCCUPIED)
        if obj not in world.found:
            return world, SkillOutcome.failed(NOT_VISIBLE)
        furniture = world.placements.get(obj)
        if furniture is None:
            return world, SkillOutcome.failed(NOT_FOUND)
        if smap.find_furniture(furniture).room != room_of(smap, world.robot):
            return world, SkillOutcome.failed(NOT_IN_ROOM)
        placements = {k: v for k, v in world.placements.items() if k != obj}
        return (
            replace(world, placements=placements, held=obj, found=world.found - {obj}),
            SkillOutcome.success(),
        )

    if name == "place":
        furniture_name = skill.args[0]
        if world.held is None:
            return world, SkillOutcome.failed(NOTHING_HELD)
        if not any(f.name == furniture_name for f in smap.furniture):
            return world, SkillOutcome.failed(UNKNOWN_LOCATION)
        if smap.find_furniture(furniture_name).room != room_of(smap, world.robot):
            return world, SkillOutcome.failed(NOT_IN_ROOM)
        placements = dict(
            sorted(list(world.placements.items()) + [(world.held, furniture_name)])
        )
        return replace(world, placements=placements, held=None), SkillOutcome.success()

    if name == "handover":
        if world.held is None:
            return world, SkillOutcome.failed(NOTHING_HELD)
        if euclidean(world.robot, world.operator) > HANDOVER_RANGE:
            return world, SkillOutcome.failed(TOO_FAR)
        return (
            replace(world, held=None, delivered=world.delivered + (world.held,)),
            SkillOutcome.success(),
        )

    if name == "answer":
        return world, SkillOutcome.success()

    if name == "done":
        return world, SkillOutcome.success()

    raise UnknownSkill(f"simulator has no semantics for {name}")


def run_plan(smap: SemanticMap, world: WorldState, plan) -> ExecTrace:
    """Fold apply_skill over a plan; stop at the first failure or at done."""
    steps = []
    for skill in plan:
        world, outcome = apply_skill(smap, world, skill)
        steps.append((skill, outcome))
        if not outcome.ok or skill.name == "done":
            break
    return ExecTrace(steps=tuple(steps), final=world)


_GOAL = re.compile(r"^(deliver|place)\(([^,()]+)(?:,([^,()]+))?\)$")


def check_goal(world: WorldState, goal_spec: str) -> bool:
    """Evaluate "deliver(X)" or "place(X,F)" against a world state."""
    match = _GOAL.match(goal_spec.strip())
    if not match:
        raise InvalidGoalSpec(f"malformed goal: {goal_spec!r}")
    kind, first, second = match.group(1), match.group(2).strip(), match.group(3)
    if kind == "deliver":
        if second is not None:
            raise InvalidGoalSpec("deliver takes one argument")
        return first in world.delivered
    if second is None:
        raise InvalidGoalSpec("place takes two arguments")
    return world.placements.get(first) == second.strip()
