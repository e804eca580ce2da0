"""Door-graph construction and shortest semantic paths.

Rooms are treated as free space: travel inside one room is a straight
line, so a path is fully described by the sequence of doors it passes
through. The planner builds a small graph over the start point, the goal
anchor, and every passable door, then runs Dijkstra with a lexicographic
tie-break on the door-name sequence so equal-length alternatives resolve
deterministically.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Union

from .errors import NoPath, OutsideArena
from .geometry import Point2, euclidean
from .semantic_map import SemanticMap, furniture_anchor, room_of, set_door_passable

START = "start"
GOAL = "goal"
DOOR = "door"

# Node ids: ("start",), ("goal",) and ("door", name). Tuples keep door
# names from colliding with the two reserved endpoints.
NodeId = tuple


@dataclass(frozen=True)
class NavNode:
    """One vertex of the door graph."""

    kind: str
    anchor: Point2
    rooms: frozenset[str]
    door_name: Union[str, None] = None


@dataclass(frozen=True)
class Path:
    """A start-to-goal waypoint sequence with its total metric length."""

    waypoints: tuple[NavNode, ...]
    length: float

    def door_names(self) -> tuple[str, ...]:
        return tuple(n.door_name for n in self.waypoints if n.kind == DOOR)


@dataclass(frozen=True)
class DoorGraph:
    nodes: dict
    edges: dict

    def neighbours(self, node_id: NodeId):
        return self.edges[node_id]


def _endpoint_node(smap: SemanticMap, kind: str, point: Point2) -> NavNode:
    room = room_of(smap, point)
    if room is None:
        raise OutsideArena(kind)
    return NavNode(kind=kind, anchor=point, rooms=frozenset((room,)))


def build_door_graph(smap: SemanticMap, start: Point2, goal_anchor: Point2) -> DoorGraph:
    """Graph over start, goal and passable doors; edges join nodes sharing a room."""
    nodes = {
        (START,): _endpoint_node(smap, START, start),
        (GOAL,): _endpoint_node(smap, GOAL, goal_anchor),
    }
    for door in smap.doors:
        if door.passable:
            nodes[(DOOR, door.name)] = NavNode(
                kind=DOOR,
                anchor=door.position,
                rooms=frozenset(door.connects),
                door_name=door.name,
            )

    edges = {node_id: [] for node_id in nodes}
    ids = sorted(nodes)
    for i, id_a in enumerate(ids):
        for id_b in ids[i + 1 :]:
            a, b = nodes[id_a], nodes[id_b]
            if a.rooms & b.rooms:
                weight = euclidean(a.anchor, b.anchor)
                edges[id_a].append((id_b, weight))
                edges[id_b].append((id_a, weight))
    return DoorGraph(nodes=nodes, edges=edges)


def _resolve_goal(smap: SemanticMap, goal: Union[str, Point2]) -> Point2:
    if isinstance(goal, Point2):
        return goal
    return furniture_anchor(smap, goal)


def plan_path(smap: SemanticMap, start: Point2, goal: Union[str, Point2]) -> Path:
    """Shortest start-to-goal path through passable doors.

    Dijkstra over the door graph. Among equal-length routes the one whose
    door-name sequence sorts first wins, so repeated runs agree bytewise.
    """
    goal_anchor = _resolve_goal(smap, goal)
    graph = build_door_graph(smap, start, goal_anchor)

    start_id: NodeId = (START,)
    goal_id: NodeId = (GOAL,)
    # Priority = (distance, door-name sequence); the sequence settles ties.
    best: dict[NodeId, tuple[float, tuple[str, ...]]] = {start_id: (0.0, ())}
    queue: list[tuple[float, tuple[str, ...], NodeId, tuple[NodeId, ...]]] = [
        (0.0, (), start_id, (start_id,))
    ]
    settled: set[NodeId] = set()

    while queue:
        dist, names, node_id, route = heapq.heappop(queue)
        if node_id in settled:
            continue
        settled.add(node_id)
        if node_id == goal_id:
            waypoints = tuple(graph.nodes[i] for i in route)
            return Path(waypoints=waypoints, length=dist)
        for next_id, weight in graph.neighbours(node_id):
            if next_id in settled:
                continue
            next_names = names + (next_id[1],) if next_id[0] == DOOR else names
            candidate = (dist + weight, next_names)
            if next_id not in best or candidate < best[next_id]:
                best[next_id] = candidate
                heapq.heappush(
                    queue, (candidate[0], candidate[1], next_id, route + (next_id,))
                )

    raise NoPath(f"no passable-door route from {start} to {goal_anchor}")


def replan(
    smap: SemanticMap, current: Point2, goal: Union[str, Point2], closed_door: str
) -> Path:
    """Re-solve after marking one door impassable (raises UnknownDoor first)."""
    return plan_path(set_door_passable(smap, closed_door, False), current, goal)


def path_length(path: Path) -> float:
    """Recompute the summed segment lengths of a path."""
    total = 0.0
    for a, b in zip(path.waypoints, path.waypoints[1:]):
        total += euclidean(a.anchor, b.anchor)
    return total
