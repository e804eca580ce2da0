"""Labeled environment model: rooms, furniture and doors.

The map is an immutable value loaded from a JSON document. Entities are
stored sorted by name and door room pairs are stored sorted, so loading a
saved map yields an equal value and saving is canonical byte-for-byte:
entities sorted by name, object keys in schema order, 2-space indentation,
floats in shortest round-trip form.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import IO, Iterable, Optional, Union

from .errors import (
    InvalidPolygon,
    ParseError,
    UnknownDoor,
    UnknownFurniture,
    ValidationError,
)
from .geometry import (
    Containment,
    Point2,
    Polygon2,
    centroid,
    point_in_polygon,
    validate_polygon,
)


@dataclass(frozen=True)
class Room:
    name: str
    contour: Polygon2


@dataclass(frozen=True)
class Furniture:
    name: str
    room: str
    contour: Polygon2


@dataclass(frozen=True)
class Door:
    name: str
    position: Point2
    connects: tuple[str, str]  # sorted room-name pair
    passable: bool = True


@dataclass(frozen=True)
class SemanticLocation:
    room: Optional[str] = None
    furniture: Optional[str] = None


@dataclass(frozen=True)
class SemanticMap:
    rooms: tuple[Room, ...]
    furniture: tuple[Furniture, ...]
    doors: tuple[Door, ...]

    def room(self, name: str) -> Room:
        for r in self.rooms:
            if r.name == name:
                return r
        raise KeyError(name)

    def find_furniture(self, name: str) -> Furniture:
        for f in self.furniture:
            if f.name == name:
                return f
        raise UnknownFurniture(name)

    def find_door(self, name: str) -> Door:
        for d in self.doors:
            if d.name == name:
                return d
        raise UnknownDoor(name)


def make_map(
    rooms: Iterable[Room],
    furniture: Iterable[Furniture] = (),
    doors: Iterable[Door] = (),
) -> SemanticMap:
    """Assemble and validate a map from entity values.

    Raises ValidationError naming the offending entity on duplicate names,
    dangling references or a furniture centroid outside its room.
    """
    rooms = tuple(sorted(rooms, key=lambda r: r.name))
    furniture = tuple(sorted(furniture, key=lambda f: f.name))
    doors = tuple(
        sorted(
            (replace(d, connects=tuple(sorted(d.connects))) for d in doors),
            key=lambda d: d.name,
        )
    )

    if not rooms:
        raise ValidationError("map", "must contain at least one room")
    for entities, label in ((rooms, "room"), (furniture, "furniture"), (doors, "door")):
        seen = set()
        for e in entities:
            if not e.name:
                raise ValidationError(f"<unnamed {label}>", "empty name")
            if e.name in seen:
                raise ValidationError(e.name, f"duplicate {label} name")
            seen.add(e.name)

    room_names = {r.name: r for r in rooms}
    for f in furniture:
        if f.room not in room_names:
            raise ValidationError(f.name, "unknown room")
        anchor = centroid(f.contour)
        if point_in_polygon(anchor, room_names[f.room].contour) is Containment.OUTSIDE:
            raise ValidationError(f.name, f"centroid lies outside room {f.room}")
    for d in doors:
        a, b = d.connects
        if a == b:
            raise ValidationError(d.name, "connects a room to itself")
        for name in d.connects:
            if name not in room_names:
                raise ValidationError(d.name, f"unknown room {name}")

    return SemanticMap(rooms=rooms, furniture=furniture, doors=doors)


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ParseError(message)


def _parse_point(raw, context: str) -> Point2:
    _require(
        isinstance(raw, list) and len(raw) == 2
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw),
        f"{context}: expected [x, y]",
    )
    try:
        return Point2(float(raw[0]), float(raw[1]))
    except ValueError as exc:
        raise ValidationError(context, str(exc)) from None


def _parse_contour(raw, entity: str) -> Polygon2:
    _require(isinstance(raw, list), f"{entity}: contour must be an array")
    points = [_parse_point(v, f"{entity} contour") for v in raw]
    try:
        return validate_polygon(points)
    except InvalidPolygon as exc:
        raise ValidationError(entity, f"invalid contour: {exc.reason}") from None


def _parse_entry(raw, keys: dict, label: str) -> dict:
    _require(isinstance(raw, dict), f"{label} entry must be an object")
    name = raw.get("name")
    _require(isinstance(name, str), f"{label} entry missing string name")
    for key in raw:
        _require(key in keys, f"{label} {name}: unexpected key {key!r}")
    for key, required in keys.items():
        if required:
            _require(key in raw, f"{label} {name}: missing key {key!r}")
    return raw


def load_map(document: Union[str, IO[str]]) -> SemanticMap:
    """Parse and validate a map document (JSON text or a readable stream)."""
    text = document if isinstance(document, str) else document.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}") from None
    _require(isinstance(doc, dict), "top level must be an object")
    for key in doc:
        _require(key in ("rooms", "furniture", "doors"), f"unexpected top-level key {key!r}")

    rooms = []
    for raw in doc.get("rooms", []):
        entry = _parse_entry(raw, {"name": True, "contour": True}, "room")
        rooms.append(Room(entry["name"], _parse_contour(entry["contour"], entry["name"])))

    furniture = []
    for raw in doc.get("furniture", []):
        entry = _parse_entry(raw, {"name": True, "room": True, "contour": True}, "furniture")
        _require(isinstance(entry["room"], str), f"furniture {entry['name']}: room must be a string")
        furniture.append(
            Furniture(
                entry["name"], entry["room"], _parse_contour(entry["contour"], entry["name"])
            )
        )

    doors = []
    for raw in doc.get("doors", []):
        entry = _parse_entry(
            raw,
            {"name": True, "position": True, "connects": True, "passable": False},
            "door",
        )
        name = entry["name"]
        connects = entry["connects"]
        _require(
            isinstance(connects, list) and len(connects) == 2
            and all(isinstance(r, str) for r in connects),
            f"door {name}: connects must be [room, room]",
        )
        passable = entry.get("passable", True)
        _require(isinstance(passable, bool), f"door {name}: passable must be a boolean")
        doors.append(
            Door(
                name,
                _parse_point(entry["position"], f"door {name} position"),
                (connects[0], connects[1]),
                passable,
            )
        )

    return make_map(rooms, furniture, doors)


def _point_doc(p: Point2) -> list[float]:
    return [p.x, p.y]


def _contour_doc(poly: Polygon2) -> list[list[float]]:
    return [_point_doc(v) for v in poly.vertices]


def save_map(smap: SemanticMap) -> str:
    """Serialize to the canonical document form."""
    doc = {
        "rooms": [{"name": r.name, "contour": _contour_doc(r.contour)} for r in smap.rooms],
        "furniture": [
            {"name": f.name, "room": f.room, "contour": _contour_doc(f.contour)}
            for f in smap.furniture
        ],
        "doors": [
            {
                "name": d.name,
                "position": _point_doc(d.position),
                "connects": list(d.connects),
                "passable": d.passable,
            }
            for d in smap.doors
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def room_of(smap: SemanticMap, p: Point2) -> Optional[str]:
    """Name of the room containing p (inside or on the contour).

    Overlapping contours are tolerated: the lexicographically smallest room
    name wins. Rooms are stored sorted, so the first hit is the answer.
    """
    for r in smap.rooms:
        if point_in_polygon(p, r.contour) is not Containment.OUTSIDE:
            return r.name
    return None


def semantic_location(smap: SemanticMap, p: Point2) -> SemanticLocation:
    """Room and, when applicable, the furniture contour the point is in."""
    room = room_of(smap, p)
    if room is None:
        return SemanticLocation()
    for f in smap.furniture:
        if f.room == room and point_in_polygon(p, f.contour) is not Containment.OUTSIDE:
            return SemanticLocation(room=room, furniture=f.name)
    return SemanticLocation(room=room)


def set_door_passable(smap: SemanticMap, door_name: str, passable: bool) -> SemanticMap:
    """Return a copy of the map with one door's passable flag changed."""
    smap.find_door(door_name)
    doors = tuple(
        replace(d, passable=passable) if d.name == door_name else d for d in smap.doors
    )
    return replace(smap, doors=doors)


def furniture_anchor(smap: SemanticMap, furniture_name: str) -> Point2:
    """Approach/goal point for a piece of furniture (its contour centroid)."""
    return centroid(smap.find_furniture(furniture_name).contour)


def map_warnings(smap: SemanticMap) -> list[str]:
    """Advisory findings that do not invalidate the map.

    Currently: doors positioned outside both rooms they connect.
    """
    warnings = []
    for d in smap.doors:
        contained = any(
            point_in_polygon(d.position, smap.room(name).contour) is not Containment.OUTSIDE
            for name in d.connects
        )
        if not contained:
            warnings.append(
                f"door {d.name} lies outside both rooms it connects ({d.connects[0]}, {d.connects[1]})"
            )
    return warnings
