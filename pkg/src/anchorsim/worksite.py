"""The physical scene: wall, structural part, drilled holes, anchors, stands."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .errors import OffWall, TooDeep
from .geometry import Frame, Point3

#: Deepest hole the drill can produce (bit engagement limit), metres.
MAX_HOLE_DEPTH = 0.08

#: Wall must keep at least this much material behind the deepest hole.
BACK_COVER_MARGIN = 0.02

#: Tolerance for "position lies on the wall surface" checks, metres.
ON_SURFACE_TOL = 1e-6

#: Annular band outside the insertion clearance that still touches the hole rim.
RIM_BAND = 0.001


class PartState(Enum):
    IN_STAND = "in_stand"
    GRASPED = "grasped"
    HELD_ON_WALL = "held_on_wall"
    PARTIALLY_FIXED = "partially_fixed"
    FIXED = "fixed"


_PART_ORDER = [
    PartState.IN_STAND,
    PartState.GRASPED,
    PartState.HELD_ON_WALL,
    PartState.PARTIALLY_FIXED,
    PartState.FIXED,
]


class AnchorState(Enum):
    IN_STAND = "in_stand"
    GRASPED = "grasped"
    STUCK = "stuck"
    SEATED = "seated"
    TIGHTENED = "tightened"


_ANCHOR_ORDER = [
    AnchorState.IN_STAND,
    AnchorState.GRASPED,
    AnchorState.STUCK,
    AnchorState.SEATED,
    AnchorState.TIGHTENED,
]


class Engagement(Enum):
    ENGAGED = "engaged"
    RIM_CONTACT = "rim_contact"
    SURFACE_CONTACT = "surface_contact"


@dataclass
class Wall:
    """Concrete wall. ``frame`` is the true surface frame, hidden from the
    executive; its z axis is the outward normal (toward the robots)."""

    frame: Frame
    width: float = 0.20
    height: float = 0.30
    thickness: float = 0.15
    compressive_strength: float = 24.0  # N/mm^2

    def __post_init__(self):
        if self.compressive_strength <= 0:
            raise ValueError("compressive strength must be positive")
        if self.thickness < MAX_HOLE_DEPTH + BACK_COVER_MARGIN:
            raise ValueError(
                f"wall thickness {self.thickness} m cannot take a "
                f"{MAX_HOLE_DEPTH} m hole plus {BACK_COVER_MARGIN} m cover"
            )

    @property
    def normal(self) -> Point3:
        return self.frame.z_axis

    def signed_distance(self, p: Point3) -> float:
        """Distance of ``p`` from the surface plane along the outward normal."""
        return (p - self.frame.origin).dot(self.normal)

    def contains_lateral(self, p: Point3) -> bool:
        local = self.frame.to_local(p)
        return abs(local.x) <= self.width / 2 and abs(local.y) <= self.height / 2

    def on_surface(self, p: Point3, tol: float = ON_SURFACE_TOL) -> bool:
        return abs(self.signed_distance(p)) <= tol and self.contains_lateral(p)


@dataclass
class StructuralPart:
    """Bracket to be fixed; holes are given in the part-local frame."""

    hole_positions: list[Point3]
    hole_diameter: float = 0.014
    thickness: float = 0.006
    mass: float = 1.5
    pose: Frame | None = None
    state: PartState = PartState.IN_STAND
    fixed_count: int = 0

    def __post_init__(self):
        if not self.hole_positions:
            raise ValueError("a structural part needs at least one hole")
        if self.hole_diameter <= 0:
            raise ValueError("hole diameter must be positive")

    def set_state(self, new: PartState):
        """Advance the part state; only forward transitions are legal."""
        if _PART_ORDER.index(new) < _PART_ORDER.index(self.state):
            raise ValueError(f"part state cannot regress {self.state} -> {new}")
        self.state = new

    def mark_point_fixed(self):
        self.fixed_count += 1
        if self.fixed_count > len(self.hole_positions):
            raise ValueError("more fixed points than holes")
        if self.fixed_count == len(self.hole_positions):
            self.set_state(PartState.FIXED)
        else:
            self.set_state(PartState.PARTIALLY_FIXED)

    def hole_world(self, index: int) -> Point3:
        if self.pose is None:
            raise ValueError("part has no pose yet")
        return self.pose.to_world(self.hole_positions[index])


@dataclass
class DrilledHole:
    position: Point3  # on the wall surface
    axis: Point3  # unit vector, into the wall
    depth: float
    diameter: float = 0.012
    anchor: "AnchorBolt | None" = None

    def __post_init__(self):
        if not 0 < self.depth <= MAX_HOLE_DEPTH:
            raise ValueError(f"hole depth {self.depth} m outside (0, {MAX_HOLE_DEPTH}]")
        if abs(self.axis.norm() - 1.0) > 1e-9:
            raise ValueError("hole axis must be a unit vector")

    def radial_offset(self, tip: Point3) -> float:
        """Distance of ``tip`` from the hole axis, perpendicular to it."""
        d = tip - self.position
        return d.cross(self.axis).norm()


@dataclass
class AnchorBolt:
    """Wedge anchor, grasped from the nut with the nut already threaded on."""

    diameter: float = 0.012
    length: float = 0.126
    mass: float = 0.113
    nut_attached: bool = True
    state: AnchorState = AnchorState.IN_STAND
    depth: float = 0.0  # penetration when stuck / seated
    torque: float = 0.0  # tightening torque when tightened
    hole: DrilledHole | None = None

    def set_state(self, new: AnchorState, *, depth: float | None = None, torque: float | None = None):
        if _ANCHOR_ORDER.index(new) < _ANCHOR_ORDER.index(self.state):
            raise ValueError(f"anchor state cannot regress {self.state} -> {new}")
        if new is AnchorState.TIGHTENED and not self.nut_attached:
            raise ValueError("cannot tighten an anchor without a nut")
        if depth is not None:
            if self.hole is not None and depth > self.hole.depth + 1e-9:
                raise ValueError("anchor deeper than its hole")
            if new is AnchorState.SEATED and depth + 1e-9 < self.depth:
                raise ValueError("seated depth below stuck depth")
            self.depth = depth
        if torque is not None:
            self.torque = torque
        self.state = new


@dataclass
class Worksite:
    """Single-writer registry of everything at the work face."""

    wall: Wall
    part: StructuralPart
    drilled_holes: list[DrilledHole] = field(default_factory=list)
    anchors_in_stand: list[AnchorBolt] = field(default_factory=list)

    def register_drilled_hole(self, position: Point3, axis: Point3, depth: float) -> DrilledHole:
        """Record a freshly drilled hole; the registry is append-only."""
        if abs(self.wall.signed_distance(position)) > ON_SURFACE_TOL or not self.wall.contains_lateral(position):
            raise OffWall(f"{position} is not on the wall surface")
        if depth > self.wall.thickness - BACK_COVER_MARGIN:
            raise TooDeep(
                f"depth {depth} m exceeds wall thickness {self.wall.thickness} m "
                f"minus {BACK_COVER_MARGIN} m cover"
            )
        hole = DrilledHole(position=position, axis=axis, depth=depth)
        self.drilled_holes.append(hole)
        return hole

    def hole_near(self, position: Point3, tol: float = 0.01) -> DrilledHole | None:
        best = None
        best_d = tol
        for hole in self.drilled_holes:
            d = hole.position.distance_to(position)
            if d < best_d:
                best, best_d = hole, d
        return best

    def take_anchor(self) -> AnchorBolt:
        if not self.anchors_in_stand:
            raise ValueError("anchor stand is empty")
        return self.anchors_in_stand.pop(0)

    def place_anchor_in_hole(self, anchor: AnchorBolt, hole: DrilledHole, depth: float):
        if hole.anchor is not None:
            raise ValueError("hole already holds an anchor")
        if anchor.hole is not None:
            raise ValueError("anchor already sits in a hole")
        hole.anchor = anchor
        anchor.hole = hole
        anchor.set_state(AnchorState.STUCK, depth=depth)


def anchor_engagement(hole: DrilledHole, tip: Point3, clearance: float = 0.0002) -> Engagement:
    """Classify an insertion attempt by where the anchor tip landed.

    ``clearance`` is the effective insertion clearance radius: the wedge makes
    the anchor nearly the hole diameter, so only a fraction of a millimetre of
    lateral error still lets the tip drop in.
    """
    mouth_distance = tip.distance_to(hole.position)
    if mouth_distance > 0.05:
        raise ValueError(f"tip is {mouth_distance:.3f} m from the hole mouth; not an attempt")
    offset = hole.radial_offset(tip)
    if offset < clearance:
        return Engagement.ENGAGED
    if offset < clearance + RIM_BAND:
        return Engagement.RIM_CONTACT
    return Engagement.SURFACE_CONTACT


def default_hole_pattern(count: int, spacing: float = 0.15) -> list[Point3]:
    """Hole positions in the part-local frame, centred and evenly spaced
    along the part's x axis."""
    if count < 1:
        raise ValueError("need at least one hole")
    start = -spacing * (count - 1) / 2
    return [Point3(start + i * spacing, 0.0, 0.0) for i in range(count)]


def wall_frame_from_angles(center: Point3, yaw_deg: float = 0.0, pitch_deg: float = 0.0) -> Frame:
    """True wall frame for a vertical wall facing the robots along -x base.

    With zero angles: wall x axis = base +y, wall y axis = base -z (down),
    wall z axis (outward normal) = base -x. ``yaw_deg`` rotates the wall about
    the vertical base axis, ``pitch_deg`` tips it back about the wall x axis.
    """
    yaw = math.radians(yaw_deg)
    pitch = math.radians(pitch_deg)
    # Outward normal, nominally -x, yawed about z then pitched.
    nx = -math.cos(yaw) * math.cos(pitch)
    ny = math.sin(yaw) * math.cos(pitch)
    nz = math.sin(pitch)
    z_axis = Point3(nx, ny, nz).normalized()
    # Wall x axis stays horizontal.
    x_axis = Point3(math.sin(yaw), math.cos(yaw), 0.0).normalized()
    y_axis = z_axis.cross(x_axis)
    return Frame(center, x_axis, y_axis, z_axis)
