"""Arm kinematic state, tool changer bookkeeping, and platform slippage.

There is no joint model: an arm is its commanded tool point moving on straight
lines at constant speed, which is all the fixation procedure needs. Tool tip
lever arms appear only inside the tool moment models.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import FlangeOccupied, NoTool, OutOfReach, WrongPose
from .geometry import Point3


class ToolId(str, Enum):
    DRILL = "drill"
    HAMMER = "hammer"
    NUTRUNNER = "nutrunner"
    GRIPPER = "gripper"


#: Tool masses (kg); generous but comfortably under the 13 kg payload.
TOOL_MASSES = {
    ToolId.DRILL: 6.0,
    ToolId.HAMMER: 4.0,
    ToolId.NUTRUNNER: 5.0,
    ToolId.GRIPPER: 1.0,
}

#: How close the flange must be to the stand for a tool change, metres.
STAND_POSE_TOL = 0.005


@dataclass
class Motion:
    """Constant-speed straight-line segment, advanced tick by tick."""

    target: Point3 | None  # None = open-ended along ``direction``
    direction: Point3
    speed: float
    travelled: float = 0.0

    def advance(self, position: Point3, dt: float) -> tuple[Point3, bool]:
        step = self.speed * dt
        if self.target is not None:
            remaining = position.distance_to(self.target)
            if remaining <= step:
                self.travelled += remaining
                return self.target, True
        self.travelled += step
        return position + self.direction.scaled(step), False


@dataclass
class ArmState:
    name: str
    base: Point3
    position: Point3
    reach: float = 1.298
    payload_capacity: float = 13.0
    attached_tool: ToolId | None = None
    held_mass: float = 0.0
    motion: Motion | None = None
    contact_model: object | None = None
    halted: bool = False
    halt_axis: str | None = None
    halt_travelled: float = 0.0
    tool_masses: dict = field(default_factory=lambda: dict(TOOL_MASSES))

    def check_reach(self, target: Point3):
        d = self.base.distance_to(target)
        if d > self.reach:
            raise OutOfReach(f"{self.name}: target {d:.3f} m away exceeds reach {self.reach} m")

    def check_payload(self, extra: float = 0.0):
        tool_mass = self.tool_masses.get(self.attached_tool, 0.0) if self.attached_tool else 0.0
        total = tool_mass + self.held_mass + extra
        if total > self.payload_capacity:
            raise ValueError(f"{self.name}: payload {total:.1f} kg exceeds {self.payload_capacity} kg")

    def start_move(self, target: Point3, speed: float):
        if speed <= 0:
            raise ValueError("speed must be positive")
        self.check_reach(target)
        if target.distance_to(self.position) < 1e-12:
            self.motion = None
            return
        direction = (target - self.position).normalized()
        self.motion = Motion(target=target, direction=direction, speed=speed)
        self.halted = False
        self.halt_axis = None

    def start_feed(self, direction: Point3, speed: float):
        """Open-ended guarded feed; the caller stops it on a condition."""
        if speed <= 0:
            raise ValueError("speed must be positive")
        self.motion = Motion(target=None, direction=direction.normalized(), speed=speed)
        self.halted = False
        self.halt_axis = None

    def stop(self):
        self.motion = None

    def halt(self, axis: str):
        self.halted = True
        self.halt_axis = axis
        self.halt_travelled = self.motion.travelled if self.motion else 0.0
        self.motion = None

    def advance(self, dt: float) -> bool:
        """Advance the commanded position one tick; True when a move target
        was reached."""
        if self.motion is None or self.halted:
            return False
        new_pos, arrived = self.motion.advance(self.position, dt)
        out_of_reach = self.base.distance_to(new_pos) > self.reach
        if out_of_reach:
            # Open-ended feeds stop at the reach sphere; targeted moves were
            # validated up front, so this only trims feeds.
            self.motion = None
            return False
        self.position = new_pos
        if arrived:
            self.motion = None
        return arrived


def move_linear(arm: ArmState, target: Point3, speed: float, dt: float = 0.01) -> list[tuple[float, Point3]]:
    """Timed poses of a straight-line move; duration is distance/speed.

    Pure planner used by tests and demos; the engine integrates the same
    Motion tick by tick so both agree.
    """
    if speed <= 0:
        raise ValueError("speed must be positive")
    arm.check_reach(target)
    poses: list[tuple[float, Point3]] = []
    position = arm.position
    direction = (target - position).normalized() if target.distance_to(position) > 0 else Point3(1, 0, 0)
    motion = Motion(target=target, direction=direction, speed=speed)
    t = 0.0
    while True:
        position, arrived = motion.advance(position, dt)
        t += dt
        poses.append((t, position))
        if arrived:
            return poses


def attach_tool(arm: ArmState, tool: ToolId, stand_position: Point3) -> ArmState:
    """Mount ``tool`` from the stand; requires an empty flange at the stand."""
    tool = ToolId(tool)
    if arm.attached_tool is not None:
        raise FlangeOccupied(f"{arm.name} already carries {arm.attached_tool.value}")
    if arm.position.distance_to(stand_position) > STAND_POSE_TOL:
        raise WrongPose(f"{arm.name} is not at the tool stand")
    arm.attached_tool = tool
    arm.check_payload()
    return arm


def detach_tool(arm: ArmState, stand_position: Point3) -> ToolId:
    """Return the mounted tool to the stand."""
    if arm.attached_tool is None:
        raise NoTool(f"{arm.name} has no tool to detach")
    if arm.position.distance_to(stand_position) > STAND_POSE_TOL:
        raise WrongPose(f"{arm.name} is not at the tool stand")
    tool = arm.attached_tool
    arm.attached_tool = None
    return tool


@dataclass
class PlatformState:
    """Wheeled platform under one robot module.

    Sustained compressive contact with the wall pushes the platform backward
    along the wall normal; the offset accumulates within a run and never
    recovers on its own.
    """

    slip_coefficient: float = 2e-7  # m/(N*s)
    slip_offset: float = 0.0  # m along the outward wall normal

    def step(self, applied_force: float, dt: float) -> "PlatformState":
        if dt <= 0:
            raise ValueError("dt must be positive")
        self.slip_offset += self.slip_coefficient * max(applied_force, 0.0) * dt
        return self


def platform_slip_step(platform: PlatformState, applied_force: float, dt: float) -> PlatformState:
    """Accumulate slip for one tick; tension never pulls the platform in."""
    return platform.step(applied_force, dt)
