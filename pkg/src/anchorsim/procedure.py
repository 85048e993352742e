"""Mission executive: the ten-step fixation procedure and its sub-protocols.

Steps are written as generators that yield once per engine tick, so a mission
is a deterministic coroutine the engine advances; dual-arm phases interleave
the per-arm pipelines at tick granularity in fixed arm order. Failure policy
is abort-and-report: a failed step ends the run with a partial report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .engine import World
from .errors import (
    DetectionMissing,
    HaltedByGuard,
    SearchTimeout,
    SimulationError,
    SocketFitTimeout,
    StepFailed,
    WrongPose,
)
from .geometry import Frame, Point3, angle_between, estimate_wall_frame
from .robot import ToolId, attach_tool, detach_tool
from .sensors import DetectionKind, Wrench, camera_detect
from .tools import DrillToolConfig, HammerTool, NutRunnerTool, drill_reaction_moment, drill_thrust, hammer_blow, nutrunner_pulse
from .worksite import (
    MAX_HOLE_DEPTH,
    AnchorBolt,
    AnchorState,
    DrilledHole,
    Engagement,
    PartState,
    anchor_engagement,
    wall_frame_from_angles,
)


class FixationStep(Enum):
    ESTIMATE_ORIENTATION = "estimate_orientation"
    PICK_PLACE_PART = "pick_place_part"
    DETECT_PART_HOLE = "detect_part_hole"
    DRILL_HOLE = "drill_hole"
    DETECT_WALL_HOLE = "detect_wall_hole"
    PICK_ANCHOR = "pick_anchor"
    INSERT_ANCHOR = "insert_anchor"
    HAMMER_ANCHOR = "hammer_anchor"
    TIGHTEN_NUT = "tighten_nut"
    RELEASE_REPEAT = "release_repeat"


#: The canonical order of the ten steps for the first fixation point.
STEP_ORDER = tuple(FixationStep)

#: Steps repeated for every fixation point after the first.
POINT_STEPS = STEP_ORDER[2:9]


@dataclass(frozen=True)
class Thresholds:
    insertion_end_moment: float = 25.0
    hammering_end_moment: float = 27.0
    hammer_success_depth: float = 0.070
    approach_force_z: float = 50.0
    contact_force_z: float = 20.0
    drill_depth_target: float = 0.080
    search_timeout: float = 60.0
    guard_moment_limit: float = 30.0

    def __post_init__(self):
        if self.hammering_end_moment >= self.guard_moment_limit:
            raise ValueError("hammering end moment must stay below the moment guard")
        if self.hammer_success_depth >= self.drill_depth_target:
            raise ValueError("hammer success depth must be below the drill target")

    @classmethod
    def from_scenario(cls, scenario) -> "Thresholds":
        p = scenario.procedure
        return cls(
            insertion_end_moment=p.insertion_end_moment,
            hammering_end_moment=p.hammering_end_moment,
            hammer_success_depth=p.hammer_success_depth,
            approach_force_z=p.approach_force,
            contact_force_z=p.contact_force,
            drill_depth_target=p.drill_depth_target,
            search_timeout=p.search_timeout,
            guard_moment_limit=scenario.sensors.moment_limit,
        )


@dataclass
class StepRecord:
    step: FixationStep
    point_index: int
    arm: str
    t_start: float
    t_end: float = 0.0
    status: str = "running"
    error: str | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    def to_dict(self) -> dict:
        return {
            "step": self.step.value,
            "point": self.point_index,
            "arm": self.arm,
            "t_start": round(self.t_start, 6),
            "t_end": round(self.t_end, 6),
            "duration": round(self.duration, 6),
            "status": self.status,
            "error": self.error,
            "diagnostics": _jsonable(self.diagnostics),
        }


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, Point3):
        return [value.x, value.y, value.z]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, float):
        return round(value, 9)
    return value


@dataclass
class FixationReport:
    steps: list[StepRecord]
    total_duration: float
    traces: list[str]
    seed: int
    scenario_hash: str
    success: bool
    failure: str | None = None

    def step_sequence(self) -> list[FixationStep]:
        return [r.step for r in self.steps]

    def find(self, step: FixationStep, point_index: int = 0) -> StepRecord:
        for r in self.steps:
            if r.step is step and r.point_index == point_index:
                return r
        raise KeyError(f"no record of {step} for point {point_index}")

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "scenario_hash": self.scenario_hash,
            "success": self.success,
            "failure": self.failure,
            "total_duration": round(self.total_duration, 6),
            "steps": [r.to_dict() for r in self.steps],
            "traces": sorted(self.traces),
        }


# --- spiral search geometry ----------------------------------------------------


def spiral_offsets(pitch: float, spacing: float, max_probes: int):
    """Probe offsets (dx, dy) along an expanding spiral.

    Probe 0 sits at the centre; afterwards the polar angle grows so that
    successive probes are about ``spacing`` apart along the arc, with the
    angular step capped near the centre so the first winding is sampled
    densely enough for the insertion clearance.
    """
    if pitch <= 0 or spacing <= 0:
        raise ValueError("pitch and spacing must be positive")
    yield 0.0, 0.0
    theta = 0.0
    two_pi = 2.0 * math.pi
    for _ in range(max_probes - 1):
        r_here = pitch * theta / two_pi
        # The floor on the divisor caps the angular step so the innermost
        # winding stays within the insertion clearance of some probe.
        theta += spacing / max(r_here, 2.0 * spacing)
        r = pitch * theta / two_pi
        yield r * math.cos(theta), r * math.sin(theta)


def outer_search_radius(pitch: float, spacing: float, period: float, timeout: float) -> float:
    """Radius of the outermost probe the time budget allows."""
    probes = int(timeout / period)
    dx = dy = 0.0
    for dx, dy in spiral_offsets(pitch, spacing, probes):
        pass
    return math.hypot(dx, dy)


def max_search_radius(pitch: float, spacing: float, period: float, timeout: float) -> float:
    """Largest offset the spiral is guaranteed to find before timing out.

    The last partial turn sweeps only part of the circle, so guaranteed
    coverage ends one pitch inside the outermost probe radius; offsets in
    that annulus may or may not be found depending on their angle.
    """
    return max(0.0, outer_search_radius(pitch, spacing, period, timeout) - pitch)


def spiral_search(center: Point3, pitch: float, step_period: float, probe, timeout: float,
                  spacing: float, frame: Frame) -> tuple[Point3, float, int]:
    """Stand-alone spiral search over a probe callback.

    ``probe(point) -> bool`` reports engagement at a tip position; returns the
    first engaging point, the time spent, and the probe count. Raises
    SearchTimeout when the time budget runs out. The engine-driven insertion
    uses the same offsets via ``spiral_offsets``.
    """
    max_probes = int(timeout / step_period)
    elapsed = 0.0
    count = 0
    for dx, dy in spiral_offsets(pitch, spacing, max_probes):
        point = center + frame.x_axis.scaled(dx) + frame.y_axis.scaled(dy)
        elapsed += step_period
        count += 1
        if probe(point):
            return point, elapsed, count
    raise SearchTimeout(f"no engagement within {timeout} s ({count} probes)")


# --- dual-arm plan ----------------------------------------------------------------


@dataclass(frozen=True)
class PlanPhase:
    parallel: bool
    assignments: tuple[tuple[int, str], ...]  # (point index, arm name)


@dataclass(frozen=True)
class Plan:
    n_points: int
    phases: tuple[PlanPhase, ...]

    def points_for(self, arm: str) -> list[int]:
        return [p for phase in self.phases for (p, a) in phase.assignments if a == arm]

    def covered_points(self) -> set[int]:
        return {p for phase in self.phases for (p, _) in phase.assignments}


def schedule_dual_arm(part_or_count) -> Plan:
    """Execution plan over fixation points.

    Point one is always fixed by robot 1 while robot 2 holds the part. With
    more than three points the remainder is split across both arms and run in
    parallel after the first point holds the part; with two or three points
    robot 1 finishes them sequentially after robot 2 releases.
    """
    n = part_or_count if isinstance(part_or_count, int) else len(part_or_count.hole_positions)
    if n < 1:
        raise ValueError("need at least one fixation point")
    phases = [PlanPhase(parallel=False, assignments=((0, "robot1"),))]
    rest = list(range(1, n))
    if rest:
        if n > 3:
            mixed = tuple(
                (p, "robot1" if i % 2 == 0 else "robot2") for i, p in enumerate(rest)
            )
            phases.append(PlanPhase(parallel=True, assignments=mixed))
        else:
            for p in rest:
                phases.append(PlanPhase(parallel=False, assignments=((p, "robot1"),)))
    return Plan(n_points=n, phases=tuple(phases))


# --- the executive ---------------------------------------------------------------


class MissionContext:
    """Shared state and tick-level primitives for one mission run."""

    def __init__(self, world: World):
        self.world = world
        self.scenario = world.scenario
        self.thresholds = Thresholds.from_scenario(world.scenario)
        self.est_frame: Frame | None = None
        self.steps: list[StepRecord] = []
        self._open: dict[str, StepRecord] = {}
        self.failure: str | None = None
        # Nominal (design) wall frame: what the executive believes before
        # measuring; deliberately ignores the scenario's true tilt angles.
        center = Point3(
            world.scenario.wall.distance,
            world.scenario.wall.center_y,
            world.scenario.wall.center_z,
        )
        self.nominal_frame = wall_frame_from_angles(center, 0.0, 0.0)

    # -- frames -----------------------------------------------------------------

    @property
    def work_frame(self) -> Frame:
        """Estimated wall frame if measured, else the nominal one."""
        return self.est_frame if self.est_frame is not None else self.nominal_frame

    @property
    def out_normal(self) -> Point3:
        return self.work_frame.z_axis

    # -- step bookkeeping ----------------------------------------------------------

    def begin(self, step: FixationStep, point: int, arm: str) -> StepRecord:
        rec = StepRecord(step=step, point_index=point, arm=arm, t_start=self.world.t)
        self.steps.append(rec)
        self._open[arm] = rec
        return rec

    def end(self, arm: str, **diag):
        rec = self._open.pop(arm)
        rec.t_end = self.world.t
        rec.status = "ok"
        rec.diagnostics.update(diag)

    def fail(self, arm: str, exc: Exception) -> StepFailed:
        rec = self._open.pop(arm, None)
        if rec is not None:
            rec.t_end = self.world.t
            rec.status = "failed"
            rec.error = f"{type(exc).__name__}: {exc}"
            step = rec.step
        else:
            step = "unknown"
        failed = exc if isinstance(exc, StepFailed) else StepFailed(step, exc)
        if self.failure is None:
            self.failure = str(failed)
        return failed

    def guarded(self, step: FixationStep, point: int, arm: str, gen):
        """Run one step generator with record bookkeeping."""
        self.begin(step, point, arm)
        try:
            result = yield from gen
        except StepFailed:
            raise
        except SimulationError as exc:
            raise self.fail(arm, exc) from exc
        self.end(arm)
        return result

    # -- primitives -------------------------------------------------------------

    def arm(self, name: str):
        return self.world.arm(name)

    def station(self, arm: str, kind: str) -> Point3:
        suffix = "1" if arm == "robot1" else "2"
        key = {"tool": f"tool_stand{suffix}", "anchor": f"anchor_stand{suffix}",
               "home": f"home{suffix}", "part": "part_stand"}[kind]
        return self.scenario.station(key)

    def wait(self, seconds: float):
        ticks = max(1, round(seconds / self.world.dt))
        for _ in range(ticks):
            yield

    def move(self, arm: str, target: Point3, speed: float):
        state = self.arm(arm)
        state.start_move(target, speed)
        while state.motion is not None:
            yield
            if state.halted:
                raise HaltedByGuard(state.halt_axis, state.halt_travelled)

    def feed_until(self, arm: str, direction: Point3, speed: float, stop, max_travel: float):
        """Open-ended guarded feed; ``stop()`` is evaluated after each tick."""
        state = self.arm(arm)
        state.start_feed(direction, speed)
        while True:
            yield
            if state.halted:
                raise HaltedByGuard(state.halt_axis, state.halt_travelled)
            if stop():
                state.stop()
                return
            if state.motion is None or state.motion.travelled > max_travel:
                state.stop()
                raise WrongPose(f"{arm}: feed exceeded {max_travel} m without its stop condition")

    def reading(self, arm: str):
        return self.world.runtime(arm).reading

    def true_wrench(self, arm: str) -> Wrench:
        return self.world.runtime(arm).true_wrench

    def ensure_tool(self, arm: str, tool: ToolId):
        """Bring the arm to its tool stand and swap to ``tool`` if needed."""
        state = self.arm(arm)
        if state.attached_tool == tool:
            return
        stand = self.station(arm, "tool")
        speed = self.scenario.robot.gross_speed
        yield from self.move(arm, stand, speed)
        if state.attached_tool is not None:
            yield from self.wait(self.scenario.robot.tool_change_time)
            detach_tool(state, stand)
        yield from self.wait(self.scenario.robot.tool_change_time)
        attach_tool(state, tool, stand)
        state.check_payload()

    def return_tool(self, arm: str):
        state = self.arm(arm)
        if state.attached_tool is None:
            return
        stand = self.station(arm, "tool")
        yield from self.move(arm, stand, self.scenario.robot.gross_speed)
        yield from self.wait(self.scenario.robot.tool_change_time)
        detach_tool(state, stand)

    def detect(self, arm: str, kind: DetectionKind, expected: Point3, index: int):
        """Move the camera over ``expected`` and run one detection."""
        view = expected + self.out_normal.scaled(0.25)
        yield from self.move(arm, view, self.scenario.robot.gross_speed)
        yield from self.wait(self.scenario.sensors.detect_time)
        det = camera_detect(
            kind,
            self.world.site,
            self.world.streams.get(f"camera.{arm}"),
            self.world.camera_params,
            view_center=expected,
            index=index,
        )
        if det is None:
            raise DetectionMissing(f"{kind.value} not found near {expected}")
        return det

    # -- contact models ----------------------------------------------------------

    def surface_press_model(self, stiffness: float):
        """Rigid surface contact: force grows with commanded penetration."""

        def model(world: World, state, dt: float) -> Wrench:
            pen = -world.surface_distance(state.name)
            return Wrench(fz=stiffness * pen) if pen > 0 else Wrench()

        return model

    # -- step 1: orientation -------------------------------------------------------

    def estimate_orientation(self, arm: str):
        p = self.scenario.procedure
        robot = self.scenario.robot
        prior = self.nominal_frame
        # Centre the L-shaped probe pattern so all three rays stay on the
        # wall even at full offset on the small test block.
        first = (
            prior.origin
            + prior.z_axis.scaled(p.laser_standoff)
            + prior.x_axis.scaled(-p.orientation_offset / 2)
            + prior.y_axis.scaled(-p.orientation_offset / 2)
        )
        offsets = [
            Point3(0.0, 0.0, 0.0),
            prior.x_axis.scaled(p.orientation_offset),
            prior.y_axis.scaled(p.orientation_offset),
        ]
        points: list[Point3] = []
        ray = -prior.z_axis
        for offset in offsets:
            yield from self.move(arm, first + offset, robot.gross_speed)
            yield from self.wait(0.5)
            distance = self.world.laser_distance(arm, ray)
            points.append(self.arm(arm).position + ray.scaled(distance))
        est = estimate_wall_frame(points[0], points[1], points[2])
        self.est_frame = est
        true_frame = self.world.site.wall.frame
        error = angle_between(est.z_axis, true_frame.z_axis)
        self._open[arm].diagnostics.update(
            angle_error_rad=error,
            measured_points=[pt for pt in points],
        )
        return est

    # -- step 2: pick and place ------------------------------------------------------

    def pick_place_part(self, arm: str):
        world = self.world
        part = world.site.part
        if part.state is not PartState.IN_STAND:
            raise WrongPose("part is already placed")
        robot = self.scenario.robot
        gripper = world.tool(arm, ToolId.GRIPPER)
        yield from self.ensure_tool(arm, ToolId.GRIPPER)
        yield from self.move(arm, self.station(arm, "part"), robot.gross_speed)
        yield from self.wait(self.scenario.tools.magnet_switch_time)
        gripper.switch_on(part)
        part.set_state(PartState.GRASPED)
        self.arm(arm).held_mass += part.mass
        self.arm(arm).check_payload()

        frame = self.work_frame
        target_local = Point3(self.scenario.part.target_x, self.scenario.part.target_y, 0.0)
        place_point = (
            self.nominal_frame.origin
            + frame.x_axis.scaled(target_local.x)
            + frame.y_axis.scaled(target_local.y)
        )
        approach = place_point + self.out_normal.scaled(0.05)
        yield from self.move(arm, approach, robot.gross_speed)
        yield from self.move(arm, place_point, robot.retract_speed)
        yield from self.wait(1.0)

        rng = world.streams.get("placement")
        sigma = self.scenario.part.placement_sigma
        dx = rng.normal(0.0, sigma) if sigma > 0 else 0.0
        dy = rng.normal(0.0, sigma) if sigma > 0 else 0.0
        wall = world.site.wall
        placed = place_point + frame.x_axis.scaled(dx) + frame.y_axis.scaled(dy)
        # The part sits flush on the true wall surface.
        placed = placed - wall.normal.scaled(wall.signed_distance(placed))
        part.pose = wall.frame.with_origin(placed)
        part.set_state(PartState.HELD_ON_WALL)
        self._open[arm].diagnostics.update(placement_error=math.hypot(dx, dy))

    def release_part(self, arm: str):
        world = self.world
        part = world.site.part
        gripper = world.tool(arm, ToolId.GRIPPER)
        yield from self.wait(self.scenario.tools.magnet_switch_time)
        gripper.switch_off()
        self.arm(arm).held_mass = 0.0
        back = self.arm(arm).position + self.out_normal.scaled(0.10)
        yield from self.move(arm, back, self.scenario.robot.retract_speed)
        yield from self.move(arm, self.station(arm, "home"), self.scenario.robot.gross_speed)

    # -- steps 3..9 ------------------------------------------------------------------

    def detect_part_hole(self, arm: str, point: int):
        frame = self.work_frame
        local = self.world.site.part.hole_positions[point]
        expected = (
            self.nominal_frame.origin
            + frame.x_axis.scaled(self.scenario.part.target_x + local.x)
            + frame.y_axis.scaled(self.scenario.part.target_y + local.y)
        )
        det = yield from self.detect(arm, DetectionKind.PART_HOLE, expected, point)
        true_pos = self.world.site.part.hole_world(point)
        self._open[arm].diagnostics.update(
            detection_error=det.position.distance_to(true_pos),
            confidence=det.confidence,
        )
        return det

    def drill_hole(self, arm: str, target: Point3, point: int):
        """Steps 3-4 core: approach through the part hole, drill to depth."""
        world = self.world
        robot = self.scenario.robot
        th = self.thresholds
        cfg: DrillToolConfig = world.tool(arm, ToolId.DRILL)
        state = self.arm(arm)

        yield from self.ensure_tool(arm, ToolId.DRILL)
        standoff = target + self.out_normal.scaled(robot.approach_standoff + 0.02)
        yield from self.move(arm, standoff, robot.gross_speed)

        # Guarded approach until the bit touches the wall.
        state.contact_model = self.surface_press_model(robot.contact_stiffness)
        try:
            yield from self.feed_until(
                arm,
                -self.out_normal,
                robot.approach_speed,
                stop=lambda: self.reading(arm) is not None and self.reading(arm).fz >= th.contact_force_z,
                max_travel=0.2,
            )
            contact_cmd = state.position
            laser_zero = world.laser_distance(arm)
            slip_zero = world.slip(arm)
            yield from self.wait(self.scenario.tools.drill_spinup_time)

            def drilling_model(w: World, s, dt: float) -> Wrench:
                depth = max(0.0, min(-w.surface_distance(s.name), MAX_HOLE_DEPTH))
                return Wrench(
                    fz=drill_thrust(depth, cfg),
                    mx=drill_reaction_moment(cfg, depth),
                )

            state.contact_model = drilling_model
            world.runtime(arm).reset_guard()
            use_laser = self.scenario.procedure.depth_source == "laser"
            measured = 0.0
            max_mx = 0.0
            min_mx = 0.0

            def depth_reached():
                nonlocal measured, max_mx, min_mx
                commanded = (contact_cmd - state.position).dot(self.out_normal)
                if use_laser:
                    measured = laser_zero - world.laser_distance(arm)
                else:
                    measured = commanded
                world.record_depthset(arm, measured, commanded)
                mx = self.true_wrench(arm).mx
                max_mx = max(max_mx, mx)
                min_mx = min(min_mx, mx)
                return measured >= th.drill_depth_target

            try:
                yield from self.feed_until(
                    arm, -self.out_normal, cfg.feed_speed, stop=depth_reached, max_travel=0.12
                )
            except HaltedByGuard as exc:
                depth_at_halt = max(0.0, -world.surface_distance(arm))
                # The stop callback never saw the halt tick; fold it in.
                mx_halt = self.true_wrench(arm).mx
                self._open[arm].diagnostics.update(
                    halt_axis=exc.axis,
                    halt_depth=depth_at_halt,
                    max_mx=max(max_mx, mx_halt),
                    min_mx=min(min_mx, mx_halt),
                    variant=cfg.variant.value,
                )
                raise HaltedByGuard(exc.axis, depth_at_halt) from None

            true_depth = max(0.0, -world.surface_distance(arm))
            hole_depth = min(true_depth, MAX_HOLE_DEPTH)
            tip = world.true_position(arm)
            wall = world.site.wall
            entry = tip - wall.normal.scaled(wall.signed_distance(tip))
            hole = world.site.register_drilled_hole(entry, -self.out_normal, hole_depth)
        finally:
            state.contact_model = None

        yield from self.move(arm, standoff, robot.retract_speed)
        yield from self.move(arm, self.station(arm, "tool"), robot.gross_speed)
        yield from self.wait(robot.tool_change_time)
        detach_tool(state, self.station(arm, "tool"))
        self._open[arm].diagnostics.update(
            hole_depth=hole.depth,
            measured_depth=measured,
            slip_during=world.slip(arm) - slip_zero,
            max_mx=max_mx,
            min_mx=min_mx,
            variant=cfg.variant.value,
        )
        return hole

    def detect_wall_hole(self, arm: str, hole: DrilledHole, point: int):
        index = self.world.site.drilled_holes.index(hole)
        det = yield from self.detect(arm, DetectionKind.WALL_HOLE, hole.position, index)
        self._open[arm].diagnostics.update(
            detection_error=det.position.distance_to(hole.position),
            confidence=det.confidence,
        )
        return det

    def pick_anchor(self, arm: str):
        world = self.world
        robot = self.scenario.robot
        hammer: HammerTool = world.tool(arm, ToolId.HAMMER)
        yield from self.ensure_tool(arm, ToolId.HAMMER)
        yield from self.move(arm, self.station(arm, "anchor"), robot.gross_speed)
        yield from self.wait(self.scenario.tools.grip_time)
        anchor = world.site.take_anchor()
        hammer.inflate(anchor)
        self.arm(arm).held_mass += anchor.mass
        self.arm(arm).check_payload()
        self._open[arm].diagnostics.update(anchor_mass=anchor.mass)
        return anchor

    def insert_anchor(self, arm: str, target: Point3, anchor: AnchorBolt, point: int):
        """Steps 5-7 core: approach the detected hole, search if needed, push
        until the wedge reaches the insertion end moment."""
        world = self.world
        robot = self.scenario.robot
        p = self.scenario.procedure
        th = self.thresholds
        state = self.arm(arm)
        wall = world.site.wall
        # Wide tolerance: a badly mislocated detection still aims the attempt
        # somewhere, and the search then honestly fails to reach the hole.
        hole = world.site.hole_near(target, tol=0.1)
        if hole is None:
            raise DetectionMissing("no drilled hole near the detected position")
        clearance = p.engagement_clearance

        standoff = target + self.out_normal.scaled(robot.approach_standoff)
        yield from self.move(arm, standoff, robot.gross_speed)

        def engagement_now() -> Engagement:
            tip = world.true_position(arm)
            tip_on_wall = tip - wall.normal.scaled(wall.signed_distance(tip))
            return anchor_engagement(hole, tip_on_wall, clearance)

        def wedge_model(w: World, s, dt: float) -> Wrench:
            pen = max(0.0, -w.surface_distance(s.name))
            if engagement_now() is Engagement.ENGAGED:
                moment = p.wedge_moment_rate * pen
                return Wrench(fz=6.0 * moment, mx=moment)
            return Wrench(fz=robot.contact_stiffness * pen) if pen > 0 else Wrench()

        state.contact_model = wedge_model
        try:
            entered = False

            def touch_or_enter():
                nonlocal entered
                pen = -world.surface_distance(arm)
                if pen >= 0.0005 and engagement_now() is Engagement.ENGAGED:
                    entered = True
                    return True
                r = self.reading(arm)
                return r is not None and r.fz >= 15.0

            yield from self.feed_until(arm, -self.out_normal, robot.approach_speed,
                                       stop=touch_or_enter, max_travel=0.05)

            first = engagement_now()
            first_offset = hole.radial_offset(world.true_position(arm) - wall.normal.scaled(
                wall.signed_distance(world.true_position(arm))))
            search_time = 0.0
            probes = 0
            if not entered:
                # Back off to a light slide on the surface and spiral outward.
                surface_cmd = state.position + self.out_normal.scaled(
                    -world.surface_distance(arm) + 0.0003
                )
                state.contact_model = lambda w, s, dt: Wrench(fz=20.0)
                yield from self.move(arm, surface_cmd, robot.retract_speed)
                center = state.position
                max_probes = int(th.search_timeout / p.spiral_probe_period)
                t0 = world.t
                found = None
                frame = self.work_frame
                for dx, dy in spiral_offsets(p.spiral_pitch, p.spiral_probe_spacing, max_probes):
                    probe_point = center + frame.x_axis.scaled(dx) + frame.y_axis.scaled(dy)
                    state.position = probe_point
                    probes += 1
                    yield from self.wait(p.spiral_probe_period)
                    if state.halted:
                        raise HaltedByGuard(state.halt_axis, state.halt_travelled)
                    if engagement_now() is Engagement.ENGAGED:
                        found = probe_point
                        break
                search_time = world.t - t0
                if found is None:
                    raise SearchTimeout(
                        f"spiral search exhausted {th.search_timeout} s "
                        f"({probes} probes, first offset {first_offset * 1e3:.2f} mm)"
                    )
                state.contact_model = wedge_model

            def wedged():
                r = self.reading(arm)
                pen = max(0.0, -world.surface_distance(arm))
                commanded = pen + world.slip(arm)
                # The laser reads the signed distance to the surface plane,
                # so tip penetration is simply its negation.
                world.record_depthset(arm, -world.laser_distance(arm), commanded)
                return r is not None and abs(r.mx) >= th.insertion_end_moment

            yield from self.feed_until(arm, -self.out_normal, robot.approach_speed,
                                       stop=wedged, max_travel=0.03)
            stuck_depth = max(0.0, -world.surface_distance(arm))
            stuck_measured = -world.laser_distance(arm)
            world.site.place_anchor_in_hole(anchor, hole, stuck_depth)
        finally:
            state.contact_model = None

        self._open[arm].diagnostics.update(
            first_attempt=first.value,
            first_offset=first_offset,
            search_used=not entered,
            search_time=search_time,
            probes=probes,
            stuck_depth=stuck_depth,
            stuck_measured=stuck_measured,
        )
        return {"hole": hole, "stuck_measured": stuck_measured}

    def hammer_anchor(self, arm: str, anchor: AnchorBolt, stuck_measured: float, point: int):
        """Step 8: release the gripper, hammer until depth and moment say the
        anchor hit the bottom."""
        world = self.world
        th = self.thresholds
        tools_cfg = self.scenario.tools
        state = self.arm(arm)
        hammer: HammerTool = world.tool(arm, ToolId.HAMMER)
        hole = anchor.hole

        yield from self.wait(tools_cfg.grip_time)
        hammer.deflate()
        self.arm(arm).held_mass = max(0.0, self.arm(arm).held_mass - anchor.mass)
        hammer.start_hammering()

        start_cmd = state.position
        depth0 = anchor.depth
        slip0 = world.slip(arm)
        laser_zero = world.laser_distance(arm)
        blow_interval = 1.0 / tools_cfg.blow_rate
        blow_state = {"next": blow_interval, "elapsed": 0.0, "peak": 0.0, "blows": 0}
        out = self.out_normal

        def hammer_model(w: World, s, dt: float) -> Wrench:
            blow_state["elapsed"] += dt
            moment = 1.5
            if blow_state["elapsed"] + 1e-12 >= blow_state["next"]:
                blow_state["next"] += blow_interval
                new_depth, peak = hammer_blow(hammer, anchor.depth, hole)
                anchor.depth = new_depth
                blow_state["peak"] = peak
                blow_state["blows"] += 1
                moment = peak
            if not s.halted:
                advance = (anchor.depth - depth0) + (w.slip(s.name) - slip0)
                s.position = start_cmd - out.scaled(advance)
            return Wrench(fz=tools_cfg.hammer_press_force, mx=moment)

        state.contact_model = hammer_model
        try:
            while True:
                yield
                if state.halted:
                    raise HaltedByGuard(state.halt_axis, state.halt_travelled)
                measured_depth = stuck_measured + (laser_zero - world.laser_distance(arm))
                displacement = (start_cmd - state.position).dot(out)
                world.record_depthset(arm, measured_depth, displacement)
                r = self.reading(arm)
                if r is not None and abs(r.mx) >= th.hammering_end_moment:
                    if measured_depth > th.hammer_success_depth:
                        break
                    raise SimulationError(
                        f"bottom contact at {measured_depth * 1e3:.1f} mm, "
                        f"below the {th.hammer_success_depth * 1e3:.0f} mm success depth"
                    )
        finally:
            state.contact_model = None

        anchor.set_state(AnchorState.SEATED, depth=anchor.depth)
        displacement = (start_cmd - state.position).dot(out)
        self._open[arm].diagnostics.update(
            blows=blow_state["blows"],
            displacement=displacement,
            final_depth=anchor.depth,
            measured_depth=stuck_measured + (laser_zero - world.laser_distance(arm)),
            stop_moment=blow_state["peak"],
        )

    def tighten_nut(self, arm: str, anchor: AnchorBolt, point: int):
        """Step 9: the six-sub-step tightening protocol."""
        world = self.world
        robot = self.scenario.robot
        tools_cfg = self.scenario.tools
        th = self.thresholds
        state = self.arm(arm)
        runner: NutRunnerTool = world.tool(arm, ToolId.NUTRUNNER)
        runner.socket_engaged = False
        runner.socket_extension = 0.0
        hole = anchor.hole
        wall = world.site.wall

        yield from self.ensure_tool(arm, ToolId.NUTRUNNER)
        protrusion = anchor.length - anchor.depth
        head_point = hole.position + wall.normal.scaled(protrusion)
        standoff = head_point + self.out_normal.scaled(robot.approach_standoff)
        yield from self.move(arm, standoff, robot.gross_speed)

        substeps: list[tuple[str, float, float]] = []
        approach_triggers: list[dict] = []
        max_moment = 0.0
        spring = tools_cfg.socket_spring_rate

        def track_moment():
            nonlocal max_moment
            max_moment = max(max_moment, abs(self.true_wrench(arm).mx))

        def spring_model(reference_pen: float):
            def model(w: World, s, dt: float) -> Wrench:
                pen = protrusion - w.surface_distance(s.name)
                compression = pen - reference_pen
                return Wrench(fz=spring * compression) if compression > 0 else Wrench()
            return model

        def approach(name: str, reference_pen: float):
            state.contact_model = spring_model(reference_pen)
            t0 = world.t

            def pressed():
                track_moment()
                r = self.reading(arm)
                return r is not None and r.fz >= th.approach_force_z

            yield from self.feed_until(arm, -self.out_normal, robot.approach_speed,
                                       stop=pressed, max_travel=protrusion + 0.03)
            approach_triggers.append(
                {"reading_fz": self.reading(arm).fz, "true_fz": self.true_wrench(arm).fz}
            )
            substeps.append((name, t0, world.t))

        def current_pen():
            return protrusion - world.surface_distance(arm)

        try:
            # (1) approach until the force threshold.
            yield from approach("approach_contact", 0.0)

            # (2) alternate rotation until the socket slots onto the nut.
            t0 = world.t
            fit_state = {"elapsed": 0.0, "hold_fz": self.true_wrench(arm).fz}
            anchor_present = anchor.state in (AnchorState.STUCK, AnchorState.SEATED)

            def fit_model(w: World, s, dt: float) -> Wrench:
                fit_state["elapsed"] += dt
                fitted = anchor_present and fit_state["elapsed"] >= tools_cfg.socket_fit_time
                if fitted:
                    runner.socket_extension = 0.003
                    return Wrench(fz=5.0, mx=0.0)
                wiggle = 1.2 if int(fit_state["elapsed"] / 0.2) % 2 == 0 else -1.2
                return Wrench(fz=fit_state["hold_fz"], mx=wiggle)

            state.contact_model = fit_model
            waited = 0.0
            while True:
                yield
                track_moment()
                waited += world.dt
                r = self.reading(arm)
                if r is not None and r.fz < 10.0 and runner.socket_extension > 0.001:
                    break
                if waited > self.scenario.procedure.socket_fit_timeout:
                    raise SocketFitTimeout(
                        f"socket never slotted on within {self.scenario.procedure.socket_fit_timeout} s"
                    )
            substeps.append(("socket_fit", t0, world.t))

            # (3) advance again to the force threshold.
            yield from approach("re_approach", current_pen())

            # (4) run the nut down to the part surface.
            t0 = world.t
            run_distance = protrusion - self.scenario.part.thickness - tools_cfg.nut_height
            if run_distance < 0:
                raise SimulationError("anchor does not protrude enough to run the nut")
            if run_distance > runner.socket_spring_travel:
                raise SimulationError(
                    f"nut run {run_distance * 1e3:.0f} mm exceeds the socket spring travel"
                )
            run_duration = run_distance / tools_cfg.nut_run_speed
            run_state = {"elapsed": 0.0}

            def run_model(w: World, s, dt: float) -> Wrench:
                run_state["elapsed"] += dt
                frac = min(1.0, run_state["elapsed"] / run_duration)
                runner.socket_extension = 0.003 + run_distance * frac
                return Wrench(
                    fz=50.0 - 30.0 * frac,
                    mx=runner.pulse_attenuation * tools_cfg.free_run_torque,
                )

            state.contact_model = run_model
            ticks = max(1, round(run_duration / world.dt))
            for _ in range(ticks):
                yield
                track_moment()
            substeps.append(("run_nut", t0, world.t))

            # (5) advance once more.
            yield from approach("re_approach_2", current_pen())

            # (6) pulse-tighten to the target torque.
            t0 = world.t
            runner.socket_engaged = True
            pulse_interval = 1.0 / tools_cfg.pulse_rate
            pulse_state = {"elapsed": 0.0, "next": pulse_interval, "torque": 0.0}

            def pulse_model(w: World, s, dt: float) -> Wrench:
                pulse_state["elapsed"] += dt
                flange = runner.pulse_attenuation * pulse_state["torque"]
                if pulse_state["elapsed"] + 1e-12 >= pulse_state["next"]:
                    pulse_state["next"] += pulse_interval
                    torque, flange = nutrunner_pulse(runner, pulse_state["torque"])
                    pulse_state["torque"] = torque
                return Wrench(fz=50.0, mx=flange)

            state.contact_model = pulse_model
            while pulse_state["torque"] < runner.target_torque:
                yield
                track_moment()
                if state.halted:
                    raise HaltedByGuard(state.halt_axis, state.halt_travelled)
            substeps.append(("pulse_tighten", t0, world.t))
        finally:
            state.contact_model = None

        anchor.set_state(AnchorState.TIGHTENED, torque=runner.target_torque)
        world.site.part.mark_point_fixed()
        yield from self.move(arm, standoff, robot.retract_speed)
        self._open[arm].diagnostics.update(
            substeps=[(n, round(a, 6), round(b, 6)) for n, a, b in substeps],
            approach_triggers=approach_triggers,
            final_torque=runner.target_torque,
            max_flange_moment=max_moment,
        )

    # -- point pipeline ----------------------------------------------------------

    def fix_point(self, arm: str, point: int):
        """Steps 3 through 9 for one fixation point."""
        det_part = yield from self.guarded(
            FixationStep.DETECT_PART_HOLE, point, arm, self.detect_part_hole(arm, point)
        )
        hole = yield from self.guarded(
            FixationStep.DRILL_HOLE, point, arm, self.drill_hole(arm, det_part.position, point)
        )
        det_hole = yield from self.guarded(
            FixationStep.DETECT_WALL_HOLE, point, arm, self.detect_wall_hole(arm, hole, point)
        )
        anchor = yield from self.guarded(
            FixationStep.PICK_ANCHOR, point, arm, self.pick_anchor(arm)
        )
        inserted = yield from self.guarded(
            FixationStep.INSERT_ANCHOR, point, arm,
            self.insert_anchor(arm, det_hole.position, anchor, point),
        )
        yield from self.guarded(
            FixationStep.HAMMER_ANCHOR, point, arm,
            self.hammer_anchor(arm, anchor, inserted["stuck_measured"], point),
        )
        yield from self.guarded(
            FixationStep.TIGHTEN_NUT, point, arm, self.tighten_nut(arm, anchor, point)
        )


# --- missions -------------------------------------------------------------------


def mission_full(ctx: MissionContext):
    """The complete procedure, scheduled over one or both arms."""
    plan = schedule_dual_arm(ctx.world.site.part)
    ctx.world.site.anchors_in_stand = [AnchorBolt() for _ in range(plan.n_points)]

    yield from ctx.guarded(
        FixationStep.ESTIMATE_ORIENTATION, 0, "robot1", ctx.estimate_orientation("robot1")
    )
    yield from ctx.guarded(
        FixationStep.PICK_PLACE_PART, 0, "robot2", ctx.pick_place_part("robot2")
    )
    yield from ctx.fix_point("robot1", 0)

    # Step 10: robot 2 releases the part; repeats follow for other points.
    rec = ctx.begin(FixationStep.RELEASE_REPEAT, 0, "robot2")
    try:
        yield from ctx.release_part("robot2")
        if plan.n_points == 1:
            yield from ctx.return_tool("robot1")
    except SimulationError as exc:
        raise ctx.fail("robot2", exc) from exc
    rec.diagnostics["remaining_points"] = plan.n_points - 1
    ctx.end("robot2")

    for phase in plan.phases[1:]:
        if not phase.parallel:
            for point, arm in phase.assignments:
                yield from ctx.fix_point(arm, point)
        else:
            chains: dict[str, list[int]] = {}
            for point, arm in phase.assignments:
                chains.setdefault(arm, []).append(point)

            def chain(arm: str, points: list[int]):
                for pt in points:
                    yield from ctx.fix_point(arm, pt)

            gens = {arm: chain(arm, pts) for arm, pts in sorted(chains.items())}
            for gen in gens.values():
                gen.send(None)
            while gens:
                yield
                for name in sorted(gens):
                    try:
                        gens[name].send(None)
                    except StopIteration:
                        del gens[name]

    if plan.n_points > 1:
        rec = ctx.begin(FixationStep.RELEASE_REPEAT, plan.n_points - 1, "robot1")
        try:
            yield from ctx.return_tool("robot1")
            yield from ctx.return_tool("robot2")
        except SimulationError as exc:
            raise ctx.fail("robot1", exc) from exc
        rec.diagnostics["cleanup"] = True
        ctx.end("robot1")


def mission_drill(ctx: MissionContext):
    """Drill-tool protocol: touch the bare wall, drill to depth or overload."""
    target = ctx.nominal_frame.origin
    yield from ctx.guarded(
        FixationStep.DRILL_HOLE, 0, "robot1", ctx.drill_hole("robot1", target, 0)
    )
    yield from ctx.return_tool("robot1")


def _preset_hole(ctx: MissionContext) -> DrilledHole:
    site = ctx.world.site
    return site.register_drilled_hole(
        site.wall.frame.origin, -site.wall.normal, ctx.thresholds.drill_depth_target
    )


def _mission_insert_core(ctx: MissionContext, hole: DrilledHole):
    det = yield from ctx.guarded(
        FixationStep.DETECT_WALL_HOLE, 0, "robot1", ctx.detect_wall_hole("robot1", hole, 0)
    )
    anchor = yield from ctx.guarded(
        FixationStep.PICK_ANCHOR, 0, "robot1", ctx.pick_anchor("robot1")
    )
    inserted = yield from ctx.guarded(
        FixationStep.INSERT_ANCHOR, 0, "robot1",
        ctx.insert_anchor("robot1", det.position, anchor, 0),
    )
    return anchor, inserted


def mission_insert(ctx: MissionContext):
    """Insertion only: detect the pre-drilled hole, pick, insert (with search)."""
    ctx.world.site.anchors_in_stand = [AnchorBolt()]
    hole = _preset_hole(ctx)
    yield from _mission_insert_core(ctx, hole)


def mission_hammer(ctx: MissionContext):
    """Anchor protocol: insert into a pre-drilled hole, then hammer it home."""
    ctx.world.site.anchors_in_stand = [AnchorBolt()]
    hole = _preset_hole(ctx)
    anchor, inserted = yield from _mission_insert_core(ctx, hole)
    yield from ctx.guarded(
        FixationStep.HAMMER_ANCHOR, 0, "robot1",
        ctx.hammer_anchor("robot1", anchor, inserted["stuck_measured"], 0),
    )
    yield from ctx.return_tool("robot1")


def _seated_anchor(ctx: MissionContext, hole: DrilledHole) -> AnchorBolt:
    anchor = AnchorBolt()
    anchor.set_state(AnchorState.GRASPED)
    ctx.world.site.place_anchor_in_hole(anchor, hole, depth=0.007)
    anchor.set_state(AnchorState.SEATED, depth=hole.depth - 0.001)
    return anchor


def mission_nut(ctx: MissionContext):
    """Nut protocol: six sub-steps on a seated anchor."""
    hole = _preset_hole(ctx)
    anchor = _seated_anchor(ctx, hole)
    yield from ctx.guarded(
        FixationStep.TIGHTEN_NUT, 0, "robot1", ctx.tighten_nut("robot1", anchor, 0)
    )
    yield from ctx.return_tool("robot1")


def mission_nut_missing(ctx: MissionContext):
    """Nut protocol pointed at an empty hole; the socket never fits."""
    hole = _preset_hole(ctx)
    anchor = AnchorBolt()  # stays in the stand; the runner presses the bare part plane
    anchor.depth = hole.depth - 0.001
    anchor.hole = hole
    yield from ctx.guarded(
        FixationStep.TIGHTEN_NUT, 0, "robot1", ctx.tighten_nut("robot1", anchor, 0)
    )


def mission_frame(ctx: MissionContext):
    """Orientation estimation only."""
    yield from ctx.guarded(
        FixationStep.ESTIMATE_ORIENTATION, 0, "robot1", ctx.estimate_orientation("robot1")
    )


MISSIONS = {
    "full": mission_full,
    "drill": mission_drill,
    "insert": mission_insert,
    "hammer": mission_hammer,
    "nut": mission_nut,
    "nut-missing": mission_nut_missing,
    "frame": mission_frame,
}


def drive_mission(world: World, mission: str = "full"):
    """Advance the mission generator one tick at a time until it finishes."""
    try:
        factory = MISSIONS[mission]
    except KeyError:
        raise ValueError(f"unknown mission {mission!r}; one of {sorted(MISSIONS)}") from None
    ctx = MissionContext(world)
    gen = factory(ctx)
    try:
        gen.send(None)
        while True:
            world.step()
            gen.send(None)
    except StopIteration:
        success = ctx.failure is None
    except StepFailed:
        success = False
    for rec in ctx.steps:
        if rec.status == "running":
            rec.status = "aborted"
            rec.t_end = world.t
    report = FixationReport(
        steps=ctx.steps,
        total_duration=world.t,
        traces=sorted(world.recorder.traces),
        seed=world.seed,
        scenario_hash=world.scenario_hash,
        success=success,
        failure=ctx.failure,
    )
    return report, world.recorder.traces


def run_fixation(scenario, seed: int) -> FixationReport:
    """Run the complete fixation procedure; identical inputs give identical
    reports."""
    from .engine import run

    report, _ = run(scenario, seed, mission="full")
    return report
