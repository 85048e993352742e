"""Fixed-timestep simulation core: clock, random streams, traces, world.

Everything that happens in a run is a function of (scenario, seed, dt): the
clock never reads wall time, every sensor draws from its own seeded stream,
and the per-tick order (advance motions, evaluate contacts, sample sensors,
check the guard) is fixed, so identical inputs give identical outputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonMonotonicTime
from .geometry import Point3
from .robot import ArmState, PlatformState, ToolId
from .scenario import Scenario, scenario_hash
from .sensors import (
    CameraParams,
    FTNoise,
    FTReading,
    GuardFilter,
    SafetyLimits,
    Wrench,
    ZERO_WRENCH,
    overload_guard,
    read_ft,
    read_laser,
)
from .tools import DrillToolConfig, GripperTool, HammerTool, NutRunnerTool
from .worksite import StructuralPart, Wall, Worksite, default_hole_pattern, wall_frame_from_angles

TRACE_CHANNELS = (
    "fx", "fy", "fz", "mx", "my", "mz",
    "laser_depth", "commanded_depth", "slip",
)

#: Hard ceiling on simulated time; trips only on executive bugs.
MAX_SIM_TIME = 7200.0


@dataclass
class SimClock:
    dt: float = 0.01
    t: float = 0.0
    ticks: int = 0

    def tick(self) -> float:
        self.ticks += 1
        self.t = self.ticks * self.dt
        return self.t


class Trace:
    """One recorded channel: strictly increasing timestamps, one value each."""

    def __init__(self, trace_id: str, channel: str):
        if channel not in TRACE_CHANNELS:
            raise ValueError(f"unknown channel {channel!r}")
        self.id = trace_id
        self.channel = channel
        self.times: list[float] = []
        self.values: list[float] = []

    def record(self, t: float, value: float):
        if self.times and t <= self.times[-1]:
            raise NonMonotonicTime(f"{self.id}: {t} after {self.times[-1]}")
        self.times.append(t)
        self.values.append(value)

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.times, self.values))

    def __len__(self):
        return len(self.times)


class TraceRecorder:
    def __init__(self):
        self.traces: dict[str, Trace] = {}

    def register(self, trace_id: str, channel: str) -> Trace:
        if trace_id in self.traces:
            return self.traces[trace_id]
        trace = Trace(trace_id, channel)
        self.traces[trace_id] = trace
        return trace

    def record(self, trace_id: str, t: float, value: float):
        self.traces[trace_id].record(t, value)


class RandomStreams:
    """One independent generator per sensor, all derived from one seed.

    Streams are spawned in a fixed order so determinism does not depend on
    which sensor happens to be read first.
    """

    NAMES = (
        "ft.robot1",
        "ft.robot2",
        "laser.robot1",
        "laser.robot2",
        "camera.robot1",
        "camera.robot2",
        "placement",
        "misc",
    )

    def __init__(self, seed: int):
        self.seed = int(seed)
        children = np.random.SeedSequence(self.seed).spawn(len(self.NAMES))
        self._streams = {
            name: np.random.default_rng(child) for name, child in zip(self.NAMES, children)
        }

    def get(self, name: str) -> np.random.Generator:
        return self._streams[name]


@dataclass
class ArmRuntime:
    """Per-arm simulation state beyond the kinematic ArmState."""

    state: ArmState
    guard_filter: GuardFilter
    true_wrench: Wrench = ZERO_WRENCH
    reading: FTReading | None = None
    filtered: FTReading | None = None
    guard_fired_t: float | None = None
    active: bool = False
    press_force: float = 0.0  # wall-normal force driving platform slip

    def reset_guard(self):
        self.guard_filter.reset()


class World:
    """All mutable simulation state for one run."""

    def __init__(self, scenario: Scenario, seed: int):
        scenario.validate()
        self.scenario = scenario
        self.seed = int(seed)
        self.scenario_hash = scenario_hash(scenario)
        self.clock = SimClock(dt=scenario.procedure.timestep)
        self.recorder = TraceRecorder()
        self.streams = RandomStreams(seed)
        self.limits = SafetyLimits(scenario.sensors.force_limit, scenario.sensors.moment_limit)
        self.noise = FTNoise(scenario.sensors.ft_sigma_force, scenario.sensors.ft_sigma_moment)
        self.camera_params = CameraParams(
            p_detect=scenario.sensors.p_detect,
            sigma_wall=scenario.sensors.camera_sigma_wall,
            sigma_part=scenario.sensors.camera_sigma_part,
            fov_lateral=scenario.sensors.camera_fov,
        )

        wall_center = Point3(scenario.wall.distance, scenario.wall.center_y, scenario.wall.center_z)
        wall = Wall(
            frame=wall_frame_from_angles(wall_center, scenario.wall.yaw_deg, scenario.wall.pitch_deg),
            width=scenario.wall.width,
            height=scenario.wall.height,
            thickness=scenario.wall.thickness,
            compressive_strength=scenario.wall.compressive_strength,
        )
        part = StructuralPart(
            hole_positions=default_hole_pattern(scenario.part.holes, scenario.part.hole_spacing),
            hole_diameter=scenario.part.hole_diameter,
            thickness=scenario.part.thickness,
            mass=scenario.part.mass,
        )
        self.site = Worksite(wall=wall, part=part)

        window = max(1, round(scenario.sensors.guard_filter_window / self.clock.dt))
        self.arms: dict[str, ArmRuntime] = {}
        for name, home in (("robot1", "home1"), ("robot2", "home2")):
            arm = ArmState(
                name=name,
                base=scenario.station("base1" if name == "robot1" else "base2"),
                position=scenario.station(home),
                reach=scenario.robot.reach,
                payload_capacity=scenario.robot.payload,
                tool_masses={
                    ToolId.DRILL: scenario.robot.mass_drill,
                    ToolId.HAMMER: scenario.robot.mass_hammer,
                    ToolId.NUTRUNNER: scenario.robot.mass_nutrunner,
                    ToolId.GRIPPER: scenario.robot.mass_gripper,
                },
            )
            self.arms[name] = ArmRuntime(state=arm, guard_filter=GuardFilter(window))

        self.platforms = {
            "robot1": PlatformState(slip_coefficient=scenario.robot.slip_coefficient),
            "robot2": PlatformState(slip_coefficient=scenario.robot.slip_coefficient),
        }

        # One tool set per module; robot 2's stand also carries the gripper.
        t = scenario.tools
        drill_cfg = DrillToolConfig(
            variant=t.variant,
            drill_offset=t.drill_offset,
            support_arm_offset=t.support_arm_offset,
            spring_rate=t.spring_rate,
            spring_preload=t.spring_preload,
            constant_load_force=t.constant_load_force,
            bit_diameter=t.bit_diameter,
            bit_length=t.bit_length,
            feed_speed=t.feed_speed,
            thrust_at_contact=t.thrust_at_contact,
            thrust_per_meter=t.thrust_per_meter,
            aligned_tip_lever=t.aligned_tip_lever,
            aligned_error_lever=t.aligned_error_lever,
        )
        self.tools = {}
        for name in ("robot1", "robot2"):
            self.tools[(name, ToolId.DRILL)] = drill_cfg
            self.tools[(name, ToolId.HAMMER)] = HammerTool(
                inflation_pressure=t.inflation_pressure,
                blow_rate=t.blow_rate,
                blow_advance=t.blow_advance,
                free_moment=t.hammer_free_moment,
                contact_ramp=t.hammer_contact_ramp,
                contact_cap=t.hammer_contact_cap,
            )
            self.tools[(name, ToolId.NUTRUNNER)] = NutRunnerTool(
                target_torque=t.target_torque,
                pulse_attenuation=t.pulse_attenuation,
                socket_spring_travel=t.socket_spring_travel,
                runner_offset=t.runner_offset,
                torque_step=t.pulse_torque_step,
            )
        self.tools[("robot2", ToolId.GRIPPER)] = GripperTool()

        for name in self.arms:
            for channel in ("fx", "fy", "fz", "mx", "my", "mz", "laser_depth", "commanded_depth", "slip"):
                self.recorder.register(f"{name}/{channel}", channel)

    # -- kinematic helpers ----------------------------------------------------

    @property
    def t(self) -> float:
        return self.clock.t

    @property
    def dt(self) -> float:
        return self.clock.dt

    def arm(self, name: str) -> ArmState:
        return self.arms[name].state

    def runtime(self, name: str) -> ArmRuntime:
        return self.arms[name]

    def tool(self, arm_name: str, tool: ToolId):
        return self.tools[(arm_name, ToolId(tool))]

    def slip(self, arm_name: str) -> float:
        return self.platforms[arm_name].slip_offset

    def true_position(self, arm_name: str) -> Point3:
        """Commanded tool point pushed back by the accumulated platform slip."""
        arm = self.arm(arm_name)
        return arm.position + self.site.wall.normal.scaled(self.slip(arm_name))

    def surface_distance(self, arm_name: str) -> float:
        """True signed distance of the tool point from the wall surface."""
        return self.site.wall.signed_distance(self.true_position(arm_name))

    def laser_distance(self, arm_name: str, ray: Point3 | None = None) -> float:
        """Noisy laser range from the true tool point to the wall along ``ray``.

        The ray origin is backed off half a metre along the ray so the
        measurement stays defined while the tool point is inside the hole;
        the constant offset cancels out of every depth computed by
        difference, which mirrors a laser mounted beside the bit.
        """
        if ray is None:
            ray = -self.site.wall.normal
        ray = ray.normalized()
        origin = self.true_position(arm_name) - ray.scaled(0.5)
        distance = read_laser(
            origin,
            ray,
            self.site,
            self.streams.get(f"laser.{arm_name}"),
            sigma=self.scenario.sensors.laser_sigma,
        )
        return distance - 0.5

    # -- tick -------------------------------------------------------------------

    def step(self):
        """One tick: slip, motions, contact physics, sensors, guard, traces.

        Slip integrates at the start of the tick from the previous tick's
        press force, so the slip an executive reads after the step is exactly
        the slip the contact models saw.
        """
        t = self.clock.tick()
        dt = self.clock.dt
        for name, runtime in self.arms.items():
            self.platforms[name].step(runtime.press_force, dt)
            runtime.state.advance(dt)
        for name, runtime in self.arms.items():
            arm = runtime.state
            model = arm.contact_model
            if model is not None:
                wrench = model(self, arm, dt)
            else:
                wrench = ZERO_WRENCH
            runtime.true_wrench = wrench
            runtime.press_force = max(wrench.fz, 0.0)
            runtime.active = model is not None or arm.motion is not None
            if not runtime.active:
                runtime.reading = None
                continue
            reading = read_ft(wrench, self.noise, self.streams.get(f"ft.{name}"), timestamp=t)
            runtime.reading = reading
            runtime.filtered = runtime.guard_filter.push(reading)
            axis = overload_guard(runtime.filtered, self.limits)
            if axis is not None and not arm.halted:
                arm.halt(axis)
                runtime.guard_fired_t = t
            for channel, value in zip(("fx", "fy", "fz", "mx", "my", "mz"), wrench.as_tuple()):
                self.recorder.record(f"{name}/{channel}", t, value)
        if self.clock.t > MAX_SIM_TIME:
            raise RuntimeError("simulation exceeded the maximum simulated time")

    def record_depthset(self, arm_name: str, laser_depth: float, commanded_depth: float):
        t = self.clock.t
        self.recorder.record(f"{arm_name}/laser_depth", t, laser_depth)
        self.recorder.record(f"{arm_name}/commanded_depth", t, commanded_depth)
        self.recorder.record(f"{arm_name}/slip", t, self.slip(arm_name))


def run(scenario: Scenario, seed: int, mission: str = "full"):
    """Build a world, drive the requested mission to completion, and return
    ``(FixationReport, traces)``."""
    from .procedure import drive_mission

    world = World(scenario, seed)
    return drive_mission(world, mission)
