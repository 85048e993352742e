from __future__ import annotations

import numpy as np
import pytest

from anchorsim.errors import AnchorDropped, GripperInflated, SocketNotEngaged
from anchorsim.geometry import Point3
from anchorsim.tools import (
    DrillToolConfig,
    DrillVariant,
    GripperState,
    GripperTool,
    HammerTool,
    MagnetState,
    NutRunnerTool,
    drill_reaction_moment,
    drill_thrust,
    hammer_blow,
    nutrunner_pulse,
)
from anchorsim.worksite import AnchorBolt, AnchorState, DrilledHole

DEPTHS = np.linspace(0.0, 0.08, 801)


def cfg(variant):
    return DrillToolConfig(variant=variant)


# --- thrust -----------------------------------------------------------------


def test_thrust_line():
    # F(d) = 280 + 2000 d: chosen so the uncompensated moment hits the
    # -30 Nm guard at exactly 10 mm (see test below).
    assert drill_thrust(0.0) == pytest.approx(280.0)
    assert drill_thrust(0.01) == pytest.approx(300.0)


def test_thrust_rejects_negative_depth():
    with pytest.raises(ValueError):
        drill_thrust(-0.001)
    with pytest.raises(ValueError):
        drill_thrust(0.2)


def test_thrust_monotone():
    vals = [drill_thrust(float(d)) for d in DEPTHS]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


# --- reaction moments --------------------------------------------------------


def test_uncompensated_hits_guard_at_10mm():
    c = cfg(DrillVariant.OFFSET_UNCOMPENSATED)
    assert drill_reaction_moment(c, 0.010) == pytest.approx(-30.0)


def test_uncompensated_strictly_decreasing():
    c = cfg(DrillVariant.OFFSET_UNCOMPENSATED)
    vals = [drill_reaction_moment(c, float(d)) for d in DEPTHS]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_regular_spring_curve():
    c = cfg(DrillVariant.REGULAR_SPRING)
    assert drill_reaction_moment(c, 0.0) == pytest.approx(15.0)
    slope = (drill_reaction_moment(c, 0.02) - drill_reaction_moment(c, 0.0)) / 0.02
    assert slope == pytest.approx(230.0)
    # Crosses +30 Nm near 65 mm, before the 80 mm target depth.
    crossing = (30.0 - 15.0) / slope
    assert crossing == pytest.approx(0.0652, abs=1e-3)
    assert drill_reaction_moment(c, 0.064) < 30.0 < drill_reaction_moment(c, 0.066)


def test_regular_spring_compensation_grows():
    c = cfg(DrillVariant.REGULAR_SPRING)
    spring = [
        drill_reaction_moment(c, float(d)) + drill_thrust(float(d), c) * c.drill_offset
        for d in DEPTHS
    ]
    assert all(b > a for a, b in zip(spring, spring[1:]))


def test_constant_load_curve():
    c = cfg(DrillVariant.CONSTANT_LOAD_SPRING)
    assert drill_reaction_moment(c, 0.0) == pytest.approx(1.4)
    assert drill_reaction_moment(c, 0.08) == pytest.approx(-14.6)
    assert all(abs(drill_reaction_moment(c, float(d))) < 30.0 for d in DEPTHS)


def test_constant_load_flatness_exact():
    # The spring term is depth independent, so moment differences reduce to
    # the thrust slope times the drill offset, to machine precision.
    c = cfg(DrillVariant.CONSTANT_LOAD_SPRING)
    rng = np.random.default_rng(3)
    for _ in range(200):
        d1, d2 = rng.uniform(0.0, 0.08, 2)
        lhs = drill_reaction_moment(c, d1) - drill_reaction_moment(c, d2)
        rhs = -c.thrust_per_meter * c.drill_offset * (d1 - d2)
        assert lhs == pytest.approx(rhs, abs=1e-12)


def test_aligned_axis_overloads_early():
    c = cfg(DrillVariant.ALIGNED_AXIS)
    # Long-lever tool: crosses -30 Nm within the first few millimetres,
    # earlier than the offset uncompensated tool.
    depths = np.linspace(0, 0.08, 8001)
    aligned = next(d for d in depths if drill_reaction_moment(c, float(d)) <= -30.0)
    unc = next(
        d
        for d in depths
        if drill_reaction_moment(cfg(DrillVariant.OFFSET_UNCOMPENSATED), float(d)) <= -30.0
    )
    assert aligned < unc


def test_config_validation():
    with pytest.raises(ValueError):
        DrillToolConfig(variant=DrillVariant.REGULAR_SPRING, spring_rate=0.0)
    with pytest.raises(ValueError):
        DrillToolConfig(variant=DrillVariant.CONSTANT_LOAD_SPRING, constant_load_force=-1.0)
    with pytest.raises(ValueError):
        DrillToolConfig(drill_offset=0.0)
    with pytest.raises(ValueError):
        DrillToolConfig(variant="banana")


# --- hammer -------------------------------------------------------------------


def make_hole(depth=0.08):
    return DrilledHole(position=Point3(0.9, 0, 1.0), axis=Point3(-1, 0, 0), depth=depth)


def test_blow_at_bottom_signals_contact():
    tool = HammerTool()
    hole = make_hole()
    depth, peak = hammer_blow(tool, hole.depth, hole)
    assert depth == hole.depth
    assert peak >= 27.0


def test_blow_advance_midway():
    tool = HammerTool()
    hole = make_hole()
    depth, peak = hammer_blow(tool, 0.007, hole)
    assert depth == pytest.approx(0.0079125, abs=1e-7)
    assert peak == pytest.approx(8.0)


def test_blow_requires_deflated_gripper():
    tool = HammerTool(gripper_state=GripperState.INFLATED)
    with pytest.raises(GripperInflated):
        hammer_blow(tool, 0.007, make_hole())


def test_blow_sequence_monotone_never_overshoots():
    tool = HammerTool()
    hole = make_hole()
    tool.start_hammering()
    d = 0.007
    seen_bottom = False
    for _ in range(5000):
        nd, peak = hammer_blow(tool, d, hole)
        assert nd >= d
        assert nd <= hole.depth
        assert peak <= 30.0
        if peak >= 27.0:
            seen_bottom = True
            break
        d = nd
    assert seen_bottom


def test_bottom_ramp_within_three_blows():
    tool = HammerTool()
    hole = make_hole()
    tool.start_hammering()
    d = hole.depth - 0.0009  # just inside the contact band
    peaks = []
    for _ in range(3):
        d, peak = hammer_blow(tool, d, hole)
        peaks.append(peak)
    assert peaks[-1] >= 27.0
    assert peaks == sorted(peaks)


# --- nut runner ----------------------------------------------------------------


def test_pulse_final_step():
    tool = NutRunnerTool(socket_engaged=True)
    torque, flange = nutrunner_pulse(tool, 49.0)
    assert torque == pytest.approx(50.0)
    assert flange == pytest.approx(20.0)


def test_pulse_ramp_bounded():
    tool = NutRunnerTool(socket_engaged=True)
    torque = 0.0
    for _ in range(200):
        torque, flange = nutrunner_pulse(tool, torque)
        assert flange <= tool.pulse_attenuation * tool.target_torque + 1e-12
    assert torque == pytest.approx(50.0)


def test_pulse_requires_engagement():
    tool = NutRunnerTool()
    with pytest.raises(SocketNotEngaged):
        nutrunner_pulse(tool, 0.0)


def test_nutrunner_validation():
    with pytest.raises(ValueError):
        NutRunnerTool(target_torque=0.0)
    with pytest.raises(ValueError):
        NutRunnerTool(pulse_attenuation=1.5)
    with pytest.raises(ValueError):
        NutRunnerTool(socket_spring_travel=0.0)


# --- grippers -------------------------------------------------------------------


def test_inflate_grasps_anchor():
    tool = HammerTool()
    anchor = AnchorBolt()
    tool.inflate(anchor)
    assert tool.gripper_state is GripperState.INFLATED
    assert anchor.state is AnchorState.GRASPED
    assert tool.held_anchor is anchor


def test_deflate_over_stuck_anchor_keeps_it():
    tool = HammerTool()
    anchor = AnchorBolt()
    hole = make_hole()
    tool.inflate(anchor)
    anchor.hole = hole
    anchor.set_state(AnchorState.STUCK, depth=0.007)
    tool.deflate()
    assert anchor.state is AnchorState.STUCK
    assert anchor.depth == pytest.approx(0.007)


def test_deflate_in_free_space_drops_anchor():
    tool = HammerTool()
    anchor = AnchorBolt()
    tool.inflate(anchor)
    with pytest.raises(AnchorDropped):
        tool.deflate()


def test_magnet_gripper():
    g = GripperTool()
    g.switch_on(part="bracket")
    assert g.magnet_state is MagnetState.ON
    assert g.held_part == "bracket"
    assert g.switch_off() == "bracket"
    assert g.held_part is None


def test_gripper_set_dispatch():
    from anchorsim.tools import gripper_set

    hammer = HammerTool()
    gripper_set(hammer, "inflated")
    assert hammer.gripper_state is GripperState.INFLATED
    gripper_set(hammer, GripperState.DEFLATED)
    assert hammer.gripper_state is GripperState.DEFLATED

    magnet = GripperTool()
    gripper_set(magnet, "on")
    assert magnet.magnet_state is MagnetState.ON
    gripper_set(magnet, "off")
    assert magnet.magnet_state is MagnetState.OFF

    with pytest.raises(TypeError):
        gripper_set(NutRunnerTool(), "on")
