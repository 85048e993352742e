"""Fix a four-point part with both arms working in parallel.

The first point is always fixed by robot 1 while robot 2 holds the part in
place; once that anchor is tightened the part carries itself, robot 2
releases it, and the remaining points are split across both arms. Each arm
has its own tool and anchor stand, so the pipelines never contend.

Run:  python3 demos/dual_arm_parallel.py
"""

from anchorsim import Scenario, schedule_dual_arm
from anchorsim.engine import World
from anchorsim.procedure import FixationStep, drive_mission

for n in (1, 2, 4, 6):
    plan = schedule_dual_arm(n)
    shape = " + ".join(
        ("par" if phase.parallel else "seq")
        + str([f"{p}:{a[-1:]}" for p, a in phase.assignments]).replace("'", "")
        for phase in plan.phases
    )
    print(f"n={n}: {shape}")

print("\nrunning the 4-point fixation...")
scenario = Scenario()
scenario.part.holes = 4
scenario.part.hole_spacing = 0.05
scenario.robot.tool_change_time = 5.0  # trimmed so the demo stays quick
scenario.tools.blow_advance = 0.004
scenario.tools.blow_rate = 12.0

world = World(scenario.validate(), seed=7)
report, _ = drive_mission(world, "full")
print(f"success={report.success}  total={report.total_duration:.0f} s")

print(f"\n{'step':24s} {'pt':>2s} {'arm':8s} {'start':>9s} {'end':>9s}")
for rec in report.steps:
    print(f"{rec.step.value:24s} {rec.point_index:2d} {rec.arm:8s} "
          f"{rec.t_start:8.1f}s {rec.t_end:8.1f}s")

by_arm = {"robot1": set(), "robot2": set()}
for rec in report.steps:
    if rec.step is FixationStep.TIGHTEN_NUT:
        by_arm[rec.arm].add(rec.point_index)
print(f"\npoints fixed by robot1: {sorted(by_arm['robot1'])}, "
      f"robot2: {sorted(by_arm['robot2'])}")
