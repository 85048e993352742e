"""Insert an anchor into a drilled hole, spiral-searching when the camera
misses, then hammer it to the bottom.

The wedge makes the effective insertion clearance a fraction of a millimetre
while the camera locates the hole to ~1.5 mm, so the first attempt usually
lands on the rim and the tip walks an expanding spiral until it drops in.
Hammering then advances the anchor blow by blow until the hole depth and a
27 Nm moment spike say it reached the bottom.

Run:  python3 demos/anchor_insertion_search.py
"""

from anchorsim import Scenario, run
from anchorsim.procedure import FixationStep, max_search_radius, outer_search_radius

scenario = Scenario()
p = scenario.procedure
print(
    f"spiral: pitch {p.spiral_pitch * 1e3:.2f} mm, probe every "
    f"{p.spiral_probe_period * 1e3:.0f} ms, guaranteed radius "
    f"{max_search_radius(p.spiral_pitch, p.spiral_probe_spacing, p.spiral_probe_period, p.search_timeout) * 1e3:.2f} mm, "
    f"outer radius "
    f"{outer_search_radius(p.spiral_pitch, p.spiral_probe_spacing, p.spiral_probe_period, p.search_timeout) * 1e3:.2f} mm"
)
print(f"{'seed':>4s} {'offset':>9s} {'first try':>15s} {'search':>8s} {'stuck':>8s} {'seated':>8s} {'travel':>8s}")

for seed in (7, 0, 3, 5, 10, 2):
    report, _ = run(scenario, seed=seed, mission="hammer")
    ins = report.find(FixationStep.INSERT_ANCHOR)
    d = ins.diagnostics
    if ins.status == "failed":
        print(f"{seed:4d} {'?':>9s} {'-':>15s} {'timeout':>8s}     run failed: {ins.error}")
        continue
    ham = report.find(FixationStep.HAMMER_ANCHOR).diagnostics
    print(
        f"{seed:4d} {d['first_offset'] * 1e3:6.2f} mm {d['first_attempt']:>15s} "
        f"{d['search_time']:6.1f} s {d['stuck_depth'] * 1e3:5.1f} mm "
        f"{ham['final_depth'] * 1e3:5.1f} mm {ham['displacement'] * 1e3:5.1f} mm"
    )

print(
    "\nthe hammering stop is the pair (depth > 70 mm, |mx| >= 27 Nm); the"
    "\nfinal travel lands near 75 mm because the platform slips a few"
    "\nmillimetres backward under the sustained press force."
)
