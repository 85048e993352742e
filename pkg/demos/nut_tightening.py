"""Tighten the anchor nut with the offset pulse runner.

Six sub-steps, each gated on the force reading: press to 50 N, wobble the
socket until it slots onto the nut, press again, run the nut down the thread
to the part, press once more, then pulse up to the 50 Nm target. The pulse
mechanism transmits only a fraction of the fastener torque to the flange,
which is why a 50 Nm tightening never approaches the 30 Nm moment guard.

Run:  python3 demos/nut_tightening.py
"""

from anchorsim import Scenario, run
from anchorsim.procedure import FixationStep

report, traces = run(Scenario(), seed=5, mission="nut")
rec = report.find(FixationStep.TIGHTEN_NUT)
d = rec.diagnostics

print(f"{'sub-step':18s} {'start':>9s} {'end':>9s} {'length':>9s}")
for name, t0, t1 in d["substeps"]:
    print(f"{name:18s} {t0:8.2f}s {t1:8.2f}s {t1 - t0:8.2f}s")

print("\napproach triggers (threshold 50 N):")
for i, trig in enumerate(d["approach_triggers"], 1):
    print(f"  {i}: reading {trig['reading_fz']:.1f} N, true {trig['true_fz']:.1f} N")

print(f"\nfinal torque        {d['final_torque']:.0f} Nm")
print(f"max flange moment   {d['max_flange_moment']:.1f} Nm (guard 30 Nm)")

mx = traces["robot1/mx"]
window = [v for t, v in zip(mx.times, mx.values) if rec.t_start <= t <= rec.t_end]
print(f"trace check: peak |mx| during the step = {max(abs(v) for v in window):.1f} Nm")
