"""Estimate a tilted wall's orientation from three laser points.

The ground at a worksite is rarely level, so the executive never trusts the
nominal wall orientation: it probes three points with the laser rangefinder
and builds the working frame from them. This demo tilts the wall 5 degrees,
runs the estimation across many seeds, and summarizes the angular error the
0.1 mm range noise leaves behind.

Run:  python3 demos/wall_orientation.py
"""

import math

import numpy as np

from anchorsim import Scenario, run
from anchorsim.procedure import FixationStep

scenario = Scenario()
scenario.wall.yaw_deg = 5.0

errors = []
for seed in range(200):
    report, _ = run(scenario, seed=seed, mission="frame")
    rec = report.find(FixationStep.ESTIMATE_ORIENTATION)
    errors.append(math.degrees(rec.diagnostics["angle_error_rad"]))

errors = np.array(errors)
print(f"wall yaw: {scenario.wall.yaw_deg} deg, laser noise {scenario.sensors.laser_sigma * 1e3:.1f} mm")
print(f"recovered-normal error over {len(errors)} runs:")
print(f"  median {np.median(errors):.4f} deg")
print(f"  95th   {np.quantile(errors, 0.95):.4f} deg")
print(f"  max    {errors.max():.4f} deg")

# Noiseless sanity: the estimator is exact when the sensor is.
scenario.sensors.laser_sigma = 0.0
report, _ = run(scenario, seed=0, mission="frame")
exact = report.find(FixationStep.ESTIMATE_ORIENTATION).diagnostics["angle_error_rad"]
print(f"zero-noise error: {exact:.2e} rad")
