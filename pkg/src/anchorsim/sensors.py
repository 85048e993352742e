"""Noisy observation models and the force/moment safety guard."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import NoReturn
from .geometry import Point3
from .worksite import Worksite

_AXES = ("fx", "fy", "fz", "mx", "my", "mz")


@dataclass(frozen=True)
class Wrench:
    """True force/moment state at a flange, before sensor noise."""

    fx: float = 0.0
    fy: float = 0.0
    fz: float = 0.0
    mx: float = 0.0
    my: float = 0.0
    mz: float = 0.0

    def as_tuple(self):
        return (self.fx, self.fy, self.fz, self.mx, self.my, self.mz)


ZERO_WRENCH = Wrench()


@dataclass(frozen=True)
class FTReading:
    fx: float
    fy: float
    fz: float
    mx: float
    my: float
    mz: float
    timestamp: float = 0.0

    def as_tuple(self):
        return (self.fx, self.fy, self.fz, self.mx, self.my, self.mz)


@dataclass(frozen=True)
class SafetyLimits:
    force_limit: float = 1000.0  # N
    moment_limit: float = 30.0  # Nm

    def __post_init__(self):
        if self.force_limit <= 0 or self.moment_limit <= 0:
            raise ValueError("safety limits must be positive")


@dataclass(frozen=True)
class FTNoise:
    sigma_force: float = 2.0  # N
    sigma_moment: float = 0.2  # Nm


def read_ft(true_wrench: Wrench, noise: FTNoise, rng, timestamp: float = 0.0) -> FTReading:
    """Sample the flange FT sensor: true wrench plus zero-mean Gaussian noise.

    ``rng`` is a numpy Generator; identical seeds give identical readings.
    """
    if noise.sigma_force == 0.0 and noise.sigma_moment == 0.0:
        return FTReading(*true_wrench.as_tuple(), timestamp=timestamp)
    sf, sm = noise.sigma_force, noise.sigma_moment
    n = rng.standard_normal(6)
    return FTReading(
        true_wrench.fx + sf * float(n[0]),
        true_wrench.fy + sf * float(n[1]),
        true_wrench.fz + sf * float(n[2]),
        true_wrench.mx + sm * float(n[3]),
        true_wrench.my + sm * float(n[4]),
        true_wrench.mz + sm * float(n[5]),
        timestamp=timestamp,
    )


def overload_guard(reading: FTReading, limits: SafetyLimits = SafetyLimits()) -> str | None:
    """Return the first overloaded axis name, or None when within limits.

    The comparison is strict: readings exactly at the limit pass, so a
    calibration point sitting on -30 Nm does not trip the stop.
    """
    values = reading.as_tuple()
    for axis, value in zip(_AXES[:3], values[:3]):
        if abs(value) > limits.force_limit:
            return axis
    for axis, value in zip(_AXES[3:], values[3:]):
        if abs(value) > limits.moment_limit:
            return axis
    return None


class GuardFilter:
    """Per-axis moving average feeding the overload guard.

    Raw FT samples are too noisy to trip a +/-30 Nm stop within a millimetre
    of feed, so the guard watches a short moving average, the way a robot
    controller low-pass filters its overload channel. Task-level thresholds
    (contact, insertion end, hammer end) still use raw readings.
    """

    def __init__(self, window: int):
        if window < 1:
            raise ValueError("filter window must be at least one sample")
        self.window = window
        self._buf: deque[tuple[float, ...]] = deque(maxlen=window)
        self._sums = [0.0] * 6

    def push(self, reading: FTReading) -> FTReading:
        sample = reading.as_tuple()
        if len(self._buf) == self.window:
            oldest = self._buf[0]
            for i in range(6):
                self._sums[i] -= oldest[i]
        self._buf.append(sample)
        for i in range(6):
            self._sums[i] += sample[i]
        n = len(self._buf)
        return FTReading(*(s / n for s in self._sums), timestamp=reading.timestamp)

    def reset(self):
        self._buf.clear()
        self._sums = [0.0] * 6


def read_laser(origin: Point3, direction: Point3, worksite: Worksite, rng, sigma: float = 0.0001) -> float:
    """Distance (m) from ``origin`` along ``direction`` to the wall surface.

    Measures the true surface, so platform slippage shows up as an increased
    distance even when the commanded pose is stationary. Raises NoReturn when
    the ray is parallel to the wall or misses its extent.
    """
    d = direction.normalized()
    normal = worksite.wall.normal
    denom = d.dot(normal)
    if abs(denom) < 1e-9:
        raise NoReturn("laser ray is parallel to the wall")
    t = (worksite.wall.frame.origin - origin).dot(normal) / denom
    if t <= 0:
        raise NoReturn("wall is behind the sensor")
    hit = origin + d.scaled(t)
    if not worksite.wall.contains_lateral(hit):
        raise NoReturn("laser ray misses the wall extent")
    if sigma > 0.0:
        t += rng.normal(0.0, sigma)
    return t


class DetectionKind(str, Enum):
    PART_HOLE = "part_hole"
    WALL_HOLE = "wall_hole"
    ANCHOR_BOLT = "anchor_bolt"


@dataclass(frozen=True)
class Detection:
    kind: DetectionKind
    position: Point3
    confidence: float


@dataclass(frozen=True)
class CameraParams:
    p_detect: float = 0.98
    sigma_wall: float = 0.0015  # m, wall-hole and anchor detections
    sigma_part: float = 0.0010  # m, part-hole detections
    fov_lateral: float = 0.2  # m, half-extent of the usable field of view


def camera_detect(
    kind: DetectionKind,
    worksite: Worksite,
    rng,
    params: CameraParams = CameraParams(),
    view_center: Point3 | None = None,
    index: int = 0,
) -> Detection | None:
    """Stochastic stand-in for the image-processing detections.

    Returns the true target position with per-axis Gaussian error in the wall
    plane, or None (not found) with probability ``1 - p_detect`` or when the
    target sits outside the lateral field of view around ``view_center``.
    """
    kind = DetectionKind(kind)
    if kind is DetectionKind.PART_HOLE:
        true_pos = worksite.part.hole_world(index)
        sigma = params.sigma_part
    else:
        if index >= len(worksite.drilled_holes):
            return None
        hole = worksite.drilled_holes[index]
        true_pos = hole.position
        sigma = params.sigma_wall
    if view_center is not None:
        lateral = true_pos - view_center
        normal = worksite.wall.normal
        lateral = lateral - normal.scaled(lateral.dot(normal))
        if lateral.norm() > params.fov_lateral:
            return None
    if params.p_detect < 1.0 and rng.random() >= params.p_detect:
        return None
    if sigma > 0.0:
        frame = worksite.wall.frame
        err_x = rng.normal(0.0, sigma)
        err_y = rng.normal(0.0, sigma)
        position = true_pos + frame.x_axis.scaled(err_x) + frame.y_axis.scaled(err_y)
        err = (err_x * err_x + err_y * err_y) ** 0.5
        confidence = max(0.5, 1.0 - err / (3.0 * sigma))
    else:
        position = true_pos
        confidence = 1.0
    return Detection(kind=kind, position=position, confidence=confidence)


def gaussian_stream(seed_seq: np.random.SeedSequence) -> np.random.Generator:
    """One independent, reproducible random stream for one sensor."""
    return np.random.default_rng(seed_seq)
