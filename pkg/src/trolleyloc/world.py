"""Trolley geometry, scenarios and the polar experiment grid."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from .config import SensorSuiteConfig
from .errors import EmptyGrid
from .geometry import IDENTITY_2D, Pose2D, Vec2, transform_point

MASK64 = (1 << 64) - 1


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix_seed(seed: int, index: int) -> int:
    """Derive a child 64-bit seed: splitmix64(splitmix64(seed) ^ index)."""
    return _splitmix64(_splitmix64(seed & MASK64) ^ (index & MASK64))


def _default_keypoints() -> np.ndarray:
    # four wheels on a 0.5 m square footprint, two handle ends on the rear pole
    return np.array(
        [
            [0.25, 0.25, 0.0],
            [0.25, -0.25, 0.0],
            [-0.25, 0.25, 0.0],
            [-0.25, -0.25, 0.0],
            [-0.30, 0.15, 1.0],
            [-0.30, -0.15, 1.0],
        ]
    )


@dataclass(frozen=True, eq=False)
class TrolleyModel:
    """Rigid trolley geometry in the trolley frame (x forward, y left, z up).

    The frame origin is the trolley centre, i.e. the offset point of both the
    tag pair and the reflector pair.  Pairs are ordered right-to-left so that
    the offset direction points forward.
    """

    keypoints_local: np.ndarray = field(default_factory=_default_keypoints)
    tag_offsets: tuple[Vec2, Vec2] = (Vec2(-0.30, -0.25), Vec2(-0.30, 0.25))
    reflector_offsets: tuple[Vec2, Vec2] = (Vec2(-0.30, -0.15), Vec2(-0.30, 0.15))
    offset_d: float = 0.30
    body_radius: float = 0.25

    def __post_init__(self):
        kps = np.asarray(self.keypoints_local, dtype=float)
        if kps.shape != (6, 3):
            raise ValueError(f"exactly 6 keypoints required, got shape {kps.shape}")
        kps.setflags(write=False)
        object.__setattr__(self, "keypoints_local", kps)
        for name in ("tag_offsets", "reflector_offsets"):
            pair = tuple(getattr(self, name))
            if len(pair) != 2 or (pair[0] - pair[1]).norm() <= 1e-9:
                raise ValueError(f"{name} must hold exactly 2 distinct points")
            object.__setattr__(self, name, pair)
        if not math.isfinite(self.offset_d):
            raise ValueError("offset_d must be finite")
        if self.body_radius < 0:
            raise ValueError("body_radius must be non-negative")

    @property
    def tag_separation(self) -> float:
        return (self.tag_offsets[1] - self.tag_offsets[0]).norm()

    @property
    def reflector_separation(self) -> float:
        return (self.reflector_offsets[1] - self.reflector_offsets[0]).norm()


@dataclass(frozen=True)
class GridPoint:
    index: int
    angle_deg: float
    distance: float
    yaw_deg: float


@dataclass(frozen=True)
class Scenario:
    robot_pose: Pose2D = IDENTITY_2D
    trolley_pose: Pose2D = Pose2D(3.0, 0.0, 0.0)
    trolley: TrolleyModel = field(default_factory=TrolleyModel)
    sensors: SensorSuiteConfig = field(default_factory=SensorSuiteConfig)
    seed: int = 0
    grid_point: GridPoint | None = None

    def __post_init__(self):
        if not 0 <= self.seed <= MASK64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def with_seed(self, seed: int) -> Scenario:
        return replace(self, seed=seed)


@dataclass(frozen=True)
class GridSpec:
    polar_angles: tuple[float, ...] = (0.0, 15.0, 30.0, 45.0, 60.0, 75.0, 90.0)
    distances: tuple[float, ...] = (3.0, 4.5, 6.0, 7.5, 9.0)
    yaw_steps: tuple[float, ...] = tuple(float(30 * k) for k in range(12))

    def __post_init__(self):
        for name in ("polar_angles", "distances", "yaw_steps"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))

    def __len__(self) -> int:
        return len(self.polar_angles) * len(self.distances) * len(self.yaw_steps)


def generate_grid(spec: GridSpec, base: Scenario) -> list[Scenario]:
    """One scenario per (angle, distance, yaw), lexicographically ordered.

    Angles and yaws are measured from the robot heading, so with the robot at
    the default pose the trolley sits at ``distance * (cos a, sin a)``.
    """
    if not (spec.polar_angles and spec.distances and spec.yaw_steps):
        raise EmptyGrid("grid spec has an empty axis")
    robot = base.robot_pose
    out = []
    idx = 0
    for angle in spec.polar_angles:
        bearing = robot.theta + math.radians(angle)
        for dist in spec.distances:
            x = robot.x + dist * math.cos(bearing)
            y = robot.y + dist * math.sin(bearing)
            for yaw in spec.yaw_steps:
                out.append(
                    replace(
                        base,
                        trolley_pose=Pose2D(x, y, robot.theta + math.radians(yaw)),
                        seed=mix_seed(base.seed, idx),
                        grid_point=GridPoint(idx, angle, dist, yaw),
                    )
                )
                idx += 1
    return out


def ground_truth_keypoints(s: Scenario) -> np.ndarray:
    p = s.trolley_pose
    c, sn = math.cos(p.theta), math.sin(p.theta)
    kps = s.trolley.keypoints_local
    out = np.empty_like(kps)
    out[:, 0] = p.x + c * kps[:, 0] - sn * kps[:, 1]
    out[:, 1] = p.y + sn * kps[:, 0] + c * kps[:, 1]
    out[:, 2] = kps[:, 2]
    return out


def ground_truth_markers(s: Scenario, which: Literal["tags", "reflectors"]) -> tuple[Vec2, Vec2]:
    if which == "tags":
        offsets = s.trolley.tag_offsets
    elif which == "reflectors":
        offsets = s.trolley.reflector_offsets
    else:
        raise ValueError(f"unknown marker set {which!r}")
    return transform_point(s.trolley_pose, offsets[0]), transform_point(s.trolley_pose, offsets[1])
