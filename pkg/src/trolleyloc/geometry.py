"""Planar and spatial pose algebra plus the dual-marker centre construction.

Two markers ``a`` and ``b`` fixed on a rigid body define the body centre as

    O = (a + b) / 2
    U = (b - a) / |b - a|
    V = (U.y, -U.x)
    C = O + d * V

and the body heading is taken along ``V``.  Note that ``V`` as written is the
*clockwise* perpendicular of ``U`` under the usual x-right / y-up axes; it is
implemented literally because every downstream position depends on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePair

EPS_DEGENERATE = 1e-9
_EYE3 = np.eye(3)


def normalize_angle(theta: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    wrapped = math.remainder(theta, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped = math.pi
    return wrapped


@dataclass(frozen=True, slots=True)
class Vec2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"Vec2 components must be finite, got ({self.x}, {self.y})")

    def __add__(self, other: Vec2) -> Vec2:
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: Vec2) -> Vec2:
        return Vec2(self.x - other.x, self.y - other.y)

    def __mul__(self, s: float) -> Vec2:
        return Vec2(self.x * s, self.y * s)

    __rmul__ = __mul__

    def __neg__(self) -> Vec2:
        return Vec2(-self.x, -self.y)

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def to_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)

    @classmethod
    def from_array(cls, arr) -> Vec2:
        return cls(float(arr[0]), float(arr[1]))


@dataclass(frozen=True, slots=True)
class Pose2D:
    """Planar pose; ``theta`` is stored wrapped to (-pi, pi]."""

    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta", normalize_angle(float(self.theta)))

    @property
    def position(self) -> Vec2:
        return Vec2(self.x, self.y)

    def matrix(self) -> np.ndarray:
        c, s = math.cos(self.theta), math.sin(self.theta)
        return np.array([[c, -s, self.x], [s, c, self.y], [0.0, 0.0, 1.0]])

    def to_pose6d(self, z: float = 0.0) -> Pose6D:
        c, s = math.cos(self.theta), math.sin(self.theta)
        rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        return Pose6D(rot, np.array([self.x, self.y, z]))


IDENTITY_2D = Pose2D(0.0, 0.0, 0.0)


@dataclass(frozen=True, eq=False)
class Pose6D:
    """Rigid transform ``p_parent = rotation @ p_child + translation``."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        rot = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        trans = np.asarray(self.translation, dtype=float).reshape(3)
        if np.abs(rot.T @ rot - _EYE3).max() > 1e-9 or np.linalg.det(rot) < 0:
            raise ValueError("rotation must be proper orthonormal")
        if not np.all(np.isfinite(trans)):
            raise ValueError("translation must be finite")
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", trans)

    @classmethod
    def identity(cls) -> Pose6D:
        return cls(np.eye(3), np.zeros(3))

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def compose(self, other: Pose6D) -> Pose6D:
        return Pose6D(self.rotation @ other.rotation, self.rotation @ other.translation + self.translation)

    def inverse(self) -> Pose6D:
        rt = self.rotation.T
        return Pose6D(rt, -rt @ self.translation)

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform an (n, 3) array (or a single 3-vector)."""
        pts = np.asarray(points, dtype=float)
        return pts @ self.rotation.T + self.translation


def midpoint(a: Vec2, b: Vec2) -> Vec2:
    return Vec2((a.x + b.x) / 2.0, (a.y + b.y) / 2.0)


def unit_between(a: Vec2, b: Vec2, eps: float = EPS_DEGENERATE) -> Vec2:
    dx, dy = b.x - a.x, b.y - a.y
    n = math.hypot(dx, dy)
    if n <= eps:
        raise DegeneratePair(f"points ({a.x}, {a.y}) and ({b.x}, {b.y}) coincide")
    return Vec2(dx / n, dy / n)


def perp(u: Vec2) -> Vec2:
    # (y, -x): clockwise quarter turn, kept as the construction defines it.
    return Vec2(u.y, -u.x)


def offset_point(a: Vec2, b: Vec2, d: float) -> Vec2:
    o = midpoint(a, b)
    v = perp(unit_between(a, b))
    return Vec2(o.x + d * v.x, o.y + d * v.y)


def pair_to_state(a: Vec2, b: Vec2, d: float) -> Pose2D:
    """Body centre and heading from a marker pair.

    The heading points along the offset direction ``V``, so ``d > 0`` puts the
    centre ahead of the marker line.
    """
    o = midpoint(a, b)
    v = perp(unit_between(a, b))
    return Pose2D(o.x + d * v.x, o.y + d * v.y, math.atan2(v.y, v.x))


def compose(p: Pose2D, q: Pose2D) -> Pose2D:
    c, s = math.cos(p.theta), math.sin(p.theta)
    return Pose2D(p.x + c * q.x - s * q.y, p.y + s * q.x + c * q.y, p.theta + q.theta)


def invert(p: Pose2D) -> Pose2D:
    c, s = math.cos(p.theta), math.sin(p.theta)
    return Pose2D(-c * p.x - s * p.y, s * p.x - c * p.y, -p.theta)


def transform_point(p: Pose2D, v: Vec2) -> Vec2:
    c, s = math.cos(p.theta), math.sin(p.theta)
    return Vec2(p.x + c * v.x - s * v.y, p.y + s * v.x + c * v.y)


def yaw_of(rotation: np.ndarray) -> float:
    """Heading of a rotation's x axis projected on the ground plane."""
    return math.atan2(rotation[1, 0], rotation[0, 0])


def camera_to_world(pose_in_camera: Pose6D, robot_pose: Pose2D, camera_mount: Pose6D) -> Pose2D:
    """Planar world pose of an object seen by a robot-mounted camera.

    ``pose_in_camera`` maps object coordinates into the camera frame and
    ``camera_mount`` maps camera coordinates into the robot frame.
    """
    world_T_obj = robot_pose.to_pose6d().compose(camera_mount).compose(pose_in_camera)
    t = world_T_obj.translation
    return Pose2D(float(t[0]), float(t[1]), yaw_of(world_T_obj.rotation))


def rotation_angle(r_a: np.ndarray, r_b: np.ndarray) -> float:
    """Geodesic angle between two rotation matrices."""
    # chord form keeps precision for tiny angles, unlike acos of the trace
    chord = np.linalg.norm(np.asarray(r_a) - np.asarray(r_b)) / (2.0 * math.sqrt(2.0))
    return 2.0 * math.asin(min(1.0, chord))
