"""The four trolley localisation pipelines.

Each pipeline turns one observation into an :class:`EstimateResult`.  A failed
detection is reported as ``state=None`` with a ``failure`` reason; pipelines
never raise for ordinary sensing failures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..config import Antenna, CameraIntrinsics, forward_camera_mount
from ..errors import LocalizationError
from ..geometry import Pose2D, Pose6D, Vec2, camera_to_world, midpoint, pair_to_state, perp, unit_between
from ..sensors import KeypointObservation, LidarObservation, RfidObservation, UwbObservation
from ..world import TrolleyModel
from .epnp import epnp
from .kmeans import kmeans2
from .trilateration import trilaterate

METHODS = ("rfid", "keypoints", "uwb", "reflectors")
MIN_KEYPOINTS = 4
REFLECTOR_SEPARATION_TOL = 0.30


@dataclass(frozen=True)
class EstimateResult:
    method: str
    state: Pose2D | None
    has_heading: bool = True
    residual: float = math.nan  # px for keypoints, metres otherwise
    n_points_used: int = 0
    failure: str | None = None

    @property
    def detected(self) -> bool:
        return self.state is not None


def _failed(method: str, reason: str, n_used: int = 0) -> EstimateResult:
    return EstimateResult(method, None, has_heading=method != "rfid", n_points_used=n_used, failure=reason)


def _finite(p: Pose2D) -> bool:
    return math.isfinite(p.x) and math.isfinite(p.y) and math.isfinite(p.theta)


def keypoints_pipeline(
    obs: KeypointObservation,
    robot_pose: Pose2D,
    trolley: TrolleyModel,
    K: CameraIntrinsics,
    mount: Pose6D | None = None,
) -> EstimateResult:
    vis = np.asarray(obs.visibility, dtype=bool)
    n = int(vis.sum())
    if n < MIN_KEYPOINTS:
        return _failed("keypoints", f"only {n} keypoints visible", n)
    if mount is None:
        mount = forward_camera_mount(0.0)
    try:
        sol = epnp(trolley.keypoints_local[vis], obs.pixels[vis], K)
    except LocalizationError as exc:
        return _failed("keypoints", f"pnp: {exc}", n)
    state = camera_to_world(sol.pose, robot_pose, mount)
    if not _finite(state):
        return _failed("keypoints", "non-finite pose", n)
    return EstimateResult("keypoints", state, True, sol.reprojection_error, n)


def uwb_pipeline(obs: UwbObservation, anchors, trolley: TrolleyModel) -> EstimateResult:
    anchor_arr = np.array([a.to_array() if isinstance(a, Vec2) else a for a in anchors], dtype=float)
    tags = []
    residuals = []
    used = 0
    for i, ranges in enumerate(obs.ranges):
        ok = np.isfinite(ranges)
        if ok.sum() < 3:
            return _failed("uwb", f"tag {i} has {int(ok.sum())} ranges", used)
        try:
            fix = trilaterate(ranges[ok], anchor_arr[ok])
        except LocalizationError as exc:
            return _failed("uwb", f"tag {i}: {exc}", used)
        tags.append(fix.position)
        residuals.append(fix.residual)
        used += int(ok.sum())
    try:
        state = pair_to_state(tags[0], tags[1], trolley.offset_d)
    except LocalizationError as exc:
        return _failed("uwb", str(exc), used)
    return EstimateResult("uwb", state, True, float(max(residuals)), used)


def lidar_points_world(obs: LidarObservation, robot_pose: Pose2D, mask=None) -> np.ndarray:
    b, r = obs.bearings, obs.ranges
    if mask is not None:
        b, r = b[mask], r[mask]
    ang = robot_pose.theta + b
    return np.column_stack((robot_pose.x + r * np.cos(ang), robot_pose.y + r * np.sin(ang)))


def reflectors_pipeline(
    obs: LidarObservation, robot_pose: Pose2D, threshold: float, trolley: TrolleyModel
) -> EstimateResult:
    bright = obs.intensities >= threshold
    n = int(bright.sum())
    if n < 2:
        return _failed("reflectors", f"{n} high-intensity returns", n)
    pts = lidar_points_world(obs, robot_pose, bright)
    try:
        km = kmeans2(pts)
    except LocalizationError as exc:
        return _failed("reflectors", str(exc), n)
    if km.counts.min() < 2:
        return _failed("reflectors", f"cluster sizes {km.counts.tolist()}", n)
    a, b = Vec2.from_array(km.centroids[0]), Vec2.from_array(km.centroids[1])
    expected = trolley.reflector_separation
    sep = (b - a).norm()
    if abs(sep - expected) > REFLECTOR_SEPARATION_TOL * expected:
        return _failed("reflectors", f"cluster separation {sep:.3f} m vs {expected:.3f} m", n)
    # reflectors are only seen from behind, so the trolley faces away from the robot
    away = midpoint(a, b) - robot_pose.position
    v = perp(unit_between(a, b))
    if v.x * away.x + v.y * away.y < 0:
        a, b = b, a
    state = pair_to_state(a, b, trolley.offset_d)
    sse = km.sse(pts)
    return EstimateResult("reflectors", state, True, math.sqrt(sse / n), n)


def rfid_pipeline(obs: RfidObservation, antennas) -> EstimateResult:
    """Antenna position as the trolley position; heading is not observable."""
    if obs.antenna_id is None:
        return _failed("rfid", "no antenna activated")
    by_id = {a.id: a for a in antennas}
    ant: Antenna | None = by_id.get(obs.antenna_id)
    if ant is None:
        return _failed("rfid", f"unknown antenna id {obs.antenna_id}")
    return EstimateResult("rfid", Pose2D(ant.position.x, ant.position.y, 0.0), False, 0.0, 1)
