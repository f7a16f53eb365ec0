"""Forward sensor models producing seeded, noisy observations.

Every channel draws from its own generator keyed by ``(scenario.seed,
channel)``, and always consumes the same number of draws regardless of
visibility, so a change in one channel never shifts the noise of another.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Vec2
from .world import Scenario, ground_truth_keypoints, ground_truth_markers

CHANNEL_CAMERA = 1
CHANNEL_UWB = 2
CHANNEL_LIDAR = 3

_MAX_POINTS_PER_REFLECTOR = 7
_MIN_POINTS_PER_REFLECTOR = 3


def channel_rng(seed: int, channel: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(channel,)))


@dataclass(frozen=True, eq=False)
class KeypointObservation:
    pixels: np.ndarray  # (6, 2), NaN rows where not visible
    visibility: np.ndarray  # (6,) bool

    @property
    def n_visible(self) -> int:
        return int(self.visibility.sum())


@dataclass(frozen=True, eq=False)
class UwbObservation:
    ranges: tuple[np.ndarray, ...]  # per tag, per anchor; NaN = absent


@dataclass(frozen=True, eq=False)
class LidarObservation:
    bearings: np.ndarray  # robot frame, radians, ascending
    ranges: np.ndarray
    intensities: np.ndarray

    def __len__(self) -> int:
        return len(self.bearings)


@dataclass(frozen=True)
class RfidObservation:
    antenna_id: int | None = None
    strength: float = 0.0


def _occluded(cam: np.ndarray, point: np.ndarray, center: np.ndarray, radius: float) -> bool:
    """Vertical-cylinder self occlusion.

    The keypoint is hidden when the camera ray passes within ``radius`` of the
    trolley centre at a point strictly nearer the camera than the keypoint.
    """
    seg = point - cam
    seg_len2 = float(seg @ seg)
    if seg_len2 == 0.0:
        return False
    s = float((center - cam) @ seg) / seg_len2
    if s >= 1.0:
        return False
    s = max(s, 0.0)
    closest = cam + s * seg
    return float(np.hypot(*(center - closest))) < radius


def simulate_camera(s: Scenario) -> KeypointObservation:
    cfg = s.sensors.camera
    K = cfg.intrinsics
    cam_world = s.robot_pose.to_pose6d().compose(cfg.mount)
    world_to_cam = cam_world.inverse()
    cam_xy = cam_world.translation[:2]
    half_fov = math.radians(cfg.hfov_deg) / 2.0

    noise = channel_rng(s.seed, CHANNEL_CAMERA).standard_normal((6, 2)) * cfg.pixel_noise_sigma

    pixels = np.full((6, 2), np.nan)
    visible = np.zeros(6, dtype=bool)

    center_xy = np.array([s.trolley_pose.x, s.trolley_pose.y])
    if cfg.require_center_in_fov:
        c_cam = world_to_cam.apply(np.array([center_xy[0], center_xy[1], cfg.mount_height]))
        in_view = c_cam[2] > 0 and abs(math.atan2(c_cam[0], c_cam[2])) <= half_fov
        if not in_view or np.hypot(*(center_xy - cam_xy)) > cfg.max_range:
            return KeypointObservation(pixels, visible)

    pts_world = ground_truth_keypoints(s)
    pts_cam = world_to_cam.apply(pts_world)
    for k in range(6):
        x, y, z = pts_cam[k]
        if z <= 0 or abs(math.atan2(x, z)) > half_fov:
            continue
        if np.hypot(*(pts_world[k, :2] - cam_xy)) > cfg.max_range:
            continue
        if _occluded(cam_xy, pts_world[k, :2], center_xy, s.trolley.body_radius):
            continue
        u = K.fx * x / z + K.cx + noise[k, 0]
        v = K.fy * y / z + K.cy + noise[k, 1]
        if not (0.0 <= u < cfg.image_width and 0.0 <= v < cfg.image_height):
            continue
        pixels[k] = (u, v)
        visible[k] = True
    return KeypointObservation(pixels, visible)


def simulate_uwb(s: Scenario) -> UwbObservation:
    cfg = s.sensors.uwb
    anchors = np.array([a.to_array() for a in cfg.anchors])
    center = cfg.coverage_center
    noise = channel_rng(s.seed, CHANNEL_UWB).standard_normal((2, len(anchors))) * cfg.range_noise_sigma
    out = []
    for i, tag in enumerate(ground_truth_markers(s, "tags")):
        inside = (
            abs(tag.x - center.x) <= cfg.coverage_half_extent
            and abs(tag.y - center.y) <= cfg.coverage_half_extent
        )
        if not inside:
            out.append(np.full(len(anchors), np.nan))
            continue
        true = np.hypot(anchors[:, 0] - tag.x, anchors[:, 1] - tag.y)
        out.append(np.maximum(true + noise[i], 0.0))
    return UwbObservation(tuple(out))


def reflectors_visible(s: Scenario) -> bool:
    """True when the robot sees the trolley's rear face (reflectors side)."""
    cfg = s.sensors.lidar
    tp, rp = s.trolley_pose, s.robot_pose
    to_robot = np.array([rp.x - tp.x, rp.y - tp.y])
    dist = float(np.hypot(*to_robot))
    if dist == 0.0:
        return False
    rear = -np.array([math.cos(tp.theta), math.sin(tp.theta)])
    cos_angle = float(rear @ to_robot) / dist
    return cos_angle >= math.cos(math.radians(cfg.rear_visibility_half_angle_deg))


def simulate_lidar(s: Scenario) -> LidarObservation:
    cfg = s.sensors.lidar
    rng = channel_rng(s.seed, CHANNEL_LIDAR)
    offsets = rng.standard_normal((2, 2)) * cfg.cluster_offset_sigma
    range_noise = rng.standard_normal((2, _MAX_POINTS_PER_REFLECTOR)) * cfg.range_noise_sigma
    refl_u = rng.random((2, _MAX_POINTS_PER_REFLECTOR))
    clutter = rng.random((cfg.n_clutter, 3))

    rp = s.robot_pose
    c, sn = math.cos(rp.theta), math.sin(rp.theta)
    res = math.radians(cfg.angular_resolution_deg)
    thr = cfg.intensity_threshold
    bearings, ranges, intens = [], [], []

    rear_ok = reflectors_visible(s)
    for i, m in enumerate(ground_truth_markers(s, "reflectors")):
        # reflector centre in the robot frame
        dx, dy = m.x - rp.x, m.y - rp.y
        rel = np.array([c * dx + sn * dy, -sn * dx + c * dy])
        dist = float(np.hypot(*rel))
        if not rear_ok or dist > cfg.max_reflector_range or dist == 0.0:
            continue
        n = int(np.clip(math.floor(cfg.reflector_width / (dist * res)) + 1,
                        _MIN_POINTS_PER_REFLECTOR, _MAX_POINTS_PER_REFLECTOR))
        # returns spaced symmetrically across the strip, normal to the line of sight
        tangent = np.array([-rel[1], rel[0]]) / dist
        steps = (np.arange(n) - (n - 1) / 2.0) * dist * res
        pts = rel + offsets[i] + steps[:, None] * tangent
        r = np.hypot(pts[:, 0], pts[:, 1]) + range_noise[i, :n]
        bearings.extend(np.arctan2(pts[:, 1], pts[:, 0]))
        ranges.extend(np.maximum(r, 0.0))
        intens.extend(thr + (1.0 - thr) * (0.5 + 0.5 * refl_u[i, :n]))

    if thr > 0.0:
        bearings.extend(-math.pi + 2.0 * math.pi * clutter[:, 0])
        ranges.extend(0.3 + (cfg.clutter_max_range - 0.3) * clutter[:, 1])
        intens.extend(0.9 * thr * clutter[:, 2])

    b = np.asarray(bearings, dtype=float)
    order = np.argsort(b, kind="stable")
    return LidarObservation(b[order], np.asarray(ranges, dtype=float)[order],
                            np.asarray(intens, dtype=float)[order])


def simulate_rfid(s: Scenario) -> RfidObservation:
    tag = Vec2(s.trolley_pose.x, s.trolley_pose.y)
    best_id, best = None, 0.0
    for ant in sorted(s.sensors.rfid.antennas, key=lambda a: a.id):
        strength = max(0.0, 1.0 - (tag - ant.position).norm() / ant.radius)
        if strength > best:
            best_id, best = ant.id, strength
    return RfidObservation(best_id, best)
