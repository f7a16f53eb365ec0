"""Sensor suite configuration with calibrated defaults.

Calibration of the defaults (lengths in metres, angles in degrees):

* camera ``hfov_deg=87`` puts the 45-90 deg polar band outside the half angle
  (43.5 deg); ``max_range=8.0`` solves (87/360) * pi * R^2 = 48 m^2.
* RFID antenna ``radius=4.2`` solves pi * r^2 = 55.39 m^2 per antenna.
* UWB anchors sit at the corners of a 40 m x 40 m room (1600 m^2).
* lidar ``max_reflector_range=6.0`` makes reflector detection fail on the
  7.5 m grid ring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import Pose6D, Vec2


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError("focal lengths must be positive")

    def matrix(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])


# camera looks along robot +x with image x to the robot's right and image y down
_CAMERA_AXES_IN_ROBOT = np.array([[0.0, 0.0, 1.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0]])


def forward_camera_mount(height: float) -> Pose6D:
    """Camera at ``height`` above the robot origin, optical axis along robot +x."""
    return Pose6D(_CAMERA_AXES_IN_ROBOT, np.array([0.0, 0.0, height]))


@dataclass(frozen=True)
class CameraConfig:
    hfov_deg: float = 87.0
    max_range: float = 8.0
    pixel_noise_sigma: float = 1.0
    image_width: int = 640
    image_height: int = 480
    # None -> derived from hfov and image size (square pixels, centred principal point)
    fx: float | None = None
    fy: float | None = None
    cx: float | None = None
    cy: float | None = None
    mount_height: float = 0.5
    # keypoint detector only fires when the trolley centre itself is in view
    require_center_in_fov: bool = True

    def __post_init__(self):
        if not 0.0 < self.hfov_deg < 180.0:
            raise ValueError("hfov_deg must lie in (0, 180)")
        if self.pixel_noise_sigma < 0 or self.max_range < 0:
            raise ValueError("camera sigma and range must be non-negative")
        if self.image_width <= 0 or self.image_height <= 0:
            raise ValueError("image size must be positive")

    @property
    def intrinsics(self) -> CameraIntrinsics:
        f = (self.image_width / 2.0) / math.tan(math.radians(self.hfov_deg) / 2.0)
        return CameraIntrinsics(
            fx=self.fx if self.fx is not None else f,
            fy=self.fy if self.fy is not None else (self.fx if self.fx is not None else f),
            cx=self.cx if self.cx is not None else self.image_width / 2.0,
            cy=self.cy if self.cy is not None else self.image_height / 2.0,
        )

    @property
    def mount(self) -> Pose6D:
        return forward_camera_mount(self.mount_height)


def _room_corners(half: float) -> tuple[Vec2, ...]:
    return (Vec2(-half, -half), Vec2(half, -half), Vec2(half, half), Vec2(-half, half))


@dataclass(frozen=True)
class UwbConfig:
    anchors: tuple[Vec2, ...] = field(default_factory=lambda: _room_corners(20.0))
    range_noise_sigma: float = 0.10
    # coverage is a square of this half extent centred on the anchor centroid
    coverage_half_extent: float = 20.0

    def __post_init__(self):
        object.__setattr__(self, "anchors", tuple(self.anchors))
        if len(self.anchors) < 3:
            raise ValueError("at least 3 UWB anchors are required")
        if self.range_noise_sigma < 0 or self.coverage_half_extent < 0:
            raise ValueError("UWB sigma and coverage must be non-negative")

    @property
    def coverage_center(self) -> Vec2:
        pts = np.array([a.to_array() for a in self.anchors])
        return Vec2.from_array(pts.mean(axis=0))


@dataclass(frozen=True)
class LidarConfig:
    max_reflector_range: float = 6.0
    angular_resolution_deg: float = 0.25
    range_noise_sigma: float = 0.02
    intensity_threshold: float = 0.8
    rear_visibility_half_angle_deg: float = 75.0
    reflector_width: float = 0.06
    # common planar offset per reflector blob (mixed-pixel / edge bias)
    cluster_offset_sigma: float = 0.028
    n_clutter: int = 48
    clutter_max_range: float = 12.0

    def __post_init__(self):
        if self.range_noise_sigma < 0 or self.cluster_offset_sigma < 0:
            raise ValueError("lidar sigmas must be non-negative")
        if not 0.0 <= self.intensity_threshold <= 1.0:
            raise ValueError("intensity_threshold must lie in [0, 1]")
        if self.angular_resolution_deg <= 0:
            raise ValueError("angular_resolution_deg must be positive")


@dataclass(frozen=True)
class Antenna:
    id: int
    position: Vec2
    radius: float = 4.2

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("antenna radius must be positive")


def _default_antennas() -> tuple[Antenna, ...]:
    return (
        Antenna(1, Vec2(2.5, 2.5)),
        Antenna(2, Vec2(6.5, 2.5)),
        Antenna(3, Vec2(2.5, 6.5)),
        Antenna(4, Vec2(6.5, 6.5)),
    )


@dataclass(frozen=True)
class RfidConfig:
    antennas: tuple[Antenna, ...] = field(default_factory=_default_antennas)

    def __post_init__(self):
        object.__setattr__(self, "antennas", tuple(self.antennas))
        if not self.antennas:
            raise ValueError("at least one RFID antenna is required")


@dataclass(frozen=True)
class SensorSuiteConfig:
    camera: CameraConfig = field(default_factory=CameraConfig)
    uwb: UwbConfig = field(default_factory=UwbConfig)
    lidar: LidarConfig = field(default_factory=LidarConfig)
    rfid: RfidConfig = field(default_factory=RfidConfig)

    def noiseless(self) -> SensorSuiteConfig:
        """Copy with every noise sigma set to zero."""
        return replace(
            self,
            camera=replace(self.camera, pixel_noise_sigma=0.0),
            uwb=replace(self.uwb, range_noise_sigma=0.0),
            lidar=replace(self.lidar, range_noise_sigma=0.0, cluster_offset_sigma=0.0),
        )
