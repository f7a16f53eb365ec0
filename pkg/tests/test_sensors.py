import math
from dataclasses import replace

import numpy as np
import pytest

from trolleyloc.config import Antenna, RfidConfig, SensorSuiteConfig, UwbConfig
from trolleyloc.estimators.epnp import project
from trolleyloc.geometry import Pose2D, Pose6D, Vec2
from trolleyloc.sensors import (
    RfidObservation,
    reflectors_visible,
    simulate_camera,
    simulate_lidar,
    simulate_rfid,
    simulate_uwb,
)
from trolleyloc.world import Scenario, TrolleyModel, ground_truth_keypoints, ground_truth_markers

NOISELESS = SensorSuiteConfig().noiseless()
NO_OCCLUSION = TrolleyModel(body_radius=0.0)


def polar(angle_deg, dist, yaw_deg=0.0):
    a = math.radians(angle_deg)
    return Pose2D(dist * math.cos(a), dist * math.sin(a), math.radians(yaw_deg))


class TestCamera:
    def test_outside_fov_sees_nothing(self):
        for yaw in range(0, 360, 30):
            s = Scenario(trolley_pose=polar(60, 3, yaw))
            assert simulate_camera(s).n_visible == 0

    def test_beyond_range_sees_nothing(self):
        assert simulate_camera(Scenario(trolley_pose=polar(0, 10))).n_visible == 0

    def test_zero_noise_pixels_are_exact_projection(self):
        s = Scenario(trolley_pose=polar(0, 3), trolley=NO_OCCLUSION, sensors=NOISELESS)
        obs = simulate_camera(s)
        assert obs.n_visible == 6
        cam = s.sensors.camera
        world_to_cam = s.robot_pose.to_pose6d().compose(cam.mount).inverse()
        expected = project(ground_truth_keypoints(s), world_to_cam, cam.intrinsics)
        assert np.allclose(obs.pixels, expected, atol=1e-9)

    def test_pinhole_oracle(self):
        # hand-built projection: camera at height h looking along +x
        s = Scenario(trolley_pose=polar(0, 3), trolley=NO_OCCLUSION, sensors=NOISELESS)
        cam = s.sensors.camera
        K = cam.intrinsics
        kp = ground_truth_keypoints(s)
        u = K.cx + K.fx * (-kp[:, 1]) / kp[:, 0]
        v = K.cy + K.fy * (cam.mount_height - kp[:, 2]) / kp[:, 0]
        assert np.allclose(simulate_camera(s).pixels, np.column_stack((u, v)), atol=1e-9)

    def test_self_occlusion_hides_far_side(self):
        obs = simulate_camera(Scenario(trolley_pose=polar(0, 3), sensors=NOISELESS))
        assert 0 < obs.n_visible < 6
        assert np.all(np.isnan(obs.pixels[~obs.visibility]))

    def test_noise_is_seeded(self):
        s = Scenario(trolley_pose=polar(0, 3), seed=5)
        a, b = simulate_camera(s), simulate_camera(s)
        assert np.array_equal(a.pixels, b.pixels, equal_nan=True)
        c = simulate_camera(s.with_seed(6))
        assert not np.array_equal(a.pixels, c.pixels, equal_nan=True)


class TestUwb:
    def test_zero_range_at_anchor(self):
        anchors = (Vec2(0, 0), Vec2(10, 0), Vec2(10, 10))
        sensors = replace(NOISELESS, uwb=UwbConfig(anchors=anchors, range_noise_sigma=0.0))
        # put the first tag exactly on anchor (10, 0)
        tm = TrolleyModel()
        tag = tm.tag_offsets[0]
        s = Scenario(trolley_pose=Pose2D(10 - tag.x, 0 - tag.y, 0), sensors=sensors)
        assert simulate_uwb(s).ranges[0][1] == pytest.approx(0.0, abs=1e-12)

    def test_euclidean_oracle(self):
        anchors = (Vec2(0, 0), Vec2(10, 0), Vec2(10, 10), Vec2(0, 10))
        sensors = replace(NOISELESS, uwb=UwbConfig(anchors=anchors, range_noise_sigma=0.0))
        tag = TrolleyModel().tag_offsets[0]
        s = Scenario(trolley_pose=Pose2D(3 - tag.x, 4 - tag.y, 0), sensors=sensors)
        r = simulate_uwb(s).ranges[0]
        assert np.allclose(r, [5, math.sqrt(65), math.sqrt(85), math.sqrt(45)], atol=1e-12)

    def test_out_of_coverage_is_absent(self):
        s = Scenario(trolley_pose=Pose2D(100, 100, 0))
        assert all(np.all(np.isnan(r)) for r in simulate_uwb(s).ranges)

    def test_noise_statistics(self):
        s = Scenario(trolley_pose=polar(30, 4.5))
        truth = np.hypot(*(np.array([a.to_array() for a in s.sensors.uwb.anchors])
                           - ground_truth_markers(s, "tags")[0].to_array()).T)
        errs = np.array([simulate_uwb(s.with_seed(k)).ranges[0] - truth for k in range(2000)])
        assert abs(errs.mean()) < 0.01
        assert errs.std() == pytest.approx(0.10, rel=0.05)


class TestLidar:
    def test_behind_at_three_metres(self):
        s = Scenario(trolley_pose=polar(0, 3, 0), seed=3)
        obs = simulate_lidar(s)
        thr = s.sensors.lidar.intensity_threshold
        bright = obs.intensities >= thr
        assert bright.sum() >= 6
        pts = np.column_stack((obs.ranges * np.cos(obs.bearings), obs.ranges * np.sin(obs.bearings)))[bright]
        gt = [m.to_array() for m in ground_truth_markers(s, "reflectors")]
        cfg = s.sensors.lidar
        for g in gt:
            mine = pts[np.linalg.norm(pts - g, axis=1) < 0.1]
            n = len(mine)
            assert n >= 3
            # blob offset is shared by the whole reflector; range noise averages down
            sigma = math.hypot(cfg.cluster_offset_sigma, cfg.range_noise_sigma / math.sqrt(n))
            assert np.all(np.abs(mine.mean(axis=0) - g) < 3 * sigma)

    def test_zero_noise_centroids_exact(self):
        s = Scenario(trolley_pose=polar(15, 4.5, 15), sensors=NOISELESS)
        obs = simulate_lidar(s)
        bright = obs.intensities >= s.sensors.lidar.intensity_threshold
        pts = np.column_stack((obs.ranges * np.cos(obs.bearings), obs.ranges * np.sin(obs.bearings)))[bright]
        for g in ground_truth_markers(s, "reflectors"):
            mine = pts[np.linalg.norm(pts - g.to_array(), axis=1) < 0.1]
            assert np.allclose(mine.mean(axis=0), g.to_array(), atol=1e-12)

    def test_front_view_has_no_bright_returns(self):
        s = Scenario(trolley_pose=polar(0, 3, 180))
        assert not reflectors_visible(s)
        obs = simulate_lidar(s)
        assert not np.any(obs.intensities >= s.sensors.lidar.intensity_threshold)
        assert len(obs) == s.sensors.lidar.n_clutter

    def test_beyond_gate_has_no_bright_returns(self):
        s = Scenario(trolley_pose=polar(0, 7.5, 0))
        obs = simulate_lidar(s)
        assert not np.any(obs.intensities >= s.sensors.lidar.intensity_threshold)

    def test_sorted_by_bearing(self):
        obs = simulate_lidar(Scenario(trolley_pose=polar(30, 3, 30), seed=9))
        assert np.all(np.diff(obs.bearings) >= 0)


class TestRfid:
    def test_at_antenna_centre(self):
        s = Scenario(trolley_pose=Pose2D(6.5, 2.5, 0))
        assert simulate_rfid(s) == RfidObservation(2, 1.0)

    def test_beyond_all_radii(self):
        assert simulate_rfid(Scenario(trolley_pose=Pose2D(50, 50, 0))).antenna_id is None

    def test_tie_goes_to_lower_id(self):
        rfid = RfidConfig((Antenna(7, Vec2(0, 0)), Antenna(3, Vec2(2, 0))))
        s = Scenario(trolley_pose=Pose2D(1, 0, 0), sensors=replace(SensorSuiteConfig(), rfid=rfid))
        obs = simulate_rfid(s)
        assert obs.antenna_id == 3
        assert obs.strength == pytest.approx(1 - 1 / 4.2)


def test_channels_are_independent():
    # changing UWB noise must not perturb the camera or lidar draws
    s = Scenario(trolley_pose=polar(0, 3), seed=21)
    s2 = replace(s, sensors=replace(s.sensors, uwb=replace(s.sensors.uwb, range_noise_sigma=0.5)))
    assert np.array_equal(simulate_camera(s).pixels, simulate_camera(s2).pixels, equal_nan=True)
    assert np.array_equal(simulate_lidar(s).ranges, simulate_lidar(s2).ranges)


def test_pose6d_type_used_for_mount():
    assert isinstance(SensorSuiteConfig().camera.mount, Pose6D)
