import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trolleyloc.errors import DegeneratePair
from trolleyloc.geometry import (
    IDENTITY_2D,
    Pose2D,
    Pose6D,
    Vec2,
    camera_to_world,
    compose,
    invert,
    midpoint,
    normalize_angle,
    offset_point,
    pair_to_state,
    perp,
    rotation_angle,
    transform_point,
    unit_between,
)

coord = st.floats(-50, 50, allow_nan=False)
angle = st.floats(-10, 10, allow_nan=False)


def close(v, xy, tol=1e-12):
    return abs(v.x - xy[0]) <= tol and abs(v.y - xy[1]) <= tol


def se2(p):
    """Homogeneous 3x3 oracle for SE(2), independent of the library code."""
    c, s = math.cos(p.theta), math.sin(p.theta)
    return np.array([[c, -s, p.x], [s, c, p.y], [0, 0, 1.0]])


class TestMidpointAndUnit:
    def test_midpoint_examples(self):
        assert close(midpoint(Vec2(0, 0), Vec2(2, 0)), (1, 0))
        assert close(midpoint(Vec2(1, 1), Vec2(3, 5)), (2, 3))
        assert close(midpoint(Vec2(2, 2), Vec2(2, 2)), (2, 2))

    def test_unit_examples(self):
        assert close(unit_between(Vec2(0, 0), Vec2(2, 0)), (1, 0))
        assert close(unit_between(Vec2(0, 0), Vec2(0, -3)), (0, -1))

    def test_unit_degenerate(self):
        with pytest.raises(DegeneratePair):
            unit_between(Vec2(1, 1), Vec2(1, 1))

    def test_non_finite_vec_rejected(self):
        with pytest.raises(ValueError):
            Vec2(math.nan, 0.0)


class TestPerp:
    def test_examples(self):
        # literal (U.y, -U.x): a clockwise quarter turn
        assert close(perp(Vec2(1, 0)), (0, -1))
        assert close(perp(Vec2(0, 1)), (1, 0))

    @given(angle)
    def test_double_perp_negates(self, a):
        u = Vec2(math.cos(a), math.sin(a))
        pp = perp(perp(u))
        assert close(pp, (-u.x, -u.y))

    @given(angle)
    def test_perp_is_orthogonal_unit(self, a):
        u = Vec2(math.cos(a), math.sin(a))
        v = perp(u)
        assert abs(u.x * v.x + u.y * v.y) < 1e-15
        assert abs(v.norm() - 1.0) < 1e-15


class TestOffsetPoint:
    def test_examples(self):
        assert close(offset_point(Vec2(0, 0), Vec2(2, 0), 1.0), (1, -1))
        assert close(offset_point(Vec2(0, 0), Vec2(2, 0), 0.0), (1, 0))
        assert close(offset_point(Vec2(0, 2), Vec2(0, 0), 2.0), (-2, 1))

    @settings(max_examples=200)
    @given(coord, coord, coord, coord, st.floats(-5, 5))
    def test_distance_identities(self, ax, ay, bx, by, d):
        a, b = Vec2(ax, ay), Vec2(bx, by)
        if (b - a).norm() < 1e-3:
            return
        c = offset_point(a, b, d)
        o = midpoint(a, b)
        assert abs((c - o).norm() - abs(d)) < 1e-9
        # equidistant from both markers, on the perpendicular bisector
        assert abs((c - a).norm() - (c - b).norm()) < 1e-9
        half = (b - a).norm() / 2
        assert abs((c - a).norm() - math.hypot(half, d)) < 1e-9

    @given(coord, coord, coord, coord, st.floats(-5, 5))
    def test_swap_with_negated_offset(self, ax, ay, bx, by, d):
        a, b = Vec2(ax, ay), Vec2(bx, by)
        if (b - a).norm() < 1e-3:
            return
        p, q = offset_point(a, b, d), offset_point(b, a, -d)
        assert close(p, (q.x, q.y), 1e-9)


class TestPairToState:
    def test_examples(self):
        s = pair_to_state(Vec2(0, 0), Vec2(2, 0), 1.0)
        assert (s.x, s.y) == pytest.approx((1, -1), abs=1e-12)
        assert s.theta == pytest.approx(-math.pi / 2, abs=1e-12)
        s = pair_to_state(Vec2(0, 2), Vec2(0, 0), 2.0)
        assert (s.x, s.y) == pytest.approx((-2, 1), abs=1e-12)
        assert s.theta == pytest.approx(math.pi, abs=1e-12)

    def test_degenerate(self):
        with pytest.raises(DegeneratePair):
            pair_to_state(Vec2(3, 3), Vec2(3, 3), 0.3)

    @settings(max_examples=200)
    @given(coord, coord, angle, st.floats(0.05, 2.0), st.floats(-2, 2))
    def test_round_trip(self, x, y, th, half, d):
        # place markers so that the offset point is the pose and V the heading
        gt = Pose2D(x, y, th)
        v = Vec2(math.cos(th), math.sin(th))
        u = Vec2(-v.y, v.x)  # perp(u) == v
        o = Vec2(x, y) - v * d
        a, b = o - u * half, o + u * half
        s = pair_to_state(a, b, d)
        assert abs(s.x - gt.x) < 1e-9 and abs(s.y - gt.y) < 1e-9
        assert abs(normalize_angle(s.theta - gt.theta)) < 1e-9


class TestSE2:
    def test_examples(self):
        q = Pose2D(1, 2, 0.3)
        assert compose(IDENTITY_2D, q) == q
        inv = invert(Pose2D(1, 2, math.pi / 2))
        assert (inv.x, inv.y, inv.theta) == pytest.approx((-2, 1, -math.pi / 2), abs=1e-12)
        assert close(transform_point(Pose2D(0, 0, math.pi / 2), Vec2(1, 0)), (0, 1), 1e-15)

    @given(coord, coord, angle, coord, coord, angle)
    def test_compose_matches_matrix_oracle(self, x1, y1, t1, x2, y2, t2):
        p, q = Pose2D(x1, y1, t1), Pose2D(x2, y2, t2)
        assert np.allclose(se2(compose(p, q)), se2(p) @ se2(q), atol=1e-9)

    @given(coord, coord, angle)
    def test_invert_matches_matrix_oracle(self, x, y, t):
        p = Pose2D(x, y, t)
        assert np.allclose(se2(invert(p)), np.linalg.inv(se2(p)), atol=1e-9)
        ident = compose(p, invert(p))
        assert abs(ident.x) < 1e-9 and abs(ident.y) < 1e-9 and abs(ident.theta) < 1e-12

    def test_normalize_angle_range(self):
        assert normalize_angle(-math.pi) == math.pi
        assert normalize_angle(3 * math.pi) == pytest.approx(math.pi)
        assert normalize_angle(2 * math.pi) == 0.0


def rot_z(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]])


def hom(R, t):
    T = np.eye(4)
    T[:3, :3], T[:3, 3] = R, t
    return T


class TestPose6D:
    def test_rejects_improper_rotation(self):
        with pytest.raises(ValueError):
            Pose6D(np.diag([1.0, 1.0, -1.0]), np.zeros(3))
        with pytest.raises(ValueError):
            Pose6D(2 * np.eye(3), np.zeros(3))

    def test_compose_inverse(self):
        a = Pose6D(rot_z(0.4), np.array([1.0, 2.0, 3.0]))
        ident = a.compose(a.inverse())
        assert np.allclose(ident.rotation, np.eye(3)) and np.allclose(ident.translation, 0)

    def test_rotation_angle(self):
        assert rotation_angle(rot_z(0.3), rot_z(-0.2)) == pytest.approx(0.5, abs=1e-12)
        assert rotation_angle(np.eye(3), np.eye(3)) == 0.0


class TestCameraToWorld:
    def test_identity_chain(self):
        ident = Pose6D.identity()
        p = camera_to_world(ident, IDENTITY_2D, ident)
        assert (p.x, p.y, p.theta) == (0.0, 0.0, 0.0)

    def test_two_metres_ahead(self):
        # camera z forward along robot +x; trolley frame aligned with robot frame
        R_cam = np.array([[0.0, 0, 1], [-1, 0, 0], [0, -1, 0]])
        mount = Pose6D(R_cam, np.zeros(3))
        obj_in_cam = Pose6D(R_cam.T, np.array([0.0, 0.0, 2.0]))
        p = camera_to_world(obj_in_cam, Pose2D(1, 0, 0), mount)
        assert (p.x, p.y) == pytest.approx((3, 0), abs=1e-12)
        assert p.theta == pytest.approx(0.0, abs=1e-12)

    @given(angle, angle)
    def test_pure_yaw(self, phi, psi):
        ident = Pose6D.identity()
        p = camera_to_world(Pose6D(rot_z(phi), np.zeros(3)), Pose2D(0, 0, psi), ident)
        assert abs(normalize_angle(p.theta - (psi + phi))) < 1e-9

    @given(coord, coord, angle, angle, st.floats(0, 2))
    def test_matches_homogeneous_oracle(self, x, y, psi, phi, h):
        R_cam = np.array([[0.0, 0, 1], [-1, 0, 0], [0, -1, 0]])
        mount = Pose6D(R_cam, np.array([0.1, 0.0, h]))
        obj = Pose6D(R_cam.T @ rot_z(phi), np.array([0.2, -0.1, 3.0]))
        robot = Pose2D(x, y, psi)
        T = hom(rot_z(psi), [x, y, 0]) @ hom(mount.rotation, mount.translation) @ hom(obj.rotation, obj.translation)
        p = camera_to_world(obj, robot, mount)
        assert p.x == pytest.approx(T[0, 3], abs=1e-9)
        assert p.y == pytest.approx(T[1, 3], abs=1e-9)
        assert abs(normalize_angle(p.theta - math.atan2(T[1, 0], T[0, 0]))) < 1e-9
