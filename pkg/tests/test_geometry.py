import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ht6dma.errors import NonUnitInput
from ht6dma.geometry import (HALF_PI, NO_ROTATION, ArrayPose, GlobalPlacement, LocalRotation,
                             SphereLayout, angles_of, antenna_positions_global,
                             global_rotation, layout_feasible, local_rotation,
                             outward_normal, pointing_vector, rot_y, rot_z)

theta_st = st.floats(-HALF_PI, HALF_PI)
phi_st = st.floats(-np.pi, np.pi)
vartheta_st = st.floats(0.0, HALF_PI)
S3 = 1 / np.sqrt(3)


def assert_rotation(M):
    assert np.allclose(M.T @ M, np.eye(3), atol=1e-10)
    assert abs(np.linalg.det(M) - 1) < 1e-10


class TestPointingVector:
    @pytest.mark.parametrize("theta, phi, expected", [
        (0.0, 0.0, [1, 0, 0]),
        (HALF_PI, 0.0, [0, 0, 1]),
        (np.arcsin(S3), np.pi / 4, [S3, S3, S3]),
    ])
    def test_examples(self, theta, phi, expected):
        assert np.allclose(pointing_vector(GlobalPlacement(theta, phi)), expected, atol=1e-15)

    @given(theta_st, phi_st)
    def test_unit_norm(self, theta, phi):
        assert abs(np.linalg.norm(pointing_vector(GlobalPlacement(theta, phi))) - 1) < 1e-12

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            GlobalPlacement(2.0, 0.0)


class TestAnglesOf:
    @pytest.mark.parametrize("v, theta, phi", [
        ([0, 0, 1], HALF_PI, 0.0),
        ([S3, S3, S3], np.arcsin(S3), np.pi / 4),
        ([-1, 0, 0], 0.0, np.pi),
    ])
    def test_examples(self, v, theta, phi):
        p = angles_of(np.array(v, dtype=float))
        assert p.theta == pytest.approx(theta, abs=1e-12)
        assert p.phi == pytest.approx(phi, abs=1e-12)

    def test_corner_of_first_octant_is_not_quarter_pi(self):
        assert angles_of(np.array([S3, S3, S3])).theta != pytest.approx(np.pi / 4, abs=1e-3)

    def test_non_unit_rejected(self):
        with pytest.raises(NonUnitInput):
            angles_of(np.array([1.0, 1.0, 0.0]))

    @given(st.floats(-HALF_PI + 1e-6, HALF_PI - 1e-6), phi_st)
    def test_round_trip(self, theta, phi):
        p = angles_of(pointing_vector(GlobalPlacement(theta, phi)))
        assert p.theta == pytest.approx(theta, abs=1e-10)
        dphi = (p.phi - phi + np.pi) % (2 * np.pi) - np.pi
        assert abs(dphi) < 1e-10 * max(1.0, 1 / np.cos(theta))


class TestRotations:
    def test_local_identity(self):
        assert np.allclose(local_rotation(NO_ROTATION), np.eye(3), atol=1e-15)

    def test_local_zero_tilt_maps_normal_to_x(self):
        R = local_rotation(LocalRotation(0.0, 0.0))
        assert np.allclose(R, rot_y(HALF_PI))
        assert np.allclose(R @ [0, 0, 1], [1, 0, 0], atol=1e-15)

    def test_local_quarter_turn(self):
        R = local_rotation(LocalRotation(HALF_PI, HALF_PI))
        assert np.allclose(R, rot_z(HALF_PI))
        assert np.allclose(R @ [1, 0, 0], [0, 1, 0], atol=1e-15)

    def test_global_examples(self):
        assert np.allclose(global_rotation(GlobalPlacement(HALF_PI, 0.0)), np.eye(3), atol=1e-15)
        assert np.allclose(global_rotation(GlobalPlacement(0.0, 0.0)), rot_y(HALF_PI))

    @given(theta_st, phi_st, vartheta_st, phi_st)
    def test_orthonormal_and_normal_identity(self, theta, phi, vt, vp):
        t, u = GlobalPlacement(theta, phi), LocalRotation(vt, vp)
        assert_rotation(local_rotation(u))
        assert_rotation(global_rotation(t))
        ez = np.array([0.0, 0.0, 1.0])
        assert np.allclose(global_rotation(t) @ ez, pointing_vector(t), atol=1e-12)
        assert np.allclose(global_rotation(t) @ local_rotation(NO_ROTATION) @ ez,
                           pointing_vector(t), atol=1e-12)


class TestAntennaPositions:
    d = 0.0625

    def test_pole_pose(self):
        pose = ArrayPose(GlobalPlacement(HALF_PI, 0.0), NO_ROTATION, 0)
        r = antenna_positions_global(pose, np.array([[self.d, 0, 0]]), 1.0)
        assert np.allclose(r, [[self.d, 0, 1]], atol=1e-15)

    def test_equator_pose(self):
        pose = ArrayPose(GlobalPlacement(0.0, 0.0), NO_ROTATION, 0)
        r = antenna_positions_global(pose, np.array([[self.d, 0, 0]]), 1.0)
        assert np.allclose(r, [[1, 0, -self.d]], atol=1e-15)

    @given(theta_st, phi_st, vartheta_st, phi_st, st.floats(0.1, 5.0))
    def test_origin_maps_to_center(self, theta, phi, vt, vp, radius):
        pose = ArrayPose(GlobalPlacement(theta, phi), LocalRotation(vt, vp), 0)
        r = antenna_positions_global(pose, np.zeros((1, 3)), radius)
        assert np.allclose(r[0], radius * pointing_vector(pose.placement), atol=1e-12)


class TestOutwardNormal:
    @given(theta_st, phi_st)
    def test_no_rotation_is_radial(self, theta, phi):
        pose = ArrayPose(GlobalPlacement(theta, phi), NO_ROTATION, 0)
        assert np.allclose(outward_normal(pose), pointing_vector(pose.placement), atol=1e-12)

    def test_pole_zero_tilt(self):
        pose = ArrayPose(GlobalPlacement(HALF_PI, 0.0), LocalRotation(0.0, 0.0), 0)
        assert np.allclose(outward_normal(pose), [1, 0, 0], atol=1e-15)

    @given(theta_st, phi_st, vartheta_st, phi_st)
    def test_blockage_identity(self, theta, phi, vt, vp):
        pose = ArrayPose(GlobalPlacement(theta, phi), LocalRotation(vt, vp), 0)
        dot = outward_normal(pose) @ pointing_vector(pose.placement)
        assert dot == pytest.approx(np.sin(vt), abs=1e-12)
        assert dot >= -1e-12


class TestLayoutFeasible:
    def test_antipodal_pair(self):
        layout = SphereLayout.from_angles(1.0, 0.1, [[HALF_PI, 0], [-HALF_PI, 0]])
        rep = layout_feasible(layout)
        assert rep.ok
        assert rep.min_reflection_slack == pytest.approx(2.0)

    def test_coincident_pair(self):
        layout = SphereLayout.from_angles(1.0, 0.1, [[0.3, 0.2], [0.3, 0.2]])
        kinds = {v.kind for v in layout_feasible(layout).violations}
        assert kinds == {"distance"}

    def test_tilt_into_neighbour_is_a_reflection(self):
        # array 0 on the equator tilted towards array 1 at the pole
        layout = SphereLayout.from_angles(1.0, 0.1, [[0, 0], [HALF_PI, 0]],
                                          [[0.0, np.pi], [HALF_PI, 0.0]])
        rep = layout_feasible(layout)
        assert any(v.kind == "reflection" and v.i == 0 and v.j == 1 for v in rep.violations)

    @settings(max_examples=50)
    @given(st.lists(st.tuples(theta_st, phi_st), min_size=2, max_size=12))
    def test_no_rotation_never_reflects(self, placements):
        layout = SphereLayout.from_angles(1.0, 0.0, placements)
        assert not [v for v in layout_feasible(layout).violations if v.kind == "reflection"]

    def test_duplicate_ids_rejected(self):
        pose = ArrayPose(GlobalPlacement(0, 0), NO_ROTATION, 0)
        with pytest.raises(ValueError):
            SphereLayout(1.0, 0.1, (pose, pose))
