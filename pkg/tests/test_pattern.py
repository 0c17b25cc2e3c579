import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ht6dma.geometry import ArrayPose, GlobalPlacement, LocalRotation, outward_normal, rot_z
from ht6dma.pattern import (DEFAULT_PATTERN, PatternParams, directional_gain_db,
                            effective_gain_linear, gains_linear, local_direction)

ang = st.floats(-np.pi, np.pi)
poses = st.builds(
    lambda t, p, vt, vp: ArrayPose(GlobalPlacement(t, p), LocalRotation(vt, vp), 0),
    st.floats(-np.pi / 2, np.pi / 2), ang, st.floats(0, np.pi / 2), ang)


def test_from_degrees_converts():
    p = PatternParams.from_degrees()
    assert p.phi_3db == pytest.approx(np.radians(65))
    assert p == DEFAULT_PATTERN


@pytest.mark.parametrize("theta, phi, expected", [
    (0.0, 0.0, 8.0),
    (0.0, np.radians(32.5), 5.0),
    (np.pi, np.pi, -22.0),
])
def test_gain_examples(theta, phi, expected):
    assert directional_gain_db(theta, phi) == pytest.approx(expected, abs=1e-12)


@given(ang, ang)
def test_gain_bounded_and_even(theta, phi):
    g = directional_gain_db(theta, phi)
    assert -22.0 - 1e-12 <= g <= 8.0 + 1e-12
    assert directional_gain_db(-theta, phi) == g
    assert directional_gain_db(theta, -phi) == g


def test_monotone_in_horizontal_deviation():
    phi = np.linspace(0, np.pi, 2001)
    g = directional_gain_db(0.0, phi)
    assert np.all(np.diff(g) <= 1e-12)


def test_invalid_params():
    with pytest.raises(ValueError):
        PatternParams(phi_3db=0.0)
    with pytest.raises(ValueError):
        PatternParams(convention="sideways")


class TestLocalDirection:
    @given(poses)
    def test_normal_maps_to_local_z(self, pose):
        assert np.allclose(local_direction(pose, outward_normal(pose)), [0, 0, 1], atol=1e-12)

    def test_identity_pose(self):
        pose = ArrayPose(GlobalPlacement(np.pi / 2, 0), LocalRotation(np.pi / 2, 0), 0)
        assert np.allclose(local_direction(pose, [1, 0, 0]), [1, 0, 0])

    def test_norm_preserved(self, rng):
        for _ in range(200):
            pose = ArrayPose(GlobalPlacement(rng.uniform(-1.5, 1.5), rng.uniform(-3, 3)),
                             LocalRotation(rng.uniform(0, 1.5), rng.uniform(-3, 3)), 0)
            f = rng.normal(size=3)
            f /= np.linalg.norm(f)
            assert abs(np.linalg.norm(local_direction(pose, f)) - 1) < 1e-12


class TestEffectiveGain:
    @given(poses)
    def test_boresight_and_back_lobe(self, pose):
        n = outward_normal(pose)
        assert effective_gain_linear(pose, n) == pytest.approx(10 ** 0.8, rel=1e-12)
        assert effective_gain_linear(pose, -n) == pytest.approx(10 ** -2.2, rel=1e-9)

    def test_invariant_under_common_rotation(self, rng):
        from ht6dma.geometry import pose_frame
        for _ in range(50):
            pose = ArrayPose(GlobalPlacement(rng.uniform(-1.5, 1.5), rng.uniform(-3, 3)),
                             LocalRotation(rng.uniform(0, 1.5), rng.uniform(-3, 3)), 0)
            f = rng.normal(size=3)
            f /= np.linalg.norm(f)
            Q = rot_z(rng.uniform(-3, 3))
            frame = pose_frame(pose)
            g1 = gains_linear(frame[None], f)[0]
            g2 = gains_linear((Q @ frame)[None], Q @ f)[0]
            assert g1 == pytest.approx(g2, rel=1e-12)
            assert g1 == pytest.approx(effective_gain_linear(pose, f), rel=1e-12)
