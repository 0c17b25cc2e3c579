import numpy as np
import pytest

from ht6dma.channel import (ArrayGeometry, PathLossParams, comm_channel, most_square_grid,
                            sensing_channel, steering_vector)
from ht6dma.errors import UserInsideSphere
from ht6dma.geometry import (ArrayPose, GlobalPlacement, LocalRotation, SphereLayout,
                             antenna_positions_global, outward_normal, pointing_vector)
from ht6dma.pattern import effective_gain_linear

from conftest import random_angles


@pytest.mark.parametrize("n, shape", [(4, (2, 2)), (21, (3, 7)), (7, (1, 7)), (16, (4, 4))])
def test_most_square_grid(n, shape):
    assert most_square_grid(n) == shape


def test_upa_is_centred_with_half_wavelength_spacing(lam):
    g = ArrayGeometry.upa(21, lam)
    assert g.antennas_per_array == 21
    assert np.allclose(g.local_coords.mean(axis=0), 0, atol=1e-15)
    assert np.allclose(g.local_coords[:, 2], 0)
    d = np.linalg.norm(g.local_coords[:, None] - g.local_coords[None], axis=-1)
    d[np.diag_indices(21)] = np.inf
    assert d.min() == pytest.approx(lam / 2)


def test_uncentred_geometry_rejected(lam):
    with pytest.raises(ValueError):
        ArrayGeometry(np.array([[0.1, 0, 0]]), lam)


def random_layout(rng, B, radius=1.0):
    t, p, vt, vp = random_angles(rng, B)
    return SphereLayout.from_angles(radius, 0.0, np.stack([t, p], 1), np.stack([vt, vp], 1))


class TestSteering:
    def test_orthogonal_direction_gives_ones(self, lam):
        # pole array with no rotation: antennas lie in the plane z = R; probe along x
        # after removing the centre offset, which is orthogonal to x
        geom = ArrayGeometry(np.array([[0.0, -lam / 4, 0.0], [0.0, lam / 4, 0.0]]), lam)
        pose = ArrayPose(GlobalPlacement(np.pi / 2, 0), LocalRotation(np.pi / 2, 0), 0)
        a = steering_vector(pose, np.array([1.0, 0, 0]), geom, 1.0)
        assert np.allclose(a, 1.0)

    def test_single_element_at_centre(self, lam, rng):
        geom = ArrayGeometry(np.zeros((1, 3)), lam)
        for _ in range(20):
            pose = ArrayPose(GlobalPlacement(rng.uniform(-1.5, 1.5), rng.uniform(-3, 3)),
                             LocalRotation(rng.uniform(0, 1.5), 0.0), 0)
            f = rng.normal(size=3)
            f /= np.linalg.norm(f)
            a = steering_vector(pose, f, geom, 1.0)
            expected = np.exp(-2j * np.pi / lam * f @ pointing_vector(pose.placement))
            assert a[0] == pytest.approx(expected, abs=1e-12)

    def test_phase_differences(self, geom4, rng):
        pose = ArrayPose(GlobalPlacement(0.4, -1.2), LocalRotation(0.9, 2.0), 0)
        f = rng.normal(size=3)
        f /= np.linalg.norm(f)
        a = steering_vector(pose, f, geom4, 1.0)
        r = antenna_positions_global(pose, geom4.local_coords, 1.0)
        expected = np.exp(-2j * np.pi / geom4.wavelength_m * ((r - r[0]) @ f))
        assert np.allclose(a / a[0], expected, atol=1e-12)
        assert np.allclose(np.abs(a), 1.0)


class TestCommChannel:
    def test_boresight_single_element(self, lam, free_space):
        geom = ArrayGeometry(np.zeros((1, 3)), lam)
        layout = SphereLayout.from_angles(1.0, 0.0, [[0.0, 0.0]])
        d = 80.0
        h = comm_channel(layout, geom, [d, 0, 0], free_space)
        expected = np.sqrt(free_space.eps0 * d ** -2 * 10 ** 0.8)
        assert abs(h.entries[0]) == pytest.approx(expected, rel=1e-12)

    def test_distance_doubling(self, geom4, free_space, rng):
        layout = random_layout(rng, 3)
        u = np.array([30.0, -40.0, 20.0])
        h1 = comm_channel(layout, geom4, u, free_space).entries
        h2 = comm_channel(layout, geom4, 2 * u, free_space).entries
        assert np.linalg.norm(h2) ** 2 == pytest.approx(np.linalg.norm(h1) ** 2 / 4, rel=1e-12)

    def test_norm_oracle_and_entry_magnitudes(self, geom4, free_space, rng):
        for _ in range(20):
            layout = random_layout(rng, 4)
            u = rng.normal(size=3) * 60
            h = comm_channel(layout, geom4, u, free_space)
            f = u / np.linalg.norm(u)
            gains = np.array([effective_gain_linear(p, f) for p in layout.poses])
            assert np.linalg.norm(h.entries) ** 2 == pytest.approx(h.path_gain * 4 * gains.sum(),
                                                                   rel=1e-12)
            mags = np.abs(h.entries).reshape(4, 4)
            assert np.allclose(mags, np.sqrt(h.path_gain * gains)[:, None], rtol=1e-12)

    def test_user_inside_sphere(self, geom4, free_space):
        layout = SphereLayout.from_angles(2.0, 0.0, [[0.0, 0.0]])
        with pytest.raises(UserInsideSphere):
            comm_channel(layout, geom4, [1.0, 1.0, 0.0], free_space)

    def test_continuity_in_pose(self, geom4, free_space):
        u = np.array([40.0, 30.0, 20.0])
        base = np.array([0.3, 0.5, 1.0, -0.4])

        def h(x):
            lay = SphereLayout.from_angles(1.0, 0.0, [x[:2]], [x[2:]])
            return comm_channel(lay, geom4, u, free_space).entries

        h0 = h(base)
        for i in range(4):
            e = np.zeros(4)
            e[i] = 1e-4
            assert np.linalg.norm(h(base + e) - h0) < 1e-2 * np.linalg.norm(h0)


class TestSensingChannel:
    def test_zenith_direction(self, lam, free_space):
        geom = ArrayGeometry(np.zeros((1, 3)), lam)
        layout = SphereLayout.from_angles(1.0, 0.0, [[np.pi / 2, 0.0]])
        h = sensing_channel(layout, geom, (np.pi / 2, 0.0), 30.0, free_space)
        # pole array facing up: boresight gain, centre phase exp(-j k R)
        assert abs(h.entries[0]) ** 2 == pytest.approx(free_space.gain(30.0) * 10 ** 0.8)

    def test_norm_oracle(self, geom4, free_space, rng):
        layout = random_layout(rng, 5)
        h = sensing_channel(layout, geom4, (0.7, -2.0), 45.0, free_space)
        f = pointing_vector(GlobalPlacement(0.7, -2.0))
        g = sum(effective_gain_linear(p, f) for p in layout.poses)
        assert np.linalg.norm(h.entries) ** 2 == pytest.approx(h.path_gain * 4 * g, rel=1e-12)

    def test_range_only_changes_amplitude(self, geom4, free_space, rng):
        layout = random_layout(rng, 3)
        h1 = sensing_channel(layout, geom4, (0.4, 1.0), 40.0, free_space)
        h2 = sensing_channel(layout, geom4, (0.4, 1.0), 90.0, free_space)
        assert np.allclose(h1.entries / np.sqrt(h1.path_gain),
                           h2.entries / np.sqrt(h2.path_gain), atol=1e-14)


def test_path_loss_validation():
    with pytest.raises(ValueError):
        PathLossParams(0.0)
    with pytest.raises(ValueError):
        PathLossParams(1.0, 0.5)
