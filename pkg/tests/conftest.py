import numpy as np
import pytest

from ht6dma.channel import ArrayGeometry, PathLossParams, wavelength_for

LAMBDA = wavelength_for(2.4e9)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def lam():
    return LAMBDA


@pytest.fixture
def geom4():
    return ArrayGeometry.upa(4, LAMBDA)


@pytest.fixture
def free_space():
    return PathLossParams.free_space(LAMBDA)


def random_unit(rng, n):
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def random_angles(rng, n):
    """Random (theta, phi, vartheta, varphi) arrays inside the valid ranges."""
    return (rng.uniform(-np.pi / 2, np.pi / 2, n), rng.uniform(-np.pi, np.pi, n),
            rng.uniform(0, np.pi / 2, n), rng.uniform(-np.pi, np.pi, n))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
