import math
from pathlib import Path

import numpy as np
import pytest

from rci_bounds.services.convex_sets import Box, VPolytope
from rci_bounds.services.reach_oracle import LinearSystem
from rci_bounds.services.spectral import decompose

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

# Support values of the unstable example along its lambda = 1.2 eigen-direction phi = (2.7, 1)/|(2.7, 1)|
_NORM = math.hypot(2.7, 1.0)
UNSTABLE_SUPPORTS = {
    "phi": np.array([2.7, 1.0]) / _NORM,
    "hX": (2.7 * 5.0 + 2.0) / _NORM,
    "hBU_plus": 0.5 * (2.7 * 0.1 + 1.0) / _NORM,
    "hBU_minus": 1.0 * (2.7 * 0.1 + 1.0) / _NORM,
    "hW": 3.7 / _NORM,
}


@pytest.fixture
def unstable_supports() -> dict:
    return dict(UNSTABLE_SUPPORTS)


@pytest.fixture
def config_dir() -> Path:
    return CONFIG_DIR


@pytest.fixture
def unstable_system() -> LinearSystem:
    return LinearSystem(
        A=np.array([[1.2, 1.0], [0.0, -1.5]]),
        B=np.array([[0.1], [1.0]]),
        X=Box([-5.0, -2.0], [5.0, 2.0]),
        U=Box([-0.5], [1.0]),
        Wbar=Box([-1.0, -1.0], [1.0, 1.0]),
    )


@pytest.fixture
def unstable_spectral(unstable_system):
    return decompose(unstable_system.A)


@pytest.fixture
def double_integrator() -> LinearSystem:
    return LinearSystem(
        A=np.array([[1.0, 1.0], [0.0, 1.0]]),
        B=np.array([[0.5], [1.0]]),
        X=Box([-5.0, -5.0], [5.0, 5.0]),
        U=Box([-1.0], [1.0]),
        Wbar=VPolytope([[-0.5, -1.0], [0.5, 1.0]]),
    )


@pytest.fixture
def double_integrator_spectral(double_integrator):
    return decompose(double_integrator.A, [(1.0, 2)])


@pytest.fixture
def rotation_system() -> LinearSystem:
    return LinearSystem(
        A=np.array([[0.0, -1.1], [1.1, 0.0]]),
        B=np.eye(2),
        X=Box([-5.0, -5.0], [5.0, 5.0]),
        U=Box([-1.0, -1.0], [1.0, 1.0]),
        Wbar=Box([-1.0, -1.0], [1.0, 1.0]),
    )


@pytest.fixture
def rotation_spectral(rotation_system):
    return decompose(rotation_system.A)


@pytest.fixture
def contraction_system() -> LinearSystem:
    """Autonomous x+ = 0.5 x + w on the unit box."""
    return LinearSystem(
        A=0.5 * np.eye(2),
        B=np.zeros((2, 1)),
        X=Box([-1.0, -1.0], [1.0, 1.0]),
        U=VPolytope([[0.0]]),
        Wbar=Box([-1.0, -1.0], [1.0, 1.0]),
    )
