import math

import numpy as np
import pytest
from scipy.linalg import block_diag

from rci_bounds.api.schemas import load_config
from rci_bounds.core.errors import DimensionMismatch, IndexOutOfRange, StructureRequired, UnsupportedSize, WrongBlockKind
from rci_bounds.services.bounds import GeneralizedSupports, SupportTriple, alpha_minus_k, alpha_plus_k, beta_plus_k
from rci_bounds.services.spectral import (
    BlockKind,
    decompose,
    detect_rational_angle,
    power_direction,
    rotating_direction,
    rotation_period,
)


def test_unstable_example_blocks(unstable_spectral, unstable_supports):
    first, second = unstable_spectral.blocks
    assert first.kind is BlockKind.REAL_POSITIVE
    assert first.lam == pytest.approx(1.2)
    np.testing.assert_allclose(first.phi[0], unstable_supports["phi"], atol=1e-10)
    assert second.kind is BlockKind.REAL_NEGATIVE
    assert second.lam == pytest.approx(-1.5)
    np.testing.assert_allclose(second.phi[0], [0.0, 1.0], atol=1e-10)


def test_left_eigenvectors_satisfy_eigen_relation(unstable_system, unstable_spectral):
    for block in unstable_spectral.blocks:
        phi = block.phi[0]
        np.testing.assert_allclose(unstable_system.A.T @ phi, block.lam * phi, atol=1e-10)
        assert np.linalg.norm(phi) == pytest.approx(1.0)


def test_repeated_eigenvalue_needs_declaration(double_integrator):
    with pytest.raises(StructureRequired):
        decompose(double_integrator.A)


def test_declared_sizes_must_match_multiplicity(double_integrator):
    with pytest.raises(StructureRequired):
        decompose(double_integrator.A, [(1.0, 1)])


def test_double_integrator_jordan_chain(double_integrator_spectral):
    (block,) = double_integrator_spectral.blocks
    assert block.kind is BlockKind.REAL_POSITIVE
    assert block.size == 2
    np.testing.assert_allclose(block.phi[0], [0.0, 1.0], atol=1e-10)
    np.testing.assert_allclose(block.phi[1], [1.0, 0.0], atol=1e-10)


@pytest.mark.parametrize("ell", [0, 1, 2, 5])
def test_power_direction_matches_matrix_power(double_integrator, double_integrator_spectral, ell):
    block = double_integrator_spectral.blocks[0]
    expected = np.linalg.matrix_power(double_integrator.A.T, ell) @ block.phi[1]
    np.testing.assert_allclose(power_direction(block, 2, ell), expected, atol=1e-10)


def test_power_direction_index_checks(double_integrator_spectral, rotation_spectral):
    block = double_integrator_spectral.blocks[0]
    with pytest.raises(IndexOutOfRange):
        power_direction(block, 3, 1)
    with pytest.raises(WrongBlockKind):
        power_direction(rotation_spectral.blocks[0], 1, 1)


def test_rotation_block(rotation_spectral):
    (block,) = rotation_spectral.blocks
    assert block.kind is BlockKind.COMPLEX_PAIR
    assert block.rho == pytest.approx(1.1)
    assert block.theta == pytest.approx(math.pi / 2)
    assert block.angle_rational == (1, 2)
    assert block.period == 4


@pytest.mark.parametrize("j", [1, 2])
def test_rotating_directions_are_periodic(rotation_spectral, j):
    block = rotation_spectral.blocks[0]
    for ell in range(6):
        np.testing.assert_allclose(rotating_direction(block, j, ell + block.period),
                                   rotating_direction(block, j, ell), atol=1e-10)


@pytest.mark.parametrize("j", [1, 2])
def test_rotating_directions_shift_under_transpose(rotation_system, rotation_spectral, j):
    block = rotation_spectral.blocks[0]
    At = rotation_system.A.T
    for l0 in range(4):
        for ell in range(1, 4):
            lhs = np.linalg.matrix_power(At, ell) @ rotating_direction(block, j, l0 + ell)
            np.testing.assert_allclose(lhs, block.rho**ell * rotating_direction(block, j, l0), atol=1e-8)


def test_rational_angle_detection():
    assert detect_rational_angle(math.pi / 3) == (1, 3)
    assert detect_rational_angle(2 * math.pi / 5) == (2, 5)
    assert detect_rational_angle(1.0) is None
    assert rotation_period(1, 3) == 6
    assert rotation_period(2, 3) == 3
    assert rotation_period(1, 2) == 4


def test_irrational_rotation_has_no_period():
    A = 0.9 * np.array([[math.cos(1.0), -math.sin(1.0)], [math.sin(1.0), math.cos(1.0)]])
    (block,) = decompose(A).blocks
    assert block.kind is BlockKind.COMPLEX_PAIR
    assert block.period is None


def test_size_limits():
    with pytest.raises(UnsupportedSize):
        decompose(np.diag(np.arange(1.0, 10.0)))
    with pytest.raises(DimensionMismatch):
        decompose(np.ones((2, 3)))


def test_zero_eigenvalue_block():
    blocks = decompose(np.diag([0.5, 0.0])).blocks
    assert [b.kind for b in blocks] == [BlockKind.REAL_POSITIVE, BlockKind.REAL_ZERO]


def _chain_residual(At, block):
    if block.is_real:
        chain = block.phi
        res = np.linalg.norm(At @ chain[0] - block.lam * chain[0])
        for j in range(1, len(chain)):
            res = max(res, np.linalg.norm(At @ chain[j] - block.lam * chain[j] - chain[j - 1]))
        return res
    P = np.column_stack(block.phi)
    c, s = math.cos(block.theta), math.sin(block.theta)
    return np.linalg.norm(At @ P - block.rho * P @ np.array([[c, -s], [s, c]])) / max(1.0, block.rho)


@pytest.mark.parametrize("name", ["unstable_example", "double_integrator", "rotation_example"])
def test_chain_residuals_on_shipped_configs(config_dir, name):
    config = load_config(config_dir / f"{name}.json")
    A = config.build_system().A
    for block in decompose(A, config.declared_structure()).blocks:
        assert _chain_residual(A.T, block) <= 1e-8


def test_chain_residuals_on_random_similar_matrices():
    rng = np.random.default_rng(41)
    for _ in range(20):
        reals = rng.permutation([0.4, -0.8, 1.3, -1.9, 2.6])[: rng.integers(0, 4)]
        rho, theta = rng.uniform(0.5, 1.5), rng.uniform(0.3, 2.8)
        rot = rho * np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
        D = block_diag(rot, *[[[lam]] for lam in reals])
        V = rng.normal(size=D.shape) + 3.0 * np.eye(D.shape[0])
        A = V @ D @ np.linalg.inv(V)
        blocks = decompose(A).blocks
        assert len(blocks) == len(reals) + 1
        for block in blocks:
            assert _chain_residual(A.T, block) <= 1e-8


def test_bounds_do_not_depend_on_eigenvector_sign(unstable_system, unstable_spectral):
    sets = (unstable_system.X, unstable_system.neg_BU, unstable_system.Wbar)
    for block in unstable_spectral.blocks:
        bound = alpha_plus_k if block.lam > 0 else alpha_minus_k
        t = SupportTriple.from_sets(*sets, block.phi[0])
        flipped = SupportTriple.from_sets(*sets, -block.phi[0])
        for k in range(1, 30):
            a, b = bound(block.lam, t, k), bound(block.lam, flipped, k)
            assert a.value_plus == pytest.approx(b.value_minus, rel=1e-12)
            assert a.value_minus == pytest.approx(b.value_plus, rel=1e-12)


def test_chain_bound_does_not_depend_on_chain_sign(double_integrator, double_integrator_spectral):
    (block,) = double_integrator_spectral.blocks
    sets = (double_integrator.X, double_integrator.neg_BU, double_integrator.Wbar)
    s = GeneralizedSupports.from_sets(*sets, block.phi[0], block.phi[1])
    flipped = GeneralizedSupports.from_sets(*sets, -block.phi[0], -block.phi[1])
    for k in range(1, 20):
        assert beta_plus_k(block.lam, s, k).bar == pytest.approx(beta_plus_k(block.lam, flipped, k).bar, rel=1e-12)
