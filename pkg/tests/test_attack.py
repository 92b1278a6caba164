import numpy as np
import pytest

from rci_bounds.api.schemas import load_config
from rci_bounds.core.errors import (
    ConfigError,
    DegenerateProjection,
    IndexOutOfRange,
    InfeasibleOmega,
    WrongBlockKind,
)
from rci_bounds.services.analysis_service import analysis_service
from rci_bounds.services.attack import (
    ProjectedSystem,
    analytic_exit_estimate,
    default_max_steps,
    dos_disturbance,
    dos_feasible,
    dos_threshold,
    greedy_step,
    lift_disturbance,
    project,
    simulate_fullstate,
    simulate_scalar,
)
from rci_bounds.services.bounds import SupportTriple, alpha_plus_inf, best_bound

DRIFT = 0.1649743  # 0.3 * h_W - h_BU along phi


@pytest.fixture
def projected(unstable_system, unstable_spectral):
    return project(unstable_system, unstable_spectral, 0, 0.3)


def test_projection_intervals(projected, unstable_supports):
    assert projected.lam == pytest.approx(1.2)
    assert projected.xi == pytest.approx((-unstable_supports["hX"], unstable_supports["hX"]), abs=1e-6)
    assert projected.upsilon == pytest.approx((-unstable_supports["hBU_plus"], unstable_supports["hBU_minus"]),
                                              abs=1e-6)
    assert projected.omega == pytest.approx((-unstable_supports["hW"], unstable_supports["hW"]), abs=1e-6)


def test_greedy_step_pushes_outward(projected, unstable_supports):
    move = greedy_step(projected, 1.0)
    assert move.xi_next == pytest.approx(1.2 + DRIFT, abs=1e-6)
    assert move.upsilon == pytest.approx(projected.upsilon[0])
    assert greedy_step(projected, -1.0).xi_next == pytest.approx(
        -1.2 - 0.3 * unstable_supports["hW"] + unstable_supports["hBU_minus"], abs=1e-6)


def test_tie_at_zero_takes_positive_branch(projected):
    assert greedy_step(projected, 0.0).xi_next == pytest.approx(DRIFT, abs=1e-6)


def test_negative_eigenvalue_flips_push_direction(unstable_system, unstable_spectral):
    p = project(unstable_system, unstable_spectral, 1, 0.8)
    assert p.lam == pytest.approx(-1.5)
    # lambda*xi < 0 so the attacker pushes down
    move = greedy_step(p, 1.0)
    assert move.omega == pytest.approx(-0.8)
    assert move.upsilon == pytest.approx(1.0)
    assert move.xi_next == pytest.approx(-1.3)


def test_negative_eigenvalue_tie_and_negative_state(unstable_system, unstable_spectral):
    p = project(unstable_system, unstable_spectral, 1, 0.8)
    assert greedy_step(p, 0.0).omega == pytest.approx(0.8)
    # lambda*xi > 0 for xi < 0
    assert greedy_step(p, -1.0).omega == pytest.approx(0.8)
    assert abs(greedy_step(p, -1.0).xi_next) > 1.0


def test_scalar_attack_exit_and_closed_form(projected):
    trace = simulate_scalar(projected, 0.0)
    assert trace.exit_step == 12
    assert trace.summary() == "exit at k=12"
    offset = (0.3 * projected.omega[1] + projected.upsilon[0]) / 0.2
    for step in trace.steps:
        assert step.xi == pytest.approx(offset * (1.2**step.k - 1.0), rel=1e-9, abs=1e-12)
    assert not trace.steps[-1].in_X


def test_exit_estimate_and_step_budget(projected):
    assert analytic_exit_estimate(projected) == pytest.approx(11.07, abs=0.01)
    assert default_max_steps(projected) == 120


def test_marginal_eigenvalue_uses_fallback_budget(double_integrator, double_integrator_spectral):
    p = project(double_integrator, double_integrator_spectral, 0, 0.0)
    assert analytic_exit_estimate(p) is None
    trace = simulate_scalar(p, 0.0)
    assert trace.exit_step is None
    assert trace.summary() == "no exit within 500"
    assert {s.xi for s in trace.steps} == {0.0, -1.0}


def test_double_integrator_drifts_out(double_integrator, double_integrator_spectral):
    p = project(double_integrator, double_integrator_spectral, 0, 1.05)
    trace = simulate_scalar(p, 0.0)
    assert trace.exit_step == 101


def test_exit_right_after_boundary_start():
    p = ProjectedSystem(lam=2.0, phi=np.array([1.0, 0.0]), xi=(-1.0, 1.0), upsilon=(0.0, 0.0),
                        omega=(-1.0, 1.0), alpha=1.0)
    trace = simulate_scalar(p, 1.0)
    assert trace.exit_step == 1
    assert trace.steps[-1].xi == pytest.approx(3.0)


def test_start_outside_is_rejected(projected):
    with pytest.raises(ValueError):
        simulate_scalar(projected, 10.0)


def test_degenerate_projection():
    with pytest.raises(DegenerateProjection):
        ProjectedSystem(lam=2.0, phi=np.array([1.0, 0.0]), xi=(-1.0, 1.0), upsilon=(0.0, 0.0),
                        omega=(0.0, 0.0), alpha=1.0)


def test_lifted_disturbances(unstable_system, unstable_supports):
    phi = unstable_supports["phi"]
    hW = unstable_supports["hW"]
    np.testing.assert_allclose(lift_disturbance(unstable_system, phi, 0.0, 0.3), [0.0, 0.0])
    np.testing.assert_allclose(lift_disturbance(unstable_system, phi, 0.3 * hW, 0.3), [0.3, 0.3], atol=1e-6)
    np.testing.assert_allclose(lift_disturbance(unstable_system, phi, -0.3 * hW, 0.3), [-0.3, -0.3], atol=1e-6)
    w = lift_disturbance(unstable_system, phi, 0.1, 0.3)
    assert phi @ w == pytest.approx(0.1)
    assert np.max(np.abs(w)) <= 0.3
    with pytest.raises(InfeasibleOmega):
        lift_disturbance(unstable_system, phi, 0.5, 0.3)


def test_fullstate_attack_follows_projection(unstable_system, unstable_spectral):
    trace = simulate_fullstate(unstable_system, unstable_spectral, 0, 0.3, [0.0, 0.0])
    scalar = simulate_scalar(project(unstable_system, unstable_spectral, 0, 0.3), 0.0)
    assert trace.exit_step == 12
    for full_step, scalar_step in zip(trace.steps, scalar.steps):
        assert full_step.xi == pytest.approx(scalar_step.xi, abs=1e-9)
    assert trace.state_exit_step is not None and trace.state_exit_step <= trace.exit_step
    for step in trace.steps[:-1]:
        assert np.max(np.abs(step.w)) <= 0.3 + 1e-12
        assert -0.5 <= step.u[0] <= 1.0


def test_fullstate_rows(unstable_system, unstable_spectral):
    header, rows = simulate_fullstate(unstable_system, unstable_spectral, 0, 0.3, [0.0, 0.0]).rows()
    assert header == ["k", "x1", "x2", "u1", "w1", "w2", "in_X"]
    assert len(rows) == 13
    assert rows[-1][3] is None


def test_double_integrator_traces_agree(double_integrator, double_integrator_spectral):
    full = simulate_fullstate(double_integrator, double_integrator_spectral, 0, 0.5, [0.0, 0.0], max_steps=50)
    scalar = simulate_scalar(project(double_integrator, double_integrator_spectral, 0, 0.5), 0.0, max_steps=50)
    assert len(full.steps) == len(scalar.steps) == 51
    for a, b in zip(full.steps, scalar.steps):
        assert a.xi == pytest.approx(b.xi, abs=1e-9)


@pytest.mark.parametrize("defender", ["projected-worst-case", "zero", "saturating-feedback"])
@pytest.mark.parametrize("name", ["unstable", "double_integrator"])
def test_attack_exits_above_certificate(request, name, defender):
    system = request.getfixturevalue(f"{name}_system" if name == "unstable" else name)
    spectral = request.getfixturevalue(f"{name}_spectral")
    alpha = 1.05 * best_bound(system, spectral, 20).certificate.alpha
    trace = simulate_fullstate(system, spectral, 0, alpha, np.zeros(2), max_steps=200, defender=defender)
    assert trace.exit_step is not None and trace.exit_step <= 200


def test_fullstate_input_checks(unstable_system, unstable_spectral):
    with pytest.raises(ConfigError):
        simulate_fullstate(unstable_system, unstable_spectral, 0, 0.3, [0.0, 0.0, 0.0])
    with pytest.raises(ConfigError):
        simulate_fullstate(unstable_system, unstable_spectral, 0, 0.3, [9.0, 0.0])
    with pytest.raises(ConfigError):
        simulate_fullstate(unstable_system, unstable_spectral, 0, 0.3, [0.0, 0.0], defender="bang-bang")
    with pytest.raises(IndexOutOfRange):
        project(unstable_system, unstable_spectral, 2, 0.3)


def test_complex_block_cannot_be_attacked(rotation_system, rotation_spectral):
    with pytest.raises(WrongBlockKind, match="real block required"):
        project(rotation_system, rotation_spectral, 0, 0.5)


def test_denial_of_service_threshold(unstable_system, unstable_spectral, double_integrator):
    assert dos_threshold(unstable_system) == pytest.approx(1.0)
    assert dos_feasible(unstable_system, 1.0)
    assert not dos_feasible(unstable_system, 0.99)
    assert not dos_feasible(unstable_system, 0.0)
    assert dos_threshold(double_integrator) == pytest.approx(1.0)
    assert dos_feasible(double_integrator, 1.0)
    assert dos_threshold(unstable_system) >= best_bound(unstable_system, unstable_spectral, 15).certificate.alpha


def test_cancelling_disturbance(unstable_system):
    np.testing.assert_allclose(dos_disturbance(unstable_system, [1.0]), [-0.1, -1.0])
    np.testing.assert_allclose(dos_disturbance(unstable_system, 0.5), [-0.05, -0.5])


def test_service_attack_from_config(config_dir):
    config = load_config(config_dir / "unstable_example.json")
    outcome = analysis_service.attack(config, config.attack.alpha, block=config.attack.block - 1)
    assert outcome.trace.exit_step == 12
    assert outcome.certificate_alpha == pytest.approx(0.286036, abs=1e-5)
    scalar = analysis_service.attack(config, 0.3, mode="scalar")
    assert scalar.trace.mode == "scalar"
    assert scalar.trace.exit_step == 12


def test_cancelling_threshold_dominates_scaled_limit(unstable_system, unstable_spectral):
    phi = unstable_spectral.blocks[0].phi[0]
    t = SupportTriple.from_sets(unstable_system.X, unstable_system.neg_BU, unstable_system.Wbar, phi)
    limit = alpha_plus_inf(1.2, t).value
    assert limit == pytest.approx(0.286036, abs=1e-6)
    alpha = dos_threshold(unstable_system)
    assert dos_feasible(unstable_system, alpha)
    assert alpha >= 1.2 * limit - 1e-9
    for a in (1.0, 1.5, 3.0):
        if dos_feasible(unstable_system, a):
            assert a >= 1.2 * limit - 1e-9
