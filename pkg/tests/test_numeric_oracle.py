"""
Tests for the RK4 oracles: memory-kernel and mode-discretized reservoirs.
"""
import logging
import math

import numpy as np
import pytest

from qst.errors import DomainError, ValidationError
from qst.physics.chain_dynamics import closed_fidelity_series
from qst.physics.numeric_oracle import (
    MAX_MODE_PHASE,
    IntegratorSettings,
    check_resolution,
    compare,
    discretize_reservoir,
    integrate_memory_kernel,
    integrate_mode_discretized,
    kernel,
    kernel_parameters,
    mode_detunings,
    rk4_step,
)
from qst.physics.krawtchouk_core import ChainSpec
from qst.physics.open_dynamics import (
    AmplitudeTrajectory,
    EigenAmplitudes,
    EnsembleConfig,
    ReservoirSpec,
    eigen_trajectory,
    initial_coefficients,
)


def _memory_run(config, dt, t_max, num_points, variant="collective"):
    settings = IntegratorSettings(dt=dt, t_max=t_max, num_points=num_points)
    init = initial_coefficients(config, 1.0)
    return integrate_memory_kernel(config, init, settings, variant), eigen_trajectory(config, init, settings.grid())


def test_step_plan_lands_on_output_grid():
    settings = IntegratorSettings(dt=1e-4, t_max=10.0, num_points=101)
    n_steps, stride, dt = settings.step_plan()
    assert (n_steps, stride) == (100000, 1000)
    assert dt == pytest.approx(1e-4, rel=1e-12)


def test_step_plan_shrinks_step():
    n_steps, stride, dt = IntegratorSettings(dt=0.3, t_max=1.0, num_points=3).step_plan()
    assert stride == 2 and n_steps == 4
    assert dt == pytest.approx(0.25)


def test_integrator_settings_validated():
    with pytest.raises(ValueError):
        IntegratorSettings(dt=0.0, t_max=1.0)
    with pytest.raises(ValueError):
        IntegratorSettings(dt=1e-3, t_max=1.0, num_points=1)


def test_unresolved_step_rejected(make_ensemble):
    config = make_ensemble(M=2, N=1, lam=50.0)
    with pytest.raises(ValidationError, match="does not resolve"):
        check_resolution(config, IntegratorSettings(dt=0.01, t_max=1.0, num_points=11))
    with pytest.raises(ValidationError):
        _memory_run(make_ensemble(M=2, N=50), dt=5e-3, t_max=1.0, num_points=11)


def test_kernel_values(make_ensemble):
    config = make_ensemble(M=2, N=1, lam=50.0, gamma0=1.0)
    assert kernel(0.0, config) == pytest.approx(25.0)
    assert kernel(0.0, config, "residue") == pytest.approx(0.5)
    assert kernel(0.0, config, "lorentzian") == pytest.approx(0.5)
    assert abs(kernel(1 / 50, config)) == pytest.approx(25.0 / math.e, rel=1e-12)
    lags = np.linspace(0.0, 1.0, 11)
    assert np.all(np.diff(np.abs(kernel(lags, config))) < 0)


def test_kernel_variants_differ_in_phase(make_ensemble):
    config = make_ensemble(M=3)
    _, mu_residue = kernel_parameters(config, "residue")
    _, mu_lorentzian = kernel_parameters(config, "lorentzian")
    assert mu_residue == mu_lorentzian.conjugate()
    with pytest.raises(ValidationError):
        kernel_parameters(config, "gaussian")


def test_kernel_rejects_negative_lag(make_ensemble):
    with pytest.raises(DomainError):
        kernel(-1e-3, make_ensemble())


def test_rk4_step_on_exponential():
    y = np.array([1.0 + 0j])
    dt = 0.1
    for k in range(10):
        y = rk4_step(lambda _, v: -2j * v, k * dt, y, dt)
    assert abs(y[0] - np.exp(-2j)) <= 1e-4


def test_decoupled_reservoir_keeps_bright_amplitudes(make_ensemble):
    config = make_ensemble(M=3, N=2, gamma0=0.0)
    numeric, analytic = _memory_run(config, dt=1e-3, t_max=2.0, num_points=21)
    assert compare(numeric, analytic) <= 1e-12


def test_single_chain_matches_closed_form(make_ensemble):
    numeric, analytic = _memory_run(make_ensemble(M=2, N=1), dt=1e-4, t_max=10.0, num_points=101)
    deviation = compare(numeric, analytic)
    assert deviation <= 1e-6, f"max deviation {deviation:.3e}"


def test_antisymmetric_initial_state_is_frozen(make_ensemble):
    config = make_ensemble(M=2, N=2)
    C = np.zeros((2, 2), dtype=complex)
    C[:, 0] = [1 / math.sqrt(2), -1 / math.sqrt(2)]
    settings = IntegratorSettings(dt=1e-4, t_max=2.0, num_points=21)
    trajectory = integrate_memory_kernel(config, EigenAmplitudes(C=C), settings)
    assert np.max(np.abs(np.abs(trajectory.amplitudes[:, :, 0]) - 1 / math.sqrt(2))) <= 1e-8


@pytest.mark.parametrize("M,N", [(2, 1), (2, 50), (3, 1), (3, 45), (4, 1), (4, 40)])
def test_oracle_agrees_with_closed_form(make_ensemble, M, N):
    numeric, analytic = _memory_run(make_ensemble(M=M, N=N), dt=1e-4, t_max=10.0, num_points=101)
    deviation = compare(numeric, analytic)
    assert deviation <= 1e-6, f"M={M}, N={N}: max deviation {deviation:.3e}"


def test_fourth_order_convergence(make_ensemble):
    """Halving dt cuts the error by about 2^4."""
    config = make_ensemble(M=2, N=1, lam=10.0)
    reference, _ = _memory_run(config, dt=2.5e-4, t_max=1.0, num_points=11)
    coarse, _ = _memory_run(config, dt=4e-3, t_max=1.0, num_points=11)
    fine, _ = _memory_run(config, dt=2e-3, t_max=1.0, num_points=11)
    order = math.log2(compare(coarse, reference) / compare(fine, reference))
    assert order >= 3.8, f"observed order {order:.2f}"


def test_memory_kernel_norm_never_grows(make_ensemble):
    numeric, _ = _memory_run(make_ensemble(M=3, N=1), dt=1e-4, t_max=5.0, num_points=51)
    norm = numeric.system_norm()
    assert norm[0] == pytest.approx(1.0, abs=1e-14)
    assert np.all(norm <= 1.0 + 1e-12)
    assert norm[-1] < norm[0]


@pytest.fixture(scope="module")
def mode_run():
    """Largest step the detuning check accepts for K = 4000, lambda = 50."""
    config = EnsembleConfig(chain=ChainSpec(M=2), reservoir=ReservoirSpec(gamma0=1.0, lam=50.0), N=1)
    init = initial_coefficients(config, 1.0)
    reservoir = discretize_reservoir(config, modes=4000)
    fastest = np.max(np.abs(mode_detunings(config, reservoir)))
    settings = IntegratorSettings(dt=MAX_MODE_PHASE / fastest, t_max=2.0, num_points=41)
    return config, settings, init, integrate_mode_discretized(config, reservoir, init, settings)


def test_mode_run_conserves_total_norm(mode_run):
    _, _, _, trajectory = mode_run
    gap = np.max(np.abs(trajectory.total_norm() - 1.0))
    assert gap <= 1e-8, f"total norm drifts by {gap:.3e}"
    assert trajectory.reservoir_population[0] == 0.0
    assert trajectory.reservoir_population[-1] > 0.0
    assert not trajectory.beyond_recurrence


def test_mode_run_converges_to_lorentzian_kernel(mode_run):
    config, settings, init, trajectory = mode_run
    for variant in ("lorentzian", "residue"):
        memory = integrate_memory_kernel(config, init, settings, variant)
        deviation = compare(trajectory, memory)
        assert deviation <= 1e-3, f"{variant}: max deviation {deviation:.3e}"


def test_mode_step_must_resolve_fastest_detuning(make_ensemble):
    config = make_ensemble(M=2, N=1, lam=50.0)
    reservoir = discretize_reservoir(config, modes=4000)
    settings = IntegratorSettings(dt=1e-3, t_max=2.0, num_points=41)
    assert check_resolution(config, settings) == pytest.approx(1e-3)
    with pytest.raises(ValidationError, match="reservoir detunings"):
        integrate_mode_discretized(config, reservoir, initial_coefficients(config, 1.0), settings)


def test_uncoupled_modes_reproduce_closed_chain(make_ensemble):
    config = make_ensemble(M=3, N=1, gamma0=0.0)
    settings = IntegratorSettings(dt=2e-4, t_max=3.0, num_points=31)
    reservoir = discretize_reservoir(config, modes=1000)
    trajectory = integrate_mode_discretized(config, reservoir, initial_coefficients(config, 1.0), settings)
    closed = closed_fidelity_series(config.chain, settings.grid())
    np.testing.assert_allclose(trajectory.transfer_fidelity(config.chain), closed.values, atol=1e-10)
    np.testing.assert_array_equal(trajectory.reservoir_population, 0.0)


def test_recurrence_time_flagged(make_ensemble, caplog):
    config = make_ensemble(M=2, N=1)
    reservoir = discretize_reservoir(config, modes=100)
    assert reservoir.recurrence_time == pytest.approx(2 * math.pi / 40.0)
    settings = IntegratorSettings(dt=2e-4, t_max=0.5, num_points=11)
    with caplog.at_level(logging.WARNING):
        trajectory = integrate_mode_discretized(config, reservoir, initial_coefficients(config, 1.0), settings)
    assert trajectory.beyond_recurrence
    assert "recurrence time" in caplog.text


def test_discretized_coupling_weight(make_ensemble):
    reservoir = discretize_reservoir(make_ensemble(M=2, gamma0=1.0, lam=50.0), modes=4000)
    total = float(np.sum(reservoir.couplings**2))
    assert total == pytest.approx(math.atan(40.0) / math.pi, rel=1e-4)
    assert reservoir.K == 4000
    assert reservoir.frequencies.min() > 1.0 - 2000.0


def test_coarse_reservoir_warns(make_ensemble, caplog):
    with caplog.at_level(logging.WARNING):
        discretize_reservoir(make_ensemble(), modes=500)
    assert "coarse reservoir" in caplog.text
    with pytest.raises(ValidationError):
        discretize_reservoir(make_ensemble(), modes=0)


def test_compare_rejects_mismatched_trajectories():
    times = np.linspace(0.0, 1.0, 5)
    a = AmplitudeTrajectory(times=times, amplitudes=np.zeros((5, 1, 2), dtype=complex))
    with pytest.raises(ValidationError):
        compare(a, AmplitudeTrajectory(times=times * 2, amplitudes=a.amplitudes))
    with pytest.raises(ValidationError):
        compare(a, AmplitudeTrajectory(times=times, amplitudes=a.amplitudes, basis="site"))
    with pytest.raises(ValidationError):
        compare(a, AmplitudeTrajectory(times=times, amplitudes=np.zeros((5, 1, 3), dtype=complex)))
    assert compare(a, a) == 0.0


def test_kernel_variant_changes_dynamics(make_ensemble):
    config = make_ensemble(M=2, N=1)
    settings = IntegratorSettings(dt=1e-4, t_max=3.0, num_points=31)
    init = initial_coefficients(config, 1.0)
    collective = integrate_memory_kernel(config, init, settings, "collective")
    residue = integrate_memory_kernel(config, init, settings, "residue")
    assert compare(collective, residue) > 0.01
