"""
Tests for the closed-form dynamics of chains in a common reservoir.
"""
import math

import numpy as np
import pytest

from qst.errors import ValidationError
from qst.physics.chain_dynamics import closed_fidelity_series, first_peak, time_grid, transfer_amplitude
from qst.physics.krawtchouk_core import ChainSpec, krawtchouk_poly, norm_d, orthonormal_basis, weight
from qst.physics.open_dynamics import (
    EigenAmplitudes,
    EnsembleConfig,
    QubitDensityMatrix,
    ReservoirSpec,
    _survival,
    bloch_state,
    bright_amplitudes,
    chi,
    d_factor,
    evolve_eigen,
    initial_coefficients,
    open_fidelity_series,
    reduced_density_matrix,
    relaxed_chi,
    site_amplitudes,
    site_trajectory,
    state_fidelity,
    survival_g,
    transfer_state_fidelity,
)


def test_d_factor_value(make_ensemble):
    D = d_factor(make_ensemble(M=2, N=1))
    expected = np.sqrt(complex(2399.0, -100.0))
    assert abs(D - expected) <= 1e-12
    assert D.real > 0


def test_survival_starts_at_one(make_ensemble):
    for M, N in [(2, 1), (3, 45), (5, 7)]:
        assert abs(survival_g(make_ensemble(M=M, N=N), 0.0) - 1.0) <= 1e-14


def test_decoupled_reservoir_keeps_bright_amplitude(make_ensemble):
    G = survival_g(make_ensemble(M=3, N=4, gamma0=0.0), np.linspace(0.0, 10.0, 11))
    np.testing.assert_allclose(G, np.ones(11), atol=1e-12)


def test_survival_independent_of_square_root_branch(make_ensemble):
    config = make_ensemble(M=3, N=2)
    mu = complex(config.reservoir.lam, -config.E0)
    D = d_factor(config)
    times = np.linspace(0.0, 0.5, 26)
    np.testing.assert_allclose(_survival(mu, -D, times), _survival(mu, D, times), atol=1e-10)


def test_survival_is_continuous_at_vanishing_d():
    mu = complex(3.0, 0.5)
    times = np.linspace(0.0, 2.0, 21)
    limit = _survival(mu, 0.0, times)
    near = _survival(mu, 1e-6, times)
    np.testing.assert_allclose(near, limit, atol=1e-7)


@pytest.mark.parametrize("N", [1, 2, 10, 50])
def test_survival_is_a_contraction(make_ensemble, N):
    G = survival_g(make_ensemble(M=2, N=N), np.linspace(0.0, 20.0, 2001))
    assert np.max(np.abs(G)) <= 1.0 + 1e-12


def test_survival_rejects_negative_time(make_ensemble):
    with pytest.raises(ValidationError):
        survival_g(make_ensemble(), -0.1)


def test_bright_amplitudes_of_single_excited_chain(make_ensemble):
    config = make_ensemble(M=2, N=3)
    C = np.zeros((3, 2), dtype=complex)
    C[0, 0] = 1.0
    init = EigenAmplitudes(C=C)
    t = 0.7
    G = survival_g(config, t)
    bright = bright_amplitudes(config, init, t)
    np.testing.assert_allclose(bright, [2 / 3 + G / 3, -1 / 3 + G / 3, -1 / 3 + G / 3], atol=1e-14)


def test_symmetric_bright_state_decays_with_survival(make_ensemble):
    config = make_ensemble(M=3, N=4)
    C = np.zeros((4, 3), dtype=complex)
    C[:, 0] = 0.5
    times = np.linspace(0.0, 3.0, 7)
    bright = bright_amplitudes(config, EigenAmplitudes(C=C), times)
    G = survival_g(config, times)
    np.testing.assert_allclose(bright, 0.5 * np.repeat(G[:, np.newaxis], 4, axis=1), atol=1e-14)


def test_antisymmetric_bright_state_is_frozen(make_ensemble):
    config = make_ensemble(M=2, N=2)
    C = np.zeros((2, 2), dtype=complex)
    C[:, 0] = [1 / math.sqrt(2), -1 / math.sqrt(2)]
    bright = bright_amplitudes(config, EigenAmplitudes(C=C), np.linspace(0.0, 5.0, 11))
    np.testing.assert_allclose(bright, np.tile(C[:, 0], (11, 1)), atol=1e-14)


def test_initial_coefficients_match_krawtchouk_values(make_ensemble):
    config = make_ensemble(M=5, N=3)
    init = initial_coefficients(config, 1.0)
    expected = [math.sqrt(weight(0, 5) / norm_d(l, 5)) * krawtchouk_poly(l, 0, 5) for l in range(5)]
    np.testing.assert_allclose(init.C[0], expected, atol=1e-14)
    np.testing.assert_array_equal(init.C[1:], 0.0)
    assert init.vacuum == 0.0


def test_initial_coefficients_of_two_qubit_chain(make_ensemble):
    init = initial_coefficients(make_ensemble(M=2, N=1), 1.0)
    np.testing.assert_allclose(init.C[0], [1 / math.sqrt(2), 1 / math.sqrt(2)], atol=1e-15)


def test_initial_coefficients_multiset(make_ensemble):
    """Squared coefficients are the binomial weights of the chain."""
    config = make_ensemble(M=6, N=1)
    squares = sorted(np.abs(initial_coefficients(config, 1.0).C[0]) ** 2)
    expected = sorted(math.comb(5, l) / 32 for l in range(6))
    np.testing.assert_allclose(squares, expected, atol=1e-14)


def test_initial_coefficients_fill_vacuum(make_ensemble):
    init = initial_coefficients(make_ensemble(M=3, N=2), 0.6)
    assert init.vacuum == pytest.approx(0.8)
    assert init.norm == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(ValidationError):
        initial_coefficients(make_ensemble(M=3, N=2), 1.1)


def test_amplitudes_exceeding_unit_norm_rejected():
    with pytest.raises(ValidationError):
        EigenAmplitudes(C=np.ones((1, 2)), vacuum=0.0)
    with pytest.raises(ValidationError):
        EigenAmplitudes(C=np.ones(2) / 2)


@pytest.mark.parametrize("N", [1, 2, 50])
@pytest.mark.parametrize("M", [2, 3, 4, 6])
def test_chi_matches_evolved_site_amplitudes(make_ensemble, M, N):
    """Term-by-term propagator equals the eigenbasis route for every site."""
    config = make_ensemble(M=M, N=N)
    times = np.linspace(0.0, 10.0, 41)
    xi = site_amplitudes(config, initial_coefficients(config, 1.0), times)
    for j in range(M):
        gap = np.max(np.abs(chi(config, j, times) - xi[:, 0, j]))
        assert gap <= 1e-12, f"M={M}, N={N}, site {j}: {gap:.3e}"


def test_chi_without_coupling_is_closed_amplitude(make_ensemble):
    config = make_ensemble(M=4, N=3, gamma0=0.0)
    times = np.linspace(0.0, 6.0, 31)
    np.testing.assert_allclose(chi(config, 3, times), transfer_amplitude(config.chain, times), atol=1e-12)


def test_chi_relaxes(make_ensemble):
    config = make_ensemble(M=2, N=1)
    gap = abs(chi(config, 1, 20.0) - relaxed_chi(config, 1, 20.0))
    assert gap <= 1e-4
    assert abs(chi(config, 0, 0.0) - 1.0) <= 1e-12


@pytest.mark.parametrize("omega0", [0.0, 1.0, 7.0])
def test_fidelity_independent_of_site_energy(make_ensemble, omega0):
    times = np.linspace(0.0, 5.0, 26)
    reference = open_fidelity_series(make_ensemble(M=3, N=5, omega0=1.0), times).values
    values = open_fidelity_series(make_ensemble(M=3, N=5, omega0=omega0), times).values
    np.testing.assert_allclose(values, reference, atol=1e-12)


def test_dark_levels_only_rotate(make_ensemble, random_state):
    config = make_ensemble(M=4, N=3)
    init = EigenAmplitudes(C=random_state(3, 4))
    times = np.linspace(0.0, 4.0, 9)
    C = evolve_eigen(config, init, times)
    np.testing.assert_allclose(np.abs(C[..., 1:]), np.abs(np.broadcast_to(init.C[:, 1:], C[..., 1:].shape)), atol=1e-14)


def test_bright_differences_conserved(make_ensemble, random_state):
    config = make_ensemble(M=3, N=3)
    init = EigenAmplitudes(C=random_state(3, 3))
    bright = bright_amplitudes(config, init, np.linspace(0.0, 4.0, 9))
    differences = bright[:, 0] - bright[:, 1]
    np.testing.assert_allclose(differences, differences[0], atol=1e-14)


def test_site_amplitudes_shape_and_norm(make_ensemble):
    config = make_ensemble(M=5, N=2)
    init = initial_coefficients(config, 1.0)
    xi = site_amplitudes(config, init, np.linspace(0.0, 3.0, 13))
    assert xi.shape == (13, 2, 5)
    norms = np.sum(np.abs(xi) ** 2, axis=(1, 2))
    assert norms[0] == pytest.approx(1.0, abs=1e-12)
    assert np.all(norms <= 1.0 + 1e-12)
    np.testing.assert_allclose(xi[0, 0], [1, 0, 0, 0, 0], atol=1e-14)


def test_site_trajectory_fidelity_matches_series(make_ensemble):
    config = make_ensemble(M=3, N=10)
    grid = time_grid(math.pi, 41)
    trajectory = site_trajectory(config, initial_coefficients(config, 1.0), grid)
    np.testing.assert_allclose(
        trajectory.transfer_fidelity(config.chain), open_fidelity_series(config, grid).values, atol=1e-12
    )


def test_initial_shape_checked(make_ensemble):
    with pytest.raises(ValidationError):
        site_amplitudes(make_ensemble(M=3, N=2), EigenAmplitudes(C=np.zeros((1, 3))), 0.5)


def test_reservoir_must_be_resonant():
    with pytest.raises(ValueError):
        EnsembleConfig(chain=ChainSpec(M=2, omega0=1.0), reservoir=ReservoirSpec(omega_c=2.0))
    config = EnsembleConfig(chain=ChainSpec(M=2, omega0=1.0), reservoir=ReservoirSpec(omega_c=1.0))
    assert config.center == 1.0


def test_density_matrix_at_start(make_ensemble):
    config = make_ensemble(M=3, N=2)
    rho = reduced_density_matrix(config, initial_coefficients(config, 1.0), 0.0)
    np.testing.assert_allclose(rho.rho, [[0, 0], [0, 1]], atol=1e-14)


def test_density_matrix_after_perfect_transfer(make_ensemble):
    config = make_ensemble(M=2, N=1, gamma0=0.0)
    xi_vac, xi_exc = bloch_state(math.pi / 2)
    rho = reduced_density_matrix(config, initial_coefficients(config, xi_exc, vacuum=xi_vac), math.pi / 2)
    assert rho.rho[0, 0].real == pytest.approx(0.5, abs=1e-12)
    assert abs(rho.rho[0, 1]) == pytest.approx(0.5, abs=1e-12)
    assert np.trace(rho.rho).real == pytest.approx(1.0, abs=1e-14)


def test_density_matrix_needs_site_zero_excitation(make_ensemble, random_state):
    config = make_ensemble(M=3, N=1)
    with pytest.raises(ValidationError):
        reduced_density_matrix(config, EigenAmplitudes(C=random_state(1, 3)), 0.5)


@pytest.mark.parametrize(
    "rho",
    [
        np.array([[0.5, 0.1], [0.2, 0.5]]),
        np.array([[0.5, 0.0], [0.0, 0.6]]),
        np.array([[1.2, 0.0], [0.0, -0.2]]),
        np.eye(3) / 3,
    ],
)
def test_invalid_density_matrix_rejected(rho):
    with pytest.raises(ValidationError):
        QubitDensityMatrix(rho=rho)


def test_state_fidelity_cases():
    excited = QubitDensityMatrix(rho=np.array([[1.0, 0.0], [0.0, 0.0]]))
    assert state_fidelity([1.0, 0.0], excited) == pytest.approx(1.0)
    assert state_fidelity([0.0, 1.0], excited) == pytest.approx(0.0)
    plus = np.array([1.0, 1.0]) / math.sqrt(2)
    assert state_fidelity(plus, QubitDensityMatrix(rho=np.outer(plus, plus))) == pytest.approx(1.0)
    assert state_fidelity(plus, excited) == pytest.approx(1 / math.sqrt(2))
    with pytest.raises(ValidationError):
        state_fidelity([1.0, 1.0], excited)


@pytest.mark.parametrize("theta,phi", [(0.3, 0.0), (math.pi / 2, 1.1), (2.5, -0.4), (math.pi, 0.0)])
def test_transfer_state_fidelity_closed_form(make_ensemble, theta, phi):
    config = make_ensemble(M=3, N=5)
    xi_vac, xi_exc = bloch_state(theta, phi)
    for t in (0.4, math.pi / 2, 2.9):
        x = chi(config, 2, t) * xi_exc
        squared = abs(xi_vac) ** 2 * (
            1 - 2 * abs(x) ** 2 + x * np.conj(xi_exc) + np.conj(x) * xi_exc
        ) + abs(x) ** 2
        expected = math.sqrt(min(1.0, max(0.0, squared.real)))
        assert transfer_state_fidelity(config, xi_vac, xi_exc, t) == pytest.approx(expected, abs=1e-12)


def test_excited_input_state_fidelity_is_transfer_fidelity(make_ensemble):
    config = make_ensemble(M=4, N=8)
    xi_vac, xi_exc = bloch_state(math.pi)
    for t in (0.5, 1.5, 3.0):
        assert transfer_state_fidelity(config, xi_vac, xi_exc, t) == pytest.approx(abs(chi(config, 3, t)), abs=1e-12)


def test_unprotected_transfer_settles_at_half(make_ensemble):
    series = open_fidelity_series(make_ensemble(M=2, N=1), np.array([0.0, 20.0]))
    assert series.values[0] == pytest.approx(0.0, abs=1e-14)
    assert series.values[1] == pytest.approx(0.5, abs=1e-3)


def test_decoupled_series_equals_closed_series(make_ensemble):
    config = make_ensemble(M=5, N=3, gamma0=0.0)
    grid = time_grid(2 * math.pi, 101)
    np.testing.assert_allclose(
        open_fidelity_series(config, grid).values, closed_fidelity_series(config.chain, grid).values, atol=1e-12
    )


def test_fidelity_grows_with_number_of_chains(make_ensemble):
    t = math.pi / 2
    values = [open_fidelity_series(make_ensemble(M=2, N=N), [t]).values[0] for N in (1, 2, 5, 10, 25, 50)]
    assert all(b >= a for a, b in zip(values, values[1:])), values
    assert values[0] == pytest.approx(0.73, abs=0.02)
    assert values[-1] > 0.985


def test_infidelity_scales_inversely_with_chains(make_ensemble):
    t = math.pi / 2
    F25 = open_fidelity_series(make_ensemble(M=2, N=25), [t]).values[0]
    F50 = open_fidelity_series(make_ensemble(M=2, N=50), [t]).values[0]
    ratio = (1 - F25) / (1 - F50)
    assert 1.6 <= ratio <= 2.4, f"infidelity ratio {ratio:.4f}"


@pytest.mark.parametrize("N", [1, 50])
def test_longer_chain_peaks_higher(make_ensemble, N):
    grid = time_grid(math.pi, 2001)
    _, peak2 = first_peak(open_fidelity_series(make_ensemble(M=2, N=N), grid))
    _, peak4 = first_peak(open_fidelity_series(make_ensemble(M=4, N=N), grid))
    assert peak4 > peak2, f"N={N}: M=4 peak {peak4:.6f} vs M=2 peak {peak2:.6f}"


def test_basis_used_for_initial_state_is_the_chain_basis(make_ensemble):
    config = make_ensemble(M=7, N=1)
    np.testing.assert_array_equal(initial_coefficients(config, 1.0).C[0], orthonormal_basis(config.chain).U[0])
