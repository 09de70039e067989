"""Spectral, closed, open and numerical dynamics of Krawtchouk chains."""
from .krawtchouk_core import (
    ChainSpec,
    SpectralBasis,
    krawtchouk_poly,
    krawtchouk_series,
    weight,
    norm_d,
    orthonormal_basis,
    hamiltonian,
    eigen_to_site,
    site_to_eigen,
)
from .chain_dynamics import (
    SiteState,
    FidelitySeries,
    site_state_from_excitation,
    time_grid,
    transfer_amplitude,
    evolve_closed,
    closed_fidelity_series,
    first_peak,
)
from .open_dynamics import (
    ReservoirSpec,
    EnsembleConfig,
    EigenAmplitudes,
    QubitDensityMatrix,
    AmplitudeTrajectory,
    d_factor,
    survival_g,
    bright_amplitudes,
    evolve_eigen,
    site_amplitudes,
    eigen_trajectory,
    site_trajectory,
    initial_coefficients,
    chi,
    relaxed_chi,
    reduced_density_matrix,
    state_fidelity,
    bloch_state,
    transfer_state_fidelity,
    open_fidelity_series,
)
from .numeric_oracle import (
    IntegratorSettings,
    DiscretizedReservoir,
    discretize_reservoir,
    kernel,
    kernel_parameters,
    integrate_memory_kernel,
    integrate_mode_discretized,
    check_mode_resolution,
    compare,
)

__all__ = [
    'ChainSpec',
    'SpectralBasis',
    'krawtchouk_poly',
    'krawtchouk_series',
    'weight',
    'norm_d',
    'orthonormal_basis',
    'hamiltonian',
    'eigen_to_site',
    'site_to_eigen',
    'SiteState',
    'FidelitySeries',
    'site_state_from_excitation',
    'time_grid',
    'transfer_amplitude',
    'evolve_closed',
    'closed_fidelity_series',
    'first_peak',
    'ReservoirSpec',
    'EnsembleConfig',
    'EigenAmplitudes',
    'QubitDensityMatrix',
    'AmplitudeTrajectory',
    'd_factor',
    'survival_g',
    'bright_amplitudes',
    'evolve_eigen',
    'site_amplitudes',
    'eigen_trajectory',
    'site_trajectory',
    'initial_coefficients',
    'chi',
    'relaxed_chi',
    'reduced_density_matrix',
    'state_fidelity',
    'bloch_state',
    'transfer_state_fidelity',
    'open_fidelity_series',
    'IntegratorSettings',
    'DiscretizedReservoir',
    'discretize_reservoir',
    'kernel',
    'kernel_parameters',
    'integrate_memory_kernel',
    'integrate_mode_discretized',
    'check_mode_resolution',
    'compare',
]
