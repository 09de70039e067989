"""
Exact dynamics of N identical chains in a common Lorentzian reservoir.

Every chain couples to the reservoir only through its bright eigenstate
|Phi_0^i>. In the frame rotating with the chain energies the bright
amplitudes obey

    dC~_0^i/dt = -int_0^t f(t - t') S(t') dt',   S = sum_i C~_0^i,

with f(tau) = (gamma0 lambda / 2) exp(-(lambda - i E_0) tau). The symmetric
combination S/N decays with the survival function G(t); inter-chain
differences and every l >= 1 amplitude are conserved.
"""
import cmath
import logging
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from qst.errors import ValidationError
from qst.physics.chain_dynamics import FidelitySeries, validate_grid
from qst.physics.krawtchouk_core import (
    ChainSpec,
    eigen_to_site,
    krawtchouk_poly,
    norm_d,
    orthonormal_basis,
    weight,
)

logger = logging.getLogger(__name__)

NORM_SLACK = 1e-9
D_ZERO = 1e-12


class ReservoirSpec(BaseModel):
    """Lorentzian reservoir J(w) = gamma0 lambda / (2 pi ((w - w_c)^2 + lambda^2))."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    # gamma0 = 0 is the decoupled limit
    gamma0: float = Field(default=1.0, ge=0.0, allow_inf_nan=False)
    lam: float = Field(default=50.0, gt=0.0, allow_inf_nan=False, alias="lambda")
    # None: resonant with the chain transition frequency
    omega_c: Optional[float] = None


class EnsembleConfig(BaseModel):
    """N identical chains sharing one reservoir; chain 1 carries the transfer."""

    model_config = ConfigDict(frozen=True)

    chain: ChainSpec
    reservoir: ReservoirSpec = ReservoirSpec()
    N: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _resonant_reservoir(self):
        omega_c = self.reservoir.omega_c
        if omega_c is not None and abs(omega_c - self.chain.omega0) > 1e-12:
            raise ValueError("reservoir omega_c must equal the chain omega0")
        return self

    @property
    def center(self) -> float:
        if self.reservoir.omega_c is None:
            return self.chain.omega0
        return self.reservoir.omega_c

    @property
    def E0(self) -> float:
        return float(self.chain.M - 1)


@dataclass(frozen=True)
class EigenAmplitudes:
    """Eigenbasis amplitudes C[i, l] of every chain plus the vacuum amplitude."""

    C: np.ndarray
    vacuum: complex = 0.0

    def __post_init__(self):
        if np.ndim(self.C) != 2:
            raise ValidationError(f"C must be indexed (chain, level), got shape {np.shape(self.C)}")
        if self.norm > 1.0 + NORM_SLACK:
            raise ValidationError(f"system norm {self.norm:.12f} exceeds 1")

    @property
    def norm(self) -> float:
        return float(abs(self.vacuum) ** 2 + np.sum(np.abs(self.C) ** 2))


@dataclass(frozen=True)
class QubitDensityMatrix:
    """Reduced state of the last qubit of chain 1 in the ordered basis (|1>, |0>)."""

    rho: np.ndarray
    tolerance: float = field(default=1e-12, repr=False)

    def __post_init__(self):
        rho = self.rho
        if rho.shape != (2, 2):
            raise ValidationError(f"density matrix must be 2x2, got {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T)) > self.tolerance:
            raise ValidationError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1.0) > self.tolerance:
            raise ValidationError(f"density matrix trace {np.trace(rho).real:.15f} != 1")
        if np.min(np.linalg.eigvalsh(rho)) < -self.tolerance:
            raise ValidationError("density matrix has a negative eigenvalue")


@dataclass(frozen=True)
class AmplitudeTrajectory:
    """
    Amplitudes on a time grid, indexed (time, chain, level-or-site).

    basis is "eigen" for C_l^i(t) or "site" for xi_j^i(t). Trajectories from
    the discretized reservoir also carry the reservoir population and whether
    the horizon exceeds the mode recurrence time.
    """

    times: np.ndarray
    amplitudes: np.ndarray
    basis: Literal["eigen", "site"] = "eigen"
    vacuum: complex = 0.0
    reservoir_population: Optional[np.ndarray] = None
    beyond_recurrence: bool = False

    def system_norm(self) -> np.ndarray:
        return abs(self.vacuum) ** 2 + np.sum(np.abs(self.amplitudes) ** 2, axis=(1, 2))

    def total_norm(self) -> np.ndarray:
        norm = self.system_norm()
        if self.reservoir_population is not None:
            norm = norm + self.reservoir_population
        return norm

    def to_site(self, spec: ChainSpec) -> "AmplitudeTrajectory":
        if self.basis == "site":
            return self
        basis = orthonormal_basis(spec)
        return AmplitudeTrajectory(
            times=self.times,
            amplitudes=eigen_to_site(basis, self.amplitudes),
            basis="site",
            vacuum=self.vacuum,
            reservoir_population=self.reservoir_population,
            beyond_recurrence=self.beyond_recurrence,
        )

    def transfer_fidelity(self, spec: ChainSpec) -> np.ndarray:
        """|xi_{M-1}^{1}(t)|, the fidelity of chain 1 for the standard initial state."""
        return np.abs(self.to_site(spec).amplitudes[:, 0, -1])


def _times(t) -> np.ndarray:
    times = np.asarray(t, dtype=float)
    if np.any(times < 0):
        raise ValidationError("time must be ≥ 0")
    return times


def _decay_rate(config: EnsembleConfig) -> complex:
    """mu = lambda - i E_0."""
    return complex(config.reservoir.lam, -config.E0)


def d_factor(config: EnsembleConfig) -> complex:
    """D = sqrt((lambda - i E_0)^2 - 2 gamma0 lambda N), principal branch."""
    mu = _decay_rate(config)
    res = config.reservoir
    return cmath.sqrt(mu * mu - 2.0 * res.gamma0 * res.lam * config.N)


def _survival(mu: complex, D: complex, times: np.ndarray) -> np.ndarray:
    if abs(D) < D_ZERO:
        return np.exp(-mu * times / 2) * (1 + mu * times / 2)
    # cosh/sinh split into the two exponentials; both have Re <= 0
    ratio = mu / D
    return 0.5 * (1 + ratio) * np.exp((D - mu) * times / 2) + 0.5 * (1 - ratio) * np.exp(
        -(D + mu) * times / 2
    )


def survival_g(config: EnsembleConfig, t):
    """
    G(t) = exp(-mu t/2) [cosh(D t/2) + (mu/D) sinh(D t/2)], G(0) = 1.

    Amplitude of the symmetric bright combination relative to its initial
    value. Falls back to the D -> 0 limit when |D| < 1e-12.
    """
    times = _times(t)
    G = _survival(_decay_rate(config), d_factor(config), times)
    if np.ndim(G) == 0:
        return complex(G)
    return G


def _check_init(config: EnsembleConfig, init: EigenAmplitudes) -> np.ndarray:
    C = np.asarray(init.C, dtype=complex)
    if C.shape != (config.N, config.chain.M):
        raise ValidationError(
            f"initial amplitudes have shape {C.shape}, expected ({config.N}, {config.chain.M})"
        )
    return C


def bright_amplitudes(config: EnsembleConfig, init: EigenAmplitudes, t):
    """
    Rotating-frame bright amplitudes C~_0^i(t).

    C~_0^i(t) = [C~_0^i(0) - S(0)/N] + (S(0)/N) G(t), S = sum_i C~_0^i. Shape
    (N,) for a scalar time, (T, N) for an array of times.
    """
    C0 = _check_init(config, init)[:, 0]
    mean = C0.sum() / config.N
    G = np.asarray(survival_g(config, t))
    return (C0 - mean) + mean * G[..., np.newaxis]


def evolve_eigen(config: EnsembleConfig, init: EigenAmplitudes, t) -> np.ndarray:
    """
    Lab-frame eigen amplitudes C_l^i(t), shape (N, M) or (T, N, M).

    Bright levels follow bright_amplitudes, every l >= 1 level only picks up
    its phase exp(-i (omega0 + E_l) t).
    """
    C = _check_init(config, init)
    times = _times(t)
    basis = orthonormal_basis(config.chain)
    phases = np.exp(-1j * np.multiply.outer(times, config.chain.omega0 + basis.energies))
    rotating = np.broadcast_to(C, times.shape + C.shape).copy()
    rotating[..., 0] = bright_amplitudes(config, init, times)
    return rotating * phases[..., np.newaxis, :]


def site_amplitudes(config: EnsembleConfig, init: EigenAmplitudes, t) -> np.ndarray:
    """Site amplitudes xi_j^i(t) = sum_l U[j, l] C_l^i(t); shape (N, M) or (T, N, M)."""
    return eigen_to_site(orthonormal_basis(config.chain), evolve_eigen(config, init, t))


def eigen_trajectory(config: EnsembleConfig, init: EigenAmplitudes, grid) -> AmplitudeTrajectory:
    times = validate_grid(grid)
    return AmplitudeTrajectory(
        times=times, amplitudes=evolve_eigen(config, init, times), basis="eigen", vacuum=init.vacuum
    )


def site_trajectory(config: EnsembleConfig, init: EigenAmplitudes, grid) -> AmplitudeTrajectory:
    return eigen_trajectory(config, init, grid).to_site(config.chain)


def initial_coefficients(
    config: EnsembleConfig, xi0: complex, vacuum: Optional[complex] = None
) -> EigenAmplitudes:
    """
    Eigen amplitudes of amplitude xi0 on site 0 of chain 1.

    C_l^1(0) = sqrt(w(0)/d_l) K_l(0) xi0 = U[0, l] xi0; other chains empty. The
    vacuum amplitude defaults to sqrt(1 - |xi0|^2).
    """
    if abs(xi0) > 1.0 + NORM_SLACK:
        raise ValidationError(f"|xi0| = {abs(xi0):.12f} exceeds 1")
    if vacuum is None:
        vacuum = np.sqrt(max(0.0, 1.0 - abs(xi0) ** 2))
    C = np.zeros((config.N, config.chain.M), dtype=complex)
    C[0] = orthonormal_basis(config.chain).U[0] * xi0
    return EigenAmplitudes(C=C, vacuum=complex(vacuum))


def chi(config: EnsembleConfig, j: int, t):
    """
    Propagator from site 0 to site j of chain 1, evaluated term by term:

        chi_j = w(0)/sqrt(d_0 d_j) e^{-i(w0+E_0)t} [(N-1)/N + G(t)/N]
              + sum_{l>=1} sqrt(w(0) w(l) / (d_l d_j)) K_l(j) e^{-i(w0+E_l)t}
    """
    spec = config.chain
    M, p = spec.M, spec.p
    times = _times(t)
    E = orthonormal_basis(spec).energies
    N = config.N

    w0, dj = weight(0, M, p), norm_d(j, M, p)
    bright = (N - 1) / N + np.asarray(survival_g(config, times)) / N
    value = w0 / np.sqrt(norm_d(0, M, p) * dj) * np.exp(-1j * (spec.omega0 + E[0]) * times) * bright
    for l in range(1, M):
        amplitude = np.sqrt(w0 * weight(l, M, p) / (norm_d(l, M, p) * dj)) * krawtchouk_poly(l, j, M, p)
        value = value + amplitude * np.exp(-1j * (spec.omega0 + E[l]) * times)
    if np.ndim(value) == 0:
        return complex(value)
    return value


def relaxed_chi(config: EnsembleConfig, j: int, t):
    """chi_j(t) once the reservoir has relaxed (G -> 0): the bright part keeps (N-1)/N."""
    spec = config.chain
    basis = orthonormal_basis(spec)
    times = _times(t)
    terms = basis.U[j] * basis.U[0]
    terms = terms * np.where(np.arange(spec.M) == 0, (config.N - 1) / config.N, 1.0)
    value = np.exp(-1j * np.multiply.outer(times, spec.omega0 + basis.energies)) @ terms
    if np.ndim(value) == 0:
        return complex(value)
    return value


def _check_single_site_excitation(config: EnsembleConfig, init: EigenAmplitudes) -> complex:
    """xi_0^1(0) of an initial state xi(0)|0> + xi_0|1_{1,0}>; rejects anything else."""
    xi = eigen_to_site(orthonormal_basis(config.chain), _check_init(config, init))
    xi0 = complex(xi[0, 0])
    rest = xi.copy()
    rest[0, 0] = 0.0
    if np.max(np.abs(rest)) > 1e-12:
        raise ValidationError("initial state must excite only site 0 of chain 1")
    if abs(abs(init.vacuum) ** 2 + abs(xi0) ** 2 - 1.0) > NORM_SLACK:
        raise ValidationError("initial state must satisfy |xi(0)|^2 + |xi_0|^2 = 1")
    return xi0


def reduced_density_matrix(config: EnsembleConfig, init: EigenAmplitudes, t: float) -> QubitDensityMatrix:
    """
    Reduced state of the last qubit of chain 1:

        rho = [[|x|^2, x xi(0)*], [x* xi(0), 1 - |x|^2]],  x = xi_{M-1}^1(t)
    """
    _check_single_site_excitation(config, init)
    x = complex(site_amplitudes(config, init, t)[0, -1])
    vac = complex(init.vacuum)
    pop = abs(x) ** 2
    rho = np.array([[pop, x * vac.conjugate()], [x.conjugate() * vac, 1.0 - pop]], dtype=complex)
    return QubitDensityMatrix(rho=rho)


def state_fidelity(psi, rho: QubitDensityMatrix) -> float:
    """F = sqrt(<psi|rho|psi>) for psi given in the (|1>, |0>) ordering of rho."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.shape != (2,):
        raise ValidationError("psi must have two amplitudes")
    if abs(np.vdot(psi, psi).real - 1.0) > NORM_SLACK:
        raise ValidationError("psi is not normalized")
    overlap = np.vdot(psi, rho.rho @ psi).real
    return float(np.sqrt(min(1.0, max(0.0, overlap))))


def bloch_state(theta: float, phi: float = 0.0) -> tuple[complex, complex]:
    """(xi_vacuum, xi_excited) = (cos(theta/2), e^{i phi} sin(theta/2))."""
    return complex(np.cos(theta / 2)), complex(np.exp(1j * phi) * np.sin(theta / 2))


def transfer_state_fidelity(config: EnsembleConfig, xi_vac: complex, xi_exc: complex, t: float) -> float:
    """Fidelity of transferring xi_vac|0> + xi_exc|1> from site 0 to site M-1 of chain 1."""
    init = initial_coefficients(config, xi_exc, vacuum=xi_vac)
    rho = reduced_density_matrix(config, init, t)
    return state_fidelity([xi_exc, xi_vac], rho)


def open_fidelity_series(config: EnsembleConfig, grid) -> FidelitySeries:
    """|chi_{M-1}^1(t)| on the grid."""
    times = validate_grid(grid)
    amplitudes = chi(config, config.chain.M - 1, times)
    logger.debug("[Open] M=%d, N=%d, %d points", config.chain.M, config.N, times.size)
    return FidelitySeries(times=times, values=np.abs(amplitudes), amplitudes=amplitudes)
