"""
Closed-chain evolution in the single-excitation sector.

Evolution is spectral: amplitudes are rotated into the Krawtchouk eigenbasis,
multiplied by exp(-i (omega0 + E_l) t) and rotated back. Times are in units of
1/gamma0.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from qst.errors import ValidationError
from qst.physics.krawtchouk_core import ChainSpec, eigen_to_site, orthonormal_basis, site_to_eigen

logger = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class SiteState:
    """Single-excitation amplitudes on the sites plus the vacuum amplitude."""

    amplitudes: np.ndarray
    vacuum: complex = 0.0

    @property
    def norm(self) -> float:
        return float(abs(self.vacuum) ** 2 + np.sum(np.abs(self.amplitudes) ** 2))


@dataclass(frozen=True)
class FidelitySeries:
    """Transfer fidelity |f(t)| sampled on a time grid."""

    times: np.ndarray
    values: np.ndarray
    amplitudes: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.times.shape != self.values.shape:
            raise ValidationError(
                f"times {self.times.shape} and values {self.values.shape} differ in shape"
            )


def site_state_from_excitation(M: int, site: int = 0, amplitude: complex = 1.0) -> SiteState:
    """State with the excitation amplitude on one site and the rest in the vacuum."""
    if not 0 <= site < M:
        raise ValidationError(f"site={site} outside 0..{M - 1}")
    amplitudes = np.zeros(M, dtype=complex)
    amplitudes[site] = amplitude
    return SiteState(amplitudes=amplitudes, vacuum=np.sqrt(max(0.0, 1.0 - abs(amplitude) ** 2)))


def validate_grid(grid) -> np.ndarray:
    """Return the grid as a float array; must be non-empty and nondecreasing."""
    times = np.asarray(grid, dtype=float).reshape(-1)
    if times.size == 0:
        raise ValidationError("time grid is empty")
    if not np.all(np.isfinite(times)):
        raise ValidationError("time grid contains non-finite values")
    if np.any(np.diff(times) < 0):
        raise ValidationError("time grid must be monotone nondecreasing")
    return times


def time_grid(t_max: float, num_points: int) -> np.ndarray:
    """Uniform grid on [0, t_max] with num_points samples."""
    if num_points < 2:
        raise ValidationError("num_points must be ≥ 2")
    if t_max <= 0:
        raise ValidationError("t_max must be > 0")
    return np.linspace(0.0, t_max, num_points)


def _eigenphases(spec: ChainSpec, t) -> np.ndarray:
    basis = orthonormal_basis(spec)
    return np.exp(-1j * np.multiply.outer(np.asarray(t, dtype=float), spec.omega0 + basis.energies))


def transfer_amplitude(spec: ChainSpec, t):
    """
    End-to-end amplitude f_{0,M-1}(t) = <M-1| exp(-iHt) |0>.

    Includes the global phase exp(-i omega0 t). Accepts a scalar time or an
    array of times.
    """
    U = orthonormal_basis(spec).U
    amplitude = _eigenphases(spec, t) @ (U[0] * U[-1])
    if np.ndim(amplitude) == 0:
        return complex(amplitude)
    return amplitude


def evolve_closed(spec: ChainSpec, state: SiteState, t: float) -> SiteState:
    """Evolve a normalized single-excitation state under the isolated chain."""
    amplitudes = np.asarray(state.amplitudes, dtype=complex)
    if amplitudes.shape != (spec.M,):
        raise ValidationError(f"state has {amplitudes.shape[0]} sites, chain has {spec.M}")
    if abs(state.norm - 1.0) > NORM_TOLERANCE:
        raise ValidationError(f"state is not normalized (norm {state.norm:.9f})")

    basis = orthonormal_basis(spec)
    C = site_to_eigen(basis, amplitudes) * _eigenphases(spec, t)
    return SiteState(amplitudes=eigen_to_site(basis, C), vacuum=state.vacuum)


def closed_fidelity_series(spec: ChainSpec, grid) -> FidelitySeries:
    """|f_{0,M-1}(t)| on the grid; equals |sin t|^(M-1) for the Krawtchouk chain."""
    times = validate_grid(grid)
    amplitudes = transfer_amplitude(spec, times)
    logger.debug("[Closed] M=%d, %d points", spec.M, times.size)
    return FidelitySeries(times=times, values=np.abs(amplitudes), amplitudes=amplitudes)


def first_peak(series: FidelitySeries) -> tuple[float, float]:
    """
    (time, value) of the first interior local maximum of the series.

    Plateaus count at their first sample. Falls back to the global maximum
    when the series has no interior maximum.
    """
    values = np.asarray(series.values)
    for k in range(1, values.size - 1):
        if values[k] > values[k - 1] and values[k] >= values[k + 1]:
            return float(series.times[k]), float(values[k])
    k = int(np.argmax(values))
    return float(series.times[k]), float(values[k])
