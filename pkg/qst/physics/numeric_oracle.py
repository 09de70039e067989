"""
Independent numerical integration of the open-chain dynamics.

Two integrators check the closed-form results of open_dynamics:

- integrate_memory_kernel: the Volterra equation for the bright amplitudes
  with an exponential kernel A exp(-mu tau), made local by one auxiliary
  amplitude B(t) = int_0^t exp(-mu (t - t')) S(t') dt'.
- integrate_mode_discretized: the full Schroedinger equation of the chains
  plus K reservoir modes sampled from the Lorentzian spectral density.

Both use fixed-step classical RK4.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from qst.errors import DomainError, ValidationError
from qst.physics.krawtchouk_core import orthonormal_basis
from qst.physics.open_dynamics import AmplitudeTrajectory, EigenAmplitudes, EnsembleConfig

logger = logging.getLogger(__name__)

KernelVariant = Literal["collective", "residue", "lorentzian"]

RESOLUTION_FACTOR = 20
# largest RK4 phase dt * |Delta_k| a reservoir mode may turn per step
MAX_MODE_PHASE = 0.5


class IntegratorSettings(BaseModel):
    """
    Fixed-step RK4 settings.

    dt is the largest step allowed; the step actually taken is shrunk so that
    num_points samples fall exactly on the step grid over [0, t_max].
    """

    model_config = ConfigDict(frozen=True)

    dt: float = Field(gt=0.0, allow_inf_nan=False)
    t_max: float = Field(gt=0.0, allow_inf_nan=False)
    num_points: int = Field(default=101, ge=2)
    scheme: Literal["rk4"] = "rk4"

    def step_plan(self) -> tuple[int, int, float]:
        """(number of steps, steps between samples, step size)."""
        intervals = self.num_points - 1
        stride = max(1, math.ceil(self.t_max / (self.dt * intervals) - 1e-9))
        n_steps = stride * intervals
        return n_steps, stride, self.t_max / n_steps

    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.num_points)


@dataclass(frozen=True)
class DiscretizedReservoir:
    """K reservoir modes on a uniform grid with |g_k|^2 = J(w_k) dw."""

    frequencies: np.ndarray
    couplings: np.ndarray
    spacing: float

    @property
    def K(self) -> int:
        return self.frequencies.size

    @property
    def recurrence_time(self) -> float:
        return 2.0 * math.pi / self.spacing


def lorentzian_density(config: EnsembleConfig, omega) -> np.ndarray:
    """J(w) = gamma0 lambda / (2 pi ((w - w0)^2 + lambda^2))."""
    res = config.reservoir
    return res.gamma0 * res.lam / (2.0 * math.pi * ((np.asarray(omega) - config.center) ** 2 + res.lam**2))


def discretize_reservoir(
    config: EnsembleConfig, modes: int = 4000, window: Optional[float] = None
) -> DiscretizedReservoir:
    """
    Midpoint sampling of J on [w0 - W, w0 + W]; W defaults to 40 lambda.
    """
    lam = config.reservoir.lam
    window = 40.0 * lam if window is None else window
    if modes < 1 or window <= 0:
        raise ValidationError("reservoir needs modes ≥ 1 and window > 0")
    if modes < 1000 or window < 20.0 * lam:
        logger.warning(
            "[Oracle] coarse reservoir (K=%d, W=%.3g lambda); expect discretization error",
            modes,
            window / lam,
        )
    spacing = 2.0 * window / modes
    frequencies = config.center - window + (np.arange(modes) + 0.5) * spacing
    couplings = np.sqrt(lorentzian_density(config, frequencies) * spacing)
    return DiscretizedReservoir(frequencies=frequencies, couplings=couplings, spacing=spacing)


def kernel_parameters(config: EnsembleConfig, variant: KernelVariant = "collective") -> tuple[float, complex]:
    """
    (A, mu) of the exponential kernel A exp(-mu tau).

    collective  (gamma0 lambda / 2, lambda - i E_0), the kernel behind D
    residue     (gamma0 / 2, lambda + i E_0), literal sign of the correlation integral
    lorentzian  (gamma0 / 2, lambda - i E_0), what the discretized reservoir converges to
    """
    res = config.reservoir
    E0 = config.E0
    if variant == "collective":
        return res.gamma0 * res.lam / 2.0, complex(res.lam, -E0)
    if variant == "residue":
        return res.gamma0 / 2.0, complex(res.lam, E0)
    if variant == "lorentzian":
        return res.gamma0 / 2.0, complex(res.lam, -E0)
    raise ValidationError(f"unknown kernel variant {variant!r}")


def kernel(tau, config: EnsembleConfig, variant: KernelVariant = "collective"):
    """Memory kernel f(tau) of the bright amplitudes."""
    lags = np.asarray(tau, dtype=float)
    if np.any(lags < 0):
        raise DomainError("kernel lag must be ≥ 0")
    A, mu = kernel_parameters(config, variant)
    value = A * np.exp(-mu * lags)
    if np.ndim(value) == 0:
        return complex(value)
    return value


def rk4_step(f: Callable[[float, np.ndarray], np.ndarray], t: float, y: np.ndarray, dt: float) -> np.ndarray:
    """One classical RK4 step of dy/dt = f(t, y)."""
    k1 = f(t, y)
    k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_propagator(generator: np.ndarray, dt: float) -> np.ndarray:
    """One RK4 step of the linear system dy/dt = generator @ y, as a matrix."""
    identity = np.eye(generator.shape[0], dtype=complex)
    return rk4_step(lambda _, Y: generator @ Y, 0.0, identity, dt)


def check_resolution(config: EnsembleConfig, settings: IntegratorSettings) -> float:
    """Step size actually used; must resolve lambda, the chain gap and the collective rate."""
    _, _, dt = settings.step_plan()
    scales = [1.0 / config.reservoir.lam, 1.0 / max(config.chain.M - 1, 1)]
    if config.reservoir.gamma0 > 0:
        scales.append(1.0 / (config.reservoir.gamma0 * config.N))
    limit = min(scales) / RESOLUTION_FACTOR
    if dt > limit * (1 + 1e-12):
        raise ValidationError(f"dt={dt:.3g} does not resolve the dynamics (need dt ≤ {limit:.3g})")
    return dt


def mode_detunings(config: EnsembleConfig, reservoir: DiscretizedReservoir) -> np.ndarray:
    """Delta_k = w0 + E_0 - w_k of every reservoir mode."""
    return config.chain.omega0 + config.E0 - reservoir.frequencies


def check_mode_resolution(config: EnsembleConfig, reservoir: DiscretizedReservoir, dt: float) -> None:
    """The fastest reservoir mode must turn at most MAX_MODE_PHASE per step."""
    fastest = float(np.max(np.abs(mode_detunings(config, reservoir))))
    if dt * fastest > MAX_MODE_PHASE * (1 + 1e-12):
        raise ValidationError(
            f"dt={dt:.3g} does not resolve reservoir detunings up to {fastest:.4g} "
            f"(need dt ≤ {MAX_MODE_PHASE / fastest:.3g})"
        )


def _initial_matrix(config: EnsembleConfig, init: EigenAmplitudes) -> np.ndarray:
    C = np.asarray(init.C, dtype=complex)
    if C.shape != (config.N, config.chain.M):
        raise ValidationError(
            f"initial amplitudes have shape {C.shape}, expected ({config.N}, {config.chain.M})"
        )
    return C


def _lab_frame(config: EnsembleConfig, C0: np.ndarray, bright: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Undo the rotating frame: dark levels keep C_l(0), bright levels take the integrated values."""
    E = orthonormal_basis(config.chain).energies
    rotating = np.broadcast_to(C0, times.shape + C0.shape).copy()
    rotating[..., 0] = bright
    phases = np.exp(-1j * np.multiply.outer(times, config.chain.omega0 + E))
    return rotating * phases[:, np.newaxis, :]


def integrate_memory_kernel(
    config: EnsembleConfig,
    init: EigenAmplitudes,
    settings: IntegratorSettings,
    variant: KernelVariant = "collective",
) -> AmplitudeTrajectory:
    """
    RK4 integration of the bright-amplitude memory equation.

    State y = (C~_0^1 .. C~_0^N, B) with dC~_0^i/dt = -A B and
    dB/dt = -mu B + sum_i C~_0^i. Returns lab-frame eigen amplitudes.
    """
    C0 = _initial_matrix(config, init)
    dt = check_resolution(config, settings)
    n_steps, stride, _ = settings.step_plan()
    A, mu = kernel_parameters(config, variant)
    N = config.N

    generator = np.zeros((N + 1, N + 1), dtype=complex)
    generator[:N, N] = -A
    generator[N, :N] = 1.0
    generator[N, N] = -mu
    propagator = rk4_propagator(generator, dt)

    y = np.concatenate([C0[:, 0], [0.0]]).astype(complex)
    bright = np.empty((settings.num_points, N), dtype=complex)
    bright[0] = y[:N]
    logger.info("[Oracle] memory kernel (%s): %d steps of %.3g", variant, n_steps, dt)
    for step in range(1, n_steps + 1):
        y = propagator @ y
        if step % stride == 0:
            bright[step // stride] = y[:N]

    times = settings.grid()
    return AmplitudeTrajectory(
        times=times, amplitudes=_lab_frame(config, C0, bright, times), basis="eigen", vacuum=init.vacuum
    )


def integrate_mode_discretized(
    config: EnsembleConfig,
    reservoir: DiscretizedReservoir,
    init: EigenAmplitudes,
    settings: IntegratorSettings,
) -> AmplitudeTrajectory:
    """
    RK4 integration of the chains coupled to K explicit reservoir modes.

    Integrated in the frame rotating at w0 + E_0 for chains and modes alike,
    where the system is linear with constant coefficients:

        dC~_0^i/dt = -i sum_k g_k b~_k
        db~_k/dt   = i Delta_k b~_k - i g_k* sum_i C~_0^i,   Delta_k = w0 + E_0 - w_k

    The reservoir starts empty. Returns lab-frame eigen amplitudes with the
    reservoir population attached.
    """
    C0 = _initial_matrix(config, init)
    dt = check_resolution(config, settings)
    check_mode_resolution(config, reservoir, dt)
    n_steps, stride, _ = settings.step_plan()
    N = config.N

    detuning = mode_detunings(config, reservoir)
    g = np.asarray(reservoir.couplings, dtype=complex)

    def rhs(_: float, y: np.ndarray) -> np.ndarray:
        modes = y[N:]
        dy = np.empty_like(y)
        dy[:N] = -1j * np.dot(g, modes)
        dy[N:] = 1j * detuning * modes - 1j * np.conj(g) * y[:N].sum()
        return dy

    y = np.concatenate([C0[:, 0], np.zeros(reservoir.K)]).astype(complex)
    bright = np.empty((settings.num_points, N), dtype=complex)
    population = np.zeros(settings.num_points)
    bright[0] = y[:N]

    beyond = settings.t_max > reservoir.recurrence_time
    if beyond:
        logger.warning(
            "[Oracle] horizon %.3g exceeds the mode recurrence time %.3g",
            settings.t_max,
            reservoir.recurrence_time,
        )
    logger.info("[Oracle] %d modes: %d steps of %.3g", reservoir.K, n_steps, dt)

    for step in range(1, n_steps + 1):
        y = rk4_step(rhs, (step - 1) * dt, y, dt)
        if step % stride == 0:
            bright[step // stride] = y[:N]
            population[step // stride] = float(np.sum(np.abs(y[N:]) ** 2))

    times = settings.grid()
    return AmplitudeTrajectory(
        times=times,
        amplitudes=_lab_frame(config, C0, bright, times),
        basis="eigen",
        vacuum=init.vacuum,
        reservoir_population=population,
        beyond_recurrence=beyond,
    )


def compare(a: AmplitudeTrajectory, b: AmplitudeTrajectory) -> float:
    """Largest |a - b| over the grid and all components."""
    if a.times.shape != b.times.shape or np.max(np.abs(a.times - b.times), initial=0.0) > 1e-12:
        raise ValidationError("trajectories are on different time grids")
    if a.basis != b.basis:
        raise ValidationError(f"trajectories are in different bases ({a.basis} vs {b.basis})")
    if a.amplitudes.shape != b.amplitudes.shape:
        raise ValidationError(f"trajectory shapes differ: {a.amplitudes.shape} vs {b.amplitudes.shape}")
    return float(np.max(np.abs(a.amplitudes - b.amplitudes)))
