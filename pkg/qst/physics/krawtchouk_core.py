"""
Krawtchouk functions and the spectral basis of the perfect-transfer chain.

The chain Hamiltonian (single-excitation sector) is tridiagonal with on-site
energy omega0 and couplings J_j = sqrt((j+1)(M-j-1)). Its eigenvectors are the
orthonormal Krawtchouk functions

    U[j, l] = K~_l(j) = sqrt(w(j) / d_l) * K_l(j)

with eigenvalues omega0 + E_l, E_l = M - 1 - 2l.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import gammaln

from qst.errors import DomainError

logger = logging.getLogger(__name__)


class ChainSpec(BaseModel):
    """One spin chain: length, transition frequency, Krawtchouk parameter."""

    model_config = ConfigDict(frozen=True)

    M: int = Field(ge=2)
    omega0: float = Field(default=1.0, allow_inf_nan=False)
    p: float = Field(default=0.5, gt=0.0, lt=1.0)


@dataclass(frozen=True)
class SpectralBasis:
    """Eigenvector matrix (columns ordered by l), energies E_l and couplings J_j."""

    U: np.ndarray
    energies: np.ndarray
    couplings: np.ndarray

    @property
    def M(self) -> int:
        return self.U.shape[0]


def _check_index(name: str, value: int, M: int) -> None:
    if not 0 <= value <= M - 1:
        raise DomainError(f"{name}={value} outside 0..{M - 1}")


def log_binomial(n: int, k: int) -> float:
    """log C(n, k) via log-gamma."""
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


def weight(j: int, M: int, p: float = 0.5) -> float:
    """Binomial weight w(j) = C(M-1, j) p^j (1-p)^(M-1-j)."""
    _check_index("j", j, M)
    N = M - 1
    return math.exp(log_binomial(N, j) + j * math.log(p) + (N - j) * math.log1p(-p))


def norm_d(l: int, M: int, p: float = 0.5) -> float:
    """Squared norm d_l = ((1-p)/p)^l / C(M-1, l) of the degree-l polynomial."""
    _check_index("l", l, M)
    N = M - 1
    return math.exp(-log_binomial(N, l) + l * (math.log1p(-p) - math.log(p)))


def energies(M: int) -> np.ndarray:
    """E_l = M - 1 - 2l for l = 0..M-1."""
    return (M - 1 - 2 * np.arange(M)).astype(float)


def couplings(M: int) -> np.ndarray:
    """Perfect-transfer couplings J_j = sqrt((j+1)(M-j-1)) for j = 0..M-2."""
    j = np.arange(M - 1)
    return np.sqrt((j + 1.0) * (M - j - 1.0))


def _orthonormal_row(j: int, M: int, p: float) -> np.ndarray:
    """
    K~_l(j) for l = 0..M-1 by the three-term recurrence in the degree.

    The recurrence is run on the orthonormal functions,

        b_n v_{n+1} = (a_n - j) v_n - b_{n-1} v_{n-1},
        a_n = p(N-n) + n(1-p),  b_n = sqrt(p(1-p)(n+1)(N-n)),

    forward from the closed forms at l = 0, 1 and backward from the closed
    forms at l = N, N-1. The sweeps meet where the local band [a_l - s_l,
    a_l + s_l] covers j most deeply, so each sweep only runs in the
    direction in which the wanted solution grows.
    """
    N = M - 1
    n = np.arange(M)
    a = p * (N - n) + n * (1.0 - p)
    b = np.sqrt(p * (1.0 - p) * (n + 1.0) * (N - n))  # b[N] == 0

    band = b + np.concatenate(([0.0], b[:-1]))
    meet = int(np.argmin(np.abs(j - a) - band))

    log_w = log_binomial(N, j) + j * math.log(p) + (N - j) * math.log1p(-p)
    v = np.zeros(M)

    # forward: v_0 = sqrt(w(j)), v_1 from the recurrence at n = 0
    v[0] = math.exp(0.5 * log_w)
    v[1] = (a[0] - j) * v[0] / b[0]
    for k in range(1, meet):
        v[k + 1] = ((a[k] - j) * v[k] - b[k - 1] * v[k - 1]) / b[k]

    if meet < N:
        # backward: K_N(j) = (-(1-p)/p)^j, d_N = ((1-p)/p)^N
        log_r = math.log1p(-p) - math.log(p)
        back = np.zeros(M)
        back[N] = (-1.0) ** j * math.exp(0.5 * log_w - 0.5 * N * log_r + j * log_r)
        back[N - 1] = (a[N] - j) * back[N] / b[N - 1]
        for k in range(N - 1, meet + 1, -1):
            back[k - 1] = ((a[k] - j) * back[k] - b[k] * back[k + 1]) / b[k - 1]
        v[meet + 1:] = back[meet + 1:]
    return v


@lru_cache(maxsize=64)
def _basis_matrix(M: int, p: float) -> np.ndarray:
    U = np.vstack([_orthonormal_row(j, M, p) for j in range(M)])
    # eigenvector sign convention: U[0, l] > 0
    U *= np.where(U[0] < 0.0, -1.0, 1.0)
    U.setflags(write=False)
    logger.debug("[Krawtchouk] basis built for M=%d, p=%g", M, p)
    return U


def krawtchouk_poly(l: int, j: int, M: int, p: float = 0.5) -> float:
    """Krawtchouk polynomial K_l(j) = 2F1(-j, -l; -M+1; 1/p)."""
    _check_index("l", l, M)
    _check_index("j", j, M)
    scale = math.sqrt(weight(j, M, p) / norm_d(l, M, p))
    return float(_basis_matrix(M, p)[j, l] / scale)


def krawtchouk_series(l: int, j: int, M: int, p: float = 0.5) -> float:
    """
    K_l(j) by direct summation of the terminating hypergeometric series.

    Summed in exact rational arithmetic; slow, kept as a reference.
    """
    _check_index("l", l, M)
    _check_index("j", j, M)
    N = M - 1
    z = 1 / Fraction(p)
    term = Fraction(1)
    total = Fraction(1)
    for k in range(min(l, j)):
        term *= Fraction((k - l) * (k - j), (k - N) * (k + 1)) * z
        total += term
    return float(total)


def orthonormal_basis(spec: ChainSpec) -> SpectralBasis:
    """Eigenbasis of the chain: U[j, l] = K~_l(j), E_l and J_j."""
    return SpectralBasis(
        U=_basis_matrix(spec.M, spec.p),
        energies=energies(spec.M),
        couplings=couplings(spec.M),
    )


def hamiltonian(spec: ChainSpec) -> np.ndarray:
    """Tridiagonal single-excitation Hamiltonian with the perfect-transfer couplings."""
    J = couplings(spec.M)
    return np.diag(np.full(spec.M, float(spec.omega0))) + np.diag(J, 1) + np.diag(J, -1)


def eigen_to_site(basis: SpectralBasis, C: np.ndarray) -> np.ndarray:
    """Site amplitudes xi_j = sum_l U[j, l] C_l along the last axis."""
    return np.asarray(C) @ basis.U.T


def site_to_eigen(basis: SpectralBasis, xi: np.ndarray) -> np.ndarray:
    """Eigen amplitudes C_l = sum_j U[j, l] xi_j along the last axis."""
    return np.asarray(xi) @ basis.U
