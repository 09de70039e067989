"""Shared fixtures for the qst test suite."""
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from qst.physics.krawtchouk_core import ChainSpec  # noqa: E402
from qst.physics.open_dynamics import EnsembleConfig, ReservoirSpec  # noqa: E402


@pytest.fixture
def make_ensemble():
    """Factory for EnsembleConfig with the usual reservoir (gamma0 = 1, lambda = 50, omega0 = 1)."""

    def _make(M: int = 2, N: int = 1, lam: float = 50.0, gamma0: float = 1.0, omega0: float = 1.0, p: float = 0.5):
        return EnsembleConfig(
            chain=ChainSpec(M=M, omega0=omega0, p=p),
            reservoir=ReservoirSpec(gamma0=gamma0, lam=lam),
            N=N,
        )

    return _make


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)


@pytest.fixture
def random_state(rng):
    """Factory for a random normalized complex vector."""

    def _make(*shape):
        z = rng.normal(size=shape) + 1j * rng.normal(size=shape)
        return z / np.linalg.norm(z)

    return _make
