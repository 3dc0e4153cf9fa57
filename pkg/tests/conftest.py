"""Shared fixtures and helpers for the qutrit tomography test suite."""

import numpy as np
import pytest

from qutrit_tomo.measurement import PriorData, canonical_frame
from qutrit_tomo.sampling import sample_hs


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


@pytest.fixture(scope="session")
def frame():
    return canonical_frame()


def random_prior(rng, unmeasured=(0,)):
    """PriorData built from a Hilbert-Schmidt random state."""
    rho = sample_hs(rng)
    return PriorData.from_state(rho, unmeasured)


def central_difference(f, x, h=1e-6):
    """Central-difference gradient of a scalar function of a vector."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g
