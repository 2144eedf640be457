import numpy as np
import pytest

from pairjump.core import PhysicalParams


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def driven_params():
    """Reference point for well-separated atoms: Omega = 0.3 A, r = 10 lambda_0."""
    return PhysicalParams(rabi_1=0.3, rabi_2=0.3, separation=10.0)


@pytest.fixture
def close_params():
    """Strong-coupling point: r = lambda_0 / pi."""
    return PhysicalParams(rabi_1=0.3, rabi_2=0.3, separation=1.0 / np.pi)


def random_state(rng: np.random.Generator) -> np.ndarray:
    psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    return psi / np.linalg.norm(psi)


def random_density(rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
