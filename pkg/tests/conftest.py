import numpy as np
import pytest
from hypothesis import settings

from modinv.standard_form import make_model

# Reproducible example streams across runs.
settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile("repro")


def random_invertible(n, rng, max_cond=1e3):
    """Complex Gaussian matrix, redrawn until its condition number is at most ``max_cond``."""
    while True:
        u = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
        if np.linalg.cond(u) <= max_cond:
            return u


def random_hermitian(n, rng):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (a + a.conj().T) / 2


def random_positive(n, rng, lo=0.1, hi=10.0):
    q, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    return (q * rng.uniform(lo, hi, n)) @ q.conj().T


def random_matrix(n, rng):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


@pytest.fixture
def m2():
    return make_model(2)


@pytest.fixture
def m3():
    return make_model(3)


@pytest.fixture
def u_diag():
    return np.diag(np.sqrt([1.5, 0.5])).astype(complex)


@pytest.fixture
def u_three():
    return np.diag(np.sqrt([0.75, 0.75, 1.5])).astype(complex)
