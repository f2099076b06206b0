import numpy as np
import pytest


def complex_gaussian(rng, rows, cols):
    return (rng.standard_normal((rows, cols))
            + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2.0)


def random_psd(rng, n, scale=1.0):
    g = complex_gaussian(rng, n, n)
    return scale * (g @ g.conj().T) / n


def random_pd(rng, n, scale=1.0, floor=0.05):
    return random_psd(rng, n, scale) + floor * scale * np.eye(n)


def random_unit(rng, n):
    v = complex_gaussian(rng, n, 1)[:, 0]
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)
