import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240617)


def ket(*amps):
    v = np.asarray(amps, dtype=complex)
    return v / np.linalg.norm(v)


def proj(v):
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())
