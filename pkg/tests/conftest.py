import numpy as np
import pytest

from qprobe.sampling import rng_for


@pytest.fixture
def rng(request):
    # one independent stream per test, stable across runs
    return rng_for(1234, sum(map(ord, request.node.name)))


def e(i, n=3):
    v = np.zeros(n, dtype=complex)
    v[i] = 1
    return v


def ket(*amps):
    return np.asarray(amps, dtype=complex)


def outer(v):
    return np.outer(v, np.conj(v))
