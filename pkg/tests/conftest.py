import numpy as np
import pytest


@pytest.fixture(scope="session")
def gauss2000():
    """Gaussian signal + Gaussian noise at N=M=2000, snr=1, with spectra.

    Shared by the transform and MMSE tests and by acceptance criteria 2/7;
    the three value-only SVDs dominate the cost so they are done once.
    """
    rng = np.random.default_rng(314159)
    n = 2000
    S = rng.standard_normal((n, n)) / np.sqrt(n)
    Z = rng.standard_normal((n, n)) / np.sqrt(n)
    Y = S + Z
    return {
        "n": n,
        "S": S,
        "Z": Z,
        "gs": np.linalg.svd(S, compute_uv=False),
        "gz": np.linalg.svd(Z, compute_uv=False),
        "gy": np.linalg.svd(Y, compute_uv=False),
    }
