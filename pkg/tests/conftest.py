import warnings

import numpy as np
import pytest

import focklab as fl

# measured input-state extrema in dB and their linear/Gaussian equivalents
DB_MIN = -1.9
DB_MAX = 6.1
V_MIN = 0.5 * 10 ** (DB_MIN / 10)          # 0.32282711451732776
V_MAX = 0.5 * 10 ** (DB_MAX / 10)          # 2.0369013890205636
R_PURE = -0.5 * np.log(2 * V_MIN)          # 0.21874558383443432
ETA = 0.33
V_OUT_MIN = ETA * V_MIN + (1 - ETA) / 2    # 0.4415329477907181
V_OUT_MAX = ETA * V_MAX + (1 - ETA) / 2    # 1.0071774583767859
DB_OUT_MIN = 10 * np.log10(V_OUT_MIN / 0.5)  # -0.5400688756669796
DB_OUT_MAX = 10 * np.log10(V_OUT_MAX / 0.5)  # 3.041359929344329


def random_density_matrix(dim, rng, rank=None):
    """Hilbert-Schmidt-style random state, optionally rank-limited."""
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / rho.trace()


def padded_random_state(dim, support, rng):
    """Random state supported on the lowest ``support`` levels of a ``dim`` space."""
    rho = np.zeros((dim, dim), dtype=np.complex128)
    rho[:support, :support] = random_density_matrix(support, rng)
    return rho


@pytest.fixture(scope="session")
def measured_params():
    return fl.SqueezedStateParams.from_db(DB_MIN, DB_MAX)


@pytest.fixture(scope="session")
def input_state_16(measured_params):
    # dim=16 truncation of this state legitimately trips the deficit flag
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", fl.TruncationWarning)
        return fl.squeezed_thermal(measured_params, 16)


@pytest.fixture(scope="session")
def input_state_32(measured_params):
    return fl.squeezed_thermal(measured_params, 32)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
