import numpy as np
import pytest

from core.codes import DegreeProfile, peg_construct
from core.galois import field_new
from core.mlc import preset_new


@pytest.fixture(scope="session")
def gf4():
    return field_new(2)


@pytest.fixture(scope="session")
def gf16():
    return field_new(4)


@pytest.fixture(scope="session")
def small_code(gf16):
    """A (48, 24) regular column-weight-2 code over GF(16)."""
    return peg_construct(gf16, DegreeProfile.regular(48, 24, 2), seed=5)


@pytest.fixture(scope="session")
def binary_code():
    """A (96, 48) regular (3, 6) binary code."""
    return peg_construct(field_new(1), DegreeProfile.regular(96, 48, 3), seed=11)


@pytest.fixture(scope="session")
def mlc_scheme():
    """QAM-64 with GF(16) on the low four bits and two uncoded bits, 40 symbols per block."""
    return preset_new("qam64-gf16-mlc", n_symbols=40, seed=3)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
