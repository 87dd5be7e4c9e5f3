import tempfile

import pytest

from warpends.config import load_config
from warpends.geometry import circle, flat_torus, make_end


@pytest.fixture
def config():
    return load_config()


@pytest.fixture
def tempdir():
    with tempfile.TemporaryDirectory() as dirname:
        yield dirname


@pytest.fixture
def hyperbolic_end():
    """H^3 outside a horoball-free core: sinh r over a flat torus"""
    return make_end(flat_torus(), 'sinh(r)', r_start=1.0)


@pytest.fixture
def plane_end():
    return make_end(circle(), 'r', r_start=1.0)


@pytest.fixture
def rlog2_end():
    return make_end(circle(), 'r * log(r)^2', r_start=2.0)


@pytest.fixture
def sinr_rlog2_end():
    return make_end(circle(), 'sin(r) + r * log(r)^2', r_start=2.0)
