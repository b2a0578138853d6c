import numpy as np
import pytest

from cirsim.geometry import CirsParams, build_cylindrical_layout, wavelength_of

LAMBDA_26 = wavelength_of(26e9)


@pytest.fixture
def lam():
    return LAMBDA_26


def make_layout(rows, cols, d_m, d_n, radius, lam=LAMBDA_26):
    return build_cylindrical_layout(CirsParams.from_radius(rows, cols, d_m, d_n, radius, lam))


def single_element(lam=LAMBDA_26):
    return make_layout(1, 1, lam / 4, lam / 4, None, lam)


def rng_for(request_or_seed=0):
    return np.random.default_rng(request_or_seed)
