import numpy as np
import pytest

from snrlab import Dataset, ParamSpace, RngStream


@pytest.fixture
def stream():
    return RngStream(12345)


def make_dataset(n, p, k, tau, sigma, seed, signed=False):
    space = ParamSpace(k=k, tau=tau, sigma=sigma if sigma > 0 else 1.0)
    return Dataset.generate(n, p, space, RngStream(seed), signed=signed,
                            sigma=sigma)


def gaussian_design(n, p, seed):
    g = np.random.default_rng(seed)
    return g.standard_normal((n, p)) / np.sqrt(n)
