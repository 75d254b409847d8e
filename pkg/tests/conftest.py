import numpy as np
import pytest

from dcmlab.laws import (
    GeometricMarginal,
    JointDegreeLaw,
    PoissonParetoMarginal,
    ZipfMarginal,
)


@pytest.fixture(scope="session")
def dreg3():
    return JointDegreeLaw.d_regular(3)


@pytest.fixture(scope="session")
def pp_independent():
    m = PoissonParetoMarginal(1.5, 1.0)
    return JointDegreeLaw.independent(m, m)


@pytest.fixture(scope="session")
def zipf_equal():
    return JointDegreeLaw.equal(ZipfMarginal(3.5, 1000))


@pytest.fixture(scope="session")
def geometric_equal():
    return JointDegreeLaw.equal(GeometricMarginal(1.0 / 3.0))


def chi2_statistic(observed, expected):
    observed = np.asarray(observed, dtype=float)
    expected = np.asarray(expected, dtype=float)
    mask = expected > 0
    return float(((observed[mask] - expected[mask]) ** 2 / expected[mask]).sum())
