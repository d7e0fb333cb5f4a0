"""Shared fixtures: kernels and kernel tables reused across test modules."""

import numpy as np
import pytest

from nlfb import KernelTables, logistic, uniform_kernel


@pytest.fixture(scope="session")
def disc2():
    return uniform_kernel(2, 1.0)


@pytest.fixture(scope="session")
def ball3():
    return uniform_kernel(3, 1.0)


@pytest.fixture(scope="session")
def tables_disc2(disc2):
    return KernelTables(disc2, 0.05)


@pytest.fixture(scope="session")
def tables_disc2_fine(disc2):
    return KernelTables(disc2, 0.01)


@pytest.fixture(scope="session")
def logistic_f():
    return logistic()


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
