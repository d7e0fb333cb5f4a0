import numpy as np
import pytest

from nlfb import logistic, tabulated


def test_logistic_basics():
    f = logistic()
    assert f.fprime0 == 1.0
    assert f.u_star == 1.0
    assert f(0.0) == 0.0
    assert f(1.0) == 0.0
    assert f(0.5) == 0.25
    assert f(2.0) < 0.0


def test_logistic_scale():
    f = logistic(0.5)
    assert f.fprime0 == 0.5
    assert abs(f(0.5) - 0.125) < 1e-15
    with pytest.raises(ValueError):
        logistic(0.0)


def test_lipschitz_bound_logistic():
    # |f'| on [0, 2] for u(1-u) is max at u = 2: |1 - 2u| = 3
    f = logistic()
    lip = f.lipschitz(2.0)
    assert 2.9 <= lip <= 3.1


def test_tabulated_reaction():
    f = tabulated([0.0, 0.5, 1.0, 1.5], [0.0, 0.3, 0.0, -0.5])
    assert f.fprime0 == 0.6
    assert abs(f.u_star - 1.0) < 1e-12
    assert f(0.25) == 0.15
    assert f(1.25) < 0.0


def test_tabulated_validations():
    with pytest.raises(ValueError):
        tabulated([0.1, 1.0], [0.0, 0.1])  # must start at u = 0
    with pytest.raises(ValueError):
        tabulated([0.0, 0.5, 1.0], [0.0, -0.1, -0.2])  # f'(0) <= 0
    with pytest.raises(ValueError):
        tabulated([0.0, 0.5, 1.0, 1.5, 2.0], [0.0, 0.3, -0.1, 0.2, -0.3])


def test_reaction_vectorized():
    f = logistic()
    u = np.array([0.0, 0.5, 1.0])
    out = f(u)
    assert out.shape == (3,)
    assert np.allclose(out, [0.0, 0.25, 0.0])
