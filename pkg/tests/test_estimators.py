import doctest

import numpy as np
import pytest
from sklearn.exceptions import NotFittedError

import coopinfer.estimators
from coopinfer.estimators import ConjugateFilter, GridFilter
from coopinfer.network import cycle_graph

from conftest import EXAMPLE_A


def test_module_doctest():
    res = doctest.testmod(coopinfer.estimators)
    assert res.attempted >= 1 and res.failed == 0


def test_conjugate_filter_matches_recursion():
    rng = np.random.default_rng(0)
    X = rng.integers(0, 2, size=(25, 4))
    f = ConjugateFilter("bernoulli", mixing=EXAMPLE_A).fit(X)
    al, be = np.ones(4), np.ones(4)
    for x in X:
        al, be = EXAMPLE_A @ al + x, EXAMPLE_A @ be + 1 - x
    assert f.n_rounds_ == 25
    np.testing.assert_allclose(f.posterior_mean_, al / (al + be))
    assert f.posterior_params(2) == pytest.approx({"a": al[2], "b": be[2]})


def test_partial_fit_equals_fit():
    rng = np.random.default_rng(1)
    X = rng.poisson(2.0, size=(30, 3))
    whole = ConjugateFilter("poisson", mixing=cycle_graph(3)).fit(X)
    parts = ConjugateFilter("poisson", mixing=cycle_graph(3)).partial_fit(X[:10]).partial_fit(X[10:])
    np.testing.assert_allclose(parts.posterior_mean_, whole.posterior_mean_)


def test_transform_does_not_change_state():
    X = np.array([[1, 0], [1, 1], [0, 1]])
    f = ConjugateFilter().fit(X[:1])
    before = f.posterior_mean_.copy()
    out = f.transform(X[1:])
    assert out.shape == (2, 2)
    np.testing.assert_array_equal(f.posterior_mean_, before)


def test_fit_transform_last_row_is_posterior_mean():
    X = np.random.default_rng(2).normal(size=(12, 4))
    f = ConjugateFilter("gaussian-known-variance", known={"precision": 2.0})
    out = f.fit_transform(X)
    np.testing.assert_allclose(out[-1], f.posterior_mean_)


def test_grid_filter_tracks_conjugate_filter():
    X = np.random.default_rng(3).integers(0, 2, size=(40, 4))
    g = GridFilter("bernoulli", lo=[0.0], hi=[1.0], resolution=4097, mixing=EXAMPLE_A).fit(X)
    c = ConjugateFilter("bernoulli", mixing=EXAMPLE_A).fit(X)
    np.testing.assert_allclose(g.posterior_mean_, c.posterior_mean_, atol=1e-6)


def test_grid_filter_finite_posterior():
    g = GridFilter("bernoulli", values=[0.2, 0.8], mixing=np.eye(1)).fit([[1], [1]])
    np.testing.assert_allclose(g.posterior(0), [0.04 / 0.68, 0.64 / 0.68])


def test_input_validation():
    with pytest.raises(NotFittedError):
        ConjugateFilter().transform([[1]])
    with pytest.raises(ValueError):
        ConjugateFilter().fit([[np.nan, 1]])
    f = ConjugateFilter().fit([[1, 0]])
    with pytest.raises(ValueError, match="2 agents"):
        f.partial_fit([[1, 0, 1]])
    with pytest.raises(ValueError, match="doubly stochastic"):
        ConjugateFilter(mixing=[[0.5, 0.5], [0.2, 0.8]]).fit([[1, 0]])
    with pytest.raises(ValueError, match="either values or lo/hi"):
        GridFilter(values=[0.5], lo=[0.0], hi=[1.0]).fit([[1]])


def test_get_params_round_trip():
    f = GridFilter("poisson", lo=[0.1], hi=[10.0], resolution=33)
    assert GridFilter(**f.get_params()).get_params() == f.get_params()
