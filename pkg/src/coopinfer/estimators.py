"""
scikit-learn style wrappers around the network filters.

``X`` is an observation matrix with one row per round and one column per
agent. ``fit`` filters from the prior, ``partial_fit`` continues from the
fitted state and ``transform`` returns per-round posterior means without
changing it.

Examples
--------
>>> import numpy as np
>>> from coopinfer.estimators import ConjugateFilter
>>> X = np.array([[1, 1, 1, 1]])
>>> f = ConjugateFilter(family="bernoulli").fit(X)
>>> f.posterior_params(0)
{'a': 2.0, 'b': 1.0}
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_mixing, check_observations
from .beliefs import Belief, NetworkState, distributed_step
from .expfam import make_model
from .metrics import HypothesisSpace


class _NetworkFilter(TransformerMixin, BaseEstimator):
    def _models(self, n):
        known = self.known or {}
        return [make_model(self.family, **known) for _ in range(n)]

    def _init_state(self, n) -> NetworkState:
        raise NotImplementedError

    def _run(self, state, X, record=True):
        means = np.empty(X.shape) if record else None
        for k, x in enumerate(X):
            state = distributed_step(state, x)
            if record:
                means[k] = self._means(state)
        return state, means

    def _means(self, state):
        return np.array([state.belief(i).moments(m)[0][0] for i, m in enumerate(state.models)])

    def fit(self, X, y=None):
        X = check_observations(X)
        state = self._init_state(X.shape[1])
        self.state_, _ = self._run(state, X, record=False)
        self.n_features_in_ = X.shape[1]
        return self

    def partial_fit(self, X, y=None):
        if not hasattr(self, "state_"):
            return self.fit(X)
        X = check_observations(X, self.n_features_in_)
        self.state_, _ = self._run(self.state_, X, record=False)
        return self

    def transform(self, X):
        """Posterior means after each row of ``X``, continuing from the fitted state."""
        check_is_fitted(self, "state_")
        X = check_observations(X, self.n_features_in_)
        return self._run(self.state_, X)[1]

    def fit_transform(self, X, y=None, **fit_params):
        X = check_observations(X)
        state = self._init_state(X.shape[1])
        self.state_, means = self._run(state, X)
        self.n_features_in_ = X.shape[1]
        return means

    @property
    def posterior_mean_(self) -> np.ndarray:
        check_is_fitted(self, "state_")
        return self._means(self.state_)

    @property
    def n_rounds_(self) -> int:
        check_is_fitted(self, "state_")
        return self.state_.k


class ConjugateFilter(_NetworkFilter):
    """Distributed conjugate filter over a fixed network.

    Parameters
    ----------
    family : str
        Likelihood family tag, e.g. ``"poisson"``.
    prior : dict, optional
        Conventional prior parameters such as ``{"a": 1, "b": 1}``; family
        defaults when omitted.
    known : dict, optional
        Known model constants, e.g. ``{"precision": 4.0}``.
    mixing : array-like, Graph or None
        Weight matrix or graph; ``None`` uses the complete graph.
    """

    def __init__(self, family="bernoulli", prior=None, known=None, mixing=None):
        self.family = family
        self.prior = prior
        self.known = known
        self.mixing = mixing

    def _init_state(self, n):
        models = self._models(n)
        prior = models[0].conjugate(**(self.prior or {}))
        return NetworkState.initial(models, check_mixing(self.mixing, n), "conjugate", None, prior)

    def posterior_params(self, agent: int) -> dict:
        """Conventional posterior parameters of one (0-based) agent."""
        check_is_fitted(self, "state_")
        m = self.state_.models[agent]
        return {k: float(v) for k, v in m.conventional(self.state_.params(agent)).items()}


class GridFilter(_NetworkFilter):
    """Distributed filter on a finite hypothesis list or a gridded box.

    Parameters
    ----------
    family : str
        Likelihood family tag.
    values : sequence, optional
        Finite hypotheses. Mutually exclusive with ``lo``/``hi``.
    lo, hi : sequence of float, optional
        Box corners for a compact grid.
    resolution : int
        Grid points per axis.
    known : dict, optional
        Known model constants.
    mixing : array-like, Graph or None
        Weight matrix or graph; ``None`` uses the complete graph.
    """

    def __init__(self, family="bernoulli", values=None, lo=None, hi=None, resolution=1025,
                 known=None, mixing=None):
        self.family = family
        self.values = values
        self.lo = lo
        self.hi = hi
        self.resolution = resolution
        self.known = known
        self.mixing = mixing

    def _space(self) -> HypothesisSpace:
        if self.values is not None:
            if self.lo is not None or self.hi is not None:
                raise ValueError("give either values or lo/hi, not both")
            return HypothesisSpace.finite(self.values)
        if self.lo is None or self.hi is None:
            raise ValueError("need values or both lo and hi")
        return HypothesisSpace.box(np.atleast_1d(self.lo), np.atleast_1d(self.hi), self.resolution)

    def _init_state(self, n):
        space = self._space()
        rep = "finite" if space.kind == "finite" else "grid"
        return NetworkState.initial(self._models(n), check_mixing(self.mixing, n), rep, space,
                                    Belief.uniform(space))

    def posterior(self, agent: int) -> np.ndarray:
        """Probability mass on each hypothesis (or grid node) for one agent."""
        check_is_fitted(self, "state_")
        return self.state_.belief(agent).masses()
