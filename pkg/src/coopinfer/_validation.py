"""Input checks shared by the estimator wrappers."""

from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array

from .network import Graph, MixingMatrix, build_lazy_metropolis, complete_graph


def check_observations(X, n_agents: int | None = None) -> np.ndarray:
    """Observation matrix of shape ``(rounds, agents)``.

    A 1-d input is read as a single agent's sequence.
    """
    X = np.asarray(X, dtype=float) if not hasattr(X, "shape") else X
    if np.ndim(X) == 1:
        X = np.reshape(X, (-1, 1))
    X = check_array(X, dtype=float, ensure_2d=True, ensure_all_finite=True)
    if n_agents is not None and X.shape[1] != n_agents:
        raise ValueError(f"X has {X.shape[1]} columns but the filter was fitted with {n_agents} agents")
    return X


def check_mixing(mixing, n_agents: int, tol: float = 1e-12) -> MixingMatrix:
    """Resolve ``mixing`` into a doubly stochastic matrix with positive diagonal.

    ``None`` gives lazy Metropolis weights on the complete graph.
    """
    if mixing is None:
        return build_lazy_metropolis(complete_graph(n_agents))
    if isinstance(mixing, Graph):
        return build_lazy_metropolis(mixing)
    a = mixing if isinstance(mixing, MixingMatrix) else MixingMatrix(check_array(mixing, dtype=float))
    if a.n != n_agents:
        raise ValueError(f"mixing matrix is {a.n}x{a.n} but X has {n_agents} agents")
    if np.any(np.abs(a.a.sum(axis=0) - 1) > tol) or np.any(np.abs(a.a.sum(axis=1) - 1) > tol):
        raise ValueError("mixing matrix must be doubly stochastic")
    if np.any(np.diag(a.a) <= 0):
        raise ValueError("mixing matrix needs a positive diagonal")
    return a
