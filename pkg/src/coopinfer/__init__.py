"""
Cooperative parameter estimation over networks.

Agents pool their neighbours' beliefs geometrically and then condition on
their own observations. The package provides the mixing-matrix machinery,
exponential-family filters, information metrics, belief engines and the
finite-time concentration bounds together with a Monte Carlo checker.
"""

from .beliefs import (
    Belief,
    NetworkState,
    centralized_bayes_step,
    distributed_step,
    mirror_descent_oracle,
    run_trial,
)
from .concentration import (
    BoundInputs,
    BoundResult,
    check_assumption5,
    theorem1_bound,
    theorem2_bound,
    validate_bound,
)
from .estimators import ConjugateFilter, GridFilter
from .expfam import ConjugateParams, ExpFamilyModel, bayes_step, geometric_pool, make_model
from .metrics import (
    Covering,
    HypothesisSpace,
    affinity_floor,
    build_covering,
    hellinger_sq,
    kl_divergence,
    n_hellinger_dist,
    objective,
)
from .network import Graph, MixingMatrix, build_lazy_metropolis, deviation_bound, validate_mixing
from .scenario import ConfigError, Scenario

__version__ = "0.1.0"

__all__ = [
    "Belief", "NetworkState", "centralized_bayes_step", "distributed_step",
    "mirror_descent_oracle", "run_trial",
    "BoundInputs", "BoundResult", "check_assumption5", "theorem1_bound", "theorem2_bound",
    "validate_bound",
    "ConjugateFilter", "GridFilter",
    "ConjugateParams", "ExpFamilyModel", "bayes_step", "geometric_pool", "make_model",
    "Covering", "HypothesisSpace", "affinity_floor", "build_covering", "hellinger_sq",
    "kl_divergence", "n_hellinger_dist", "objective",
    "Graph", "MixingMatrix", "build_lazy_metropolis", "deviation_bound", "validate_mixing",
    "ConfigError", "Scenario",
]
