"""
Numerical optimality and closure checks.

* The mirror-descent probe oracle: the closed-form pooled update must
  minimise the per-agent objective over the simplex.
* Closure of conjugate filtering: running the network on a quadrature grid
  must reproduce the densities implied by the natural-parameter recursion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beliefs import NetworkState, distributed_step, draw_observations, mirror_descent_oracle, rasterize
from .expfam import make_model
from .metrics import HypothesisSpace
from .network import MixingMatrix

CLOSURE_TOL = 1e-4
ORACLE_TOL = 1e-9


@dataclass(frozen=True)
class ClosureCase:
    family: str
    known: tuple  # per-agent keyword dicts, cycled over agents
    theta: tuple  # per-agent true parameters, cycled
    prior: dict
    lo: tuple
    hi: tuple


# Grids are wide enough that prior and posterior mass outside them is negligible.
# Beta shapes start at 2: for shapes in (1, 2) the density has an infinite
# slope at the boundary and trapezoid error on 2^12 nodes exceeds 1e-4.
CLOSURE_CASES = {
    "bernoulli": ClosureCase("bernoulli", ({},), (0.2, 0.4, 0.6, 0.8), {"a": 2.0, "b": 2.0}, (0.0,), (1.0,)),
    "poisson": ClosureCase("poisson", ({},), (2.0, 3.0, 4.0), {"shape": 2.0, "rate": 1.0}, (0.0,), (40.0,)),
    "gaussian-known-variance": ClosureCase(
        "gaussian-known-variance", ({"precision": 1.0}, {"precision": 4.0}, {"precision": 0.5}),
        (0.5, 1.0, 1.5), {"mean": 0.0, "precision": 1.0}, (-8.0,), (8.0,)),
    "gaussian-known-mean": ClosureCase(
        "gaussian-known-mean", ({"mean": 0.0},), (1.0, 2.0, 1.5), {"dof": 20.0, "scale": 1.5},
        (0.02,), (10.0,)),
    "gaussian-mean-variance": ClosureCase(
        "gaussian-mean-variance", ({},), ((1.0, 1.0), (1.5, 1.0), (0.5, 2.0)),
        {"mean": 1.0, "lam": 4.0, "alpha": 12.0, "beta": 12.0}, (-2.5, 0.05), (4.5, 7.0)),
}


def grid_agreement(models, mixing: MixingMatrix, prior, space: HypothesisSpace, xs) -> np.ndarray:
    """Per-round sup-norm gap between grid and conjugate densities.

    The grid engine pools log-densities and renormalises by quadrature; the
    conjugate engine's density is evaluated with its exact normaliser.
    Returns an ``(rounds + 1,)`` array, entry ``k`` being the largest gap over
    agents and grid points after ``k`` rounds.
    """
    conj = NetworkState.initial(models, mixing, "conjugate", space, prior)
    grid = NetworkState.initial(models, mixing, "grid", space, rasterize(models[0], prior, space))
    gaps = np.empty(len(xs) + 1)
    for k in range(len(xs) + 1):
        if k:
            conj = distributed_step(conj, xs[k - 1])
            grid = distributed_step(grid, xs[k - 1])
        exact = np.stack([
            np.exp(m.prior_log_density(conj.params(i), space.params)) for i, m in enumerate(models)
        ])
        gaps[k] = np.max(np.abs(exact - np.exp(grid.log_weights)))
    return gaps


def closure_check(family: str, mixing: MixingMatrix, rounds=50, points=2**12, seed=0):
    """Run :func:`grid_agreement` on the built-in case for ``family``.

    Two-parameter families use a square grid with ``points`` nodes in total.
    """
    case = CLOSURE_CASES[family]
    n = mixing.n
    models = [make_model(family, **case.known[i % len(case.known)]) for i in range(n)]
    thetas = [np.atleast_1d(case.theta[i % len(case.theta)]) for i in range(n)]
    d = len(case.lo)
    per_axis = int(round(points ** (1 / d)))
    space = HypothesisSpace.box(case.lo, case.hi, per_axis)
    prior = models[0].conjugate(**case.prior)
    xs = draw_observations(models, thetas, rounds, seed)
    return grid_agreement(models, mixing, prior, space, xs)


@dataclass(frozen=True)
class OracleCase:
    name: str
    passed: bool
    value: float
    tol: float

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.value!r} (tol {self.tol!r})"


def probe_agents(state: NetworkState, x, probes=1000, rng=None):
    """Probe oracle for every agent of a finite-representation state."""
    rng = np.random.default_rng(0) if rng is None else rng
    out = []
    for i in range(state.n):
        res = mirror_descent_oracle(state.log_weights, state.mixing.a[i], state.loglik(i, x[i]),
                                    trials=probes, rng=rng, tol=ORACLE_TOL)
        out.append(res)
    return out


def run_oracle(scenario, closure=True) -> list[OracleCase]:
    """Probe oracle on a finite scenario, then the closure checks for all families."""
    if scenario.representation != "finite":
        raise ValueError("the probe oracle needs a finite representation")
    if scenario.space_obj.size > 100:
        raise ValueError("the probe oracle supports at most 100 hypotheses")
    opts = scenario.oracle
    warm = int(opts.get("warmup", 5))
    xs = draw_observations(scenario.models, scenario.true_params, warm + 1, scenario.seed)
    state = scenario.initial_state()
    for k in range(warm):
        state = distributed_step(state, xs[k])
    rng = np.random.default_rng(np.random.SeedSequence(scenario.seed, spawn_key=(2**31,)))
    cases = []
    for i, res in enumerate(probe_agents(state, xs[warm], int(opts.get("probes", 1000)), rng)):
        cases.append(OracleCase(f"probe oracle agent {i + 1} ({res.probes} probes), min margin",
                                res.passed, res.margin, -ORACLE_TOL))
    if closure:
        rounds = int(opts.get("closure_rounds", 50))
        pts = int(opts.get("closure_resolution", 2**12))
        for fam in CLOSURE_CASES:
            gap = float(np.max(closure_check(fam, scenario.mixing_matrix, rounds, pts, scenario.seed)))
            cases.append(OracleCase(f"closure {fam} ({rounds} rounds), sup gap", gap <= CLOSURE_TOL,
                                    gap, CLOSURE_TOL))
    return cases
