"""
Belief representations and the update engines.

Three representations share one protocol: every agent pools its
neighbours' round-``k`` beliefs geometrically with the weights of the
mixing matrix, then conditions on its own observation.

* ``finite`` -- log-probabilities over a finite hypothesis list.
* ``grid`` -- log-densities on a quadrature grid over a compact box.
* ``conjugate`` -- natural parameters of a conjugate prior.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from scipy.special import xlogy

from .expfam import LOG_FLOOR, ConjugateParams, ExpFamilyModel
from .metrics import HypothesisSpace, in_ball
from .network import MixingMatrix

REPRESENTATIONS = ("finite", "grid", "conjugate")


class ZeroMassError(ValueError):
    """Posterior has zero likelihood everywhere on the support."""


def _lse(a, axis=-1, keepdims=False):
    # scipy's logsumexp carries array-API overhead that dominates small inputs
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True)) + m
    return out if keepdims else np.squeeze(out, axis=axis)


def normalize_log(lw, log_q, floor=None):
    """Shift log-weights so that ``sum(exp(lw + log_q)) == 1`` along the last axis."""
    lw = np.asarray(lw, dtype=float)
    z = _lse(lw + log_q, axis=-1, keepdims=True)
    if np.any(~np.isfinite(z)):
        raise ZeroMassError("posterior has zero mass on every hypothesis")
    out = lw - z
    if floor is not None:
        out = np.maximum(out, floor)
    return out


def pool_log(a: np.ndarray, lw: np.ndarray) -> np.ndarray:
    """Row-wise ``sum_j a_ij lw_j`` that treats ``0 * -inf`` as 0."""
    neg = np.isneginf(lw)
    if not neg.any():
        return a @ lw
    pooled = a @ np.where(neg, 0.0, lw)
    pooled[((a > 0).astype(float) @ neg.astype(float)) > 0] = -np.inf
    return pooled


@dataclass(frozen=True, eq=False)
class Belief:
    """One agent's distribution over the hypothesis space."""

    kind: str
    space: HypothesisSpace | None = None
    log_weights: np.ndarray | None = None
    params: ConjugateParams | None = None

    @classmethod
    def uniform(cls, space: HypothesisSpace):
        kind = "finite" if space.kind == "finite" else "grid"
        lw = normalize_log(np.zeros(space.size), space.log_weights)
        return cls(kind, space, lw)

    @classmethod
    def from_log_weights(cls, space: HypothesisSpace, lw):
        kind = "finite" if space.kind == "finite" else "grid"
        floor = LOG_FLOOR if kind == "grid" else None
        return cls(kind, space, normalize_log(lw, space.log_weights, floor))

    @classmethod
    def conjugate(cls, params: ConjugateParams, space: HypothesisSpace | None = None):
        return cls("conjugate", space, None, params)

    def masses(self, model: ExpFamilyModel | None = None) -> np.ndarray:
        """Probability mass carried by each point of the space."""
        lw = self.log_weights
        if self.kind == "conjugate":
            lw = rasterize(model, self.params, self.space)
        return np.exp(lw + self.space.log_weights)

    def mass(self, mask, model=None) -> float:
        return float(self.masses(model)[mask].sum())

    def moments(self, model: ExpFamilyModel | None = None):
        """Posterior mean and variance of each parameter component."""
        if self.kind == "conjugate":
            return model.prior_moments(self.params)
        p = self.masses()
        mean = p @ self.space.points
        var = p @ (self.space.points - mean) ** 2
        return mean, var


def rasterize(model: ExpFamilyModel, params: ConjugateParams, space: HypothesisSpace):
    """Conjugate density evaluated on the grid and normalised by quadrature."""
    lk = model.prior_log_kernel(params, space.params)
    return normalize_log(lk, space.log_weights, LOG_FLOOR if space.kind == "compact" else None)


class _ParamColumns(NamedTuple):
    chi: tuple
    nu: np.ndarray


def rasterize_all(model: ExpFamilyModel, chi, nu, space: HypothesisSpace) -> np.ndarray:
    """Row-wise :func:`rasterize` for ``(n, s)`` natural parameters.

    The kernel formulas broadcast, so parameters are passed as columns.
    """
    chi = np.asarray(chi, dtype=float)
    cols = _ParamColumns(tuple(chi[:, j:j + 1] for j in range(chi.shape[1])),
                         np.asarray(nu, dtype=float)[:, None])
    lk = np.broadcast_to(model.prior_log_kernel(cols, space.params), (chi.shape[0], space.size))
    return normalize_log(lk, space.log_weights, LOG_FLOOR if space.kind == "compact" else None)


def centralized_bayes_step(b: Belief, x, models) -> Belief:
    """Condition ``b`` on a joint observation using every agent's likelihood."""
    if b.kind == "conjugate":
        raise ValueError("centralized update needs a finite or grid belief")
    lw = b.log_weights.copy()
    for m, xi in zip(models, np.atleast_1d(x)):
        lw = lw + m.log_density(b.space.params, xi)
    return Belief.from_log_weights(b.space, lw)


@dataclass(frozen=True, eq=False)
class NetworkState:
    """Beliefs of all agents at round ``k``.

    Finite and grid states hold ``log_weights`` of shape ``(n, m)``;
    conjugate states hold ``chi`` of shape ``(n, s)`` and ``nu`` of shape
    ``(n,)``.
    """

    k: int
    representation: str
    models: tuple
    mixing: MixingMatrix
    space: HypothesisSpace | None = None
    log_weights: np.ndarray | None = None
    chi: np.ndarray | None = None
    nu: np.ndarray | None = None
    conjugate_family: str | None = None
    _loglik_cache: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.mixing.n

    @classmethod
    def initial(cls, models, mixing: MixingMatrix, representation: str, space=None, prior=None):
        """Common starting belief for every agent.

        ``prior`` is a :class:`Belief` (or log-weight array) for finite/grid
        states, a :class:`ConjugateParams` or one per agent for conjugate
        states. ``None`` means uniform on the space.
        """
        models = tuple(models)
        if len(models) != mixing.n:
            raise ValueError(f"{len(models)} models for {mixing.n} agents")
        if representation not in REPRESENTATIONS:
            raise ValueError(f"unknown representation {representation!r}")
        if representation == "conjugate":
            priors = prior if isinstance(prior, (list, tuple)) else [prior] * mixing.n
            fams = {m.conjugate_family for m in models}
            if len(fams) > 1:
                raise ValueError(f"agents need one conjugate family, got {sorted(fams)}")
            for m, p in zip(models, priors):
                m.check_params(p)
            chi = np.array([p.chi for p in priors], dtype=float)
            nu = np.array([p.nu for p in priors], dtype=float)
            return cls(0, representation, models, mixing, space, None, chi, nu, fams.pop())
        if space is None:
            raise ValueError(f"{representation} representation needs a hypothesis space")
        want = "finite" if representation == "finite" else "compact"
        if space.kind != want:
            raise ValueError(f"{representation} representation needs a {want} space, got {space.kind}")
        if prior is None:
            b = Belief.uniform(space)
        elif isinstance(prior, Belief):
            b = prior
        else:
            b = Belief.from_log_weights(space, prior)
        lw = np.tile(b.log_weights, (mixing.n, 1))
        return cls(0, representation, models, mixing, space, lw)

    def belief(self, i: int) -> Belief:
        if self.representation == "conjugate":
            return Belief.conjugate(
                ConjugateParams(self.conjugate_family, self.chi[i], self.nu[i]), self.space
            )
        return Belief(self.representation, self.space, self.log_weights[i])

    def params(self, i: int) -> ConjugateParams:
        return ConjugateParams(self.conjugate_family, self.chi[i], self.nu[i])

    def loglik(self, i: int, x) -> np.ndarray:
        m = self.models[i]
        if not m.discrete:
            return m.log_density(self.space.params, x)
        key = (i, float(x))
        out = self._loglik_cache.get(key)
        if out is None:
            out = self._loglik_cache[key] = m.log_density(self.space.params, x)
        return out

    def log_masses(self) -> np.ndarray:
        """``(n, m)`` log point masses; conjugate beliefs are rasterised first."""
        if self.representation == "conjugate":
            lw = rasterize_all(self.models[0], self.chi, self.nu, self.space)
        else:
            lw = self.log_weights
        return lw + self.space.log_weights


def distributed_step(s: NetworkState, x) -> NetworkState:
    """One synchronous round of pooling followed by a local Bayes step.

    All agents read round-``k`` beliefs; the returned state is round ``k+1``.
    """
    x = np.asarray(x, dtype=float)
    a = s.mixing.a
    if s.representation == "conjugate":
        stats = np.stack([m.sufficient_stat(xi) for m, xi in zip(s.models, x)])
        inc = np.array([m.count_increment for m in s.models])
        return replace(s, k=s.k + 1, chi=a @ s.chi + stats, nu=a @ s.nu + inc)
    pooled = pool_log(a, s.log_weights)
    lik = np.stack([s.loglik(i, xi) for i, xi in enumerate(x)])
    floor = LOG_FLOOR if s.representation == "grid" else None
    lw = normalize_log(pooled + lik, s.space.log_weights, floor)
    return replace(s, k=s.k + 1, log_weights=lw)


class TrajectoryRow(NamedTuple):
    trial: int
    k: int
    agent: int
    post_mean: float
    post_var: float
    mass_in_ball: float
    tv_to_agent1: float


def agent_rngs(seed: int, trial: int, n: int):
    """Independent generators keyed by ``(seed, trial, agent)``.

    Streams come from ``SeedSequence(seed, spawn_key=(trial, agent))``, so
    the draws of one trial never depend on how trials are scheduled.
    """
    return [
        np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(trial), i)))
        for i in range(n)
    ]


def draw_observations(models, true_params, horizon: int, seed: int, trial: int = 0):
    """``(horizon, n)`` observation matrix from per-agent seeded streams."""
    rngs = agent_rngs(seed, trial, len(models))
    cols = [
        np.asarray(m.sample(np.asarray(t, dtype=float), rng, horizon), dtype=float)
        for m, t, rng in zip(models, true_params, rngs)
    ]
    return np.stack(cols, axis=1) if cols else np.zeros((horizon, 0))


def _summary(state: NetworkState, ball_mask):
    """Per-agent mean, variance, ball mass and TV distance to agent 1."""
    n = state.n
    if state.representation == "conjugate":
        mom = [m.prior_moments(state.params(i)) for i, m in enumerate(state.models)]
        mean = np.array([mu[0] for mu, _ in mom])
        var = np.array([v[0] for _, v in mom])
    else:
        p = np.exp(state.log_masses())
        pts = state.space.points[:, 0]
        mean = p @ pts
        var = p @ (pts**2) - mean**2
        var = np.maximum(var, 0.0)
    if state.space is None:
        nan = np.full(n, np.nan)
        return mean, var, nan, nan
    p = np.exp(state.log_masses())
    ball = p[:, ball_mask].sum(axis=1)
    tv = 0.5 * np.abs(p - p[0]).sum(axis=1)
    return mean, var, ball, tv


def run_trial(scenario, horizon: int | None = None, seed: int | None = None, trial: int = 0,
              record_every: int = 1) -> list[TrajectoryRow]:
    """Simulate one trial of a scenario and summarise every recorded round.

    Round 0 (the prior) is always recorded, as is the final round.
    """
    horizon = scenario.horizon if horizon is None else horizon
    seed = scenario.seed if seed is None else seed
    state = scenario.initial_state()
    xs = draw_observations(scenario.models, scenario.true_params, horizon, seed, trial)
    mask = scenario.ball_mask
    rows = []

    def record(st):
        mean, var, ball, tv = _summary(st, mask)
        for i in range(st.n):
            rows.append(TrajectoryRow(trial, st.k, i + 1, float(mean[i]), float(var[i]),
                                      float(ball[i]), float(tv[i])))

    record(state)
    for k in range(horizon):
        state = distributed_step(state, xs[k])
        if state.k % record_every == 0 or state.k == horizon:
            record(state)
    return rows


def final_state(scenario, horizon=None, seed=None, trial=0) -> NetworkState:
    """Run a trial without recording and return the last state."""
    horizon = scenario.horizon if horizon is None else horizon
    seed = scenario.seed if seed is None else seed
    state = scenario.initial_state()
    xs = draw_observations(scenario.models, scenario.true_params, horizon, seed, trial)
    for k in range(horizon):
        state = distributed_step(state, xs[k])
    return state


def outside_mass_trajectory(scenario, horizon, seed, trial=0) -> np.ndarray:
    """``(horizon + 1, n)`` log of each agent's belief mass outside the ball.

    Computed directly from the exterior weights, so tiny masses stay
    representable.
    """
    state = scenario.initial_state()
    xs = draw_observations(scenario.models, scenario.true_params, horizon, seed, trial)
    outside = ~scenario.ball_mask
    out = np.empty((horizon + 1, state.n))

    def log_out(st):
        lm = st.log_masses()[:, outside]
        if lm.shape[1] == 0:
            return np.full(st.n, -np.inf)
        return _lse(lm, axis=1)

    out[0] = log_out(state)
    for k in range(horizon):
        state = distributed_step(state, xs[k])
        out[k + 1] = log_out(state)
    return out


# -- mirror-descent optimality check -----------------------------------------


def mirror_objective(pi, loglik, a_row, log_mus):
    """``<-log p, pi> + sum_j a_j KL(pi || mu_j)`` for each row of ``pi``."""
    pi = np.atleast_2d(pi)
    lin = pi @ (-loglik)
    ent = xlogy(pi, pi).sum(axis=1)
    cross = pi @ (a_row @ log_mus)
    return lin + a_row.sum() * ent - cross


class OracleResult(NamedTuple):
    passed: bool
    margin: float
    probes: int
    closed_form: np.ndarray


def closed_form_update(loglik, a_row, log_mus):
    """Geometric pool of ``log_mus`` with weights ``a_row`` times the likelihood."""
    lw = pool_log(a_row[None, :], log_mus)[0] + loglik
    return np.exp(normalize_log(lw, 0.0))


def mirror_descent_oracle(log_mus, a_row, loglik, trials=1000, rng=None, tol=1e-9,
                          scales=tuple(10.0 ** -s for s in range(1, 11)), per_scale=10):
    """Check that the closed-form update minimises the mirror-descent objective.

    Parameters
    ----------
    log_mus : ndarray, shape (n, m)
        Round-``k`` log-beliefs of all agents.
    a_row : ndarray, shape (n,)
        Row of the mixing matrix for the agent under test.
    loglik : ndarray, shape (m,)
        The agent's log-likelihood of its new observation.
    trials : int
        Flat Dirichlet probes on the simplex.
    scales : sequence of float
        Sizes of multiplicative perturbations around the closed form.

    Returns
    -------
    OracleResult
        ``margin`` is the smallest ``G(probe) - G(closed form)``; the check
        passes when it is ``>= -tol``.
    """
    rng = np.random.default_rng() if rng is None else rng
    log_mus = np.asarray(log_mus, dtype=float)
    a_row = np.asarray(a_row, dtype=float)
    loglik = np.asarray(loglik, dtype=float)
    keep = a_row > 0
    a_row, log_mus = a_row[keep], log_mus[keep]
    m = log_mus.shape[1]
    star = closed_form_update(loglik, a_row, log_mus)
    g_star = mirror_objective(star, loglik, a_row, log_mus)[0]
    probes = [rng.dirichlet(np.ones(m), size=trials)] if m > 1 else [np.ones((1, 1))]
    for s in scales:
        z = rng.standard_normal((per_scale, m))
        p = star * np.exp(s * z)
        probes.append(p / p.sum(axis=1, keepdims=True))
    probes = np.vstack(probes)
    g = mirror_objective(probes, loglik, a_row, log_mus)
    margin = float(np.min(g - g_star))
    return OracleResult(margin >= -tol, margin, len(probes), star)
