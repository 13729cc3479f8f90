"""
Non-asymptotic concentration bounds and their Monte Carlo validation.

Both bound calculators work in the log domain: the network prefactor
``exp(log(1/alpha) * 4 log(n) / (1 - delta))`` overflows a double for any
realistic graph, so the transient ``N`` is found by comparing logarithms.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .beliefs import Belief, outside_mass_trajectory, rasterize
from .metrics import AffinityError, Covering, HypothesisSpace, affinity_floor, n_hellinger_dist

CONSTANT_SETS = ("statement", "proof")
MAX_ROUNDS = 10**9
FLAG_TOL = 1e-12


class BoundError(ValueError):
    """The transient round count does not exist within the search cap."""


class AssumptionError(ValueError):
    """A runtime-checkable assumption fails."""


@dataclass(frozen=True)
class BoundInputs:
    """Everything the bound formulas depend on.

    Attributes
    ----------
    n : int
        Number of agents.
    delta : float
        Contraction parameter in ``(0, 1)``.
    alpha : float
        Affinity floor in ``(0, 1]``.
    covering : Covering
        Annulus counts; countable for the first bound, compact for the second.
    sigma : float
        Probability tolerance in ``(0, 1)``.
    epsilon : float
        Initial mass floor at the optimum (countable case only).
    constants : {"statement", "proof"}
        Which constant set to use where the two disagree.
    """

    n: int
    delta: float
    alpha: float
    covering: Covering
    sigma: float
    epsilon: float = 1.0
    constants: str = "statement"

    def __post_init__(self):
        if not 0 < self.sigma < 1:
            raise ValueError(f"sigma must lie in (0, 1), got {self.sigma!r}")
        if not 0 < self.epsilon <= 1:
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon!r}")
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha!r}")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta!r}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n!r}")
        if self.constants not in CONSTANT_SETS:
            raise ValueError(f"constants must be one of {CONSTANT_SETS}, got {self.constants!r}")

    @property
    def r(self) -> float:
        return self.covering.r

    @property
    def log_prefactor(self) -> float:
        """``log(1/alpha) * 4 log(n) / (1 - delta)``."""
        if self.n == 1 or self.alpha == 1:
            return 0.0
        return -math.log(self.alpha) * 4 * math.log(self.n) / (1 - self.delta)


@dataclass(frozen=True)
class BoundResult:
    """Lower bound ``k -> 1 - exp(log_coef - rate * (k - offset))`` on ball mass.

    The bound is asserted for ``k >= k_min``; ``N`` is the transient round
    count from the series condition.
    """

    N: int
    chi: float
    log_coef: float
    rate: float
    offset: int = 0
    k_min: int = 0
    label: str = ""

    def __post_init__(self):
        if self.k_min < self.N:
            object.__setattr__(self, "k_min", self.N)

    @classmethod
    def constant(cls, value: float, N: int = 1):
        """Debug bound equal to ``value`` at every round."""
        if not 0 <= value <= 1:
            raise ValueError(f"constant bound must lie in [0, 1], got {value!r}")
        log_coef = -math.inf if value == 1 else math.log1p(-value)
        return cls(N, float("nan"), log_coef, 0.0, 0, N, f"constant {value!r}")

    def log_deficit(self, k):
        """Log of ``1 - bound(k)``."""
        return self.log_coef - self.rate * (np.asarray(k, dtype=float) - self.offset)

    def __call__(self, k):
        return -np.expm1(self.log_deficit(k))


def _series_round(log_pref, log_counts, exps, log_target, max_rounds):
    """Smallest integer ``t >= 1`` with ``log_pref + lse(log_counts - t * exps) < log_target``."""
    keep = np.isfinite(log_counts)
    if not keep.any():
        return 1
    lc, ex = log_counts[keep], exps[keep]

    def ok(t):
        return log_pref + logsumexp(lc - t * ex) < log_target

    if ok(1):
        return 1
    if not ok(max_rounds):
        raise BoundError(
            f"series stays above the tolerance for every t <= {max_rounds}; "
            "check the covering counts and affinity floor"
        )
    lo, hi = 1, 2
    while not ok(hi):
        lo, hi = hi, min(2 * hi, max_rounds)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _log_counts(cov: Covering) -> np.ndarray:
    c = np.asarray(cov.counts, dtype=float)
    with np.errstate(divide="ignore"):
        return np.log(c)


def theorem1_bound(inp: BoundInputs, max_rounds: int = MAX_ROUNDS) -> BoundResult:
    """Concentration bound for a countable hypothesis set.

    ``N`` is the smallest ``t >= 1`` with
    ``prefactor * sum_l N_l exp(-t r_{l+1}^2) < sigma``;
    ``chi = sum_l N_l exp(-r_l^2 / 2)``;
    ``bound(k) = 1 - chi exp(-k r^2) / epsilon``. The proof constant set
    shifts the exponent to ``k - 1``.
    """
    cov = inp.covering
    radii = np.asarray(cov.radii)
    lc = _log_counts(cov)
    N = _series_round(inp.log_prefactor, lc, radii[1:] ** 2, math.log(inp.sigma), max_rounds)
    log_chi = logsumexp(lc - radii[:-1] ** 2 / 2) if np.isfinite(lc).any() else -math.inf
    chi = math.exp(log_chi)
    offset = 1 if inp.constants == "proof" else 0
    return BoundResult(N, chi, log_chi - math.log(inp.epsilon), cov.r**2, offset, N,
                       f"countable/{inp.constants}")


def theorem2_bound(inp: BoundInputs, k_assumption5: int = 1,
                   max_rounds: int = MAX_ROUNDS) -> BoundResult:
    """Concentration bound for a compact hypothesis set.

    Statement constants: ``N`` uses ``exp(-t r_{l+1}^2 / 32)`` against
    ``sigma / 2``, ``chi = sum_l exp(-r_{l+1}^2 / 16)`` and
    ``bound(k) = 1 - chi exp(-k r^2 / 16)`` for ``k >= max(N, K)``.
    Proof constants use ``/16`` inside ``N`` and ``/32`` in the bound.
    """
    cov = inp.covering
    radii = np.asarray(cov.radii)
    lc = _log_counts(cov)
    n_div, b_div = (32.0, 16.0) if inp.constants == "statement" else (16.0, 32.0)
    N = _series_round(inp.log_prefactor, lc, radii[1:] ** 2 / n_div,
                      math.log(inp.sigma / 2), max_rounds)
    log_chi = float(logsumexp(-radii[1:] ** 2 / 16))
    return BoundResult(N, math.exp(log_chi), log_chi, cov.r**2 / b_div, 0,
                       max(N, int(k_assumption5)), f"compact/{inp.constants}")


def radius_schedule(k, sigma, r, n):
    """Largest admissible ``R_k = min(sigma / (2 sqrt(2 k n)), r / 4)``."""
    k = np.asarray(k, dtype=float)
    return np.minimum(sigma / (2 * np.sqrt(2 * k * n)), r / 4)


# -- assumption checks -------------------------------------------------------


def _prior_masses(prior: Belief, model, space: HypothesisSpace | None):
    if prior.kind == "conjugate":
        space = space or prior.space
        lw = rasterize(model, prior.params, space)
        return space, np.exp(lw + space.log_weights)
    return prior.space, np.exp(prior.log_weights + prior.space.log_weights)


def check_assumption5(prior: Belief, models, center, C, r, k_max,
                      space: HypothesisSpace | None = None) -> int:
    """Smallest ``K`` with ``mu_0(B_{C/sqrt(k)}) >= exp(-k r^2 / 32)`` for ``K <= k <= k_max``.

    Ball masses are computed by summing quadrature (or finite) weights of
    the points within n-Hellinger distance ``C / sqrt(k)`` of ``center``.

    Raises
    ------
    AssumptionError
        If the inequality still fails at ``k_max``; the message names the
        first violating round.
    """
    if not (0 < C <= 1 and 0 < r <= 1):
        raise ValueError("C and r must lie in (0, 1]")
    space, p = _prior_masses(prior, models[0], space)
    c = np.atleast_1d(np.asarray(center, dtype=float))
    dist = n_hellinger_dist(models, space.points, c[None, :])
    order = np.argsort(dist, kind="stable")
    cum = np.concatenate([[0.0], np.cumsum(p[order])])
    k = np.arange(1, int(k_max) + 1)
    mass = cum[np.searchsorted(dist[order], C / np.sqrt(k), side="right")]
    ok = mass >= np.exp(-k * r * r / 32)
    if ok.all():
        return 1
    bad = np.flatnonzero(~ok)
    if bad[-1] == len(k) - 1:
        raise AssumptionError(
            f"initial-mass condition fails at k = {int(k[bad[0]])} and is still "
            f"violated at k_max = {int(k_max)} (mass {float(mass[-1])!r})"
        )
    return int(k[bad[-1]] + 1)


@dataclass
class AssumptionReport:
    """Outcome of the runtime assumption checks for a scenario."""

    mixing: list = field(default_factory=list)
    alpha: float | None = None
    alpha_error: str | None = None
    density_sup: float | None = None
    finite_exterior: bool | None = None
    assumption5_K: int | None = None
    assumption5_error: str | None = None

    @property
    def ok(self) -> bool:
        return not self.mixing and self.alpha_error is None and self.assumption5_error is None

    def lines(self) -> list[str]:
        out = [f"mixing: {'ok' if not self.mixing else '; '.join(map(str, self.mixing))}"]
        out.append(f"affinity floor: {self.alpha_error or self.alpha!r}")
        if self.density_sup is not None:
            flag = "ok" if self.density_sup <= 1 else "exceeds 1"
            out.append(f"density sup: {self.density_sup!r} ({flag})")
        if self.finite_exterior is not None:
            out.append(f"finite exterior: {self.finite_exterior}")
        if self.assumption5_K is not None or self.assumption5_error:
            out.append(f"initial mass K: {self.assumption5_error or self.assumption5_K}")
        return out


def check_assumptions(scenario, k_max: int | None = None) -> AssumptionReport:
    """Run every runtime-checkable assumption on a scenario."""
    from .network import validate_mixing

    space = scenario.space_obj
    rep = AssumptionReport(mixing=validate_mixing(scenario.mixing_matrix, scenario.graph_obj))
    try:
        rep.alpha = affinity_floor(scenario.models, space)
    except AffinityError as e:
        rep.alpha_error = str(e)
    rep.density_sup = max(m.density_sup(space.params) for m in scenario.models)
    if space.kind == "finite":
        rep.finite_exterior = True
    else:
        try:
            rep.assumption5_K = check_assumption5(
                scenario.prior_belief, scenario.models, scenario.center_param, scenario.C,
                scenario.radius, k_max or scenario.horizon, space)
        except AssumptionError as e:
            rep.assumption5_error = str(e)
    return rep


# -- Monte Carlo validation --------------------------------------------------


@dataclass(frozen=True)
class TrialOutcome:
    trial: int
    flagged: bool
    first_k: int
    first_agent: int
    min_margin: float


@dataclass
class ViolationReport:
    """Per-trial flags for a bound plus the flagged fraction."""

    bound: BoundResult
    sigma: float
    horizon: int
    outcomes: list

    @property
    def trials(self) -> int:
        return len(self.outcomes)

    @property
    def flagged(self) -> int:
        return sum(o.flagged for o in self.outcomes)

    @property
    def fraction(self) -> float:
        return self.flagged / self.trials if self.trials else 0.0

    @property
    def passed(self) -> bool:
        return self.fraction <= self.sigma

    def csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trial", "flagged", "first_k", "first_agent", "min_margin"])
        for o in self.outcomes:
            w.writerow([o.trial, int(o.flagged), o.first_k, o.first_agent, repr(o.min_margin)])
        return buf.getvalue()

    def summary(self) -> str:
        b = self.bound
        lines = [
            f"bound: {b.label}",
            f"N = {b.N}",
            f"chi = {b.chi!r}",
            f"checked rounds: {b.k_min}..{self.horizon}",
            f"trials: {self.trials}",
            f"flagged: {self.flagged}",
            f"flagged fraction: {self.fraction!r}",
            f"sigma: {self.sigma!r}",
            f"verdict: {'PASS' if self.passed else 'FAIL'}",
        ]
        if b.k_min > self.horizon:
            lines.insert(4, "note: transient exceeds the horizon, no round was checked")
        return "\n".join(lines) + "\n"


def worker_count(requested: int | None = None) -> int:
    cap = os.environ.get("CI_THREADS")
    n = requested or os.cpu_count() or 1
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def _one_trial(scenario, bound: BoundResult, horizon, seed, trial) -> TrialOutcome:
    k0 = bound.k_min
    if k0 > horizon:
        return TrialOutcome(trial, False, -1, -1, float("nan"))
    log_out = outside_mass_trajectory(scenario, horizon, seed, trial)[k0:]
    k = np.arange(k0, horizon + 1)
    log_d = np.broadcast_to(np.asarray(bound.log_deficit(k), dtype=float)[:, None], log_out.shape)
    with np.errstate(invalid="ignore"):
        excess = log_out - log_d
    excess = np.where(np.isneginf(log_out), -np.inf, excess)
    bad = excess > FLAG_TOL
    margin = float(np.min(np.exp(log_d) - np.exp(log_out)))
    if not bad.any():
        return TrialOutcome(trial, False, -1, -1, margin)
    row, agent = np.unravel_index(np.argmax(bad), bad.shape)
    return TrialOutcome(trial, True, int(k[row]), int(agent) + 1, margin)


def validate_bound(scenario, bound: BoundResult, trials: int, horizon: int, seed: int,
                   workers: int | None = None) -> ViolationReport:
    """Run independent trials and flag those where some agent's ball mass dips below the bound.

    A trial is flagged when, for some ``k`` in ``[bound.k_min, horizon]`` and
    some agent, the belief mass outside the ball exceeds ``1 - bound(k)``.
    Results do not depend on the worker count.
    """
    args = range(int(trials))
    n = worker_count(workers)
    if n == 1:
        outs = [_one_trial(scenario, bound, horizon, seed, t) for t in args]
    else:
        with ThreadPoolExecutor(max_workers=n) as ex:
            outs = list(ex.map(lambda t: _one_trial(scenario, bound, horizon, seed, t), args))
    return ViolationReport(bound, scenario.sigma, horizon, sorted(outs, key=lambda o: o.trial))

