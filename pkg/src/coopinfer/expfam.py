"""
Exponential-family observation models and their conjugate priors.

Every model writes its density as ``H(x) exp(M(theta)'T(x) - C(theta))``.
Conjugate beliefs are stored as ``(chi, nu)`` with ``chi`` accumulating
sufficient statistics and ``nu`` the pseudo-count, so that pooling is a
convex combination and a Bayes step is an addition.  Each family documents
the bijection between ``(chi, nu)`` and its conventional parameters.

Parameter arrays
----------------
Scalar-parameter families accept ``theta`` of any shape. The two-parameter
Gaussian takes ``theta[..., 0]`` as the mean and ``theta[..., 1]`` as the
variance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import betaln, gammaln, xlogy

LOG_FLOOR = -745.0
_LOG_2PI = np.log(2 * np.pi)


class SupportError(ValueError):
    """Observation outside the support of the likelihood model."""


@dataclass(frozen=True)
class ConjugateParams:
    """Natural parameters of a conjugate prior.

    Attributes
    ----------
    family : str
        Conjugate family tag, e.g. ``"beta"``.
    chi : tuple of float
        Pseudo sufficient statistic.
    nu : float
        Pseudo-count, strictly positive.
    """

    family: str
    chi: tuple
    nu: float

    def __post_init__(self):
        object.__setattr__(self, "chi", tuple(float(c) for c in np.atleast_1d(self.chi)))
        object.__setattr__(self, "nu", float(self.nu))
        if not self.nu > 0:
            raise ValueError(f"{self.family}: pseudo-count nu must be > 0, got {self.nu!r}")


class ExpFamilyModel:
    """Base class for the five supported likelihood families."""

    family: str
    conjugate_family: str
    prior_names: tuple
    param_dim = 1
    stat_dim = 1
    discrete = False
    count_increment = 1.0

    def __repr__(self):
        extra = ", ".join(f"{k}={v!r}" for k, v in self._known().items())
        return f"{type(self).__name__}({extra})"

    def __eq__(self, other):
        return type(self) is type(other) and self._known() == other._known()

    def __hash__(self):
        return hash((type(self).__name__, tuple(sorted(self._known().items()))))

    def _known(self):
        return {}

    def describe(self) -> dict:
        return {"family": self.family, **self._known()}

    # -- likelihood -------------------------------------------------------

    def in_support(self, x) -> np.ndarray:
        return np.isfinite(np.asarray(x, dtype=float))

    def check_observation(self, x):
        x = np.asarray(x, dtype=float)
        if not np.all(self.in_support(x)):
            bad = x[~self.in_support(x)] if x.ndim else x
            raise SupportError(
                f"{self.family}: observation {np.ravel(bad)[0].item()!r} outside support {self.support}"
            )
        return x

    def log_density(self, theta, x):
        """Log-density of ``x`` under every parameter in ``theta``."""
        x = self.check_observation(x)
        return self._log_density(np.asarray(theta, dtype=float), x)

    def sufficient_stat(self, x) -> np.ndarray:
        x = self.check_observation(x)
        return self._stat(x)

    def natural_param(self, theta):
        raise NotImplementedError

    def log_partition(self, theta):
        raise NotImplementedError

    def log_base(self, x):
        raise NotImplementedError

    def log_density_canonical(self, theta, x):
        """``log H(x) + M(theta)'T(x) - C(theta)``; used to cross-check :meth:`log_density`."""
        x = self.check_observation(x)
        m = np.asarray(self.natural_param(theta), dtype=float)
        t = self._stat(x)
        return self.log_base(x) + (m * t).sum(axis=-1) - self.log_partition(theta)

    def sample(self, theta, rng, size=None):
        raise NotImplementedError

    def mean(self, theta):
        raise NotImplementedError

    def variance(self, theta):
        raise NotImplementedError

    def density_sup(self, theta) -> float:
        """Supremum over ``x`` and the given parameters of the density."""
        raise NotImplementedError

    def x_quadrature(self, thetas):
        """Nodes and weights for integrating over the observation space.

        The range covers every parameter in ``thetas``.
        """
        raise NotImplementedError

    # -- divergences (closed forms) ---------------------------------------

    def kl(self, a, b):
        raise NotImplementedError

    def hellinger_sq(self, a, b, convention="standard"):
        raise NotImplementedError

    def _standard_only(self, convention):
        if convention != "standard":
            raise ValueError(f"{self.family}: only the 'standard' Hellinger convention is defined")

    # -- conjugate prior ---------------------------------------------------

    def conjugate(self, **conventional) -> ConjugateParams:
        raise NotImplementedError

    def conventional(self, params: ConjugateParams) -> dict:
        raise NotImplementedError

    def check_params(self, params: ConjugateParams):
        if params.family != self.conjugate_family:
            raise ValueError(
                f"{self.family} model needs a {self.conjugate_family} prior, got {params.family}"
            )
        if len(params.chi) != self.stat_dim:
            raise ValueError(f"{params.family}: chi must have {self.stat_dim} entries")
        bad = {k: v for k, v in self.conventional(params).items() if not v > 0 and k in self._positive}
        if bad:
            name, value = next(iter(bad.items()))
            raise ValueError(f"{params.family}: parameter {name} = {value!r} must be > 0")
        return params

    _positive: tuple = ()

    def prior_log_kernel(self, params: ConjugateParams, theta):
        """Unnormalised log prior density with respect to Lebesgue measure on ``theta``."""
        raise NotImplementedError

    def prior_log_norm(self, params: ConjugateParams) -> float:
        """Log normalising constant of :meth:`prior_log_kernel`."""
        raise NotImplementedError

    def prior_log_density(self, params: ConjugateParams, theta):
        """Normalised log prior density (Lebesgue on ``theta``)."""
        with np.errstate(divide="ignore"):
            return self.prior_log_kernel(params, theta) + self.prior_log_norm(params)

    def prior_moments(self, params: ConjugateParams):
        """Mean and variance of each parameter component, as 1-d arrays."""
        raise NotImplementedError


def _as_float(x):
    return np.asarray(x, dtype=float)


def _gauss_x_quadrature(means, sds, points=2**14 + 1):
    lo = float(np.min(means - 10 * sds))
    hi = float(np.max(means + 10 * sds))
    xs = np.linspace(lo, hi, points)
    w = np.full(points, xs[1] - xs[0])
    w[0] = w[-1] = w[0] / 2
    return xs, w


def _gauss_affinity(m1, v1, m2, v2):
    s = v1 + v2
    return np.sqrt(2 * np.sqrt(v1 * v2) / s) * np.exp(-((m1 - m2) ** 2) / (4 * s))


class Bernoulli(ExpFamilyModel):
    """Bernoulli(theta) on {0, 1}, conjugate Beta(a, b).

    Bijection: ``chi = (a,)``, ``nu = a + b``; base measure
    ``dtheta / (theta (1 - theta))`` on the prior side.
    """

    family = "bernoulli"
    conjugate_family = "beta"
    prior_names = ("a", "b")
    support = "{0, 1}"
    discrete = True
    _positive = ("a", "b")

    def in_support(self, x):
        x = _as_float(x)
        return (x == 0) | (x == 1)

    def _log_density(self, theta, x):
        return xlogy(x, theta) + xlogy(1 - x, 1 - theta)

    def _stat(self, x):
        return np.asarray(x, dtype=float)[..., None]

    def natural_param(self, theta):
        theta = _as_float(theta)
        with np.errstate(divide="ignore"):
            return (np.log(theta) - np.log1p(-theta))[..., None]

    def log_partition(self, theta):
        with np.errstate(divide="ignore"):
            return -np.log1p(-_as_float(theta))

    def log_base(self, x):
        return np.zeros_like(_as_float(x))

    def sample(self, theta, rng, size=None):
        return (rng.random(size) < theta).astype(float)

    def mean(self, theta):
        return _as_float(theta)

    def variance(self, theta):
        theta = _as_float(theta)
        return theta * (1 - theta)

    def density_sup(self, theta):
        theta = _as_float(theta)
        return float(np.max(np.maximum(theta, 1 - theta)))

    def x_quadrature(self, thetas):
        return np.array([0.0, 1.0]), np.ones(2)

    def kl(self, a, b):
        a, b = _as_float(a), _as_float(b)
        bad = ((b == 0) & (a > 0)) | ((b == 1) & (a < 1))
        if np.any(bad):
            i = np.argwhere(bad)[0]
            pa, pb = np.broadcast_to(a, bad.shape)[tuple(i)], np.broadcast_to(b, bad.shape)[tuple(i)]
            raise ValueError(f"bernoulli: KL undefined, P({float(pa)!r}) not dominated by P({float(pb)!r})")
        with np.errstate(divide="ignore", invalid="ignore"):
            return xlogy(a, a) - xlogy(a, b) + xlogy(1 - a, 1 - a) - xlogy(1 - a, 1 - b)

    def hellinger_sq(self, a, b, convention="standard"):
        self._standard_only(convention)
        a, b = _as_float(a), _as_float(b)
        return np.clip(1 - np.sqrt(a * b) - np.sqrt((1 - a) * (1 - b)), 0.0, 1.0)

    def conjugate(self, a=1.0, b=1.0):
        return self.check_params(ConjugateParams("beta", (a,), a + b))

    def conventional(self, params):
        a = params.chi[0]
        return {"a": a, "b": params.nu - a}

    def prior_log_kernel(self, params, theta):
        p = self.conventional(params)
        theta = _as_float(theta)
        with np.errstate(divide="ignore"):
            return xlogy(p["a"] - 1, theta) + xlogy(p["b"] - 1, 1 - theta)

    def prior_log_norm(self, params):
        p = self.conventional(params)
        return -betaln(p["a"], p["b"])

    def prior_moments(self, params):
        p = self.conventional(params)
        s = p["a"] + p["b"]
        return np.array([p["a"] / s]), np.array([p["a"] * p["b"] / (s * s * (s + 1))])


class Poisson(ExpFamilyModel):
    """Poisson(lambda), conjugate Gamma(shape, rate).

    Bijection: ``chi = (shape,)``, ``nu = rate``; prior base measure
    ``dlambda / lambda``.
    """

    family = "poisson"
    conjugate_family = "gamma"
    prior_names = ("shape", "rate")
    support = "nonnegative integers"
    discrete = True
    _positive = ("shape", "rate")

    def in_support(self, x):
        x = _as_float(x)
        return np.isfinite(x) & (x >= 0) & (x == np.floor(x))

    def _log_density(self, lam, x):
        return xlogy(x, lam) - lam - gammaln(x + 1)

    def _stat(self, x):
        return np.asarray(x, dtype=float)[..., None]

    def natural_param(self, lam):
        with np.errstate(divide="ignore"):
            return np.log(_as_float(lam))[..., None]

    def log_partition(self, lam):
        return _as_float(lam)

    def log_base(self, x):
        return -gammaln(_as_float(x) + 1)

    def sample(self, lam, rng, size=None):
        return np.asarray(rng.poisson(lam, size), dtype=float)

    def mean(self, lam):
        return _as_float(lam)

    def variance(self, lam):
        return _as_float(lam)

    def density_sup(self, lam):
        lam = np.atleast_1d(_as_float(lam))
        modes = np.floor(lam)
        return float(np.max(np.exp(self._log_density(lam, modes))))

    def x_quadrature(self, thetas):
        top = float(np.max(thetas))
        xmax = int(np.ceil(top + 40 * np.sqrt(top) + 60))
        return np.arange(xmax + 1, dtype=float), np.ones(xmax + 1)

    def kl(self, a, b):
        a, b = _as_float(a), _as_float(b)
        bad = (b == 0) & (a > 0)
        if np.any(bad):
            i = tuple(np.argwhere(bad)[0])
            pa, pb = np.broadcast_to(a, bad.shape)[i], np.broadcast_to(b, bad.shape)[i]
            raise ValueError(f"poisson: KL undefined, P({float(pa)!r}) not dominated by P({float(pb)!r})")
        with np.errstate(divide="ignore", invalid="ignore"):
            return xlogy(a, a) - xlogy(a, b) - a + b

    def hellinger_sq(self, a, b, convention="standard"):
        self._standard_only(convention)
        a, b = _as_float(a), _as_float(b)
        return 1 - np.exp(-0.5 * (np.sqrt(a) - np.sqrt(b)) ** 2)

    def conjugate(self, shape=1.0, rate=1.0):
        return self.check_params(ConjugateParams("gamma", (shape,), rate))

    def conventional(self, params):
        return {"shape": params.chi[0], "rate": params.nu}

    def prior_log_kernel(self, params, lam):
        p = self.conventional(params)
        lam = _as_float(lam)
        with np.errstate(divide="ignore"):
            return xlogy(p["shape"] - 1, lam) - p["rate"] * lam

    def prior_log_norm(self, params):
        p = self.conventional(params)
        return p["shape"] * np.log(p["rate"]) - gammaln(p["shape"])

    def prior_moments(self, params):
        p = self.conventional(params)
        return np.array([p["shape"] / p["rate"]]), np.array([p["shape"] / p["rate"] ** 2])


class GaussianKnownVariance(ExpFamilyModel):
    """N(theta, 1/precision) with known precision, conjugate Normal(mean, 1/prec).

    Bijection: ``chi = (prec * mean,)``, ``nu = prec``.  The statistic is
    ``precision * x`` and a Bayes step adds ``precision`` to ``nu``, so
    agents with different known precisions share one prior class.
    """

    family = "gaussian-known-variance"
    conjugate_family = "normal"
    prior_names = ("mean", "precision")
    support = "real line"
    _positive = ("precision",)

    def __init__(self, precision=1.0):
        if not precision > 0:
            raise ValueError(f"precision must be > 0, got {precision!r}")
        self.precision = float(precision)
        self.count_increment = self.precision

    def _known(self):
        return {"precision": self.precision}

    def _log_density(self, theta, x):
        tau = self.precision
        return 0.5 * (np.log(tau) - _LOG_2PI) - 0.5 * tau * (x - theta) ** 2

    def _stat(self, x):
        return (self.precision * np.asarray(x, dtype=float))[..., None]

    def natural_param(self, theta):
        return _as_float(theta)[..., None]

    def log_partition(self, theta):
        return 0.5 * self.precision * _as_float(theta) ** 2

    def log_base(self, x):
        tau = self.precision
        return 0.5 * (np.log(tau) - _LOG_2PI) - 0.5 * tau * _as_float(x) ** 2

    def sample(self, theta, rng, size=None):
        return rng.normal(theta, 1 / np.sqrt(self.precision), size)

    def mean(self, theta):
        return _as_float(theta)

    def variance(self, theta):
        return np.full_like(_as_float(theta), 1 / self.precision)

    def density_sup(self, theta):
        return float(np.sqrt(self.precision / (2 * np.pi)))

    def x_quadrature(self, thetas):
        thetas = _as_float(thetas)
        return _gauss_x_quadrature(thetas, np.full_like(thetas, 1 / np.sqrt(self.precision)))

    def kl(self, a, b):
        return 0.5 * self.precision * (_as_float(a) - _as_float(b)) ** 2

    def hellinger_sq(self, a, b, convention="standard"):
        """``1 - exp(-tau d^2 / 8)``; ``convention="quarter"`` uses ``/4`` instead."""
        if convention not in ("standard", "quarter"):
            raise ValueError(f"unknown Hellinger convention {convention!r}")
        div = 8.0 if convention == "standard" else 4.0
        return 1 - np.exp(-self.precision * (_as_float(a) - _as_float(b)) ** 2 / div)

    def conjugate(self, mean=0.0, precision=1.0):
        return self.check_params(ConjugateParams("normal", (precision * mean,), precision))

    def conventional(self, params):
        return {"mean": params.chi[0] / params.nu, "precision": params.nu}

    def prior_log_kernel(self, params, theta):
        p = self.conventional(params)
        return -0.5 * p["precision"] * (_as_float(theta) - p["mean"]) ** 2

    def prior_log_norm(self, params):
        return 0.5 * (np.log(params.nu) - _LOG_2PI)

    def prior_moments(self, params):
        p = self.conventional(params)
        return np.array([p["mean"]]), np.array([1 / p["precision"]])


class GaussianKnownMean(ExpFamilyModel):
    """N(mean, variance) with known mean; the parameter is the variance.

    Conjugate prior Scaled-Inv-chi^2(dof, scale) on the variance.
    Bijection: ``chi = (dof * scale,)``, ``nu = dof``; prior base measure
    ``dv / v``.
    """

    family = "gaussian-known-mean"
    conjugate_family = "scaled-inv-chi2"
    prior_names = ("dof", "scale")
    support = "real line"
    _positive = ("dof", "scale")

    def __init__(self, mean=0.0):
        self.known_mean = float(mean)

    def _known(self):
        return {"mean": self.known_mean}

    def _log_density(self, v, x):
        return -0.5 * (_LOG_2PI + np.log(v)) - (x - self.known_mean) ** 2 / (2 * v)

    def _stat(self, x):
        return ((np.asarray(x, dtype=float) - self.known_mean) ** 2)[..., None]

    def natural_param(self, v):
        return (-0.5 / _as_float(v))[..., None]

    def log_partition(self, v):
        return 0.5 * np.log(_as_float(v))

    def log_base(self, x):
        return np.full_like(_as_float(x), -0.5 * _LOG_2PI)

    def sample(self, v, rng, size=None):
        return rng.normal(self.known_mean, np.sqrt(v), size)

    def mean(self, v):
        return np.full_like(_as_float(v), self.known_mean)

    def variance(self, v):
        return _as_float(v)

    def density_sup(self, v):
        return float(1 / np.sqrt(2 * np.pi * np.min(v)))

    def x_quadrature(self, thetas):
        sd = np.sqrt(_as_float(thetas))
        return _gauss_x_quadrature(np.full_like(sd, self.known_mean), sd)

    def kl(self, a, b):
        q = _as_float(a) / _as_float(b)
        return 0.5 * (q - 1 - np.log(q))

    def hellinger_sq(self, a, b, convention="standard"):
        self._standard_only(convention)
        a, b = _as_float(a), _as_float(b)
        return 1 - np.sqrt(2 * np.sqrt(a * b) / (a + b))

    def conjugate(self, dof=1.0, scale=1.0):
        return self.check_params(ConjugateParams("scaled-inv-chi2", (dof * scale,), dof))

    def conventional(self, params):
        return {"dof": params.nu, "scale": params.chi[0] / params.nu}

    def prior_log_kernel(self, params, v):
        p = self.conventional(params)
        v = _as_float(v)
        return -(1 + p["dof"] / 2) * np.log(v) - p["dof"] * p["scale"] / (2 * v)

    def prior_log_norm(self, params):
        h = params.nu / 2
        return h * np.log(params.chi[0] / 2) - gammaln(h)

    def prior_moments(self, params):
        p = self.conventional(params)
        nu, s = p["dof"], p["scale"]
        mean = nu * s / (nu - 2) if nu > 2 else np.inf
        var = 2 * nu**2 * s**2 / ((nu - 2) ** 2 * (nu - 4)) if nu > 4 else np.inf
        return np.array([mean]), np.array([var])


class GaussianMeanVariance(ExpFamilyModel):
    """N(mu, v) with both unknown; conjugate Normal-Inverse-Gamma(m, lam, alpha, beta).

    The statistic is ``(x, x^2, 1)`` with natural parameter
    ``(mu/v, -1/(2v), -log(v)/2)`` and log-partition ``mu^2 / (2v)``.
    Bijection: ``chi = (lam m, lam m^2 + 2 beta, 2 alpha + 1)``, ``nu = lam``;
    prior base measure ``dmu dv / v``.
    """

    family = "gaussian-mean-variance"
    conjugate_family = "normal-inverse-gamma"
    prior_names = ("mean", "lam", "alpha", "beta")
    support = "real line"
    param_dim = 2
    stat_dim = 3
    _positive = ("lam", "alpha", "beta")

    def _log_density(self, theta, x):
        mu, v = theta[..., 0], theta[..., 1]
        return -0.5 * (_LOG_2PI + np.log(v)) - (x - mu) ** 2 / (2 * v)

    def _stat(self, x):
        x = np.asarray(x, dtype=float)
        return np.stack([x, x * x, np.ones_like(x)], axis=-1)

    def natural_param(self, theta):
        theta = _as_float(theta)
        mu, v = theta[..., 0], theta[..., 1]
        return np.stack([mu / v, -0.5 / v, -0.5 * np.log(v)], axis=-1)

    def log_partition(self, theta):
        theta = _as_float(theta)
        return theta[..., 0] ** 2 / (2 * theta[..., 1])

    def log_base(self, x):
        return np.full_like(_as_float(x), -0.5 * _LOG_2PI)

    def sample(self, theta, rng, size=None):
        return rng.normal(theta[0], np.sqrt(theta[1]), size)

    def mean(self, theta):
        return _as_float(theta)[..., 0]

    def variance(self, theta):
        return _as_float(theta)[..., 1]

    def density_sup(self, theta):
        theta = _as_float(theta)
        return float(1 / np.sqrt(2 * np.pi * np.min(theta[..., 1])))

    def x_quadrature(self, thetas):
        thetas = _as_float(thetas).reshape(-1, 2)
        return _gauss_x_quadrature(thetas[:, 0], np.sqrt(thetas[:, 1]))

    def kl(self, a, b):
        a, b = _as_float(a), _as_float(b)
        ma, va, mb, vb = a[..., 0], a[..., 1], b[..., 0], b[..., 1]
        return 0.5 * (np.log(vb / va) + (va + (ma - mb) ** 2) / vb - 1)

    def hellinger_sq(self, a, b, convention="standard"):
        self._standard_only(convention)
        a, b = _as_float(a), _as_float(b)
        return 1 - _gauss_affinity(a[..., 0], a[..., 1], b[..., 0], b[..., 1])

    def conjugate(self, mean=0.0, lam=1.0, alpha=1.0, beta=1.0):
        chi = (lam * mean, lam * mean**2 + 2 * beta, 2 * alpha + 1)
        return self.check_params(ConjugateParams("normal-inverse-gamma", chi, lam))

    def conventional(self, params):
        lam = params.nu
        m = params.chi[0] / lam
        return {
            "mean": m,
            "lam": lam,
            "alpha": (params.chi[2] - 1) / 2,
            "beta": (params.chi[1] - lam * m * m) / 2,
        }

    def prior_log_kernel(self, params, theta):
        p = self.conventional(params)
        theta = _as_float(theta)
        mu, v = theta[..., 0], theta[..., 1]
        return (
            -(p["alpha"] + 1.5) * np.log(v)
            - (p["lam"] * (mu - p["mean"]) ** 2 + 2 * p["beta"]) / (2 * v)
        )

    def prior_log_norm(self, params):
        p = self.conventional(params)
        return (0.5 * (np.log(p["lam"]) - _LOG_2PI) + p["alpha"] * np.log(p["beta"])
                - gammaln(p["alpha"]))

    def prior_moments(self, params):
        p = self.conventional(params)
        a, b, lam = p["alpha"], p["beta"], p["lam"]
        v_mean = b / (a - 1) if a > 1 else np.inf
        mu_var = v_mean / lam
        v_var = b * b / ((a - 1) ** 2 * (a - 2)) if a > 2 else np.inf
        return np.array([p["mean"], v_mean]), np.array([mu_var, v_var])


FAMILIES = {
    cls.family: cls
    for cls in (Bernoulli, Poisson, GaussianKnownVariance, GaussianKnownMean, GaussianMeanVariance)
}


def make_model(family: str, **known) -> ExpFamilyModel:
    """Build a model from its family tag, e.g. ``make_model("poisson")``."""
    try:
        cls = FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown family {family!r}; expected one of {sorted(FAMILIES)}") from None
    return cls(**known)


def log_density(m: ExpFamilyModel, theta, x):
    return m.log_density(theta, x)


def sample(m: ExpFamilyModel, theta, rng, size=None):
    return m.sample(theta, rng, size)


def geometric_pool(priors, weights, tol=1e-12) -> ConjugateParams:
    """Weighted geometric mean of conjugate densities, in closed form.

    The result has ``chi = sum_i w_i chi_i`` and ``nu = sum_i w_i nu_i``.

    Raises
    ------
    ValueError
        Mixed prior families, non-positive weights, or weights that do not
        sum to one.
    """
    priors = list(priors)
    w = np.asarray(weights, dtype=float)
    if len(priors) == 0 or len(priors) != len(w):
        raise ValueError("need one weight per prior")
    families = {p.family for p in priors}
    if len(families) > 1:
        raise ValueError(f"cannot pool mixed families {sorted(families)}")
    if np.any(w <= 0):
        raise ValueError("pooling weights must be positive")
    if abs(w.sum() - 1.0) > tol:
        raise ValueError(f"pooling weights must sum to 1, got {float(w.sum())!r}")
    chi = w @ np.array([p.chi for p in priors])
    nu = float(w @ np.array([p.nu for p in priors]))
    return ConjugateParams(priors[0].family, tuple(chi), nu)


def bayes_step(prior: ConjugateParams, x, m: ExpFamilyModel) -> ConjugateParams:
    """Posterior parameters after one observation: ``chi + T(x)``, ``nu + 1``.

    For the known-variance Gaussian the count increment is its precision.
    """
    m.check_params(prior)
    t = m.sufficient_stat(x)
    return ConjugateParams(prior.family, np.add(prior.chi, t), prior.nu + m.count_increment)


def density_sup_check(m: ExpFamilyModel, theta_grid) -> float:
    """Largest density value over observations and ``theta_grid``.

    Compare the result with 1 to check the bounded-density assumption.
    """
    return m.density_sup(np.asarray(theta_grid, dtype=float))
