"""
Information metrics, hypothesis spaces and annulus coverings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .expfam import ExpFamilyModel


class AffinityError(ValueError):
    """Two hypotheses give (numerically) mutually singular distributions."""


@dataclass(frozen=True, eq=False)
class HypothesisSpace:
    """Parameter set, either a finite list or a gridded compact box.

    Use :meth:`finite` or :meth:`box` to build one. ``points`` always has
    shape ``(m, d)``; ``weights`` are quadrature weights (all ones for a
    finite space).
    """

    kind: str
    points: np.ndarray
    weights: np.ndarray
    lo: tuple = ()
    hi: tuple = ()
    resolution: tuple = ()

    @classmethod
    def finite(cls, values):
        pts = np.asarray(values, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or len(pts) == 0:
            raise ValueError("finite hypothesis space must be a nonempty list of parameters")
        if len(np.unique(pts, axis=0)) != len(pts):
            raise ValueError("finite hypothesis space has duplicate entries")
        return cls("finite", pts, np.ones(len(pts)))

    @classmethod
    def box(cls, lo, hi, resolution):
        """Tensor trapezoid grid on ``[lo, hi]`` with ``resolution`` points per axis."""
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        res = np.broadcast_to(np.atleast_1d(resolution), lo.shape).astype(int)
        if lo.shape != hi.shape:
            raise ValueError("box bounds must have matching dimensions")
        if np.any(hi <= lo):
            raise ValueError(f"degenerate box [{lo.tolist()}, {hi.tolist()}]")
        if np.any(res < 2):
            raise ValueError("grid resolution must be at least 2 points per axis")
        axes, axis_w = [], []
        for a, b, r in zip(lo, hi, res):
            x = np.linspace(a, b, r)
            w = np.full(r, x[1] - x[0])
            w[0] = w[-1] = w[0] / 2
            axes.append(x)
            axis_w.append(w)
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        wmesh = np.meshgrid(*axis_w, indexing="ij")
        w = np.prod(np.stack([m.ravel() for m in wmesh], axis=-1), axis=-1)
        return cls("compact", pts, w, tuple(lo), tuple(hi), tuple(int(r) for r in res))

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def params(self) -> np.ndarray:
        """Points shaped for model calls: ``(m,)`` when ``d == 1`` else ``(m, d)``."""
        return self.points[:, 0] if self.dim == 1 else self.points

    @property
    def log_weights(self) -> np.ndarray:
        return np.log(self.weights)

    def nearest(self, theta) -> int:
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        return int(np.argmin(((self.points - theta) ** 2).sum(axis=1)))

    def contains(self, theta) -> bool:
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if self.kind == "finite":
            return bool(np.any(np.all(np.isclose(self.points, theta), axis=1)))
        return bool(np.all(theta >= np.array(self.lo)) and np.all(theta <= np.array(self.hi)))

    def describe(self) -> dict:
        if self.kind == "finite":
            vals = self.params.tolist()
            return {"kind": "finite", "points": vals}
        one = len(self.lo) == 1
        return {
            "kind": "compact",
            "lo": self.lo[0] if one else list(self.lo),
            "hi": self.hi[0] if one else list(self.hi),
            "resolution": self.resolution[0] if one else list(self.resolution),
        }


def _pt(model: ExpFamilyModel, theta):
    theta = np.asarray(theta, dtype=float)
    if model.param_dim == 1 and theta.ndim and theta.shape[-1] == 1:
        return theta[..., 0]
    return theta


def kl_divergence(m: ExpFamilyModel, theta_a, theta_b):
    """``KL(P_a || P_b)`` in nats, closed form."""
    return m.kl(theta_a, theta_b)


def hellinger_sq(m: ExpFamilyModel, theta_a, theta_b, convention="standard"):
    """Squared Hellinger distance ``1/2 int (sqrt p - sqrt q)^2``, closed form.

    ``convention="quarter"`` is only defined for the known-variance Gaussian
    and returns ``1 - exp(-tau d^2 / 4)``.
    """
    return m.hellinger_sq(theta_a, theta_b, convention)


def affinity(m: ExpFamilyModel, theta_a, theta_b):
    return 1.0 - hellinger_sq(m, theta_a, theta_b)


def hellinger_sq_quadrature(m: ExpFamilyModel, theta_a, theta_b) -> float:
    """Squared Hellinger distance by summation or trapezoid quadrature over ``x``."""
    a = np.asarray(theta_a, dtype=float)
    b = np.asarray(theta_b, dtype=float)
    xs, w = m.x_quadrature(np.stack([a, b]))
    pa = np.exp(m.log_density(a, xs))
    pb = np.exp(m.log_density(b, xs))
    return float(0.5 * np.sum(w * (np.sqrt(pa) - np.sqrt(pb)) ** 2))


def kl_quadrature(m: ExpFamilyModel, theta_a, theta_b) -> float:
    a = np.asarray(theta_a, dtype=float)
    b = np.asarray(theta_b, dtype=float)
    xs, w = m.x_quadrature(np.stack([a, b]))
    la = m.log_density(a, xs)
    lb = m.log_density(b, xs)
    pa = np.exp(la)
    terms = np.where(pa > 0, pa * (la - lb), 0.0)
    return float(np.sum(w * terms))


def affinity_floor(models, space: HypothesisSpace) -> float:
    """Smallest Hellinger affinity over agents and pairs of hypotheses.

    Raises
    ------
    AffinityError
        If some pair has affinity ``<= 0``.
    """
    if space.size == 1:
        return 1.0
    best = np.inf
    worst = None
    pts = space.points
    for i, m in enumerate(models):
        for s in range(0, len(pts), 512):
            block = pts[s:s + 512]
            h2 = m.hellinger_sq(_pt(m, block[:, None, :]), _pt(m, pts[None, :, :]))
            rho = 1.0 - h2
            j = np.unravel_index(np.argmin(rho), rho.shape)
            if rho[j] < best:
                best = float(rho[j])
                worst = (i, s + j[0], j[1])
    if not best > 0:
        i, p, q = worst
        raise AffinityError(
            f"agent {i + 1}: hypotheses {pts[p].tolist()} and {pts[q].tolist()} "
            f"are mutually singular (affinity {best!r})"
        )
    return best


def objective(models, true_params, theta) -> np.ndarray:
    """Sum over agents of ``KL(P^i_theta || P^i_{true_i})``.

    The argument order follows the worked Bernoulli example: the candidate
    is the first argument.
    """
    total = 0.0
    for m, t in zip(models, true_params):
        total = total + m.kl(_pt(m, theta), np.asarray(t, dtype=float))
    total = np.asarray(total, dtype=float)
    if not np.all(np.isfinite(total)):
        raise ValueError("objective has an infinite term")
    return total


def minimize_objective(models, true_params, space: HypothesisSpace):
    """Exhaustive grid argmin of :func:`objective`; ties go to the smallest index."""
    vals = objective(models, true_params, space.points)
    k = int(np.argmin(vals))
    return space.params[k], float(vals[k])


def n_hellinger_dist(models, theta_a, theta_b):
    """Root-mean-square per-agent Hellinger distance between two parameters."""
    h2 = 0.0
    for m in models:
        h2 = h2 + m.hellinger_sq(_pt(m, theta_a), _pt(m, theta_b))
    return np.sqrt(np.clip(h2 / len(models), 0.0, None))


def in_ball(models, space: HypothesisSpace, center, r) -> np.ndarray:
    """Boolean mask of grid points within n-Hellinger distance ``r`` of ``center``."""
    c = np.atleast_1d(np.asarray(center, dtype=float))
    return n_hellinger_dist(models, space.points, c[None, :]) <= r


def halving_schedule(r) -> list[float]:
    """``1, 1/2, 1/4, ...`` while above ``r``, then ``r``."""
    radii = []
    x = 1.0
    while x > r:
        radii.append(x)
        x /= 2
    radii.append(float(r))
    return radii


@dataclass(frozen=True)
class Covering:
    """Annulus decomposition of the exterior of a ball of radius ``radii[-1]``.

    ``counts[l]`` refers to the annulus between ``radii[l]`` (outer, closed)
    and ``radii[l + 1]`` (inner, open). For a countable space it is the
    number of hypotheses in the annulus; for a compact space it is the number
    of balls of radius ``ball_radii[l]`` used to cover it.
    """

    kind: str
    radii: tuple
    counts: tuple
    ball_radii: tuple = field(default=())

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        object.__setattr__(self, "ball_radii", tuple(float(b) for b in self.ball_radii))
        if self.kind not in ("countable", "compact"):
            raise ValueError(f"unknown covering kind {self.kind!r}")
        if len(radii) < 2:
            raise ValueError("a covering needs at least two radii")
        if radii[0] != 1.0:
            raise ValueError(f"first radius must be 1, got {radii[0]!r}")
        if any(b >= a for a, b in zip(radii, radii[1:])):
            raise ValueError("radii must be strictly decreasing")
        if len(self.counts) != len(radii) - 1:
            raise ValueError("need one count per annulus")
        if any(c < 0 for c in self.counts):
            raise ValueError("counts must be nonnegative")

    @property
    def r(self) -> float:
        return self.radii[-1]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "radii": list(self.radii),
            "counts": list(self.counts),
            "ball_radii": list(self.ball_radii),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["kind"], d["radii"], d["counts"], d.get("ball_radii", ()))


def save_covering(cov: Covering, path) -> None:
    Path(path).write_text(json.dumps(cov.to_dict(), indent=2) + "\n")


def load_covering(path) -> Covering:
    return Covering.from_dict(json.loads(Path(path).read_text()))


def _pairwise(models, a, b):
    return n_hellinger_dist(models, a[:, None, :], b[None, :, :])


def greedy_cover(models, points, eps, block=256) -> np.ndarray:
    """Indices of centres such that every point lies within ``eps`` of one.

    Repeatedly takes the first uncovered point and, among points within
    ``eps`` of it, the centre covering the most still-uncovered points
    (ties to the smallest index).
    """
    m = len(points)
    uncovered = np.ones(m, dtype=bool)
    centres = []
    while uncovered.any():
        p = int(np.argmax(uncovered))
        near = np.flatnonzero(_pairwise(models, points[p:p + 1], points)[0] <= eps)
        best, best_gain, best_cover = -1, -1, None
        for s in range(0, len(near), block):
            idx = near[s:s + block]
            cover = _pairwise(models, points[idx], points) <= eps
            gain = (cover & uncovered).sum(axis=1)
            j = int(np.argmax(gain))
            if gain[j] > best_gain:
                best, best_gain, best_cover = int(idx[j]), int(gain[j]), cover[j]
        centres.append(best)
        uncovered &= ~best_cover
    return np.array(centres, dtype=int)


def build_covering(models, space: HypothesisSpace, r, center, schedule="halving",
                   ball_radius="inner") -> Covering:
    """Annulus covering of the exterior of the n-Hellinger ball ``B_r(center)``.

    Parameters
    ----------
    models : list of ExpFamilyModel
        One per agent.
    space : HypothesisSpace
        Finite spaces give hypothesis counts; compact grids give covering
        numbers from :func:`greedy_cover`.
    r : float
        Target radius in ``(0, 1]``.
    center : parameter
        Ball centre.
    schedule : "halving" or sequence of float
        Radii ``1 = r_1 > ... > r_L = r``.
    ball_radius : {"inner", "outer"}
        Covering-ball radius for annulus ``l``: ``r_{l+1} / 2`` or ``r_l / 2``.
    """
    if not 0 < r <= 1:
        raise ValueError(f"radius must lie in (0, 1], got {r!r}")
    if isinstance(schedule, str):
        if schedule != "halving":
            raise ValueError(f"unknown schedule {schedule!r}")
        radii = halving_schedule(r)
    else:
        radii = [float(x) for x in schedule]
    if abs(radii[-1] - r) > 1e-15:
        raise ValueError(f"schedule must end at r = {r!r}, got {radii[-1]!r}")
    if ball_radius not in ("inner", "outer"):
        raise ValueError(f"ball_radius must be 'inner' or 'outer', got {ball_radius!r}")
    c = np.atleast_1d(np.asarray(center, dtype=float))
    dist = n_hellinger_dist(models, space.points, c[None, :])
    counts, balls = [], []
    for outer, inner in zip(radii, radii[1:]):
        mask = (dist <= outer) & (dist > inner)
        if space.kind == "finite":
            counts.append(int(mask.sum()))
            continue
        eps = (inner if ball_radius == "inner" else outer) / 2
        balls.append(eps)
        counts.append(len(greedy_cover(models, space.points[mask], eps)) if mask.any() else 0)
    kind = "countable" if space.kind == "finite" else "compact"
    return Covering(kind, radii, counts, balls)
