import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coopinfer.expfam import make_model
from coopinfer.metrics import (
    AffinityError,
    Covering,
    HypothesisSpace,
    affinity,
    affinity_floor,
    build_covering,
    greedy_cover,
    halving_schedule,
    hellinger_sq,
    hellinger_sq_quadrature,
    in_ball,
    kl_divergence,
    kl_quadrature,
    load_covering,
    minimize_objective,
    n_hellinger_dist,
    objective,
    save_covering,
)

from conftest import EXAMPLE_THETAS

BERN4 = [make_model("bernoulli")] * 4

CLOSED_FORM_CASES = [
    ("bernoulli", {}, 0.3, 0.7),
    ("poisson", {}, 1.5, 4.0),
    ("gaussian-known-variance", {"precision": 2.0}, 0.0, 1.2),
    ("gaussian-known-mean", {"mean": 0.5}, 0.7, 2.5),
    ("gaussian-mean-variance", {}, np.array([0.0, 1.0]), np.array([0.8, 2.0])),
]


# -- spaces -------------------------------------------------------------------


def test_finite_space():
    s = HypothesisSpace.finite([0.5, 0.2, 0.8])
    assert s.size == 3 and s.dim == 1
    assert s.nearest(0.25) == 1
    assert s.contains(0.8) and not s.contains(0.3)
    assert s.describe() == {"kind": "finite", "points": [0.5, 0.2, 0.8]}


def test_finite_space_rejects_duplicates_and_empty():
    with pytest.raises(ValueError, match="duplicate"):
        HypothesisSpace.finite([0.1, 0.1])
    with pytest.raises(ValueError):
        HypothesisSpace.finite([])


def test_box_weights_integrate_polynomials():
    s = HypothesisSpace.box([0.0], [2.0], 201)
    assert s.weights.sum() == pytest.approx(2.0)
    assert np.sum(s.weights * s.params) == pytest.approx(2.0)


def test_box_two_dimensional():
    s = HypothesisSpace.box([0, 1], [1, 3], [5, 9])
    assert s.points.shape == (45, 2)
    assert s.weights.sum() == pytest.approx(2.0)
    assert s.contains([0.5, 2.0]) and not s.contains([0.5, 3.5])


@pytest.mark.parametrize("lo,hi,res,msg", [
    ([1.0], [0.0], 5, "degenerate"),
    ([0.0], [1.0], 1, "at least 2"),
    ([0.0, 0.0], [1.0], 5, "matching"),
])
def test_box_errors(lo, hi, res, msg):
    with pytest.raises(ValueError, match=msg):
        HypothesisSpace.box(lo, hi, res)


# -- divergences -----------------------------------------------------------------


@pytest.mark.parametrize("family,known,a,b", CLOSED_FORM_CASES)
def test_kl_closed_form_matches_quadrature(family, known, a, b):
    m = make_model(family, **known)
    assert float(kl_divergence(m, a, b)) == pytest.approx(kl_quadrature(m, a, b), rel=1e-6, abs=1e-10)


@pytest.mark.parametrize("family,known,a,b", CLOSED_FORM_CASES)
def test_hellinger_closed_form_matches_quadrature(family, known, a, b):
    m = make_model(family, **known)
    assert float(hellinger_sq(m, a, b)) == pytest.approx(hellinger_sq_quadrature(m, a, b), rel=1e-6)
    assert float(affinity(m, a, b)) == pytest.approx(1 - float(hellinger_sq(m, a, b)))


def test_bernoulli_values_by_hand():
    m = make_model("bernoulli")
    # 1 - (sqrt(.3*.7) + sqrt(.7*.3))
    assert float(hellinger_sq(m, 0.3, 0.7)) == pytest.approx(1 - 2 * np.sqrt(0.21))
    assert float(kl_divergence(m, 0.3, 0.7)) == pytest.approx(
        0.3 * np.log(0.3 / 0.7) + 0.7 * np.log(0.7 / 0.3))


def test_gaussian_quarter_convention():
    m = make_model("gaussian-known-variance", precision=1.0)
    assert float(hellinger_sq(m, 0.0, 2.0, convention="quarter")) == pytest.approx(1 - np.exp(-1))
    assert float(hellinger_sq(m, 0.0, 2.0)) == pytest.approx(1 - np.exp(-0.5))
    with pytest.raises(ValueError):
        hellinger_sq(make_model("poisson"), 1.0, 2.0, convention="quarter")


def test_affinity_floor_values():
    s = HypothesisSpace.finite([0.2, 0.8])
    assert affinity_floor(BERN4, s) == pytest.approx(2 * np.sqrt(0.16))
    assert affinity_floor(BERN4, HypothesisSpace.finite([0.3])) == 1.0


def test_affinity_floor_singular_pair():
    with pytest.raises(AffinityError, match="mutually singular"):
        affinity_floor(BERN4, HypothesisSpace.finite([0.0, 1.0]))


# -- objective -------------------------------------------------------------------


def test_objective_minimised_at_one_half():
    s = HypothesisSpace.box([0.001], [0.999], 999)
    theta, val = minimize_objective(BERN4, EXAMPLE_THETAS, s)
    assert theta == pytest.approx(0.5, abs=1e-3)
    direct = sum(0.5 * np.log(0.5 / t) + 0.5 * np.log(0.5 / (1 - t)) for t in EXAMPLE_THETAS)
    assert val == pytest.approx(direct, rel=1e-6)


def test_objective_argument_order():
    m = make_model("bernoulli")
    got = float(objective([m], [0.2], 0.6))
    assert got == pytest.approx(float(m.kl(0.6, 0.2)))
    assert got != pytest.approx(float(m.kl(0.2, 0.6)))


def test_objective_infinite_term():
    with pytest.raises(ValueError, match=r"P\(0\.5\) not dominated by P\(0\.0\)"):
        objective([make_model("bernoulli")], [0.0], 0.5)


# -- balls and coverings ------------------------------------------------------------


def test_n_hellinger_dist_is_rms():
    m1, m2 = make_model("bernoulli"), make_model("bernoulli")
    d = float(n_hellinger_dist([m1, m2], 0.3, 0.7))
    assert d == pytest.approx(np.sqrt(float(m1.hellinger_sq(0.3, 0.7))))


def test_in_ball_mask():
    s = HypothesisSpace.finite([0.5, 0.52, 0.9])
    assert in_ball(BERN4, s, 0.5, 0.1).tolist() == [True, True, False]


def test_halving_schedule():
    assert halving_schedule(0.2) == [1.0, 0.5, 0.25, 0.2]
    assert halving_schedule(0.5) == [1.0, 0.5]
    assert halving_schedule(1.0) == [1.0]


def test_covering_validation():
    with pytest.raises(ValueError, match="first radius"):
        Covering("countable", [0.9, 0.1], [1])
    with pytest.raises(ValueError, match="decreasing"):
        Covering("countable", [1.0, 0.5, 0.6], [1, 1])
    with pytest.raises(ValueError, match="one count"):
        Covering("countable", [1.0, 0.5], [1, 2])


def test_covering_round_trip(tmp_path):
    cov = Covering("compact", [1.0, 0.5, 0.1], [3, 4], [0.25, 0.05])
    save_covering(cov, tmp_path / "c.json")
    assert load_covering(tmp_path / "c.json") == cov


def test_countable_covering_counts():
    m = make_model("bernoulli")
    s = HypothesisSpace.finite([0.5, 0.2, 0.8])
    cov = build_covering([m], s, 0.1, 0.5, schedule=[1.0, 0.1])
    assert cov.kind == "countable" and cov.counts == (2,)


def test_compact_covering_balls_cover_annulus():
    models = BERN4
    s = HypothesisSpace.box([0.01], [0.99], 401)
    cov = build_covering(models, s, 0.1, 0.5)
    assert cov.radii == tuple(halving_schedule(0.1))
    assert len(cov.ball_radii) == len(cov.counts)
    dist = n_hellinger_dist(models, s.points, np.array([[0.5]]))
    for (outer, inner), c in zip(zip(cov.radii, cov.radii[1:]), cov.counts):
        occupied = np.any((dist <= outer) & (dist > inner))
        assert (c >= 1) == occupied


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(0.01, 0.99), min_size=1, max_size=40, unique=True), st.floats(0.02, 0.5))
def test_greedy_cover_property(values, eps):
    pts = np.array(values)[:, None]
    centres = greedy_cover(BERN4, pts, eps)
    d = n_hellinger_dist(BERN4, pts[:, None, :], pts[centres][None, :, :])
    assert np.all(d.min(axis=1) <= eps + 1e-12)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_n_hellinger_triangle_inequality(a, b, c):
    d = lambda x, y: float(n_hellinger_dist(BERN4, x, y))
    assert d(a, c) <= d(a, b) + d(b, c) + 1e-12
    assert 0 <= d(a, b) <= 1
