import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coopinfer.beliefs import (
    Belief,
    NetworkState,
    ZeroMassError,
    agent_rngs,
    centralized_bayes_step,
    closed_form_update,
    distributed_step,
    draw_observations,
    final_state,
    mirror_descent_oracle,
    mirror_objective,
    normalize_log,
    outside_mass_trajectory,
    pool_log,
    rasterize,
    rasterize_all,
    run_trial,
)
from coopinfer.expfam import make_model
from coopinfer.metrics import HypothesisSpace
from coopinfer.network import MixingMatrix, build_lazy_metropolis, complete_graph
from coopinfer.scenario import Scenario

from conftest import EXAMPLE_A, EXAMPLE_THETAS

BERN = make_model("bernoulli")


def small_scenario(**kw):
    d = {
        "graph": {"generator": "cycle", "n": 3},
        "mixing": "lazy-metropolis",
        "agents": [{"family": "bernoulli", "theta": t} for t in (0.3, 0.5, 0.7)],
        "space": {"kind": "finite", "values": [0.1, 0.3, 0.5, 0.7, 0.9]},
        "prior": {"kind": "uniform"},
        "representation": "finite",
        "horizon": 40,
        "radius": 0.1,
        "center": [0.5],
        "covering": {"schedule": "halving"},
        "sigma": 0.05,
        "epsilon": 1.0,
        "C": 1.0,
        "seed": 5,
        "trials": 2,
    }
    d.update(kw)
    return Scenario.from_dict(d)


# -- log-weight helpers ----------------------------------------------------------


def test_normalize_log_finite_and_weighted():
    out = normalize_log(np.log([1.0, 3.0]), 0.0)
    np.testing.assert_allclose(np.exp(out), [0.25, 0.75])
    out = normalize_log(np.zeros(3), np.log([0.5, 1.0, 0.5]))
    assert np.exp(out + np.log([0.5, 1.0, 0.5])).sum() == pytest.approx(1.0)


def test_normalize_log_zero_mass():
    with pytest.raises(ZeroMassError):
        normalize_log(np.full(3, -np.inf), 0.0)


def test_normalize_log_floor():
    out = normalize_log(np.array([0.0, -2000.0]), 0.0, floor=-745.0)
    assert out[1] == -745.0


def test_pool_log_zero_weight_ignores_neg_inf():
    lw = np.array([[0.0, -np.inf], [-1.0, -1.0]])
    a = np.array([[1.0, 0.0], [0.5, 0.5]])
    out = pool_log(a, lw)
    assert out[0, 1] == -np.inf
    np.testing.assert_allclose(out[1], [-0.5, -np.inf])


def test_pool_log_matches_matmul_without_infinities(rng):
    lw = rng.normal(size=(4, 6))
    np.testing.assert_allclose(pool_log(EXAMPLE_A, lw), EXAMPLE_A @ lw)


# -- beliefs ---------------------------------------------------------------------


def test_uniform_belief_masses():
    b = Belief.uniform(HypothesisSpace.finite([0.2, 0.5, 0.8]))
    np.testing.assert_allclose(b.masses(), [1 / 3] * 3)
    g = Belief.uniform(HypothesisSpace.box([0.0], [1.0], 11))
    assert g.masses().sum() == pytest.approx(1.0)
    assert g.moments()[0][0] == pytest.approx(0.5)


def test_rasterize_beta_moments():
    space = HypothesisSpace.box([0.0], [1.0], 4097)
    p = BERN.conjugate(a=3.0, b=5.0)
    b = Belief("grid", space, rasterize(BERN, p, space))
    mean, var = b.moments()
    ref_mean, ref_var = BERN.prior_moments(p)
    assert mean[0] == pytest.approx(ref_mean[0], abs=1e-6)
    assert var[0] == pytest.approx(ref_var[0], abs=1e-6)


def test_rasterize_all_matches_rows():
    space = HypothesisSpace.box([0.01], [0.99], 101)
    ps = [BERN.conjugate(a=a, b=b) for a, b in [(1, 1), (2, 5), (7, 3)]]
    chi = np.array([p.chi for p in ps])
    nu = np.array([p.nu for p in ps])
    rows = rasterize_all(BERN, chi, nu, space)
    for i, p in enumerate(ps):
        np.testing.assert_allclose(rows[i], rasterize(BERN, p, space), atol=1e-12)


def test_centralized_step_finite():
    space = HypothesisSpace.finite([0.2, 0.8])
    b = centralized_bayes_step(Belief.uniform(space), [1, 1], [BERN, BERN])
    np.testing.assert_allclose(b.masses(), [0.04 / 0.68, 0.64 / 0.68])


def test_centralized_step_rejects_conjugate():
    with pytest.raises(ValueError):
        centralized_bayes_step(Belief.conjugate(BERN.conjugate()), [1], [BERN])


# -- network state ---------------------------------------------------------------


def test_initial_state_validation():
    a = MixingMatrix(EXAMPLE_A)
    with pytest.raises(ValueError, match="4 agents"):
        NetworkState.initial([BERN] * 3, a, "finite", HypothesisSpace.finite([0.5]))
    with pytest.raises(ValueError, match="hypothesis space"):
        NetworkState.initial([BERN] * 4, a, "finite")
    with pytest.raises(ValueError, match="compact space"):
        NetworkState.initial([BERN] * 4, a, "grid", HypothesisSpace.finite([0.5]))
    with pytest.raises(ValueError, match="one conjugate family"):
        NetworkState.initial([BERN, BERN, BERN, make_model("poisson")], a, "conjugate",
                             None, BERN.conjugate())


def test_single_agent_equals_centralised():
    space = HypothesisSpace.finite([0.2, 0.5, 0.8])
    s = NetworkState.initial([BERN], MixingMatrix([[1.0]]), "finite", space)
    b = Belief.uniform(space)
    for x in [1, 0, 0, 1, 1, 1, 0]:
        s = distributed_step(s, [x])
        b = centralized_bayes_step(b, [x], [BERN])
    np.testing.assert_allclose(s.belief(0).masses(), b.masses(), rtol=1e-12)
    assert s.k == 7


def test_distributed_finite_matches_literal_formula():
    space = HypothesisSpace.finite([0.2, 0.5, 0.8])
    s0 = NetworkState.initial([BERN] * 4, MixingMatrix(EXAMPLE_A), "finite", space)
    rng = np.random.default_rng(0)
    xs = rng.integers(0, 2, size=(5, 4))
    s = s0
    mu = np.full((4, 3), 1 / 3)
    th = space.params
    for x in xs:
        s = distributed_step(s, x)
        new = np.empty_like(mu)
        for i in range(4):
            un = np.prod(mu ** EXAMPLE_A[i][:, None], axis=0) * th ** x[i] * (1 - th) ** (1 - x[i])
            new[i] = un / un.sum()
        mu = new
    np.testing.assert_allclose(np.exp(s.log_masses()), mu, rtol=1e-10)


def test_grid_tracks_conjugate():
    space = HypothesisSpace.box([0.0], [1.0], 2049)
    a = MixingMatrix(EXAMPLE_A)
    g = NetworkState.initial([BERN] * 4, a, "grid", space)
    c = NetworkState.initial([BERN] * 4, a, "conjugate", space, BERN.conjugate(a=1, b=1))
    xs = draw_observations([BERN] * 4, EXAMPLE_THETAS, 30, seed=1)
    for x in xs:
        g, c = distributed_step(g, x), distributed_step(c, x)
    np.testing.assert_allclose(np.exp(g.log_masses()), np.exp(c.log_masses()), atol=1e-5)


def test_distributed_step_is_pure():
    space = HypothesisSpace.finite([0.2, 0.8])
    s = NetworkState.initial([BERN] * 2, build_lazy_metropolis(complete_graph(2)), "finite", space)
    before = s.log_weights.copy()
    distributed_step(s, [1, 0])
    assert np.array_equal(s.log_weights, before) and s.k == 0


# -- randomness ------------------------------------------------------------------


def test_agent_streams_are_reproducible_and_distinct():
    a = [r.random() for r in agent_rngs(3, 0, 3)]
    b = [r.random() for r in agent_rngs(3, 0, 3)]
    c = [r.random() for r in agent_rngs(3, 1, 3)]
    assert a == b
    assert len(set(a)) == 3 and a != c


def test_draw_observations_shape_and_prefix():
    xs = draw_observations([BERN] * 4, EXAMPLE_THETAS, 50, seed=9, trial=2)
    assert xs.shape == (50, 4)
    assert set(np.unique(xs)) <= {0.0, 1.0}
    # one agent's stream does not depend on how many agents there are
    ys = draw_observations([BERN] * 2, EXAMPLE_THETAS[:2], 50, seed=9, trial=2)
    np.testing.assert_array_equal(xs[:, :2], ys)


# -- trials ----------------------------------------------------------------------


def test_run_trial_rows():
    s = small_scenario()
    rows = run_trial(s, horizon=10, record_every=4)
    ks = sorted({r.k for r in rows})
    assert ks == [0, 4, 8, 10]
    assert len(rows) == 4 * 3
    first = [r for r in rows if r.k == 0]
    assert all(r.post_mean == pytest.approx(0.5) for r in first)
    assert all(r.tv_to_agent1 == 0 for r in first)


def test_run_trial_reproducible():
    s = small_scenario()
    assert run_trial(s, trial=1) == run_trial(s, trial=1)
    assert run_trial(s, trial=0) != run_trial(s, trial=1)


def test_final_state_matches_trajectory():
    s = small_scenario()
    st_ = final_state(s, horizon=15)
    rows = [r for r in run_trial(s, horizon=15) if r.k == 15]
    means = [float(st_.belief(i).moments()[0][0]) for i in range(3)]
    assert [r.post_mean for r in rows] == pytest.approx(means)


def test_outside_mass_trajectory_consistent_with_ball_mass():
    s = small_scenario()
    lo = outside_mass_trajectory(s, 20, s.seed)
    rows = run_trial(s, horizon=20)
    assert lo.shape == (21, 3)
    for r in rows:
        assert np.exp(lo[r.k, r.agent - 1]) == pytest.approx(1 - r.mass_in_ball, abs=1e-12)


# -- mirror descent ----------------------------------------------------------------


def _random_inputs(rng, n=3, m=6):
    log_mus = np.log(rng.dirichlet(np.ones(m), size=n))
    a_row = rng.dirichlet(np.ones(n))
    loglik = np.log(rng.uniform(0.05, 1, size=m))
    return log_mus, a_row, loglik


def test_closed_form_is_normalised(rng):
    log_mus, a_row, loglik = _random_inputs(rng)
    p = closed_form_update(loglik, a_row, log_mus)
    assert p.sum() == pytest.approx(1.0) and np.all(p > 0)


def test_oracle_passes_on_random_inputs(rng):
    log_mus, a_row, loglik = _random_inputs(rng)
    res = mirror_descent_oracle(log_mus, a_row, loglik, trials=500, rng=rng)
    assert res.passed and res.margin >= -1e-9
    assert res.probes == 500 + 10 * 10


def test_oracle_detects_wrong_scaling(rng):
    # the closed form only minimises the objective when the weights sum to one
    log_mus, a_row, loglik = _random_inputs(rng)
    res = mirror_descent_oracle(log_mus, 3 * a_row, loglik, trials=500, rng=rng)
    assert not res.passed


def test_oracle_drops_zero_weight_agents(rng):
    log_mus, _, loglik = _random_inputs(rng)
    log_mus[1, 2] = -np.inf
    res = mirror_descent_oracle(log_mus, np.array([0.6, 0.0, 0.4]), loglik, trials=200, rng=rng)
    assert res.passed


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_closed_form_beats_perturbations(seed):
    r = np.random.default_rng(seed)
    log_mus, a_row, loglik = _random_inputs(r)
    star = closed_form_update(loglik, a_row, log_mus)
    g_star = mirror_objective(star, loglik, a_row, log_mus)[0]
    q = star * np.exp(0.1 * r.standard_normal(star.size))
    q /= q.sum()
    assert mirror_objective(q, loglik, a_row, log_mus)[0] >= g_star - 1e-12
