import numpy as np
import pytest
import yaml

from coopinfer.cli import resolve_config, shipped_scenarios
from coopinfer.scenario import ConfigError, Scenario

from conftest import EXAMPLE_A
from test_beliefs import small_scenario


def base_dict():
    return small_scenario().to_dict()


def problems(d, base_dir="."):
    with pytest.raises(ConfigError) as e:
        Scenario.from_dict(d, base_dir)
    return dict(e.value.problems)


@pytest.mark.parametrize("name", ["example1", "example1-compact", "theorem1-small", "oracle"])
def test_shipped_scenarios_load(name):
    assert name in shipped_scenarios()
    s = Scenario.load(resolve_config(name))
    assert s.mixing_matrix.n == len(s.agents)


def test_example1_mixing_is_literal_matrix():
    s = Scenario.load(resolve_config("example1"))
    np.testing.assert_allclose(s.mixing_matrix.a, EXAMPLE_A, atol=1e-15)
    assert s.center_param.tolist() == [0.5]


def test_yaml_round_trip_and_hash():
    s = small_scenario()
    t = Scenario.from_yaml(s.to_yaml())
    assert t == s
    assert t.config_hash() == s.config_hash()
    assert s.with_overrides(seed=99).config_hash() != s.config_hash()
    assert s.with_overrides(seed=None) == s


def test_missing_required_key():
    d = base_dict()
    del d["seed"]
    assert problems(d)["seed"] == "missing required key"


def test_unknown_top_level_key():
    d = base_dict()
    d["colour"] = "blue"
    assert "colour" in problems(d)


def test_scalar_ranges_reported_together():
    d = base_dict()
    d.update(sigma=1.5, radius=0.0, trials=0)
    p = problems(d)
    assert {"sigma", "radius", "trials"} <= set(p)


def test_agent_count_must_match_graph():
    d = base_dict()
    d["agents"] = d["agents"][:2]
    assert "2 agents listed" in problems(d)["agents"]


def test_gaussian_agent_needs_known_precision():
    d = base_dict()
    d["agents"] = [{"family": "gaussian-known-variance", "theta": 0.0}] * 3
    d["space"] = {"kind": "compact", "lo": [-1.0], "hi": [1.0], "resolution": 11}
    d["representation"] = "grid"
    d["center"] = [0.0]
    assert problems(d)["agents[0].precision"] == "missing required key"


def test_mixed_families_rejected():
    d = base_dict()
    d["agents"][0] = {"family": "poisson", "theta": 1.0}
    assert "share one family" in problems(d)["agents"]


def test_representation_space_mismatch():
    d = base_dict()
    d["representation"] = "grid"
    assert "compact" in problems(d)["representation"]


def test_conjugate_representation_needs_conjugate_prior():
    d = base_dict()
    d["representation"] = "conjugate"
    d["space"] = {"kind": "compact", "lo": [0.0], "hi": [1.0], "resolution": 11}
    assert "prior.kind" in problems(d)


def test_corrupted_mixing_matrix(tmp_path):
    d = base_dict()
    d["mixing"] = {"matrix": [[0.5, 0.5, 0.0], [0.5, 0.5, 0.0], [0.0, 0.0, 1.0]]}
    p = problems(d)
    assert "mixing" in p
    assert "sparsity" in p["mixing"] or "connectivity" in p["mixing"]


def test_mixing_from_file(tmp_path):
    path = tmp_path / "a.txt"
    np.savetxt(path, [[0.5, 0.25, 0.25], [0.25, 0.5, 0.25], [0.25, 0.25, 0.5]])
    d = base_dict()
    d["mixing"] = {"matrix": "a.txt"}
    s = Scenario.from_dict(d, tmp_path)
    assert s.mixing_matrix.a[0, 0] == 0.5


def test_edge_list_graph(tmp_path):
    (tmp_path / "g.txt").write_text("3\n1 2\n2 3\n3 1\n")
    d = base_dict()
    d["graph"] = {"edges": "g.txt"}
    s = Scenario.from_dict(d, tmp_path)
    assert len(s.graph_obj.edges) == 3
    d["graph"] = {"edges": "missing.txt"}
    assert "graph.edges" in problems(d, tmp_path)


def test_center_outside_space():
    d = base_dict()
    d["center"] = [0.4]
    assert "outside" in problems(d)["center"]


def test_default_center_minimises_objective():
    d = base_dict()
    del d["center"]
    s = Scenario.from_dict(d)
    assert s.center_param.tolist() == [0.5]


def test_bound_and_oracle_keys():
    d = base_dict()
    d["bound"] = {"theorem": 3, "speed": 1}
    d["oracle"] = {"probez": 10}
    p = problems(d)
    assert {"bound.theorem", "bound.speed", "oracle.probez"} <= set(p)


def test_from_yaml_rejects_non_mapping():
    with pytest.raises(ConfigError):
        Scenario.from_yaml("- 1\n- 2\n")


def test_yaml_output_is_plain():
    data = yaml.safe_load(small_scenario().to_yaml())
    assert data["graph"] == {"generator": "cycle", "n": 3}
