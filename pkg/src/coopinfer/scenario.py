"""
Scenario configuration files.

A scenario is a YAML mapping. Unknown keys are rejected, and every problem
found is reported together with the dotted path of the offending key.

Example::

    graph: {generator: cycle, n: 4}
    mixing: lazy-metropolis
    agents:
      - {family: bernoulli, theta: 0.2}
      - {family: bernoulli, theta: 0.8}
    space: {kind: compact, lo: [0.0], hi: [1.0], resolution: 4097}
    prior: {kind: conjugate, params: {a: 1.0, b: 1.0}}
    representation: conjugate
    horizon: 5000
    radius: 0.05
    covering: {schedule: halving}
    sigma: 0.05
    epsilon: 1.0
    C: 1.0
    seed: 7
    trials: 20
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field, fields
from functools import cached_property
from pathlib import Path

import numpy as np
import yaml

from .beliefs import REPRESENTATIONS, Belief, NetworkState, rasterize
from .expfam import FAMILIES, make_model
from .metrics import Covering, HypothesisSpace, build_covering, in_ball, load_covering, minimize_objective
from .network import (
    GENERATORS,
    DisconnectedGraphError,
    Graph,
    MixingMatrix,
    build_lazy_metropolis,
    load_edge_list,
    validate_mixing,
)


class ConfigError(ValueError):
    """Invalid scenario; ``problems`` lists ``(key path, message)`` pairs."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("\n".join(f"{k}: {m}" for k, m in self.problems))


REQUIRED = ("graph", "mixing", "agents", "space", "prior", "representation", "horizon",
            "radius", "covering", "sigma", "epsilon", "C", "seed", "trials")
OPTIONAL = ("center", "bound", "oracle")
KNOWN_PARAMS = {
    "gaussian-known-variance": ("precision",),
    "gaussian-known-mean": ("mean",),
}
PRIOR_KINDS = ("uniform", "conjugate", "point")
BOUND_KEYS = ("theorem", "constants", "debug", "delta_scale", "max_rounds", "k_assumption5")
ORACLE_KEYS = ("probes", "warmup", "closure_rounds", "closure_resolution")


@dataclass(eq=True)
class Scenario:
    """Parsed scenario. Fields hold plain config values; derived objects are cached."""

    graph: dict
    mixing: object
    agents: list
    space: dict
    prior: dict
    representation: str
    horizon: int
    radius: float
    covering: dict
    sigma: float
    epsilon: float
    C: float
    seed: int
    trials: int
    center: list | None = None
    bound: dict = field(default_factory=dict)
    oracle: dict = field(default_factory=dict)
    base_dir: str = field(default=".", compare=False, repr=False)

    # -- parsing -----------------------------------------------------------

    @classmethod
    def from_dict(cls, d, base_dir=".") -> "Scenario":
        if not isinstance(d, dict):
            raise ConfigError([("<root>", "scenario must be a mapping")])
        problems = []
        for k in d:
            if k not in REQUIRED + OPTIONAL:
                problems.append((k, "unknown key"))
        for k in REQUIRED:
            if k not in d:
                problems.append((k, "missing required key"))
        if problems:
            raise ConfigError(problems)
        s = cls(**{k: copy.deepcopy(d[k]) for k in REQUIRED + OPTIONAL if k in d},
                base_dir=str(base_dir))
        s.bound = s.bound or {}
        s.oracle = s.oracle or {}
        s.validate()
        return s

    @classmethod
    def from_yaml(cls, text: str, base_dir=".") -> "Scenario":
        try:
            d = yaml.safe_load(text)
        except yaml.YAMLError as e:
            raise ConfigError([("<root>", f"not valid YAML: {e}")]) from None
        return cls.from_dict(d, base_dir)

    @classmethod
    def load(cls, path) -> "Scenario":
        path = Path(path)
        return cls.from_yaml(path.read_text(), path.parent)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            if f.name == "base_dir":
                continue
            v = getattr(self, f.name)
            if f.name in OPTIONAL and not v:
                continue
            out[f.name] = copy.deepcopy(v)
        return out

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def with_overrides(self, **kw) -> "Scenario":
        d = self.to_dict()
        d.update({k: v for k, v in kw.items() if v is not None})
        return Scenario.from_dict(d, self.base_dir)

    # -- validation --------------------------------------------------------

    def validate(self):
        p = []
        self._check_scalars(p)
        if p:
            raise ConfigError(p)
        for step in (self._check_graph, self._check_agents, self._check_space,
                     self._check_prior, self._check_extras):
            step(p)
        if p:
            raise ConfigError(p)
        try:
            self.mixing_matrix
        except (ValueError, OSError) as e:
            raise ConfigError([("mixing", str(e))]) from None
        bad = validate_mixing(self.mixing_matrix, self.graph_obj)
        if bad:
            raise ConfigError([("mixing", str(v)) for v in bad])
        if self.center is not None and not self.space_obj.contains(self.center_param):
            raise ConfigError([("center", f"{self.center!r} is outside the hypothesis space")])

    def _check_scalars(self, p):
        def num(key, lo, hi, integer=False, lo_open=True, hi_open=False):
            v = getattr(self, key)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or (integer and not isinstance(v, int)):
                p.append((key, f"expected {'an integer' if integer else 'a number'}, got {v!r}"))
                return
            if (v <= lo if lo_open else v < lo) or (v >= hi if hi_open else v > hi):
                p.append((key, f"{v!r} outside {'(' if lo_open else '['}{lo}, {hi}{')' if hi_open else ']'}"))

        num("horizon", 0, np.inf, integer=True, lo_open=False)
        num("radius", 0, 1)
        num("sigma", 0, 1, hi_open=True)
        num("epsilon", 0, 1)
        num("C", 0, 1)
        num("seed", 0, 2**64 - 1, integer=True, lo_open=False)
        num("trials", 1, np.inf, integer=True, lo_open=False)
        if self.representation not in REPRESENTATIONS:
            p.append(("representation", f"expected one of {list(REPRESENTATIONS)}, got {self.representation!r}"))

    def _check_graph(self, p):
        g = self.graph
        if not isinstance(g, dict):
            p.append(("graph", "expected a mapping"))
            return
        for k in g:
            if k not in ("generator", "n", "edges"):
                p.append((f"graph.{k}", "unknown key"))
        if ("generator" in g) == ("edges" in g):
            p.append(("graph", "give exactly one of 'generator' or 'edges'"))
        if "generator" in g:
            if g["generator"] not in GENERATORS:
                p.append(("graph.generator", f"expected one of {sorted(GENERATORS)}, got {g['generator']!r}"))
            if not isinstance(g.get("n"), int) or g.get("n") < 1:
                p.append(("graph.n", "expected a positive integer"))
        if "edges" in g and not (self._path(g["edges"]).is_file()):
            p.append(("graph.edges", f"edge-list file not found: {g['edges']}"))
        if not p:
            try:
                n = self.graph_obj.n
            except (ValueError, OSError) as e:
                p.append(("graph", str(e)))
                return
            if isinstance(self.agents, list) and len(self.agents) != n:
                p.append(("agents", f"{len(self.agents)} agents listed but the graph has {n}"))

    def _check_agents(self, p):
        if not isinstance(self.agents, list) or not self.agents:
            p.append(("agents", "expected a non-empty list"))
            return
        fams = set()
        for i, a in enumerate(self.agents):
            key = f"agents[{i}]"
            if not isinstance(a, dict):
                p.append((key, "expected a mapping"))
                continue
            fam = a.get("family")
            if fam not in FAMILIES:
                p.append((f"{key}.family", f"expected one of {sorted(FAMILIES)}, got {fam!r}"))
                continue
            fams.add(fam)
            allowed = ("family", "theta") + KNOWN_PARAMS.get(fam, ())
            for k in a:
                if k not in allowed:
                    p.append((f"{key}.{k}", "unknown key"))
            if "theta" not in a:
                p.append((f"{key}.theta", "missing required key"))
            for k in KNOWN_PARAMS.get(fam, ()):
                if k not in a:
                    p.append((f"{key}.{k}", "missing required key"))
        if len(fams) > 1:
            p.append(("agents", f"all agents must share one family, got {sorted(fams)}"))

    def _check_space(self, p):
        s = self.space
        if not isinstance(s, dict) or s.get("kind") not in ("finite", "compact"):
            p.append(("space.kind", "expected 'finite' or 'compact'"))
            return
        allowed = ("kind", "values") if s["kind"] == "finite" else ("kind", "lo", "hi", "resolution")
        for k in s:
            if k not in allowed:
                p.append((f"space.{k}", "unknown key"))
        for k in allowed[1:]:
            if k not in s:
                p.append((f"space.{k}", "missing required key"))
        if p:
            return
        try:
            self.space_obj
        except ValueError as e:
            p.append(("space", str(e)))
            return
        want = "finite" if self.representation == "finite" else "compact"
        if self.space["kind"] != want:
            p.append(("representation", f"{self.representation} needs a {want} space"))

    def _check_prior(self, p):
        pr = self.prior
        if not isinstance(pr, dict) or pr.get("kind") not in PRIOR_KINDS:
            p.append(("prior.kind", f"expected one of {list(PRIOR_KINDS)}"))
            return
        allowed = {"uniform": ("kind",), "conjugate": ("kind", "params"), "point": ("kind", "value")}
        for k in pr:
            if k not in allowed[pr["kind"]]:
                p.append((f"prior.{k}", "unknown key"))
        if pr["kind"] == "conjugate" and not isinstance(pr.get("params"), dict):
            p.append(("prior.params", "expected a mapping of conventional prior parameters"))
        if pr["kind"] == "point" and "value" not in pr:
            p.append(("prior.value", "missing required key"))
        if self.representation == "conjugate" and pr["kind"] != "conjugate":
            p.append(("prior.kind", "conjugate representation needs a conjugate prior"))
        if p:
            return
        try:
            self.prior_belief
        except (ValueError, TypeError) as e:
            p.append(("prior", str(e)))

    def _check_extras(self, p):
        cov = self.covering
        if not isinstance(cov, dict):
            p.append(("covering", "expected a mapping"))
        else:
            for k in cov:
                if k not in ("schedule", "ball_radius", "file"):
                    p.append((f"covering.{k}", "unknown key"))
            if cov.get("ball_radius", "inner") not in ("inner", "outer"):
                p.append(("covering.ball_radius", "expected 'inner' or 'outer'"))
        for k in self.bound:
            if k not in BOUND_KEYS:
                p.append((f"bound.{k}", "unknown key"))
        if self.bound.get("theorem", 1) not in (1, 2):
            p.append(("bound.theorem", "expected 1 or 2"))
        if self.bound.get("constants", "statement") not in ("statement", "proof"):
            p.append(("bound.constants", "expected 'statement' or 'proof'"))
        if self.bound.get("debug", "none") not in ("none", "ones", "zeros"):
            p.append(("bound.debug", "expected 'none', 'ones' or 'zeros'"))
        for k in self.oracle:
            if k not in ORACLE_KEYS:
                p.append((f"oracle.{k}", "unknown key"))

    # -- derived objects ---------------------------------------------------

    def _path(self, rel) -> Path:
        path = Path(rel)
        return path if path.is_absolute() else Path(self.base_dir) / path

    @cached_property
    def graph_obj(self) -> Graph:
        g = self.graph
        if "edges" in g:
            return load_edge_list(self._path(g["edges"]))
        return GENERATORS[g["generator"]](g["n"])

    @cached_property
    def mixing_matrix(self) -> MixingMatrix:
        m = self.mixing
        if m == "lazy-metropolis":
            try:
                return build_lazy_metropolis(self.graph_obj)
            except DisconnectedGraphError as e:
                raise ValueError(str(e)) from None
        if isinstance(m, dict) and set(m) == {"matrix"}:
            src = m["matrix"]
            a = np.loadtxt(self._path(src), ndmin=2) if isinstance(src, str) else np.array(src, dtype=float)
            return MixingMatrix(a)
        raise ValueError("expected 'lazy-metropolis' or {matrix: <path or nested list>}")

    @cached_property
    def models(self) -> tuple:
        out = []
        for a in self.agents:
            known = {k: float(a[k]) for k in KNOWN_PARAMS.get(a["family"], ())}
            out.append(make_model(a["family"], **known))
        return tuple(out)

    @cached_property
    def true_params(self) -> tuple:
        return tuple(np.atleast_1d(np.asarray(a["theta"], dtype=float)) for a in self.agents)

    @cached_property
    def space_obj(self) -> HypothesisSpace:
        s = self.space
        if s["kind"] == "finite":
            return HypothesisSpace.finite(s["values"])
        return HypothesisSpace.box(s["lo"], s["hi"], s["resolution"])

    @cached_property
    def center_param(self) -> np.ndarray:
        if self.center is not None:
            return np.atleast_1d(np.asarray(self.center, dtype=float))
        theta, _ = minimize_objective(self.models, self.true_params, self.space_obj)
        return np.atleast_1d(np.asarray(theta, dtype=float))

    @cached_property
    def ball_mask(self) -> np.ndarray:
        return in_ball(self.models, self.space_obj, self.center_param, self.radius)

    @cached_property
    def prior_belief(self) -> Belief:
        pr, sp, m = self.prior, self.space_obj, self.models[0]
        if pr["kind"] == "uniform":
            return Belief.uniform(sp)
        if pr["kind"] == "point":
            if sp.kind != "finite":
                raise ValueError("a point prior needs a finite space")
            lw = np.full(sp.size, -np.inf)
            lw[sp.nearest(pr["value"])] = 0.0
            return Belief.from_log_weights(sp, lw)
        params = m.conjugate(**pr["params"])
        if self.representation == "conjugate":
            return Belief.conjugate(params, sp)
        if sp.kind == "finite":
            lw = m.prior_log_kernel(params, sp.params)
        else:
            lw = rasterize(m, params, sp)
        return Belief.from_log_weights(sp, lw)

    @cached_property
    def covering_obj(self) -> Covering:
        cov = self.covering
        if "file" in cov:
            c = load_covering(self._path(cov["file"]))
            if abs(c.r - self.radius) > 1e-15:
                raise ConfigError([("covering.file", f"covering radius {c.r!r} differs from radius {self.radius!r}")])
            return c
        return build_covering(self.models, self.space_obj, self.radius, self.center_param,
                              cov.get("schedule", "halving"), cov.get("ball_radius", "inner"))

    def initial_state(self) -> NetworkState:
        b = self.prior_belief
        prior = b.params if b.kind == "conjugate" else b
        return NetworkState.initial(self.models, self.mixing_matrix, self.representation,
                                    self.space_obj, prior)
