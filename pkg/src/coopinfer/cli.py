"""
Command-line driver.

    coopinfer simulate <config> [--out DIR] [--seed S] [--trials M]
    coopinfer verify-bounds <config> [--out DIR] [--seed S] [--trials M]
    coopinfer oracle <config> [--out DIR] [--seed S] [--trials M]

``<config>`` is a YAML path or the name of a shipped scenario
(``example1``, ``example1-compact``, ``theorem1-small``, ``oracle``).
Exit status: 0 success, 1 a check failed, 2 invalid configuration.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np

from .beliefs import run_trial
from .concentration import (
    AssumptionError,
    BoundError,
    BoundInputs,
    BoundResult,
    check_assumption5,
    theorem1_bound,
    theorem2_bound,
    validate_bound,
)
from .metrics import AffinityError, affinity_floor, save_covering
from .oracles import run_oracle
from .scenario import ConfigError, Scenario

log = logging.getLogger("coopinfer")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
HEADER = ("trial", "k", "agent", "post_mean", "post_var", "mass_in_ball", "tv_to_agent1")


def shipped_scenarios() -> list[str]:
    d = resources.files("coopinfer") / "scenarios"
    return sorted(p.name[:-5] for p in d.iterdir() if p.name.endswith(".yaml"))


def resolve_config(name: str) -> Path:
    p = Path(name)
    if p.exists():
        return p
    cand = resources.files("coopinfer") / "scenarios" / f"{name}.yaml"
    if cand.is_file():
        return Path(str(cand))
    raise ConfigError([("<config>", f"no such file or shipped scenario: {name}")])


def load_scenario(args) -> Scenario:
    s = Scenario.load(resolve_config(args.config))
    return s.with_overrides(seed=args.seed, trials=args.trials)


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def write_trajectory(rows, path: Path):
    with path.open("w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(HEADER)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def _json(obj, path: Path):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def cmd_simulate(args) -> int:
    s = load_scenario(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    rows, finals = [], []
    for t in range(s.trials):
        tr = run_trial(s, s.horizon, s.seed, t)
        rows.extend(tr)
        finals.append([r.post_mean for r in tr[-s.mixing_matrix.n:]])
    write_trajectory(rows, out / "trajectory.csv")
    center = s.center_param.tolist()
    summary = {
        "config_hash": s.config_hash(),
        "seed": s.seed,
        "trials": s.trials,
        "horizon": s.horizon,
        "agents": s.mixing_matrix.n,
        "center": center,
        "final_post_mean": finals,
        "max_abs_error": max(abs(m - center[0]) for f in finals for m in f),
    }
    _json(summary, out / "summary.json")
    _json({"runtime_seconds": time.perf_counter() - t0}, out / "timing.json")
    print(f"wrote {out / 'trajectory.csv'} ({len(rows)} rows)")
    print(f"max |final post_mean - center| = {summary['max_abs_error']!r}")
    return EXIT_OK


def make_bound(s: Scenario) -> tuple[BoundResult, list[str]]:
    """Bound selected by the scenario's ``bound`` block, plus report lines."""
    opts = s.bound
    debug = opts.get("debug", "none")
    if debug == "ones":
        return BoundResult.constant(1.0), ["debug bound: constant 1"]
    if debug == "zeros":
        return BoundResult.constant(0.0), ["debug bound: constant 0"]
    cov = s.covering_obj
    lines = [f"radii: {list(cov.radii)!r}", f"counts per annulus: {list(cov.counts)!r}"]
    alpha = affinity_floor(s.models, s.space_obj)
    delta = s.mixing_matrix.contraction(float(opts.get("delta_scale", 4.0)))
    inp = BoundInputs(s.mixing_matrix.n, delta, alpha, cov, s.sigma, s.epsilon,
                      opts.get("constants", "statement"))
    lines += [f"alpha = {alpha!r}", f"delta = {delta!r}"]
    max_rounds = int(float(opts.get("max_rounds", 1e9)))
    theorem = opts.get("theorem", 1 if s.space_obj.kind == "finite" else 2)
    if theorem == 1:
        return theorem1_bound(inp, max_rounds), lines
    K = opts.get("k_assumption5")
    if K is None:
        try:
            K = check_assumption5(s.prior_belief, s.models, s.center_param, s.C, s.radius,
                                  s.horizon, s.space_obj)
        except AssumptionError as e:
            # not disproved, only unreached: no round up to the horizon is covered
            lines.append(f"initial-mass condition unmet within the horizon: {e}")
            K = s.horizon + 1
    lines.append(f"initial-mass K = {K}")
    return theorem2_bound(inp, int(K), max_rounds), lines


def cmd_verify_bounds(args) -> int:
    s = load_scenario(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        bound, lines = make_bound(s)
    except (BoundError, AssumptionError, AffinityError) as e:
        print(f"FAIL: {e}")
        return EXIT_FAIL
    if s.bound.get("debug", "none") == "none":
        save_covering(s.covering_obj, out / "covering.json")
    rep = validate_bound(s, bound, s.trials, s.horizon, s.seed)
    text = "\n".join(lines) + "\n" + rep.summary()
    (out / "report.txt").write_text(text)
    (out / "violations.csv").write_text(rep.csv())
    print(text, end="")
    for o in rep.outcomes:
        if o.flagged:
            print(f"trial {o.trial}: flagged at k = {o.first_k}, agent {o.first_agent}")
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_oracle(args) -> int:
    s = load_scenario(args)
    try:
        cases = run_oracle(s)
    except ValueError as e:
        raise ConfigError([("representation", str(e))]) from None
    for c in cases:
        print(c.line())
    bad = [c for c in cases if not c.passed]
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "oracle.txt").write_text("".join(c.line() + "\n" for c in cases))
    if bad:
        worst = max(bad, key=lambda c: abs(c.value - c.tol))
        print(f"worst case: {worst.line()}")
        return EXIT_FAIL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="coopinfer", description=__doc__.split("\n\n")[0].strip())
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn, default_out in (("simulate", cmd_simulate, "out"),
                                  ("verify-bounds", cmd_verify_bounds, "out"),
                                  ("oracle", cmd_oracle, None)):
        c = sub.add_parser(name)
        c.add_argument("config", help="YAML path or shipped scenario name")
        c.add_argument("--out", default=default_out, help="output directory")
        c.add_argument("--seed", type=int, default=None, help="override the config seed")
        c.add_argument("--trials", type=int, default=None, help="override the trial count")
        c.set_defaults(func=fn)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except ConfigError as e:
        print("configuration error:", file=sys.stderr)
        for key, msg in e.problems:
            print(f"  {key}: {msg}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
