"""Command-line entry point: ``pwfkit run|grid|width|verify --config FILE``.

Configs are YAML; see ``configs/`` and the README for the schema. Exit codes:
0 success, 1 verify found a failing check, 2 config error, 3 unsupported
feature, 4 IO error.
"""
import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import yaml

from . import harness
from .constraints import UnsupportedProjection
from .geometry import m0_l1_sparse
from .solver import SolverConfig

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_UNSUPPORTED, EXIT_IO = 0, 1, 2, 3, 4


class ConfigError(ValueError):
    pass


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return format(float(v), ".17g")


def _json_num(v):
    # non-finite values have no JSON literal
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def write_csv(path, header, rows):
    lines = [f"# schema_version: {SCHEMA_VERSION}", ",".join(header)]
    lines += [",".join(_fmt(r[h]) for h in header) for r in rows]
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(obj, f, indent=2, sort_keys=False, allow_nan=False)
        f.write("\n")


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        obj = obj.item()
    return _json_num(obj)


def load_config(path):
    try:
        with open(path, encoding="utf-8") as f:
            cfg = yaml.safe_load(f)
    except yaml.YAMLError as err:
        raise ConfigError(f"cannot parse {path}: {err}") from err
    if cfg is None:
        cfg = {}
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a mapping")
    return cfg


def _section(cfg, key):
    sec = cfg.get(key, {})
    if sec is None:
        return {}
    if not isinstance(sec, dict):
        raise ConfigError(f"'{key}' must be a mapping")
    return sec


def _solver_config(cfg):
    sec = _section(cfg, "solver")
    allowed = {"variant", "mu", "c1", "max_iters", "tol_rel", "record_every", "step_scaling"}
    extra = set(sec) - allowed
    if extra:
        raise ConfigError(f"unknown solver keys: {sorted(extra)}")
    return SolverConfig(**sec)


def _trial_spec(cfg, s=None, m=None):
    prob = _section(cfg, "problem")
    init = _section(cfg, "init")
    if "n" not in prob:
        raise ConfigError("problem.n is required")
    alphabet = prob.get("alphabet")
    return harness.TrialSpec(
        n=int(prob["n"]),
        m=int(m if m is not None else prob.get("m", 0)),
        structure=prob.get("structure", "sparse"),
        s=s if s is not None else prob.get("s"),
        alphabet=tuple(alphabet) if alphabet is not None else None,
        segments=prob.get("segments"),
        regularizer=cfg.get("constraint", "l0"),
        init=init.get("kind", "oracle"),
        rho=float(init.get("rho", 1 / 15)),
        solver=_solver_config(cfg),
    )


def cmd_run(cfg, out_dir, seed):
    spec = _trial_spec(cfg)
    if spec.m < 1:
        raise ConfigError("problem.m must be a positive integer")
    res = harness.run_trial(spec, seed)
    rows = [r.__dict__ for r in res.trace.records]
    write_csv(os.path.join(out_dir, "trace.csv"), ["tau", "loss", "grad_norm", "step", "dist"], rows)
    write_json(os.path.join(out_dir, "summary.json"), _clean({
        "schema_version": SCHEMA_VERSION,
        "converged": bool(res.converged),
        "diverged": bool(res.diverged),
        "iterations_used": int(res.trace.iterations_used),
        "final_dist_rel": res.final_dist_rel,
        "seed": int(seed),
    }))
    return EXIT_OK


def _grid_axes(cfg):
    grid = _section(cfg, "grid")
    n = int(_section(cfg, "problem").get("n", 0))
    s_values = grid.get("s")
    if not s_values:
        raise ConfigError("grid.s must be a nonempty list")
    trials = int(grid.get("trials", 1))
    if trials < 1:
        raise ConfigError("grid.trials must be at least 1")
    if "m" in grid:
        ms = grid["m"]
        if not ms:
            raise ConfigError("grid.m must be a nonempty list")
        m_values = [int(v) for v in (ms if isinstance(ms, list) else [ms])]
    elif "m_factor" in grid:
        factors = grid["m_factor"]
        factors = factors if isinstance(factors, list) else [factors]
        if not factors:
            raise ConfigError("grid.m_factor must be nonempty")

        def m_values(s):
            return [int(math.ceil(f * m0_l1_sparse(n, s))) for f in factors]
    else:
        raise ConfigError("grid needs either 'm' or 'm_factor'")
    return [int(s) for s in s_values], m_values, trials


def cmd_grid(cfg, out_dir, seed, workers):
    s_values, m_values, trials = _grid_axes(cfg)
    base = _trial_spec(cfg, s=s_values[0], m=1)
    rows = harness.run_grid(base, s_values, m_values, trials, seed, workers=workers)
    cols = ["s", "m", "trials", "successes", "median_iters", "median_final_dist"]
    write_csv(os.path.join(out_dir, "grid.csv"), cols, rows)
    return EXIT_OK


def cmd_width(cfg, out_dir, seed):
    sec = _section(cfg, "width")
    cone = sec.get("cone")
    if not isinstance(cone, dict) or "kind" not in cone or "n" not in cone:
        raise ConfigError("width.cone needs at least 'kind' and 'n'")
    trials = int(sec.get("trials", 20_000))
    est, ref = harness.width_estimate(cone, trials, seed)
    write_json(os.path.join(out_dir, "width.json"), _clean({
        "schema_version": SCHEMA_VERSION,
        "mean_sq": est.mean_sq, "mean": est.mean, "stderr": est.stderr,
        "trials": est.trials, "reference": ref,
    }))
    return EXIT_OK


def cmd_verify(cfg, out_dir, seed, workers):
    ids = _section(cfg, "verify").get("lemmas", list(harness.LEMMA_SUITE))
    if isinstance(ids, str):
        ids = [ids]
    unknown = [i for i in ids if i not in harness.LEMMA_SUITE]
    if unknown or not ids:
        raise ConfigError(f"unknown lemma ids: {unknown}" if unknown else "no lemmas selected")
    seeds = [harness.derive_seed(seed, k) for k in range(len(ids))]
    calls = [(harness.LEMMA_SUITE[i], s) for i, s in zip(ids, seeds)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(lambda c: c[0](c[1]), calls))
    else:
        reports = [fn(s) for fn, s in calls]
    dicts = [_clean(r.to_dict()) for r in reports]
    for d in dicts:
        write_json(os.path.join(out_dir, f"report_{d['lemma_id']}.json"),
                   {"schema_version": SCHEMA_VERSION, **d})
    write_json(os.path.join(out_dir, "reports.json"),
               {"schema_version": SCHEMA_VERSION, "reports": dicts})
    for d in dicts:
        print(f"{d['lemma_id']:<24} {'PASS' if d['passed'] else 'FAIL'}  "
              f"worst={d['worst_violation']!r} threshold={d['threshold']!r}")
    return EXIT_OK if all(d["passed"] for d in dicts) else EXIT_FAILED


COMMANDS = ("run", "grid", "width", "verify")


def build_parser():
    p = argparse.ArgumentParser(prog="pwfkit", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    return p


def _u64(v, name):
    try:
        v = int(v)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"{name} must be an integer") from err
    if not 0 <= v < 2**64:
        raise ConfigError(f"{name} must lie in [0, 2**64)")
    return v


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        try:
            cfg = load_config(args.config)
        except OSError as err:
            print(f"error: cannot read config: {err}", file=sys.stderr)
            return EXIT_IO
        seed = _u64(args.seed if args.seed is not None else cfg.get("base_seed", 0), "seed")
        workers = int(args.workers if args.workers is not None else cfg.get("workers", 1))
        if workers < 1:
            raise ConfigError("workers must be at least 1")
        out_dir = args.out_dir or cfg.get("out_dir") or "."
        try:
            os.makedirs(out_dir, exist_ok=True)
            if args.command == "run":
                return cmd_run(cfg, out_dir, seed)
            if args.command == "grid":
                return cmd_grid(cfg, out_dir, seed, workers)
            if args.command == "width":
                return cmd_width(cfg, out_dir, seed)
            return cmd_verify(cfg, out_dir, seed, workers)
        except OSError as err:
            print(f"error: {err}", file=sys.stderr)
            return EXIT_IO
    except (UnsupportedProjection, NotImplementedError) as err:
        print(f"unsupported: {err}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (ConfigError, ValueError, TypeError, KeyError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
