"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (lines are printed even
without ``-s``).
"""
import math
import os
import subprocess
import time

import numpy as np
import pytest

from pwfkit import harness
from pwfkit import lemma_lab as ll
from pwfkit.constraints import ConstraintSet, project
from pwfkit.geometry import (
    l1_descent_cone,
    m0_l1_sparse,
    orthant_cone,
    polar_project_l1_descent,
    project_cone,
    statistical_dimension_mc,
    subspace_cone,
)
from pwfkit.model import (
    forward_intensity,
    grad_amplitude,
    grad_intensity,
    loss_amplitude,
    loss_intensity,
    rng_from_seed,
)
from pwfkit.solver import SolverConfig
from conftest import central_diff
from oracles import discrete_oracle, l1_ball_oracle, top_k_oracle

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SEED = 20240601


@pytest.fixture
def verdict(capsys):
    def emit(num, ok, elapsed, budget, detail):
        ok = bool(ok) and elapsed < budget
        with capsys.disabled():
            print(f"\n[criterion {num}] {'PASS' if ok else 'FAIL'}  {elapsed:.1f}s/<{budget}s  {detail}")
        return ok
    return emit


def _monotone(dists, scale):
    # nonincreasing from tau = 1 on, up to rounding at the converged end
    d = np.asarray(dists)
    return bool(np.all(np.diff(d) <= 1e-12 * scale))


def test_criterion_1_gradients(verdict):
    t0 = time.perf_counter()
    rng = rng_from_seed(SEED)
    worst = 0.0
    done = 0
    while done < 100:
        n = int(rng.integers(1, 11))
        m = int(rng.integers(1, 21))
        A = rng.standard_normal((m, n))
        y = forward_intensity(A, rng.standard_normal(n))
        z = rng.standard_normal(n)
        # smooth instance: stay away from the amplitude kinks a.z = 0
        if np.abs(A @ z).min() < 1e-3:
            continue
        for loss, grad in ((loss_intensity, grad_intensity), (loss_amplitude, grad_amplitude)):
            g = grad(A, y, z)
            fd = central_diff(lambda v: loss(A, y, v), z)
            rel = np.linalg.norm(g - fd) / max(np.linalg.norm(g), 1e-8)
            worst = max(worst, rel)
        done += 1
    dt = time.perf_counter() - t0
    assert verdict(1, worst <= 1e-4, dt, 5, f"worst relative error {worst:.2e} over 100 instances x 2 losses")


def test_criterion_2_projections(verdict):
    t0 = time.perf_counter()
    rng = rng_from_seed(SEED + 1)
    worst = {"l1_ball": 0.0, "top_k": 0.0, "discrete": 0.0}
    for _ in range(500):
        n = int(rng.integers(1, 7))
        v = rng.standard_normal(n) * rng.uniform(0.1, 4)
        r = float(rng.uniform(0.01, 3) * np.abs(v).sum())
        worst["l1_ball"] = max(worst["l1_ball"], np.abs(
            project(ConstraintSet("l1_ball", radius=r), v) - l1_ball_oracle(v, r)).max())
    for _ in range(500):
        n = int(rng.integers(1, 7))
        v = rng.standard_normal(n)
        k = int(rng.integers(0, n + 1))
        worst["top_k"] = max(worst["top_k"], np.abs(
            project(ConstraintSet("top_k", k=k), v) - top_k_oracle(v, k)[0]).max())
    for _ in range(500):
        n = int(rng.integers(1, 7))
        size = int(rng.integers(1, 4))
        alphabet = tuple(np.sort(rng.choice(np.linspace(-2, 2, 17), size=size, replace=False)))
        v = rng.standard_normal(n) * 1.5
        worst["discrete"] = max(worst["discrete"], np.abs(
            project(ConstraintSet("discrete", alphabet=alphabet), v) - discrete_oracle(v, alphabet)).max())
    dt = time.perf_counter() - t0
    ok = max(worst.values()) <= 1e-8
    assert verdict(2, ok, dt, 30, "max abs error " + ", ".join(f"{k}={w:.1e}" for k, w in worst.items()))


def test_criterion_3_amplitude_recovery(verdict):
    t0 = time.perf_counter()
    n, s = 128, 4
    m = 4 * math.ceil(2 * s * math.log(n / s))
    spec = harness.TrialSpec(n=n, m=m, s=s, regularizer="l0", init="oracle", rho=1 / 15,
                             solver=SolverConfig("amplitude", max_iters=200, tol_rel=1e-5))
    ok = mono = 0
    rates = []
    for k in range(50):
        r = harness.run_trial(spec, harness.derive_seed(SEED, k))
        if r.converged and r.final_dist_rel <= 1e-5:
            ok += 1
            d = r.trace.column("dist")
            mono += _monotone(d, np.linalg.norm(r.x))
            rates.append((d[-1] / d[0]) ** (1 / max(len(d) - 1, 1)))
    dt = time.perf_counter() - t0
    passed = ok >= 45 and mono == ok
    assert verdict(3, passed, dt, 120,
                   f"m={m}: {ok}/50 recovered, {mono}/{ok} monotone, "
                   f"median per-step contraction {np.median(rates):.3f}")


def test_criterion_4_barrier(verdict):
    t0 = time.perf_counter()
    n, trials = 256, 25
    base = harness.TrialSpec(n=n, m=1, regularizer="l0", init="oracle", rho=1 / 15,
                             solver=SolverConfig("amplitude", max_iters=200, tol_rel=1e-5))
    rows = harness.run_grid(base, [2, 4, 8, 16], lambda s: [math.ceil(6 * m0_l1_sparse(n, s))],
                            trials, SEED)
    rates = {r["s"]: r["successes"] / r["trials"] for r in rows}
    ms = {r["s"]: r["m"] for r in rows}
    dt = time.perf_counter() - t0
    passed = all(v >= 0.8 for v in rates.values())
    assert verdict(4, passed, dt, 600,
                   "; ".join(f"s={s} m={ms[s]} rate={rates[s]:.2f}" for s in rates))


def test_criterion_5_intensity_recovery(verdict):
    t0 = time.perf_counter()
    n, s = 64, 4
    m = math.ceil(8 * m0_l1_sparse(n, s) * math.log(n))
    spec = harness.TrialSpec(n=n, m=m, s=s, regularizer="l1", init="oracle", rho=1 / 8,
                             solver=SolverConfig("intensity", mu=0.1 / n, max_iters=5000, tol_rel=1e-3))
    good = 0
    iters = []
    for k in range(20):
        r = harness.run_trial(spec, harness.derive_seed(SEED + 5, k))
        mono = _monotone(r.trace.column("dist"), np.linalg.norm(r.x))
        good += bool(r.converged and r.final_dist_rel <= 1e-3 and mono)
        iters.append(r.trace.iterations_used)
    dt = time.perf_counter() - t0
    assert verdict(5, good >= 18, dt, 300,
                   f"m={m}: {good}/20 monotone and within 1e-3, iterations {min(iters)}-{max(iters)}")


def test_criterion_6_abs_moment(verdict):
    t0 = time.perf_counter()
    rep = ll.check_abs_moment_agreement(pairs=20, n=6, trials=100_000, seed=SEED)
    e1, e2 = np.eye(2)
    anchors = (abs(ll.closed_form_abs_moment(e1, e1) - 1) <= 1e-15
               and abs(ll.closed_form_abs_moment(e1, e2) - 2 / np.pi) <= 1e-15)
    dt = time.perf_counter() - t0
    within = 20 - rep.details["misses"]
    assert verdict(6, within >= 19 and anchors, dt, 60,
                   f"{within}/20 pairs within 4 stderr (worst z={rep.details['worst_z']:.2f}); anchors exact={anchors}")


def test_criterion_7_cone_statistics(verdict):
    t0 = time.perf_counter()
    basis = rng_from_seed(SEED).standard_normal((40, 7))
    sub = statistical_dimension_mc(subspace_cone(basis), 20_000, SEED + 1)
    orth = statistical_dimension_mc(orthant_cone(64), 20_000, SEED + 2)
    ok_sub = abs(sub.mean_sq - 7) <= 3 * sub.stderr
    ok_orth = abs(orth.mean_sq - 32) <= 3 * orth.stderr

    rng = rng_from_seed(SEED + 3)
    x = np.zeros(50)
    x[rng.choice(50, 5, replace=False)] = rng.standard_normal(5)
    cone = l1_descent_cone(x)
    V = rng.standard_normal((10_000, 50)) * rng.uniform(0.1, 10, (10_000, 1))
    P = project_cone(cone, V)
    W = polar_project_l1_descent(cone, V)
    sq = (V**2).sum(axis=1)
    moreau = np.abs(P + W - V).max(axis=1).max() / np.sqrt(sq).max()
    inner = (np.abs((P * W).sum(axis=1)) / sq).max()
    pyth = (np.abs(((V - P) ** 2).sum(axis=1) + (P**2).sum(axis=1) - sq) / sq).max()
    ok_id = inner <= 1e-8 and pyth <= 1e-8 and moreau <= 1e-8
    dt = time.perf_counter() - t0
    assert verdict(7, ok_sub and ok_orth and ok_id, dt, 60,
                   f"subspace7 {sub.mean_sq:.3f}+-{sub.stderr:.3f}, orthant64 {orth.mean_sq:.3f}+-{orth.stderr:.3f}, "
                   f"<P_C,P_polar>/|v|^2<={inner:.1e}, pythagoras rel<={pyth:.1e}")


def test_criterion_8_lemma_suite(verdict):
    t0 = time.perf_counter()
    reps = [
        ll.check_S_properties(8, 100_000, SEED),
        ll.check_projection_contraction(6, 100_000, SEED + 1),
        harness.LEMMA_SUITE["bm_bracket"](SEED + 2),
        harness.LEMMA_SUITE["fourth_moment"](SEED + 3),
    ]
    dt = time.perf_counter() - t0
    passed = all(r.passed for r in reps)
    assert verdict(8, passed, dt, 120,
                   ", ".join(f"{r.lemma_id}: worst={r.worst_violation:.2e} ({r.trials} trials)" for r in reps))


CLI_CASES = [
    ("run", "configs/run_amplitude.yaml", None),
    ("grid", "configs/grid_small.yaml", ("1", "4")),
    ("width", "configs/width_l1.yaml", None),
    ("verify", "configs/verify_all.yaml", ("1", "3")),
]


def test_criterion_9_determinism(verdict, tmp_path):
    t0 = time.perf_counter()
    same = []
    for cmd, cfg, workers in CLI_CASES:
        outs = []
        for k, w in enumerate(workers or ("1", "1")):
            d = tmp_path / f"{cmd}{k}"
            args = ["pwfkit", cmd, "--config", os.path.join(ROOT, cfg), "--out-dir", str(d),
                    "--seed", "314159", "--workers", w]
            assert subprocess.run(args, capture_output=True).returncode == 0
            outs.append({f: (d / f).read_bytes() for f in sorted(os.listdir(d))})
        same.append((cmd, outs[0] == outs[1] and len(outs[0]) > 0))
    dt = time.perf_counter() - t0
    assert verdict(9, all(ok for _, ok in same), dt, 600,
                   ", ".join(f"{c}={'identical' if ok else 'DIFFERENT'}" for c, ok in same))
