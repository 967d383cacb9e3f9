"""Seeded recovery trials, phase-transition grids, width estimates and the
lemma verification suite.

Trial ``k`` of a batch uses seed ``base_seed + k * 0x9E3779B97F4A7C15 mod 2**64``;
inside a trial the signal, matrix and initial point use the independent
child seeds ``sub_seed(seed, 0)``, ``sub_seed(seed, 1)`` and ``sub_seed(seed, 2)``.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import geometry, lemma_lab
from .constraints import sublevel_from_signal
from .model import gen_structured_signal, make_measurements, rng_from_seed, sub_seed
from .solver import DivergedError, SolverConfig, init_oracle, init_spectral, pwf_run

GOLDEN = 0x9E3779B97F4A7C15
MASK64 = 2**64 - 1


def derive_seed(base_seed, k):
    return (int(base_seed) + int(k) * GOLDEN) & MASK64


@dataclass
class TrialSpec:
    """Everything needed to reproduce one recovery."""

    n: int
    m: int
    structure: str = "sparse"
    s: int | None = None
    alphabet: tuple | None = None
    segments: int | None = None
    regularizer: str = "l0"
    init: str = "oracle"
    rho: float = 1 / 15
    solver: SolverConfig | None = None


@dataclass
class TrialResult:
    seed: int
    trace: object
    x: np.ndarray
    converged: bool
    diverged: bool
    final_dist_rel: float


def run_trial(spec, seed, keep_iterates=False):
    sig = gen_structured_signal(spec.structure, spec.n, sub_seed(seed, 0), s=spec.s,
                                alphabet=spec.alphabet, segments=spec.segments)
    x = sig.values
    cset = sublevel_from_signal(spec.regularizer, x, alphabet=spec.alphabet)
    meas = make_measurements(x, spec.m, sub_seed(seed, 1))
    if spec.init == "oracle":
        z0 = init_oracle(x, spec.rho, sub_seed(seed, 2))
    elif spec.init == "spectral":
        z0 = init_spectral(meas, cset)
    else:
        raise ValueError(f"unknown init {spec.init!r}")
    config = spec.solver or SolverConfig()
    diverged = False
    try:
        trace = pwf_run(meas, cset, config, z0, x_true=x, keep_iterates=keep_iterates)
    except DivergedError as err:
        trace, diverged = err.trace, True
    xn = np.linalg.norm(x)
    if diverged or not np.all(np.isfinite(trace.final_z)):
        rel = float("inf")
    else:
        d = min(np.linalg.norm(trace.final_z - x), np.linalg.norm(trace.final_z + x))
        rel = float(d / xn) if xn > 0 else float(d)
    return TrialResult(seed, trace, x, trace.converged and not diverged, diverged, rel)


def run_grid(base, s_values, m_values, trials, base_seed, workers=1):
    """Success counts over an (s, m) grid.

    ``m_values`` is a list of m, or a callable ``s -> list of m``. Cells are
    enumerated s-major; trial seeds depend only on the enumeration index, so
    results do not depend on ``workers``.
    """
    cells = []
    for s in s_values:
        ms = m_values(s) if callable(m_values) else m_values
        cells.extend((int(s), int(m)) for m in ms)
    jobs = []
    for ci, (s, m) in enumerate(cells):
        spec = TrialSpec(**{**base.__dict__, "s": s, "m": m})
        for t in range(trials):
            jobs.append((ci, spec, derive_seed(base_seed, ci * trials + t)))

    def work(job):
        ci, spec, seed = job
        r = run_trial(spec, seed)
        return ci, r.converged, r.trace.iterations_used, r.final_dist_rel

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, jobs))
    else:
        results = [work(j) for j in jobs]

    tol = (base.solver or SolverConfig()).tol_rel
    rows = []
    for ci, (s, m) in enumerate(cells):
        mine = [r for r in results if r[0] == ci]
        succ = sum(1 for r in mine if r[1] and r[3] <= tol)
        rows.append({
            "s": s, "m": m, "trials": trials, "successes": succ,
            "median_iters": float(np.median([r[2] for r in mine])),
            "median_final_dist": float(np.median([r[3] for r in mine])),
        })
    return rows


def build_cone(desc, seed):
    """ConeModel from a description dict: ``{"kind": "subspace", "n", "dim"}``,
    ``{"kind": "nonneg_orthant", "n"}`` or ``{"kind": "l1_descent", "n", "s"}``."""
    kind = desc.get("kind")
    n = int(desc["n"])
    if kind == "subspace":
        basis = rng_from_seed(sub_seed(seed, 11)).standard_normal((n, int(desc["dim"])))
        return geometry.subspace_cone(basis)
    if kind == "nonneg_orthant":
        return geometry.orthant_cone(n)
    if kind == "l1_descent":
        x = gen_structured_signal("sparse", n, sub_seed(seed, 12), s=int(desc["s"])).values
        return geometry.l1_descent_cone(x)
    raise NotImplementedError(f"no cone model for {kind!r}")


def width_estimate(desc, trials, seed):
    cone = build_cone(desc, seed)
    est = geometry.statistical_dimension_mc(cone, trials, seed)
    ref = None
    if desc["kind"] == "l1_descent":
        ref = float(geometry.m0_l1_sparse(int(desc["n"]), int(desc["s"])))
    return est, ref


def _regularity_suite(seed, runs=20):
    """RC margins along intensity PWF trajectories (n=64, s=4, l1 ball)."""
    n, s = 64, 4
    m = int(np.ceil(8 * geometry.m0_l1_sparse(n, s) * np.log(n)))
    spec = TrialSpec(n=n, m=m, s=s, regularizer="l1", init="oracle", rho=1 / 8,
                     solver=SolverConfig("intensity", max_iters=5000, tol_rel=1e-3))
    ok = 0
    worst = -np.inf
    for k in range(runs):
        seed_k = derive_seed(seed, k)
        r = run_trial(spec, seed_k, keep_iterates=True)
        cset = sublevel_from_signal("l1", r.x)
        meas = make_measurements(r.x, m, sub_seed(seed_k, 1))
        rep = lemma_lab.check_regularity_condition(meas, cset, r.x, r.trace.iterates[::10])
        worst = max(worst, rep.worst_violation)
        ok += rep.passed and r.converged
    return lemma_lab.LemmaReport(
        "regularity", runs, 1 - ok / runs, 0.10,
        notes=f"n={n}, s={s}, m={m}, every 10th iterate",
        details={"runs_passing": ok, "worst_rc_violation": worst},
    )


def _cone_isometry(seed):
    cone = build_cone({"kind": "subspace", "n": 32, "dim": 2}, seed)
    w2 = geometry.statistical_dimension_mc(cone, 4000, sub_seed(seed, 99)).mean_sq
    delta = 0.25
    m = int(np.ceil(max(lemma_lab.gordon_sample_bound(w2, delta),
                        lemma_lab.cross_sample_bound(w2, delta))))
    return lemma_lab.mc_cone_isometry(cone, m, delta, 200, 50, seed, omega_sq=w2)


def _mixed_fourth(seed):
    cone = build_cone({"kind": "subspace", "n": 32, "dim": 2}, seed)
    w2 = geometry.statistical_dimension_mc(cone, 4000, sub_seed(seed, 99)).mean_sq
    delta = 0.5
    m = int(np.ceil(lemma_lab.mixed_moment_sample_bound(w2, delta, cone.n)))
    x = rng_from_seed(sub_seed(seed, 5)).standard_normal(cone.n)
    return lemma_lab.mc_mixed_fourth_moment(cone, x / np.linalg.norm(x), m, delta, 50, seed,
                                            omega_sq=w2)


def _fourth_moment(seed):
    n, dim, delta = 64, 4, 0.5
    m = int(np.ceil(lemma_lab.mixed_moment_sample_bound(dim, delta, n)))
    return lemma_lab.check_fourth_moment(m, delta, 100, seed)


def _abs_product(seed):
    cone = build_cone({"kind": "subspace", "n": 32, "dim": 2}, seed)
    return lemma_lab.mc_abs_product_concentration(cone, cone, 10_000, 0.1, 100, seed)


def _bm_bracket(seed):
    rng = rng_from_seed(seed)
    ms = sorted(set([1, 2, 3, 10, 1000, 10**6]) | set(rng.integers(1, 10**6, 200).tolist()))
    return lemma_lab.check_bm_bracket(ms)


# id -> callable(seed) -> LemmaReport, at the documented desk-scale sizes
LEMMA_SUITE = {
    "abs_moment": lambda seed: lemma_lab.check_abs_moment_agreement(seed=seed),
    "s_properties": lambda seed: lemma_lab.check_S_properties(8, 100_000, seed),
    "projection_contraction": lambda seed: lemma_lab.check_projection_contraction(6, 100_000, seed),
    "bm_bracket": _bm_bracket,
    "cone_isometry": _cone_isometry,
    "mixed_fourth_moment": _mixed_fourth,
    "fourth_moment": _fourth_moment,
    "abs_product": _abs_product,
    "regularity": _regularity_suite,
}


def run_lemma_suite(ids, seed):
    unknown = [i for i in ids if i not in LEMMA_SUITE]
    if unknown:
        raise KeyError(f"unknown lemma ids: {unknown}")
    return [LEMMA_SUITE[i](derive_seed(seed, k)) for k, i in enumerate(ids)]
