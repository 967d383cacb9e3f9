"""Empirical checks of the concentration and geometry facts behind PWF.

Closed forms are checked exactly; probabilistic statements are checked by
simulation and gated on an empirical failure fraction (default 5%), since
the underlying probability bounds carry unquantified constants.
"""
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .constraints import ConstraintSet, contains, project
from .geometry import sample_cone_directions, statistical_dimension_mc
from .model import (
    dist_sign_invariant,
    grad_intensity,
    rng_from_seed,
    sub_seed,
)

__all__ = [
    "LemmaReport",
    "RCConstants",
    "closed_form_abs_moment",
    "mc_abs_moment",
    "truncation_S",
    "truncated_norm",
    "check_S_properties",
    "check_projection_contraction",
    "compute_bm",
    "check_bm_bracket",
    "gordon_sample_bound",
    "cross_sample_bound",
    "mixed_moment_sample_bound",
    "mc_cone_isometry",
    "mc_mixed_fourth_moment",
    "check_fourth_moment",
    "mc_abs_product_concentration",
    "check_regularity_condition",
    "check_abs_moment_agreement",
]

FAILURE_GATE = 0.05


@dataclass
class LemmaReport:
    """Outcome of one empirical check.

    ``passed`` is ``worst_violation <= threshold``. For simulated
    concentration checks ``worst_violation`` is the empirical failure
    fraction; raw deviations live in ``details``.
    """

    lemma_id: str
    trials: int
    worst_violation: float
    threshold: float
    passed: bool = field(init=False)
    notes: str = ""
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        self.worst_violation = float(self.worst_violation)
        self.passed = bool(self.worst_violation <= self.threshold)

    def to_dict(self):
        return {
            "lemma_id": self.lemma_id,
            "trials": int(self.trials),
            "worst_violation": self.worst_violation,
            "threshold": float(self.threshold),
            "passed": self.passed,
            "notes": self.notes,
            "details": {k: _plain(v) for k, v in self.details.items()},
        }


def _plain(v):
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    return v


@dataclass(frozen=True)
class RCConstants:
    """Constants of the regularity, curvature and smoothness conditions.

    Defaults are the values under which the curvature argument closes with
    epsilon = 1/8; ``beta`` defaults to 13000 n.
    """

    alpha: float = 250.0
    lam: float = 1 / 250
    gamma: float = 1 / 1000
    delta: float = 1 / 1000
    Delta: float = 1 / 1000
    beta: float | None = None
    epsilon: float = 1 / 8

    def beta_for(self, n):
        return 13000.0 * n if self.beta is None else self.beta


def _unit_pair(u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError("u and v must be vectors of equal length")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ValueError("u and v must be nonzero")
    return u, v, nu, nv


def _abs_moment_formula(cos_theta):
    theta = np.arccos(np.clip(cos_theta, -1.0, 1.0))
    return (2 / np.pi) * (np.sin(theta) + np.cos(theta) * (np.pi / 2 - theta))


def closed_form_abs_moment(u, v):
    """E|<u, a><a, v>| for a ~ N(0, I)."""
    u, v, nu, nv = _unit_pair(u, v)
    return float(nu * nv * _abs_moment_formula(u @ v / (nu * nv)))


def mc_abs_moment(u, v, trials, seed):
    """Monte Carlo mean of |<u, a><a, v>| and its standard error."""
    u, v, _, _ = _unit_pair(u, v)
    if trials < 2:
        raise ValueError("need at least two trials")
    a = rng_from_seed(seed).standard_normal((int(trials), u.shape[0]))
    vals = np.abs((a @ u) * (a @ v))
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(trials))


def check_abs_moment_agreement(pairs=20, n=6, trials=100_000, seed=0, k_sigma=4.0):
    """Closed form vs Monte Carlo on random (u, v); passes if at most one pair
    in twenty lies beyond ``k_sigma`` standard errors."""
    rng = rng_from_seed(seed)
    misses = 0
    worst = 0.0
    for i in range(pairs):
        u, v = rng.standard_normal(n), rng.standard_normal(n)
        est, se = mc_abs_moment(u, v, trials, sub_seed(seed, i))
        z = abs(est - closed_form_abs_moment(u, v)) / se
        worst = max(worst, z)
        misses += z > k_sigma
    return LemmaReport(
        "abs_moment", pairs * trials, misses / pairs, 1 / 20,
        notes=f"{pairs} pairs x {trials} draws, gate {k_sigma} stderr",
        details={"misses": misses, "worst_z": worst},
    )


def truncation_S(h, beta, Delta):
    """Piecewise-linear ramp: 0 below beta(1-Delta), |h| above beta, linear between."""
    if not 0 < Delta < 1:
        raise ValueError("Delta must lie in (0, 1)")
    h = np.abs(np.asarray(h, dtype=float))
    beta = np.asarray(beta, dtype=float)
    if np.any(beta < 0):
        raise ValueError("beta must be nonnegative")
    lo = beta * (1 - Delta)
    out = np.where(h < lo, 0.0, np.where(h <= beta, (h - lo) / Delta, h))
    return float(out) if out.ndim == 0 else out


def truncated_norm(z, beta, Delta):
    """sqrt(sum_r S(z_r; beta_r)^2) along the last axis."""
    S = truncation_S(z, beta, Delta)
    return np.sqrt(np.sum(np.square(S), axis=-1))


def check_S_properties(m, trials, seed, Delta=0.1, slack=1e-9):
    """Lipschitz constant 1/Delta and radial convexity of the truncated norm.

    ``worst_violation`` is the largest ``lhs - rhs - slack`` over both
    inequalities, so any nonpositive value passes.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    rng = rng_from_seed(seed)
    Z = rng.standard_normal((trials, m)) * rng.uniform(0.1, 3.0, (trials, 1))
    # half the pairs are close together so the local slope is probed
    Y = np.where(rng.random((trials, 1)) < 0.5,
                 Z + 1e-3 * rng.standard_normal((trials, m)),
                 rng.standard_normal((trials, m)))
    B = rng.uniform(0.0, 2.0, (trials, m))
    alpha = rng.random((trials, 1))

    fZ = truncated_norm(Z, B, Delta)
    lip = np.abs(fZ - truncated_norm(Y, B, Delta)) - np.linalg.norm(Z - Y, axis=1) / Delta
    rad = truncated_norm(alpha * Z, B, Delta) - alpha[:, 0] * fZ
    worst_lip = float(lip.max() - slack)
    worst_rad = float(rad.max() - slack)
    return LemmaReport(
        "s_properties", trials, max(worst_lip, worst_rad), 0.0,
        notes=f"m={m}, Delta={Delta}",
        details={"worst_lipschitz": worst_lip, "worst_radial": worst_rad},
    )


def check_projection_contraction(n=6, trials=100_000, seed=0):
    """||P(v) - u|| <= c ||v - u|| for u in the set; c = 1 for convex sets
    (l1 ball, orthant), c = 2 for top-k and discrete sets. ``trials`` pairs
    are drawn for each family, split evenly between its two set kinds."""
    rng = rng_from_seed(seed)
    worst = {}
    for kind, factor in (("l1_ball", 1.0), ("nonneg", 1.0), ("top_k", 2.0), ("discrete", 2.0)):
        w = -np.inf
        for _ in range(trials // 2):
            if kind == "l1_ball":
                cset = ConstraintSet(kind, radius=float(rng.uniform(0.1, 3.0)))
            elif kind == "top_k":
                cset = ConstraintSet(kind, k=int(rng.integers(1, n + 1)))
            elif kind == "discrete":
                cset = ConstraintSet(kind, alphabet=tuple(np.sort(rng.choice(
                    np.linspace(-2, 2, 9), size=int(rng.integers(1, 5)), replace=False))))
            else:
                cset = ConstraintSet(kind)
            u = project(cset, rng.standard_normal(n) * 2)
            v = u + rng.standard_normal(n) * rng.uniform(0.01, 3.0)
            d = np.linalg.norm(v - u)
            w = max(w, np.linalg.norm(project(cset, v) - u) - factor * d - 1e-12 * (1 + d))
        worst[kind] = float(w)
    return LemmaReport(
        "projection_contraction", 4 * (trials // 2), max(worst.values()), 0.0,
        notes=f"n={n}", details=worst,
    )


def compute_bm(m):
    """E||g|| for g ~ N(0, I_m), i.e. sqrt(2) Gamma((m+1)/2) / Gamma(m/2).

    The log-Gamma difference is taken at 40 digits: in double precision it
    loses the O(1/m) gap between b_m^2 and m - 1/2 for large m.
    """
    m = int(m)
    if m < 1:
        raise ValueError("m must be positive")
    with mpmath.workdps(40):
        r = mpmath.sqrt(2) * mpmath.exp(mpmath.loggamma(mpmath.mpf(m + 1) / 2)
                                        - mpmath.loggamma(mpmath.mpf(m) / 2))
        return float(r)


def check_bm_bracket(ms):
    """m - 1/2 <= b_m^2 <= m over the given m values."""
    worst = -np.inf
    for m in ms:
        b2 = compute_bm(m) ** 2
        worst = max(worst, (m - 0.5) - b2, b2 - m)
    return LemmaReport("bm_bracket", len(ms), worst, 0.0,
                       notes=f"{len(ms)} values of m in [{min(ms)}, {max(ms)}]")


def gordon_sample_bound(omega_sq, delta):
    return max(20 * omega_sq / delta**2, 1 / (2 * delta) - 1)


def cross_sample_bound(omega_sq, delta):
    return max(80 * omega_sq / delta**2, 2 / delta - 1)


def mixed_moment_sample_bound(omega_sq, delta, n):
    return 1600 * max(omega_sq * np.log(n) / delta**2, 1 / delta**2)


def _omega_sq(cone, seed, trials=4000):
    return statistical_dimension_mc(cone, trials, sub_seed(seed, 99)).mean_sq


def mc_cone_isometry(cone, m, delta, cone_samples=200, matrix_trials=50, seed=0,
                     weights=None, omega_sq=None):
    """Restricted isometry over a cone, its cross-term form, and the weighted form.

    For each fresh Gaussian matrix checks, over sampled unit h (and pairs u, h)
    in the cone, |mean (a.h)^2 - 1|, |mean (a.u)(a.h) - u.h| and
    |sum d^2 (a.h)^2 / sum d^2 - 1| against ``delta``. A matrix fails if any
    sampled direction does. ``weights=None`` draws d_r ~ U[0.5, 1.5] from a
    stream separate from the matrices.
    """
    if omega_sq is None:
        omega_sq = _omega_sq(cone, seed)
    need = max(gordon_sample_bound(omega_sq, delta), cross_sample_bound(omega_sq, delta))
    notes = [f"omega^2~{omega_sq:.3g}, m={m}, required m>={need:.0f}"]
    if m < need:
        notes.append("precondition warning: m below lemma threshold")

    H = sample_cone_directions(cone, cone_samples, rng_from_seed(sub_seed(seed, 0)))
    U = np.roll(H, 1, axis=0)
    uh = np.einsum("ij,ij->i", U, H)
    mat_rng = rng_from_seed(sub_seed(seed, 1))
    if weights is None:
        d2 = rng_from_seed(sub_seed(seed, 2)).uniform(0.5, 1.5, m) ** 2
    else:
        d2 = np.asarray(weights, dtype=float) ** 2
        if d2.shape != (m,):
            raise ValueError("weights must have length m")
    if d2.sum() < max(20 * d2.max() * omega_sq / delta**2, 3 / (2 * delta) - 1):
        notes.append("precondition warning: weighted sample bound not met")

    worst = np.zeros(3)
    fails = np.zeros(3, dtype=int)
    any_fail = 0
    for _ in range(matrix_trials):
        A = mat_rng.standard_normal((m, cone.n))
        AH = A @ H.T
        AU = A @ U.T
        devs = (
            np.abs((AH**2).mean(axis=0) - 1.0).max(),
            np.abs((AU * AH).mean(axis=0) - uh).max(),
            np.abs(d2 @ AH**2 / d2.sum() - 1.0).max(),
        )
        devs = np.array(devs)
        worst = np.maximum(worst, devs)
        bad = devs > delta
        fails += bad
        any_fail += bool(bad.any())
    frac = any_fail / matrix_trials
    return LemmaReport(
        "cone_isometry", matrix_trials, frac, FAILURE_GATE,
        notes="; ".join(notes),
        details={
            "worst_gordon": worst[0], "worst_cross": worst[1], "worst_weighted": worst[2],
            "fail_gordon": int(fails[0]), "fail_cross": int(fails[1]),
            "fail_weighted": int(fails[2]), "cone_samples": int(H.shape[0]),
            "required_m": need,
        },
    )


def mc_mixed_fourth_moment(cone, x, m, delta, trials=50, seed=0, cone_samples=200,
                           omega_sq=None):
    """One-sided bound mean (a.h)^2 (a.x)^2 - (1 + 2 (h.x)^2) <= delta for unit
    h in the cone, plus the sub-fact |mean (a.x)^4 - 3| <= delta / 4."""
    x = np.asarray(x, dtype=float)
    if abs(np.linalg.norm(x) - 1) > 1e-10:
        raise ValueError("x must have unit norm")
    if omega_sq is None:
        omega_sq = _omega_sq(cone, seed)
    need = mixed_moment_sample_bound(omega_sq, delta, cone.n)
    notes = [f"omega^2~{omega_sq:.3g}, m={m}, required m>={need:.0f}"]
    if m < need:
        notes.append("precondition warning: m below lemma threshold")

    H = sample_cone_directions(cone, cone_samples, rng_from_seed(sub_seed(seed, 0)))
    pop = 1.0 + 2.0 * (H @ x) ** 2
    mat_rng = rng_from_seed(sub_seed(seed, 1))
    worst_mixed = -np.inf
    worst_fourth = 0.0
    fail_mixed = fail_fourth = 0
    for _ in range(trials):
        A = mat_rng.standard_normal((m, cone.n))
        ax2 = (A @ x) ** 2
        dev = (ax2 @ (A @ H.T) ** 2) / m - pop
        fourth = abs(np.mean(ax2**2) - 3.0)
        worst_mixed = max(worst_mixed, dev.max())
        worst_fourth = max(worst_fourth, fourth)
        fail_mixed += dev.max() > delta
        fail_fourth += fourth > delta / 4
    frac = max(fail_mixed, fail_fourth) / trials
    return LemmaReport(
        "mixed_fourth_moment", trials, frac, FAILURE_GATE,
        notes="; ".join(notes),
        details={
            "worst_mixed": worst_mixed, "worst_fourth": worst_fourth,
            "fail_mixed": fail_mixed, "fail_fourth": fail_fourth,
            "required_m": need,
        },
    )


def check_fourth_moment(m, delta, trials, seed):
    """|mean (a_r.x)^4 - 3| <= delta / 4 for unit x; a_r.x is drawn directly as
    N(0, 1). Any failing trial counts as a violation."""
    rng = rng_from_seed(seed)
    fails = 0
    worst = 0.0
    for _ in range(trials):
        dev = abs(np.mean(rng.standard_normal(m) ** 4) - 3.0)
        worst = max(worst, dev)
        fails += dev > delta / 4
    return LemmaReport(
        "fourth_moment", trials, fails, 0,
        notes=f"m={m}, delta={delta}; Chebyshev bound per trial {1536 / (delta**2 * m):.3g}",
        details={"worst_deviation": worst, "tolerance": delta / 4},
    )


def mc_abs_product_concentration(coneC, coneCp, m, delta, trials=100, seed=0,
                                 pairs=200, c=100.0, directions=None):
    """Uniform deviation of mean |(a.u)(a.v)| from its closed form, u in C and
    v in C'. ``directions=(U, V)`` replaces the sampled unit vectors."""
    if directions is None:
        w2 = max(_omega_sq(coneC, seed), _omega_sq(coneCp, sub_seed(seed, 7)))
        U = sample_cone_directions(coneC, pairs, rng_from_seed(sub_seed(seed, 0)))
        V = sample_cone_directions(coneCp, pairs, rng_from_seed(sub_seed(seed, 3)))
        need = c * w2
        notes = [f"omega^2~{w2:.3g}, m={m}, required m>={need:.0f}"]
        if m < need:
            notes.append("precondition warning: m below c * omega^2")
    else:
        U, V = (np.atleast_2d(np.asarray(d, dtype=float)) for d in directions)
        notes = ["fixed directions"]
    nu, nv = np.linalg.norm(U, axis=1), np.linalg.norm(V, axis=1)
    exact = nu * nv * _abs_moment_formula(np.einsum("ij,ij->i", U, V) / (nu * nv))
    n = U.shape[1]
    mat_rng = rng_from_seed(sub_seed(seed, 1))
    fails = 0
    worst = 0.0
    means = []
    for _ in range(trials):
        A = mat_rng.standard_normal((m, n))
        emp = np.abs((A @ U.T) * (A @ V.T)).mean(axis=0)
        dev = (np.abs(emp - exact) / (nu * nv)).max()
        means.append(emp.mean())
        worst = max(worst, dev)
        fails += dev > delta
    return LemmaReport(
        "abs_product", trials, fails / trials, FAILURE_GATE,
        notes="; ".join(notes),
        details={"worst_deviation": worst, "failures": fails,
                 "mean_empirical": float(np.mean(means)),
                 "mean_exact": float(exact.mean())},
    )


def check_regularity_condition(meas, cset, x, trace_points, constants=None):
    """Margins of the regularity, local curvature and local smoothness
    inequalities for the intensity loss along ``trace_points``.

    The problem is rescaled so that ||x|| = 1, the normalization the
    constants are stated under; x is sign-aligned with each point. Points
    farther than epsilon from +-x are skipped. ``cset`` is accepted for
    interface symmetry and only used to count infeasible points.
    """
    constants = constants or RCConstants()
    if len(trace_points) == 0:
        raise ValueError("need at least one trace point")
    x = np.asarray(getattr(x, "values", x), dtype=float)
    scale = np.linalg.norm(x)
    if scale == 0:
        raise ValueError("x must be nonzero")
    A, y = meas.A, meas.y / scale**2
    xh = x / scale
    m, n = A.shape
    a, lam, gam = constants.alpha, constants.lam, constants.gamma
    beta = constants.beta_for(n)

    rc = lcc = lsc = np.inf
    used = skipped = infeasible = 0
    for z in trace_points:
        z = np.asarray(z, dtype=float)
        if not contains(cset, z, tol=1e-8 * (1 + np.abs(z).sum())):
            infeasible += 1
        zh = z / scale
        if dist_sign_invariant(zh, xh) > constants.epsilon:
            skipped += 1
            continue
        xs = xh if np.linalg.norm(zh - xh) <= np.linalg.norm(zh + xh) else -xh
        h = zh - xs
        g = grad_intensity(A, y, zh)
        inner = g @ h
        hh = h @ h
        quart = gam * np.mean((A @ h) ** 4)
        rc = min(rc, inner - hh / a - (g @ g) / beta)
        lcc = min(lcc, inner - (1 / a + lam) * hh - quart)
        lsc = min(lsc, beta * (lam * hh + quart) - g @ g)
        used += 1
    worst = -rc if used else np.inf
    return LemmaReport(
        "regularity", used, worst, 1e-9,
        notes=f"alpha={a}, beta={beta:g}, epsilon={constants.epsilon}",
        details={"rc_margin": rc, "lcc_margin": lcc, "lsc_margin": lsc,
                 "skipped": skipped, "infeasible": infeasible},
    )
