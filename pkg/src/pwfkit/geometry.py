"""Descent cones, their projections, and Monte Carlo statistical dimension."""
from dataclasses import dataclass

import numpy as np

from .model import rng_from_seed

__all__ = [
    "ConeModel",
    "WidthEstimate",
    "subspace_cone",
    "orthant_cone",
    "l1_descent_cone",
    "project_cone",
    "polar_project_l1_descent",
    "polar_scale_l1_descent",
    "statistical_dimension_mc",
    "sample_cone_directions",
    "m0_l1_sparse",
]

BISECT_TOL = 1e-10


@dataclass(frozen=True)
class ConeModel:
    """A closed cone in R^n.

    kind "subspace" carries an n-by-d orthonormal ``basis``; "l1_descent"
    carries ``signs`` in {-1, 0, +1}, the sign pattern of the sparse point the
    l1 norm descends from.
    """

    kind: str
    n: int
    basis: np.ndarray | None = None
    signs: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == "subspace":
            B = np.asarray(self.basis, dtype=float)
            if B.ndim != 2 or B.shape[0] != self.n:
                raise ValueError("basis must be n-by-d")
            if not np.allclose(B.T @ B, np.eye(B.shape[1]), atol=1e-10):
                raise ValueError("basis must be orthonormal")
            object.__setattr__(self, "basis", B)
        elif self.kind == "l1_descent":
            s = np.asarray(self.signs, dtype=float)
            if s.shape != (self.n,) or not np.all(np.isin(s, (-1.0, 0.0, 1.0))):
                raise ValueError("signs must be a length-n vector over {-1, 0, 1}")
            if not np.any(s):
                raise ValueError("signs need at least one nonzero entry")
            object.__setattr__(self, "signs", s)
        elif self.kind != "nonneg_orthant":
            raise ValueError(f"unknown cone kind {self.kind!r}")


@dataclass
class WidthEstimate:
    mean_sq: float  # E||P_C(g)||^2, the statistical dimension
    mean: float  # E||P_C(g)||, the width of C intersected with the unit ball
    stderr: float  # standard error of mean_sq
    trials: int


def subspace_cone(basis):
    B = np.asarray(basis, dtype=float)
    if B.ndim == 1:
        B = B[:, None]
    q, _ = np.linalg.qr(B)
    return ConeModel("subspace", B.shape[0], basis=q)


def orthant_cone(n):
    return ConeModel("nonneg_orthant", int(n))


def l1_descent_cone(x):
    """Tangent cone of the l1 ball of radius ||x||_1 at ``x``."""
    x = np.asarray(getattr(x, "values", x), dtype=float)
    return ConeModel("l1_descent", x.shape[0], signs=np.sign(x))


def _check_dim(cone, v):
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != cone.n:
        raise ValueError(f"vector length {v.shape[-1]} does not match cone dimension {cone.n}")
    return v


def _polar_dJ(t, on, sg, off_abs):
    # half-derivative of J(t) = ||g_S - t s_S||^2 + sum_off (|g_i| - t)_+^2
    return on * t - sg - np.maximum(off_abs - t[..., None], 0.0).sum(axis=-1)


def polar_scale_l1_descent(cone, g):
    """Optimal polar scale t* for each row of ``g`` (1-D input gives a scalar).

    Minimizes J(t) over t >= 0 by bisection on J' to an interval of
    ``BISECT_TOL``, then snaps to the closed form for the active set found.
    """
    if cone.kind != "l1_descent":
        raise ValueError("polar projection is defined for l1_descent cones only")
    g = _check_dim(cone, g)
    single = g.ndim == 1
    G = np.atleast_2d(g)
    supp = cone.signs != 0
    on = float(supp.sum())
    sg = G[:, supp] @ cone.signs[supp]
    off_abs = np.abs(G[:, ~supp])

    lo = np.zeros(G.shape[0])
    hi = np.maximum(np.maximum(sg / on, 0.0),
                    off_abs.max(axis=1) if off_abs.shape[1] else 0.0)
    hi = hi + 1.0
    # dJ is nondecreasing; dJ(0) >= 0 means t* = 0
    at_zero = _polar_dJ(lo, on, sg, off_abs) >= 0
    while np.any(hi - lo > BISECT_TOL):
        mid = 0.5 * (lo + hi)
        pos = _polar_dJ(mid, on, sg, off_abs) >= 0
        hi = np.where(pos, mid, hi)
        lo = np.where(pos, lo, mid)
    t = 0.5 * (lo + hi)
    # exact stationary point for the active set at t; keep it if consistent
    active = off_abs > t[:, None]
    cnt = on + active.sum(axis=1)
    t_exact = (sg + np.where(active, off_abs, 0.0).sum(axis=1)) / cnt
    same = (np.where(active, off_abs > t_exact[:, None], off_abs <= t_exact[:, None])).all(axis=1)
    t = np.where(same & (t_exact >= 0), t_exact, t)
    t = np.where(at_zero, 0.0, t)
    return float(t[0]) if single else t


def polar_project_l1_descent(cone, g):
    """Projection of ``g`` onto the polar of an l1 descent cone.

    The polar is {w : w_S = t*signs_S, |w_off| <= t, t >= 0}.
    """
    g = _check_dim(cone, g)
    t = np.asarray(polar_scale_l1_descent(cone, g))
    supp = cone.signs != 0
    tt = t[..., None]
    return np.where(supp, tt * cone.signs, np.clip(g, -tt, tt))


def project_cone(cone, v):
    """Projection onto ``cone``; accepts one vector or a stack of rows."""
    v = _check_dim(cone, v)
    if cone.kind == "subspace":
        return (v @ cone.basis) @ cone.basis.T
    if cone.kind == "nonneg_orthant":
        return np.maximum(v, 0.0)
    # Moreau: v = P_C(v) + P_polar(v)
    return v - polar_project_l1_descent(cone, v)


def sample_cone_directions(cone, count, rng):
    """Unit vectors in ``cone``: normalized projections of Gaussian draws."""
    out = np.empty((0, cone.n))
    while out.shape[0] < count:
        P = project_cone(cone, rng.standard_normal((count, cone.n)))
        norms = np.linalg.norm(P, axis=1)
        keep = norms > 1e-12
        out = np.vstack([out, P[keep] / norms[keep, None]])
    return out[:count]


def statistical_dimension_mc(cone, trials, seed, chunk=4096):
    """Monte Carlo estimate of E||P_C(g)||^2 and E||P_C(g)|| for g ~ N(0, I_n)."""
    if trials < 2:
        raise ValueError("need at least two trials")
    rng = rng_from_seed(seed)
    sq = np.empty(trials)
    done = 0
    while done < trials:
        b = min(chunk, trials - done)
        P = project_cone(cone, rng.standard_normal((b, cone.n)))
        sq[done:done + b] = np.einsum("ij,ij->i", P, P)
        done += b
    return WidthEstimate(
        mean_sq=float(sq.mean()),
        mean=float(np.sqrt(sq).mean()),
        stderr=float(sq.std(ddof=1) / np.sqrt(trials)),
        trials=int(trials),
    )


def m0_l1_sparse(n, s):
    """Approximate minimal sample count 2 s log(n/s) for s-sparse signals."""
    if not 1 <= s <= n:
        raise ValueError(f"need 1 <= s <= n, got s={s}, n={n}")
    return 2.0 * s * np.log(n / s)
