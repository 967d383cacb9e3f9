"""Regularizers and Euclidean projections onto their sublevel sets."""
from dataclasses import dataclass

import numpy as np

__all__ = [
    "UnsupportedProjection",
    "Regularizer",
    "ConstraintSet",
    "evaluate",
    "sublevel_from_signal",
    "project",
    "contains",
]

REG_KINDS = ("l1", "l0", "tv_iso", "tv_aniso", "discrete_indicator", "none")
SET_KINDS = ("unconstrained", "l1_ball", "top_k", "discrete", "nonneg")


class UnsupportedProjection(ValueError):
    """Raised for regularizers whose sublevel sets have no exact projection."""


def _alphabet(values):
    a = np.asarray(values, dtype=float).ravel()
    if a.size == 0:
        raise ValueError("alphabet must be nonempty")
    if np.any(np.diff(a) <= 0):
        raise ValueError("alphabet must be strictly increasing")
    return a


@dataclass(frozen=True)
class Regularizer:
    kind: str
    p: float = 1.0
    alphabet: tuple = ()

    def __post_init__(self):
        if self.kind not in REG_KINDS:
            raise ValueError(f"unknown regularizer {self.kind!r}")
        if self.kind.startswith("tv") and not self.p > 0:
            raise ValueError("TV exponent p must be positive")
        if self.kind == "discrete_indicator":
            object.__setattr__(self, "alphabet", tuple(_alphabet(self.alphabet)))


@dataclass(frozen=True)
class ConstraintSet:
    """A closed, nonempty, exactly projectable set.

    ``radius`` is used by ``l1_ball``, ``k`` by ``top_k`` and ``alphabet`` by
    ``discrete``.
    """

    kind: str
    radius: float = 0.0
    k: int = 0
    alphabet: tuple = ()

    def __post_init__(self):
        if self.kind not in SET_KINDS:
            raise ValueError(f"unknown constraint set {self.kind!r}")
        if self.kind == "l1_ball" and not self.radius >= 0:
            raise ValueError("l1 radius must be nonnegative")
        if self.kind == "top_k" and self.k < 0:
            raise ValueError("k must be nonnegative")
        if self.kind == "discrete":
            object.__setattr__(self, "alphabet", tuple(_alphabet(self.alphabet)))


def _tv_diffs(z, shape):
    z = np.asarray(z, dtype=float)
    if shape is not None:
        z = z.reshape(shape)
    if z.ndim != 2:
        raise ValueError("TV regularizers need 2-D data or an explicit shape")
    # forward differences, zero at the last row/column
    dv = np.zeros_like(z)
    dh = np.zeros_like(z)
    dv[:-1, :] = z[1:, :] - z[:-1, :]
    dh[:, :-1] = z[:, 1:] - z[:, :-1]
    return dv, dh


def evaluate(reg, z, shape=None):
    """Value of ``reg`` at ``z``; may be ``inf`` for the discrete indicator."""
    z = np.asarray(z, dtype=float)
    if reg.kind == "l1":
        return float(np.abs(z).sum())
    if reg.kind == "l0":
        return float(np.count_nonzero(z))
    if reg.kind == "tv_aniso":
        dv, dh = _tv_diffs(z, shape)
        return float((np.abs(dv) ** reg.p).sum() + (np.abs(dh) ** reg.p).sum())
    if reg.kind == "tv_iso":
        dv, dh = _tv_diffs(z, shape)
        return float((np.sqrt(dv**2 + dh**2) ** reg.p).sum())
    if reg.kind == "discrete_indicator":
        return 0.0 if np.all(np.isin(z, reg.alphabet)) else float("inf")
    return 0.0


def sublevel_from_signal(reg_kind, x, alphabet=None):
    """The set {z : R(z) <= R(x)} for a projectable regularizer kind."""
    if isinstance(reg_kind, Regularizer):
        alphabet = reg_kind.alphabet if alphabet is None else alphabet
        reg_kind = reg_kind.kind
    x = np.asarray(getattr(x, "values", x), dtype=float)
    if reg_kind == "l1":
        return ConstraintSet("l1_ball", radius=float(np.abs(x).sum()))
    if reg_kind == "l0":
        return ConstraintSet("top_k", k=int(np.count_nonzero(x)))
    if reg_kind == "discrete_indicator":
        if alphabet is None:
            raise ValueError("discrete_indicator needs an alphabet")
        return ConstraintSet("discrete", alphabet=tuple(alphabet))
    if reg_kind == "none":
        return ConstraintSet("unconstrained")
    if reg_kind in ("tv_iso", "tv_aniso"):
        raise UnsupportedProjection(
            f"{reg_kind} sublevel sets have no closed-form projection")
    raise ValueError(f"unknown regularizer {reg_kind!r}")


def _project_l1(v, radius):
    a = np.abs(v)
    if a.sum() <= radius:
        return v.copy()
    if radius == 0:
        return np.zeros_like(v)
    # largest rho with u_rho >= (cumsum_rho - radius) / rho; equality only
    # zeroes that entry, and the weak form survives rounding at tiny radii
    u = np.sort(a)[::-1]
    css = np.cumsum(u) - radius
    idx = np.arange(1, u.size + 1)
    rho = np.nonzero(u * idx >= css)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.sign(v) * np.maximum(a - theta, 0.0)


def _project_top_k(v, k):
    out = np.zeros_like(v)
    if k <= 0:
        return out
    # stable sort: ties keep the lower index
    keep = np.argsort(-np.abs(v), kind="stable")[:k]
    out[keep] = v[keep]
    return out


def _project_discrete(v, alphabet):
    a = np.asarray(alphabet)
    if a.size == 1:
        return np.full_like(v, a[0])
    hi = np.clip(np.searchsorted(a, v, side="left"), 1, a.size - 1)
    lo = hi - 1
    # midpoints go to the smaller value
    take_hi = (a[hi] - v) < (v - a[lo])
    return np.where(take_hi, a[hi], a[lo])


def project(cset, v):
    """Euclidean projection of ``v`` onto ``cset`` (exact for every kind)."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError("project expects a 1-D vector")
    kind = cset.kind
    if kind == "unconstrained":
        return v.copy()
    if kind == "l1_ball":
        return _project_l1(v, cset.radius)
    if kind == "top_k":
        if cset.k > v.size:
            raise ValueError(f"k={cset.k} exceeds dimension {v.size}")
        return _project_top_k(v, cset.k)
    if kind == "discrete":
        return _project_discrete(v, cset.alphabet)
    if kind == "nonneg":
        return np.maximum(v, 0.0)
    raise ValueError(f"unknown constraint set {kind!r}")


def contains(cset, z, tol=1e-10):
    """Membership test with slack ``tol`` on the l1 budget."""
    z = np.asarray(z, dtype=float)
    if cset.kind == "unconstrained":
        return True
    if cset.kind == "l1_ball":
        return bool(np.abs(z).sum() <= cset.radius + tol)
    if cset.kind == "top_k":
        return bool(np.count_nonzero(z) <= cset.k)
    if cset.kind == "discrete":
        return bool(np.all(np.isin(z, cset.alphabet)))
    return bool(np.all(z >= 0))
