"""Projected Wirtinger Flow: z_{t+1} = P_K(z_t - mu_t * grad L(z_t))."""
from dataclasses import dataclass, field

import numpy as np

from .constraints import project
from .model import (
    MeasurementSet,
    dist_sign_invariant,
    estimate_signal_norm,
    grad_amplitude,
    grad_intensity,
    loss_amplitude,
    loss_intensity,
    rng_from_seed,
)

__all__ = [
    "SolverConfig",
    "IterRecord",
    "Trace",
    "DivergedError",
    "step_size",
    "pwf_run",
    "init_oracle",
    "init_spectral",
]

DIVERGENCE_FACTOR = 1e6


@dataclass
class SolverConfig:
    """Settings for one PWF run.

    ``mu`` is the intensity learning parameter; ``None`` means ``0.1 / n``.
    It must satisfy ``mu <= c1 / n``. ``step_scaling`` picks the intensity
    step ``mu / norm**2`` ("squared", scale invariant) or ``mu / norm``
    ("linear"); the two agree for unit-norm signals. The amplitude variant
    always uses unit steps after the first (projection-only) update.
    """

    variant: str = "amplitude"
    mu: float | None = None
    c1: float = 0.1
    max_iters: int = 500
    tol_rel: float = 1e-7
    record_every: int = 1
    step_scaling: str = "squared"

    def __post_init__(self):
        if self.variant not in ("intensity", "amplitude"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.step_scaling not in ("squared", "linear"):
            raise ValueError(f"unknown step scaling {self.step_scaling!r}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.record_every < 1:
            raise ValueError("record_every must be at least 1")
        if not self.tol_rel > 0:
            raise ValueError("tol_rel must be positive")
        if self.mu is not None and not self.mu > 0:
            raise ValueError("mu must be positive")

    def resolved_mu(self, n):
        mu = 0.1 / n if self.mu is None else self.mu
        if self.variant == "intensity" and mu > self.c1 / n * (1 + 1e-12):
            raise ValueError(f"mu={mu} exceeds c1/n={self.c1 / n}")
        return mu


@dataclass
class IterRecord:
    tau: int
    loss: float
    grad_norm: float
    step: float  # step that produced z_tau
    dist: float | None = None


@dataclass
class Trace:
    records: list = field(default_factory=list)
    final_z: np.ndarray | None = None
    converged: bool = False
    iterations_used: int = 0
    iterates: list | None = None

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records], dtype=float)


class DivergedError(RuntimeError):
    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


def step_size(config, tau, norm_est=None):
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    if config.variant == "intensity" and not (norm_est is not None and norm_est > 0):
        raise ValueError("intensity steps need a positive norm estimate")
    if tau == 0:
        return 0.0
    if config.variant == "amplitude":
        return 1.0
    mu = config.mu
    if mu is None:
        raise ValueError("step_size needs an explicit mu; use SolverConfig.resolved_mu")
    power = 2 if config.step_scaling == "squared" else 1
    return mu / norm_est**power


def pwf_run(meas, cset, config, z0, x_true=None, keep_iterates=False):
    """Run PWF from ``z0`` and return a :class:`Trace`.

    The first update has step zero, so ``z_1 = P_K(z_0)``. With ``x_true`` the
    run stops once ``dist(z, x) / ||x|| <= tol_rel``; otherwise once
    ``||grad|| / (1 + ||z||) <= tol_rel``. Records are kept every
    ``record_every`` iterations and always for the final iterate.
    ``keep_iterates`` stores every z_tau (tau >= 1) in ``trace.iterates``.
    """
    if not isinstance(meas, MeasurementSet):
        raise TypeError("meas must be a MeasurementSet")
    A, y = meas.A, meas.y
    n = meas.n
    z = np.asarray(z0, dtype=float)
    if z.shape != (n,):
        raise ValueError(f"z0 has shape {z.shape}, expected ({n},)")
    if x_true is not None:
        x_true = np.asarray(getattr(x_true, "values", x_true), dtype=float)
        if x_true.shape != (n,):
            raise ValueError(f"x_true has shape {x_true.shape}, expected ({n},)")
        x_norm = float(np.linalg.norm(x_true))

    if config.variant == "intensity":
        loss_fn, grad_fn = loss_intensity, grad_intensity
    else:
        loss_fn, grad_fn = loss_amplitude, grad_amplitude
    mu = config.resolved_mu(n)
    cfg = SolverConfig(**{**config.__dict__, "mu": mu})
    norm_est = estimate_signal_norm(y)
    if config.variant == "intensity" and norm_est <= 0:
        raise ValueError("intensity PWF needs nonzero measurements")
    blowup = DIVERGENCE_FACTOR * norm_est

    trace = Trace(iterates=[] if keep_iterates else None)
    g = grad_fn(A, y, z)
    for tau in range(config.max_iters):
        step = step_size(cfg, tau, norm_est)
        z = project(cset, z - step * g)
        t = tau + 1
        finite = np.all(np.isfinite(z))
        if not finite or (blowup > 0 and np.linalg.norm(z) > blowup):
            trace.final_z = z
            trace.iterations_used = t
            raise DivergedError(f"iterate diverged at tau={t}", trace)
        if keep_iterates:
            trace.iterates.append(z.copy())
        g = grad_fn(A, y, z)
        gnorm = float(np.linalg.norm(g))
        if x_true is not None:
            dist = dist_sign_invariant(z, x_true)
            crit = dist / x_norm if x_norm > 0 else dist
        else:
            dist = None
            crit = gnorm / (1.0 + float(np.linalg.norm(z)))
        done = crit <= config.tol_rel
        last = done or t == config.max_iters
        if last or t % config.record_every == 0:
            trace.records.append(IterRecord(t, loss_fn(A, y, z), gnorm, step, dist))
        if done:
            trace.converged = True
            break
    trace.final_z = z
    trace.iterations_used = t
    return trace


def init_oracle(x, rho, seed):
    """Point at distance exactly ``rho * ||x||`` from ``x`` in a uniform direction."""
    x = np.asarray(getattr(x, "values", x), dtype=float)
    xn = np.linalg.norm(x)
    if xn == 0:
        raise ValueError("x must be nonzero")
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    u = rng_from_seed(seed).standard_normal(x.shape[0])
    u /= np.linalg.norm(u)
    return x + rho * xn * u


def init_spectral(meas, cset, iters=200, tol=1e-8):
    """Scaled leading eigenvector of (1/m) sum_r y_r a_r a_r^T, projected onto ``cset``.

    Power iteration starts from the matrix diagonal; the sign is fixed so the
    largest-magnitude entry is positive.
    """
    A, y = meas.A, meas.y
    if meas.m < 1:
        raise ValueError("need at least one measurement")
    if not np.any(y > 0):
        raise ValueError("all-zero measurements carry no direction")
    m = meas.m

    def apply(v):
        return A.T @ (y * (A @ v)) / m

    v = (y @ A**2) / m
    v /= np.linalg.norm(v)
    for _ in range(iters):
        w = apply(v)
        lam = v @ w
        if np.linalg.norm(w - lam * v) <= tol * abs(lam):
            break
        v = w / np.linalg.norm(w)
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    return project(cset, np.sqrt(np.mean(y)) * v)
