"""Signals, Gaussian measurements, the two quadratic-measurement losses and
their (generalized) gradients.

Random draws use numpy's ``PCG64`` bit generator seeded with a non-negative
64-bit integer; standard normals come from numpy's ziggurat sampler
(``Generator.standard_normal``). Identical seeds give identical arrays within
one numpy build.
"""
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Signal",
    "MeasurementSet",
    "rng_from_seed",
    "sub_seed",
    "gen_gaussian_matrix",
    "forward_intensity",
    "loss_intensity",
    "grad_intensity",
    "loss_amplitude",
    "grad_amplitude",
    "dist_sign_invariant",
    "estimate_signal_norm",
    "gen_structured_signal",
    "make_measurements",
]

_U64 = 2**64


@dataclass
class Signal:
    """A ground-truth vector plus the structure it was drawn with.

    ``structure`` is one of ``"sparse"``, ``"discrete"``,
    ``"piecewise_constant"`` or ``"dense"``; ``params`` holds ``s``,
    ``alphabet`` or ``segments`` accordingly.
    """

    values: np.ndarray
    structure: str = "dense"
    params: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.values.shape[0]


@dataclass
class MeasurementSet:
    A: np.ndarray
    y: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.A.ndim != 2 or self.y.ndim != 1:
            raise ValueError("A must be 2-D and y 1-D")
        if self.A.shape[0] != self.y.shape[0]:
            raise ValueError(
                f"A has {self.A.shape[0]} rows but y has {self.y.shape[0]} entries")
        if np.any(self.y < 0):
            raise ValueError("intensities must be nonnegative")

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def n(self):
        return self.A.shape[1]


def _check_seed(seed):
    seed = int(seed)
    if not 0 <= seed < _U64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def rng_from_seed(seed):
    return np.random.Generator(np.random.PCG64(_check_seed(seed)))


def sub_seed(seed, stream):
    """Independent child seed for ``stream`` (an int) of a parent seed."""
    ss = np.random.SeedSequence([_check_seed(seed), int(stream)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def gen_gaussian_matrix(m, n, seed):
    """m-by-n matrix of i.i.d. N(0, 1) entries, deterministic in (m, n, seed)."""
    if m < 1 or n < 1:
        raise ValueError(f"dimensions must be positive, got ({m}, {n})")
    return rng_from_seed(seed).standard_normal((int(m), int(n)))


def _as_problem(A, z):
    A = np.asarray(A, dtype=float)
    z = np.asarray(z, dtype=float)
    if A.ndim != 2 or z.ndim != 1 or A.shape[1] != z.shape[0]:
        raise ValueError(f"shape mismatch: A {A.shape}, vector {z.shape}")
    return A, z


def _as_meas(A, y, z, nonneg=False):
    A, z = _as_problem(A, z)
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.shape[0] != A.shape[0]:
        raise ValueError(f"shape mismatch: A {A.shape}, y {y.shape}")
    if nonneg and np.any(y < 0):
        raise ValueError("intensities must be nonnegative")
    return A, y, z


def forward_intensity(A, x):
    A, x = _as_problem(A, x)
    return (A @ x) ** 2


def loss_intensity(A, y, z):
    A, y, z = _as_meas(A, y, z)
    r = y - (A @ z) ** 2
    return float(r @ r) / (4 * A.shape[0])


def grad_intensity(A, y, z):
    A, y, z = _as_meas(A, y, z)
    Az = A @ z
    return A.T @ ((Az**2 - y) * Az) / A.shape[0]


def loss_amplitude(A, y, z):
    A, y, z = _as_meas(A, y, z, nonneg=True)
    r = np.sqrt(y) - np.abs(A @ z)
    return float(r @ r) / (2 * A.shape[0])


def grad_amplitude(A, y, z):
    """Generalized gradient of the amplitude loss.

    At kinks (``a_r . z == 0``) the sign is taken as +1.
    """
    A, y, z = _as_meas(A, y, z, nonneg=True)
    Az = A @ z
    sgn = np.where(Az >= 0, 1.0, -1.0)
    return A.T @ ((np.abs(Az) - np.sqrt(y)) * sgn) / A.shape[0]


def dist_sign_invariant(z, x):
    z = np.asarray(z, dtype=float)
    x = np.asarray(x, dtype=float)
    if z.shape != x.shape:
        raise ValueError(f"shape mismatch: {z.shape} vs {x.shape}")
    return float(min(np.linalg.norm(z - x), np.linalg.norm(z + x)))


def estimate_signal_norm(y):
    # E[y_r] = ||x||^2 for Gaussian rows, so the root of the mean intensity.
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise ValueError("need at least one measurement")
    if np.any(y < 0):
        raise ValueError("intensities must be nonnegative")
    return float(np.sqrt(np.mean(y)))


def gen_structured_signal(structure, n, seed, *, s=None, alphabet=None, segments=None):
    """Draw a random signal of the requested structure.

    sparse: support uniform without replacement, nonzeros N(0, 1) (redrawn if
    exactly zero). discrete: entries uniform over ``alphabet``.
    piecewise_constant: ``segments`` runs with uniform breakpoints and N(0, 1)
    levels. dense: i.i.d. N(0, 1).
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be positive")
    rng = rng_from_seed(seed)
    if structure == "sparse":
        if s is None or not 0 <= s <= n:
            raise ValueError(f"need 0 <= s <= n, got s={s}, n={n}")
        x = np.zeros(n)
        support = rng.choice(n, size=s, replace=False)
        vals = rng.standard_normal(s)
        while np.any(vals == 0):
            vals[vals == 0] = rng.standard_normal(np.count_nonzero(vals == 0))
        x[support] = vals
        params = {"s": int(s)}
    elif structure == "discrete":
        if alphabet is None or len(alphabet) == 0:
            raise ValueError("alphabet must be nonempty")
        alpha = np.unique(np.asarray(alphabet, dtype=float))
        x = alpha[rng.integers(0, alpha.size, size=n)]
        params = {"alphabet": alpha.tolist()}
    elif structure == "piecewise_constant":
        if segments is None or not 1 <= segments <= n:
            raise ValueError(f"need 1 <= segments <= n, got {segments}")
        cuts = np.sort(rng.choice(np.arange(1, n), size=segments - 1, replace=False))
        levels = rng.standard_normal(segments)
        x = np.repeat(levels, np.diff(np.concatenate([[0], cuts, [n]])))
        params = {"segments": int(segments)}
    elif structure == "dense":
        x = rng.standard_normal(n)
        params = {}
    else:
        raise ValueError(f"unknown structure {structure!r}")
    return Signal(values=x, structure=structure, params=params)


def make_measurements(x, m, seed):
    """Gaussian sensing matrix and exact intensities for signal ``x``."""
    x = np.asarray(getattr(x, "values", x), dtype=float)
    A = gen_gaussian_matrix(m, x.shape[0], seed)
    return MeasurementSet(A=A, y=forward_intensity(A, x), seed=seed)
