"""Projected Wirtinger Flow for structured phase retrieval."""
from .constraints import (
    ConstraintSet,
    Regularizer,
    UnsupportedProjection,
    contains,
    evaluate,
    project,
    sublevel_from_signal,
)
from .geometry import (
    ConeModel,
    WidthEstimate,
    l1_descent_cone,
    m0_l1_sparse,
    orthant_cone,
    project_cone,
    statistical_dimension_mc,
    subspace_cone,
)
from .model import (
    MeasurementSet,
    Signal,
    dist_sign_invariant,
    estimate_signal_norm,
    gen_gaussian_matrix,
    gen_structured_signal,
    make_measurements,
)
from .solver import DivergedError, SolverConfig, Trace, init_oracle, init_spectral, pwf_run

__version__ = "0.1.0"
