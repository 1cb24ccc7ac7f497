"""Finite-volume schemes for convex scalar conservation laws in one space
dimension, with per-step certificates of the generalized monotone scheme
inequalities, extremum path tracking and convergence measurement."""

from .core import (
    BURGERS,
    FLUXES,
    QUARTIC,
    SHIFTED_BURGERS,
    ZERO,
    BoundaryReached,
    CFLViolation,
    ConfigError,
    EntropyPair,
    FluxModel,
    GaussianBump,
    GenMonoError,
    GridMismatch,
    GridSpec,
    MatchingError,
    PiecewiseAffine,
    RejectedInput,
    RiemannStep,
    SchemeConfig,
    SmoothRamp,
    SolverError,
    StateSnapshot,
    SumOfBumps,
    derive_entropy_flux,
    get_flux,
    project_initial,
    total_variation,
)
from .exact import (
    RiemannSolution,
    convergence_rate,
    exact_riemann_cell_averages,
    fine_grid_oracle,
    l1_error,
    riemann_sample,
)
from .report import DiagnosticReport, Violation
from .stepper import RunHistory, run, step

__version__ = "0.1.0"
