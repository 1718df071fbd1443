"""Continuous piecewise polynomial regression with greedy breakpoint search."""

from .constrained_ls import (
    KKTSystem,
    assemble_kkt,
    build_vandermonde,
    fit_piecewise,
    polyfit_single,
    solve_kkt,
)
from .core import (
    BreakpointVector,
    Dataset,
    IntervalPartition,
    PiecewiseModel,
    Scaling,
    partition,
    segment_frames,
    predict,
    validate_and_sort,
)
from .errors import *  # noqa: F401,F403
from .metrics import MetricsReport, evaluate, mae, mse, r_squared, rae, rmse
from .oracle import branch_and_bound_oracle, exhaustive_oracle
from .search import (
    CandidateSet,
    CandidateTriple,
    SearchTrace,
    candidate_set,
    greedy_fit,
    neighbor_candidates,
    quantile_init,
    uniform_init,
    random_init,
    update_single_breakpoint,
)
from .selection import SelectionReport, removal_losses, select_breakpoints
from .synthetic import GeneratorSpec, generate

__version__ = "0.1.0"
