"""
Choosing the number of breakpoints by pruning.

Start from more breakpoints than needed, optimise their locations, then
drop whichever breakpoint costs the least to lose, measured as the ratio
of the refit MSE to the current MSE. Stop once every removal would raise
the MSE by more than a factor ``tau`` or the count has reached ``p``.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .constrained_ls import fit_piecewise
from .search import greedy_fit

STOP_REASONS = ("ratio_exceeds_tau", "count_at_most_p", "single_segment")


def _zero_threshold(ds):
    return 1e-14 * float(np.var(ds.ys))


def removal_losses(ds, bp, degree, eps_den=None, base_mse=None):
    """MSE ratio of the fit without each interior breakpoint to the full fit.

    When the full fit is (numerically) exact, a ratio is 1 if the reduced
    fit is exact too and ``inf`` otherwise.

    Returns
    -------
    list of (int, float)
        ``(i, ratio)`` for each interior position ``i`` of ``bp``.
    """
    if bp.interior.size == 0:
        raise ValueError("no interior breakpoints to remove")
    if eps_den is None:
        eps_den = _zero_threshold(ds)
    if base_mse is None:
        _, base_mse = fit_piecewise(ds, bp, degree)
    out = []
    for i in range(bp.interior.size):
        _, reduced = fit_piecewise(ds, bp.without(i), degree)
        if base_mse <= eps_den:
            ratio = 1.0 if reduced <= eps_den else np.inf
        else:
            ratio = reduced / base_mse
        out.append((i, float(ratio)))
    return out


@dataclass
class SelectionRound:
    breakpoints_before: tuple
    ratios: list
    removed_index: Optional[int]
    mse_before: float
    mse_after: Optional[float]
    greedy_iterations: int = 0
    greedy_termination: str = ""

    @property
    def min_ratio(self):
        return min((r for _, r in self.ratios), default=None)

    def to_dict(self):
        return {
            "breakpoints_before": list(self.breakpoints_before),
            "ratios": [{"index": i, "ratio": r} for i, r in self.ratios],
            "removed_index": self.removed_index,
            "mse_before": self.mse_before,
            "mse_after": self.mse_after,
            "greedy_iterations": self.greedy_iterations,
            "greedy_termination": self.greedy_termination,
        }


@dataclass
class SelectionReport:
    rounds: list = field(default_factory=list)
    final_breakpoints: object = None
    final_model: object = None
    final_mse: float = np.nan
    stop_reason: str = ""

    def to_dict(self):
        return {
            "rounds": [r.to_dict() for r in self.rounds],
            "final_breakpoints": self.final_breakpoints.interior.tolist(),
            "final_mse": self.final_mse,
            "stop_reason": self.stop_reason,
        }


def select_breakpoints(ds, init, degree, tau=1.05, p=0, max_iterations=200,
                       min_seg_points=1, workers=None):
    """Prune breakpoints from ``init`` until removal becomes too costly.

    Parameters
    ----------
    ds : Dataset
    init : BreakpointVector
        Deliberately generous starting set.
    degree : int
    tau : float
        Largest acceptable ratio of post-removal to pre-removal MSE (>= 1).
    p : int
        Never prune below this many interior breakpoints.

    Returns
    -------
    SelectionReport
    """
    if not tau >= 1:
        raise ValueError(f"tau must be >= 1, got {tau}")
    if p < 0:
        raise ValueError(f"p must be >= 0, got {p}")
    report = SelectionReport()
    bp = init
    eps_den = _zero_threshold(ds)
    while True:
        model, opt_bp, trace = greedy_fit(ds, bp, degree, max_iterations=max_iterations,
                                          min_seg_points=min_seg_points, workers=workers)
        err = trace.best_mse[-1]
        rnd = SelectionRound(tuple(opt_bp.interior), [], None, err, None,
                             trace.iterations, trace.termination_reason)
        report.rounds.append(rnd)
        report.final_breakpoints, report.final_model, report.final_mse = opt_bp, model, err
        if opt_bp.interior.size == 0:
            report.stop_reason = "single_segment"
            break
        rnd.ratios = removal_losses(ds, opt_bp, degree, eps_den, base_mse=err)
        # first minimum wins ties
        i_min, r_min = min(rnd.ratios, key=lambda t: (t[1], t[0]))
        if r_min > tau:
            report.stop_reason = "ratio_exceeds_tau"
            break
        if opt_bp.interior.size <= p:
            report.stop_reason = "count_at_most_p"
            break
        rnd.removed_index = i_min
        bp = opt_bp.without(i_min)
        _, rnd.mse_after = fit_piecewise(ds, bp, degree)
    return report
