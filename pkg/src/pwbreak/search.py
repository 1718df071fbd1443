"""
Greedy breakpoint location search.

Breakpoints live on the grid of midpoints between neighbouring distinct
abscissae. One sweep looks at every interior breakpoint independently and
lets it step to the neighbouring grid point on either side if the two-piece
fit over its two adjacent segments improves strictly; sweeps repeat until
nothing moves or a breakpoint vector recurs. The best global fit seen along
the way is returned.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .constrained_ls import constrained_sse, fit_piecewise
from .core import BreakpointVector, Scaling, partition, segment_offsets
from .errors import InvalidBreakpoints, NoCandidates, SingularSystem

log = logging.getLogger(__name__)

TERMINATION_REASONS = ("no_moves", "cycle_detected", "max_iterations")


@dataclass(frozen=True, eq=False)
class CandidateSet:
    midpoints: np.ndarray

    def __len__(self):
        return self.midpoints.size

    def __contains__(self, value):
        i = np.searchsorted(self.midpoints, value)
        return bool(i < self.midpoints.size and self.midpoints[i] == value)


def candidate_set(ds):
    """Midpoints of consecutive abscissae, excluding any that hit a sample.

    Raises
    ------
    NoCandidates
        If all abscissae are equal.
    """
    mids = (ds.xs[:-1] + ds.xs[1:]) / 2.0
    mids = np.unique(mids)
    pos = np.searchsorted(ds.xs, mids)
    on_sample = (pos < ds.n) & (ds.xs[np.minimum(pos, ds.n - 1)] == mids)
    mids = mids[~on_sample]
    if mids.size == 0:
        raise NoCandidates("all abscissae are equal; no breakpoint can be placed")
    mids.setflags(write=False)
    return CandidateSet(mids)


class CandidateTriple(NamedTuple):
    lower: Optional[float]
    current: Optional[float]
    upper: Optional[float]


def _midpoint(a, b):
    m = (a + b) / 2.0
    # equal neighbours give a midpoint sitting on a sample
    return None if a == b else float(m)


def neighbor_candidates(ds, part, i):
    """The three grid positions open to interior breakpoint ``i`` (0-based).

    ``lower`` and ``upper`` are ``None`` when the adjacent segment holds fewer
    than two samples or the two samples share an abscissa.
    """
    k = part.segment_count
    if not 0 <= i < k - 1:
        raise IndexError(f"interior breakpoint index {i} out of range for {k} segments")
    lo, mid, hi = part.offsets[i], part.offsets[i + 1], part.offsets[i + 2]
    xs = ds.xs
    lower = _midpoint(xs[mid - 2], xs[mid - 1]) if mid - lo >= 2 else None
    current = _midpoint(xs[mid - 1], xs[mid])
    upper = _midpoint(xs[mid], xs[mid + 1]) if hi - mid >= 2 else None
    return CandidateTriple(lower, current, upper)


def _local_candidates(xs, current):
    split = int(np.searchsorted(xs, current))
    lower = _midpoint(xs[split - 2], xs[split - 1]) if split >= 2 else None
    upper = _midpoint(xs[split], xs[split + 1]) if xs.size - split >= 2 else None
    return lower, upper


def _local_score(u, y, xs, cand, scale, degree, min_seg_points):
    if cand is None:
        return np.inf
    split = int(np.searchsorted(xs, cand))
    if split < min_seg_points or xs.size - split < min_seg_points:
        return np.inf
    offsets = np.array([0, split, xs.size])
    try:
        sse = constrained_sse(u, y, offsets, scale.to_internal([cand]), degree)
    except SingularSystem:
        return np.inf
    return sse / xs.size


def local_scores(local_ds, bounds, degree, min_seg_points=1, scaling=None):
    """Candidates and local MSEs for one breakpoint update.

    Parameters
    ----------
    local_ds : Dataset
        Samples of the two segments adjacent to the breakpoint.
    bounds : sequence of 3 floats
        Previous breakpoint, current breakpoint, next breakpoint. Only the
        current one is used; the outer two are implied by ``local_ds``.

    Returns
    -------
    candidates : CandidateTriple
    scores : tuple of 3 floats
        Local MSE of each candidate, ``inf`` when absent or infeasible.
    """
    xs, ys = local_ds.xs, local_ds.ys
    current = float(bounds[1])
    if scaling is None:
        scaling = Scaling.for_range(xs[0], xs[-1])
    lower, upper = _local_candidates(xs, current)
    triple = CandidateTriple(lower, current, upper)
    u = scaling.to_internal(xs)
    scores = tuple(_local_score(u, ys, xs, c, scaling, degree, min_seg_points)
                   for c in triple)
    return triple, scores


def tie_tolerance(y, scores):
    """Score differences below this are round-off, not improvement.

    Exactly representable data give local MSEs that are pure round-off
    (around 1e-30 relative to y**2); without a floor those would decide moves.
    """
    finite = [v for v in scores if np.isfinite(v)]
    top = max(finite) if finite else 0.0
    y = np.asarray(y, dtype=float)
    return 1e-12 * top + 1e-20 * float(np.mean(y * y))


def choose_candidate(triple, scores, atol=0.0):
    """Pick the new breakpoint; a neighbour must beat both alternatives.

    Beating means being lower by more than ``atol``; anything else, ties
    included, keeps the current breakpoint.
    """
    r_minus, r, r_plus = scores
    if r_minus < r - atol and r_minus < r_plus - atol:
        return triple.lower
    if r_plus < r_minus - atol and r_plus < r - atol:
        return triple.upper
    return triple.current


def update_single_breakpoint(local_ds, bounds, degree, min_seg_points=1, scaling=None):
    """Return the updated position of the middle breakpoint in ``bounds``."""
    triple, scores = local_scores(local_ds, bounds, degree, min_seg_points, scaling)
    return choose_candidate(triple, scores, tie_tolerance(local_ds.ys, scores))


def snap_to_grid(ds, interior):
    """Move each interior breakpoint to the midpoint of the gap holding it.

    The partition of ``ds`` is unchanged by the snap.
    """
    interior = np.asarray(interior, dtype=float)
    pos = np.searchsorted(ds.xs, interior)
    if ((pos == 0) | (pos == ds.n)).any():
        raise InvalidBreakpoints("interior breakpoints must lie strictly inside the data range")
    if (ds.xs[pos] == interior).any():
        raise InvalidBreakpoints("interior breakpoint coincides with a sample")
    return (ds.xs[pos - 1] + ds.xs[pos]) / 2.0


def _snap_targets(ds, k, targets):
    cands = candidate_set(ds).midpoints
    if k - 1 > cands.size:
        raise InvalidBreakpoints(f"cannot place {k - 1} breakpoints on {cands.size} candidates")
    idx = []
    for target in targets:
        i = int(np.argmin(np.abs(cands - target)))
        if idx and i <= idx[-1]:
            i = idx[-1] + 1
        idx.append(i)
    # pull back from the right end if the forward fix-up overflowed
    for j in range(len(idx) - 1, -1, -1):
        idx[j] = min(idx[j], cands.size - (len(idx) - j))
        if j + 1 < len(idx):
            idx[j] = min(idx[j], idx[j + 1] - 1)
    return BreakpointVector.for_dataset(ds, cands[idx])


def quantile_init(ds, k):
    """``k - 1`` interior breakpoints at empirical quantiles, snapped to the grid."""
    return _snap_targets(ds, k, np.quantile(ds.xs, np.arange(1, k) / k))


def uniform_init(ds, k):
    """``k - 1`` breakpoints evenly spaced over the data range, snapped to the grid."""
    return _snap_targets(ds, k, np.linspace(ds.xs[0], ds.xs[-1], k + 1)[1:-1])


def random_init(ds, k, seed):
    """``k - 1`` distinct grid points drawn with ``numpy.random.default_rng(seed)``."""
    cands = candidate_set(ds).midpoints
    if k - 1 > cands.size:
        raise InvalidBreakpoints(f"cannot place {k - 1} breakpoints on {cands.size} candidates")
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(cands.size, size=k - 1, replace=False))
    return BreakpointVector.for_dataset(ds, cands[idx])


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    breakpoints: tuple
    mse: float
    moves: int
    reverted: int = 0


@dataclass
class SearchTrace:
    records: list = field(default_factory=list)
    best_mse: list = field(default_factory=list)
    best_breakpoints: tuple = ()
    termination_reason: str = ""

    @property
    def iterations(self):
        return len(self.records) - 1

    def summary(self):
        return {
            "iterations": self.iterations,
            "termination_reason": self.termination_reason,
            "initial_mse": self.records[0].mse if self.records else None,
            "best_mse": self.best_mse[-1] if self.best_mse else None,
            "mse_history": [r.mse for r in self.records],
        }


class GreedyResult(NamedTuple):
    model: object
    breakpoints: BreakpointVector
    trace: SearchTrace

    @property
    def mse(self):
        return self.trace.best_mse[-1]


def _sweep(ds, u, full, offsets, degree, min_seg_points, scaling, workers):
    interior = full[1:-1]

    def update(i):
        a, b = offsets[i], offsets[i + 2]
        xs = ds.xs[a:b]
        lower, upper = _local_candidates(xs, interior[i])
        triple = CandidateTriple(lower, float(interior[i]), upper)
        scores = tuple(_local_score(u[a:b], ds.ys[a:b], xs, c, scaling, degree, min_seg_points)
                       for c in triple)
        return choose_candidate(triple, scores, tie_tolerance(ds.ys[a:b], scores))

    if workers and workers > 1 and interior.size > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            proposed = list(pool.map(update, range(interior.size)))
    else:
        proposed = [update(i) for i in range(interior.size)]
    return np.array(proposed, dtype=float)


def _resolve_collisions(xs, old, proposed, left_end, min_seg_points):
    """Revert moves that break ordering or starve a segment.

    Each accepted move was feasible with its neighbours held fixed, so
    reverting the later offender always restores a valid vector.
    """
    final = old.copy()
    reverted = 0
    prev = left_end
    for i in range(old.size):
        if proposed[i] != old[i]:
            ok = proposed[i] > prev
            if ok:
                count = np.searchsorted(xs, proposed[i]) - np.searchsorted(xs, prev)
                ok = count >= min_seg_points
            if ok:
                final[i] = proposed[i]
            else:
                reverted += 1
        prev = final[i]
    return final, reverted


def greedy_fit(ds, init, degree, max_iterations=200, min_seg_points=1, workers=None):
    """Optimise breakpoint locations for a fixed number of segments.

    Parameters
    ----------
    ds : Dataset
    init : BreakpointVector
        Starting breakpoints. Off-grid values are snapped to the midpoint of
        the gap they fall in.
    degree : int
    max_iterations : int
        Hard cap on the number of sweeps.
    min_seg_points : int
        Moves leaving a segment with fewer samples are rejected. Continuity
        usually keeps thin segments well posed; moves whose fit is singular
        are rejected regardless.
    workers : int, optional
        Evaluate the per-breakpoint updates of a sweep on this many threads.
        Results are identical to the sequential run.

    Returns
    -------
    GreedyResult
        ``(model, breakpoints, trace)`` for the lowest-MSE vector visited.
    """
    if max_iterations < 1:
        raise ValueError("max_iterations must be at least 1")
    if min_seg_points < 1:
        raise ValueError("min_seg_points must be at least 1")
    partition(ds, init)
    scaling = Scaling.for_range(ds.xs[0], ds.xs[-1])
    u = scaling.to_internal(ds.xs)
    left, right = init.left_end, init.right_end
    current = snap_to_grid(ds, init.interior) if init.interior.size else init.interior.copy()

    model, err = fit_piecewise(ds, BreakpointVector(current, left, right), degree)
    trace = SearchTrace()
    trace.records.append(IterationRecord(0, tuple(current), err, 0))
    best, best_err, best_model = current, err, model
    trace.best_mse.append(best_err)
    visited = {current.tobytes()}
    trace.termination_reason = "max_iterations"

    if current.size == 0:
        trace.termination_reason = "no_moves"
        max_iterations = 0

    for t in range(1, max_iterations + 1):
        full = np.concatenate(([left], current, [right]))
        offsets = segment_offsets(ds.xs, current)
        proposed = _sweep(ds, u, full, offsets, degree, min_seg_points, scaling, workers)
        new, reverted = _resolve_collisions(ds.xs, current, proposed, left, min_seg_points)
        moves = int(np.count_nonzero(new != current))
        if moves == 0:
            trace.termination_reason = "no_moves"
            break
        try:
            model, err = fit_piecewise(ds, BreakpointVector(new, left, right), degree)
        except SingularSystem:
            model, err = None, np.inf
        trace.records.append(IterationRecord(t, tuple(new), err, moves, reverted))
        if err < best_err:
            best, best_err, best_model = new, err, model
        trace.best_mse.append(best_err)
        key = new.tobytes()
        if key in visited:
            trace.termination_reason = "cycle_detected"
            break
        visited.add(key)
        current = new

    trace.best_breakpoints = tuple(best)
    log.debug("greedy_fit: %d sweeps, stop=%s, best mse=%g",
              trace.iterations, trace.termination_reason, best_err)
    return GreedyResult(best_model, BreakpointVector(best, left, right), trace)
