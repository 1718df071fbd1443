"""
Global optima over the breakpoint grid, for checking the greedy search.

:func:`exhaustive_oracle` enumerates every placement. :func:`branch_and_bound_oracle`
returns the same optimum on instances far beyond enumeration: it walks
placements left to right and discards a prefix once a lower bound on any
completion exceeds the best full fit found. The bound joins the
continuous fit of the prefix to the best *discontinuous* fit of the
remaining samples, which a dynamic program over the grid gives exactly.
Dropping continuity can only lower the cost, so the bound is valid.
"""

from itertools import combinations
from math import comb
from typing import NamedTuple

import numpy as np

from .core import BreakpointVector, Scaling
from .errors import InvalidBreakpoints, SingularSystem, TooLarge
from .search import candidate_set, greedy_fit
from .constrained_ls import constrained_sse


class OracleResult(NamedTuple):
    breakpoints: BreakpointVector
    mse: float


def _grid(ds):
    cands = candidate_set(ds).midpoints
    scaling = Scaling.for_range(ds.xs[0], ds.xs[-1])
    u = scaling.to_internal(ds.xs)
    return cands, scaling.to_internal(cands), np.searchsorted(ds.xs, cands), u


def exhaustive_oracle(ds, k, degree, size_guard=2_000_000, min_seg_points=1):
    """Best ``k``-segment fit over all placements on the candidate grid.

    Placements that leave a segment with fewer than ``min_seg_points``
    samples, or whose fit is singular, are skipped. Ties go to the
    lexicographically smallest breakpoint vector.

    Raises
    ------
    TooLarge
        If the number of placements exceeds ``size_guard``.
    """
    cands, cu, cut, u = _grid(ds)
    total = comb(cands.size, k - 1)
    if total > size_guard:
        raise TooLarge(f"{total} placements exceed the guard of {size_guard}")
    n = ds.n
    best_sse, best_idx = np.inf, None
    for idx in combinations(range(cands.size), k - 1):
        idx = list(idx)
        offsets = np.concatenate(([0], cut[idx], [n]))
        if np.diff(offsets).min() < min_seg_points:
            continue
        try:
            sse = constrained_sse(u, ds.ys, offsets, cu[idx], degree)
        except SingularSystem:
            continue
        if sse < best_sse:
            best_sse, best_idx = sse, idx
    if best_idx is None:
        raise InvalidBreakpoints(f"no feasible placement of {k - 1} breakpoints")
    return OracleResult(BreakpointVector.for_dataset(ds, cands[best_idx]), best_sse / n)


def segment_costs(u, y, pos, degree):
    """Unconstrained least-squares SSE of every sample range ``pos[s]:pos[t]``.

    Returns an (m, m) array, ``inf`` where ``t <= s``. Ranges with at most
    ``degree + 1`` distinct abscissae are interpolated exactly and cost 0.
    """
    m = pos.size
    w = degree + 1
    out = np.full((m, m), np.inf)
    distinct = np.concatenate(([0], np.cumsum(np.diff(u) != 0)))
    for s in range(m - 1):
        a = pos[s]
        ends = pos[s + 1:]
        xx = u[a:] - u[a]
        yy = y[a:] - y[a]
        powers = np.vander(xx, 2 * degree + 1, increasing=True)
        mom = np.cumsum(powers, axis=0)[ends - a - 1]
        xy = np.cumsum(powers[:, :w] * yy[:, None], axis=0)[ends - a - 1]
        syy = np.cumsum(yy * yy)[ends - a - 1]
        hank = np.arange(w)[:, None] + np.arange(w)[None, :]
        G = mom[:, hank]
        ndist = distinct[ends - 1] - distinct[a] + 1
        cost = np.zeros(ends.size)
        solvable = ndist > w
        if solvable.any():
            coef = np.linalg.solve(G[solvable], xy[solvable][..., None])[..., 0]
            cost[solvable] = syy[solvable] - np.einsum("ij,ij->i", coef, xy[solvable])
        out[s, s + 1:] = np.maximum(cost, 0.0)
    return out


def _suffix_tables(cost, counts_ok, segments):
    """best[q, s]: cheapest split of samples from grid position s into q+1 free pieces."""
    m = cost.shape[0]
    last = m - 1
    c = np.where(counts_ok, cost, np.inf)
    best = np.full((segments, m), np.inf)
    arg = np.full((segments, m), -1, dtype=int)
    best[0, :] = c[:, last]
    for q in range(1, segments):
        # total[s, t] = c[s, t] + best[q-1, t] for interior t
        total = c[:, 1:last] + best[q - 1, 1:last][None, :]
        arg[q] = np.argmin(total, axis=1) + 1
        best[q] = total[np.arange(m), arg[q] - 1]
    return best, arg


class _Moments:
    """Prefix sums giving the normal-equation blocks of any sample range."""

    def __init__(self, u, y, degree):
        w = degree + 1
        yc = y - y.mean()
        powers = np.vander(u, 2 * degree + 1, increasing=True)
        zero = np.zeros((1, 2 * degree + 1))
        self.s = np.vstack((zero, np.cumsum(powers, axis=0)))
        self.t = np.vstack((zero[:, :w], np.cumsum(powers[:, :w] * yc[:, None], axis=0)))
        self.yy = np.concatenate(([0.0], np.cumsum(yc * yc)))
        self.hank = np.arange(w)[:, None] + np.arange(w)[None, :]
        self.w = w

    def sse(self, bounds, knots):
        """Constrained SSE of samples ``bounds[:, 0]:bounds[:, -1]`` for a batch.

        ``bounds`` is (B, k+1) sample offsets and ``knots`` (B, k-1) internal
        breakpoint coordinates. Singular members come back as ``inf``.
        """
        bounds = np.asarray(bounds)
        knots = np.asarray(knots, dtype=float).reshape(bounds.shape[0], -1)
        w = self.w
        nb, k = bounds.shape[0], bounds.shape[1] - 1
        nt = k * w
        A = np.zeros((nb, nt + k - 1, nt + k - 1))
        rhs = np.zeros((nb, nt + k - 1))
        for j in range(k):
            a, b = bounds[:, j], bounds[:, j + 1]
            sl = slice(j * w, (j + 1) * w)
            A[:, sl, sl] = 2.0 * (self.s[b] - self.s[a])[:, self.hank]
            rhs[:, sl] = 2.0 * (self.t[b] - self.t[a])
        powers = np.arange(w)
        for j in range(k - 1):
            v = knots[:, j, None] ** powers
            A[:, nt + j, j * w:(j + 1) * w] = v
            A[:, nt + j, (j + 1) * w:(j + 2) * w] = -v
        A[:, :nt, nt:] = np.swapaxes(A[:, nt:, :nt], 1, 2)
        try:
            sol = np.linalg.solve(A, rhs[..., None])[..., 0]
            ok = np.ones(nb, dtype=bool)
        except np.linalg.LinAlgError:
            sol = np.zeros_like(rhs)
            ok = np.zeros(nb, dtype=bool)
            for i in range(nb):
                try:
                    sol[i] = np.linalg.solve(A[i], rhs[i])
                    ok[i] = True
                except np.linalg.LinAlgError:
                    pass
        yy = self.yy[bounds[:, -1]] - self.yy[bounds[:, 0]]
        # at the optimum theta^T X^T X theta = theta^T X^T y
        out = yy - 0.5 * np.einsum("ij,ij->i", sol[:, :nt], rhs[:, :nt])
        return np.where(ok & np.isfinite(out), np.maximum(out, 0.0), np.inf)


def branch_and_bound_oracle(ds, k, degree, min_seg_points=1, max_nodes=5_000_000,
                            initial=None):
    """Exact minimiser of the ``k``-segment fit over the candidate grid.

    Same contract as :func:`exhaustive_oracle`, without the enumeration
    guard. ``max_nodes`` caps the number of prefixes examined; exceeding it
    raises :class:`TooLarge` rather than returning an unproven answer.

    ``initial`` optionally supplies a known placement of ``k - 1`` grid
    breakpoints. It only seeds the pruning threshold, so a poor guess costs
    time, never correctness.
    """
    cands, cu, cut, u = _grid(ds)
    y = ds.ys
    n = ds.n
    q_total = k - 1
    pos = np.concatenate(([0], cut, [n]))
    gu = np.concatenate(([np.nan], cu, [np.nan]))
    m = pos.size
    cost = segment_costs(u, y, pos, degree)
    counts_ok = (pos[None, :] - pos[:, None]) >= min_seg_points
    best_tab, arg_tab = _suffix_tables(cost, counts_ok, q_total + 1)
    sst = float(np.sum((y - y.mean()) ** 2))
    # pruning tolerance for round-off in the moment-based bounds
    slack = 1e-8 * sst + 1e-12 * float(np.dot(y, y))

    def full_sse(grid_idx):
        idx = [g - 1 for g in grid_idx]
        offsets = np.concatenate(([0], cut[idx], [n])) if idx else np.array([0, n])
        if np.diff(offsets).min() < min_seg_points:
            return np.inf
        try:
            return constrained_sse(u, y, offsets, cu[idx], degree)
        except SingularSystem:
            return np.inf

    if q_total == 0:
        sse = full_sse([])
        if not np.isfinite(sse):
            raise InvalidBreakpoints("single-segment fit is infeasible")
        return OracleResult(BreakpointVector.for_dataset(ds), sse / n)

    # incumbent: the continuous refit of the best discontinuous placement
    inc = []
    s = 0
    for q in range(q_total, 0, -1):
        s = int(arg_tab[q, s])
        inc.append(s)
    best = {"sse": full_sse(inc), "idx": inc}
    seeds = [inc]
    if initial is not None:
        seeds.append([int(np.searchsorted(cands, v)) + 1 for v in initial.interior])
    for start in seeds:
        # a short local descent tightens the threshold a lot for little cost
        try:
            res = greedy_fit(ds, BreakpointVector.for_dataset(ds, cands[[g - 1 for g in start]]),
                             degree, min_seg_points=min_seg_points)
        except (InvalidBreakpoints, SingularSystem):
            continue
        path = [int(np.searchsorted(cands, v)) + 1 for v in res.breakpoints.interior]
        sse = full_sse(path)
        if sse < best["sse"] or (sse == best["sse"] and path < best["idx"]):
            best["sse"], best["idx"] = sse, path
    mom = _Moments(u, y, degree)
    nodes = 0

    def batch_bounds(chosen, children, close):
        # rows: 0, chosen..., child[, n]; knots at chosen (and child if closed)
        b = len(children)
        head = np.tile(pos[chosen], (b, 1)) if chosen else np.zeros((b, 0), dtype=int)
        cols = [np.zeros((b, 1), dtype=int), head, pos[children][:, None]]
        kn = [np.tile(gu[chosen], (b, 1)) if chosen else np.zeros((b, 0))]
        if close:
            cols.append(np.full((b, 1), n))
            kn.append(gu[children][:, None])
        return mom.sse(np.hstack(cols), np.hstack(kn))

    def visit(chosen, loose_prefix):
        nonlocal nodes
        last = chosen[-1] if chosen else 0
        remaining = q_total - len(chosen)
        children = np.arange(last + 1, m - remaining)
        children = children[counts_ok[last, children]]
        # cheap bound: prefix so far plus a free piece up to the child
        lb = loose_prefix + cost[last, children] + best_tab[remaining - 1, children]
        children = children[lb <= best["sse"] + slack]
        if children.size == 0:
            return
        nodes += children.size
        if nodes > max_nodes:
            raise TooLarge(f"branch and bound exceeded {max_nodes} nodes")
        if remaining == 1:
            quick = batch_bounds(chosen, children, close=True)
            for i in np.lexsort((children, quick)):
                if quick[i] > best["sse"] + slack:
                    break
                path = chosen + [int(children[i])]
                sse = full_sse(path)
                if sse < best["sse"] or (sse == best["sse"] and path < best["idx"]):
                    best["sse"], best["idx"] = sse, path
            return
        if chosen:
            tight = batch_bounds(chosen, children, close=False)
        else:
            tight = cost[0, children]
        lb = tight + best_tab[remaining - 1, children]
        for i in np.lexsort((children, lb)):
            if lb[i] > best["sse"] + slack:
                break
            visit(chosen + [int(children[i])], tight[i])

    visit([], 0.0)
    if not np.isfinite(best["sse"]):
        raise InvalidBreakpoints(f"no feasible placement of {q_total} breakpoints")
    idx = [g - 1 for g in best["idx"]]
    return OracleResult(BreakpointVector.for_dataset(ds, cands[idx]), best["sse"] / n)
