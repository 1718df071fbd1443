"""
Domain types shared across the package: datasets, breakpoint vectors,
interval partitions and fitted piecewise polynomial models.
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import (
    EmptySegment,
    InvalidBreakpoints,
    LengthMismatch,
    NonFinite,
    TooFewPoints,
)


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Sorted 1-D sample pairs. Build with :func:`validate_and_sort`."""

    xs: np.ndarray
    ys: np.ndarray

    @property
    def n(self):
        return self.xs.size

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return np.array_equal(self.xs, other.xs) and np.array_equal(self.ys, other.ys)


def validate_and_sort(raw_xs, raw_ys):
    """Validate raw samples and return them as a :class:`Dataset` sorted by x.

    The sort is stable, so samples sharing an abscissa keep their input order.

    Raises
    ------
    LengthMismatch, TooFewPoints, NonFinite
    """
    xs = np.asarray(raw_xs, dtype=float).ravel()
    ys = np.asarray(raw_ys, dtype=float).ravel()
    if xs.size != ys.size:
        raise LengthMismatch(f"got {xs.size} abscissae and {ys.size} ordinates")
    if xs.size < 2:
        raise TooFewPoints(f"need at least 2 samples, got {xs.size}")
    bad = ~(np.isfinite(xs) & np.isfinite(ys))
    if bad.any():
        raise NonFinite(f"non-finite value at sample {int(np.flatnonzero(bad)[0])}")
    order = np.argsort(xs, kind="stable")
    return Dataset(_frozen(xs[order]), _frozen(ys[order]))


@dataclass(frozen=True, eq=False)
class BreakpointVector:
    """Interior breakpoints plus the two fixed ends of the data range."""

    interior: np.ndarray
    left_end: float
    right_end: float

    def __post_init__(self):
        interior = _frozen(np.asarray(self.interior, dtype=float).ravel())
        object.__setattr__(self, "interior", interior)
        object.__setattr__(self, "left_end", float(self.left_end))
        object.__setattr__(self, "right_end", float(self.right_end))
        if not np.all(np.isfinite(interior)):
            raise InvalidBreakpoints("breakpoints must be finite")
        full = self.full
        if interior.size and not np.all(np.diff(full) > 0):
            raise InvalidBreakpoints(
                f"breakpoints must be strictly increasing inside "
                f"({self.left_end}, {self.right_end}): {interior.tolist()}")
        if self.right_end < self.left_end:
            raise InvalidBreakpoints("right end lies left of left end")

    @classmethod
    def for_dataset(cls, ds, interior=()):
        return cls(interior, ds.xs[0], ds.xs[-1])

    @property
    def segment_count(self):
        return self.interior.size + 1

    @property
    def full(self):
        """All breakpoints including both ends."""
        return np.concatenate(([self.left_end], self.interior, [self.right_end]))

    def without(self, i):
        """Copy with the interior breakpoint at position ``i`` removed."""
        return BreakpointVector(np.delete(self.interior, i), self.left_end, self.right_end)

    def __eq__(self, other):
        if not isinstance(other, BreakpointVector):
            return NotImplemented
        return (np.array_equal(self.interior, other.interior)
                and self.left_end == other.left_end
                and self.right_end == other.right_end)

    def __hash__(self):
        return hash((self.interior.tobytes(), self.left_end, self.right_end))


@dataclass(frozen=True)
class IntervalPartition:
    """Assignment of sorted sample indices to segments.

    ``offsets`` has k+1 entries; segment j covers indices
    ``offsets[j]:offsets[j+1]``.
    """

    offsets: np.ndarray

    @property
    def counts(self):
        return np.diff(self.offsets)

    @property
    def segments(self):
        return [range(a, b) for a, b in zip(self.offsets[:-1], self.offsets[1:])]

    @property
    def segment_count(self):
        return self.offsets.size - 1


def segment_offsets(xs, interior):
    # membership is [xi_{j-1}, xi_j) except the last segment, which is closed
    inner = np.searchsorted(xs, interior, side="left")
    return np.concatenate(([0], inner, [xs.size])).astype(np.intp)


def partition(ds, bp):
    """Split the samples of ``ds`` into the segments defined by ``bp``.

    Raises
    ------
    InvalidBreakpoints
        If the ends of ``bp`` do not match the data range or an interior
        breakpoint coincides with a sample abscissa.
    EmptySegment
        If a segment receives no samples.
    """
    if bp.left_end != ds.xs[0] or bp.right_end != ds.xs[-1]:
        raise InvalidBreakpoints(
            f"breakpoint ends ({bp.left_end}, {bp.right_end}) do not match "
            f"data range ({ds.xs[0]}, {ds.xs[-1]})")
    if bp.interior.size:
        pos = np.searchsorted(ds.xs, bp.interior)
        hit = (pos < ds.n) & (ds.xs[np.minimum(pos, ds.n - 1)] == bp.interior)
        if hit.any():
            raise InvalidBreakpoints(
                f"breakpoint {bp.interior[hit][0]} coincides with a sample")
    offsets = segment_offsets(ds.xs, bp.interior)
    counts = np.diff(offsets)
    if (counts == 0).any():
        raise EmptySegment(f"segment {int(np.flatnonzero(counts == 0)[0])} holds no samples")
    return IntervalPartition(offsets)


@dataclass(frozen=True)
class Scaling:
    """Affine map ``u = (x - center) / half_width`` onto [-1, 1]."""

    center: float = 0.0
    half_width: float = 1.0

    @classmethod
    def for_range(cls, lo, hi):
        half = (hi - lo) / 2.0
        if not half > 0:
            half = 1.0
        return cls((hi + lo) / 2.0, half)

    def to_internal(self, x):
        return (np.asarray(x, dtype=float) - self.center) / self.half_width

    def coefficients_to_user(self, coef):
        """Re-express ascending coefficients in u as coefficients in x."""
        inner = np.array([-self.center / self.half_width, 1.0 / self.half_width])
        out = np.zeros_like(coef)
        power = np.array([1.0])
        for p, c in enumerate(coef):
            out[:p + 1] += c * power
            power = P.polymul(power, inner)
        return out


def segment_frames(full):
    """One :class:`Scaling` per segment, mapping ``[full[j], full[j+1]]`` onto [-1, 1]."""
    full = np.asarray(full, dtype=float)
    return tuple(Scaling.for_range(a, b) for a, b in zip(full[:-1], full[1:]))


@dataclass(frozen=True, eq=False)
class PiecewiseModel:
    """Continuous piecewise polynomial of a fixed degree.

    Piece ``j`` is a polynomial in its own coordinate
    ``u = scalings[j].to_internal(x)``; fitted models use the frame taking
    the segment onto [-1, 1], which keeps every block well conditioned.
    With ``scalings=None`` the coefficients are taken to be in x directly.
    :attr:`coefficients` always gives them in x (ascending powers).
    """

    degree: int
    internal_coefficients: np.ndarray
    breakpoints: BreakpointVector
    scalings: tuple = None

    def __post_init__(self):
        coef = _frozen(np.atleast_2d(self.internal_coefficients))
        k = self.breakpoints.segment_count
        if coef.shape != (k, self.degree + 1):
            raise ValueError(
                f"coefficient array has shape {coef.shape}, expected "
                f"({k}, {self.degree + 1})")
        object.__setattr__(self, "internal_coefficients", coef)
        scalings = tuple(self.scalings) if self.scalings is not None else (Scaling(),) * k
        if len(scalings) != k:
            raise ValueError(f"need {k} segment scalings, got {len(scalings)}")
        object.__setattr__(self, "scalings", scalings)
        object.__setattr__(self, "_centers", np.array([sc.center for sc in scalings]))
        object.__setattr__(self, "_halves", np.array([sc.half_width for sc in scalings]))

    @property
    def coefficients(self):
        return np.array([sc.coefficients_to_user(c)
                         for sc, c in zip(self.scalings, self.internal_coefficients)])

    def segment_index(self, x):
        # a point sitting exactly on an interior breakpoint belongs to the left piece
        return np.searchsorted(self.breakpoints.interior, x, side="left")

    def predict(self, x):
        x = np.asarray(x, dtype=float)
        seg = self.segment_index(x)
        u = (x - self._centers[seg]) / self._halves[seg]
        coef = self.internal_coefficients[seg]
        # Horner in the segment coordinate
        out = np.zeros_like(u)
        for p in range(self.degree, -1, -1):
            out = out * u + coef[..., p]
        return out

    def continuity_residuals(self):
        """|p_j(xi_j) - p_{j+1}(xi_j)| for every interior breakpoint."""
        out = []
        for j, xi in enumerate(self.breakpoints.interior):
            left = P.polyval(self.scalings[j].to_internal(xi), self.internal_coefficients[j])
            right = P.polyval(self.scalings[j + 1].to_internal(xi),
                              self.internal_coefficients[j + 1])
            out.append(abs(left - right))
        return np.array(out)


def predict(model, x):
    """Evaluate ``model`` at ``x`` (scalar or array).

    Outside the breakpoint range the first or last segment is extrapolated.
    """
    out = model.predict(x)
    return float(out) if np.ndim(out) == 0 else out
