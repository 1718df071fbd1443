"""
Continuous piecewise polynomial least squares for fixed breakpoints.

The fit minimises ||X theta - y||^2 subject to C theta = 0, where X is
block diagonal in per-segment Vandermonde blocks and each row of C ties two
neighbouring pieces together at their shared breakpoint. The optimum is
read off the symmetric KKT system

    [[2 X^T X, C^T], [C, 0]] [theta; lambda] = [2 X^T y; 0].

Each piece is written in its own coordinate, the affine map taking its
segment onto [-1, 1]. A single global coordinate is not enough: a cubic on a
short segment then has nearly collinear monomial columns and the KKT matrix
condition number reaches 1e12 on ordinary data.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .core import BreakpointVector, PiecewiseModel, partition, segment_frames
from .errors import SingularSystem
from .metrics import mse as _mse

_EPS = np.finfo(float).eps


def build_vandermonde(points, degree):
    """Rows ``[1, z, z**2, ..., z**degree]`` for each point ``z``.

    >>> build_vandermonde([2.0], 2)
    array([[1., 2., 4.]])
    """
    z = np.asarray(points, dtype=float).ravel()
    return np.vander(z, degree + 1, increasing=True)


@dataclass(frozen=True, eq=False)
class KKTSystem:
    """Assembled KKT matrix, right-hand side and the pieces it came from."""

    A: np.ndarray
    b: np.ndarray
    design: np.ndarray
    constraints: np.ndarray
    y: np.ndarray
    degree: int
    segment_count: int
    frames: tuple = ()

    @property
    def n_theta(self):
        return self.segment_count * (self.degree + 1)

    @property
    def n_lambda(self):
        return self.segment_count - 1


def _frames(lo, knots, hi):
    ends = np.concatenate(([lo], np.asarray(knots, dtype=float), [hi]))
    return segment_frames(ends)


def _assemble(x, y, offsets, knots, degree, frames):
    k = offsets.size - 1
    w = degree + 1
    n_theta = k * w
    X = np.zeros((x.size, n_theta))
    for j in range(k):
        a, b = offsets[j], offsets[j + 1]
        X[a:b, j * w:(j + 1) * w] = build_vandermonde(frames[j].to_internal(x[a:b]), degree)
    C = np.zeros((k - 1, n_theta))
    for j, xi in enumerate(knots):
        C[j, j * w:(j + 1) * w] = build_vandermonde(frames[j].to_internal([xi]), degree)[0]
        C[j, (j + 1) * w:(j + 2) * w] = -build_vandermonde(
            frames[j + 1].to_internal([xi]), degree)[0]
    A = np.zeros((n_theta + k - 1, n_theta + k - 1))
    A[:n_theta, :n_theta] = 2.0 * X.T @ X
    A[:n_theta, n_theta:] = C.T
    A[n_theta:, :n_theta] = C
    rhs = np.zeros(n_theta + k - 1)
    rhs[:n_theta] = 2.0 * X.T @ y
    return KKTSystem(A, rhs, X, C, y, degree, k, tuple(frames))


def assemble_kkt(ds, bp, degree):
    """Build the KKT system for data ``ds`` split at ``bp``.

    Piece ``j`` is parametrised by the coordinate taking
    ``[bp.full[j], bp.full[j+1]]`` onto [-1, 1] (see ``KKTSystem.frames``).
    """
    if degree < 1:
        raise ValueError("degree must be at least 1")
    part = partition(ds, bp)
    return _assemble(ds.xs, ds.ys, part.offsets, bp.interior, degree,
                     segment_frames(bp.full))


def _solve(A, b):
    # LU with partial pivoting; rcond estimate guards against rank deficiency
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    anorm = np.abs(A).sum(axis=0).max()
    rcond, _ = lapack.dgecon(lu, anorm, norm="1")
    if not rcond > _EPS * A.shape[0]:
        raise SingularSystem(f"KKT matrix is singular (rcond={rcond:.3g})")
    z = scipy.linalg.lu_solve((lu, piv), b, check_finite=False)
    resid = np.linalg.norm(A @ z - b)
    if resid > 1e-8 * np.linalg.norm(b):
        raise SingularSystem(f"KKT solve residual {resid:.3g} too large")
    return z


def solve_kkt(system):
    """Solve a :class:`KKTSystem`.

    Returns
    -------
    theta : ndarray, shape (k, degree + 1)
        Per-segment coefficients, ascending powers, each in its segment's
        coordinate ``system.frames[j]``.
    lam : ndarray, shape (k - 1,)
        Lagrange multipliers of the continuity constraints.
    """
    z = _solve(system.A, system.b)
    theta = z[:system.n_theta].reshape(system.segment_count, system.degree + 1)
    return theta, z[system.n_theta:]


def constrained_sse(u, y, offsets, knots, degree):
    """Residual sum of squares of the constrained fit, on raw arrays.

    Low-level entry point used by the breakpoint search: ``u`` is sorted,
    ``offsets`` partitions it and ``knots`` are the interior breakpoints in
    the same coordinate. Segments get their own frames as in
    :func:`assemble_kkt`, with the outer ends at ``u[0]`` and ``u[-1]``.
    """
    system = _assemble(u, y, offsets, knots, degree, _frames(u[0], knots, u[-1]))
    z = _solve(system.A, system.b)
    r = system.design @ z[:system.n_theta] - y
    return float(np.dot(r, r))


def fit_piecewise(ds, bp, degree):
    """Fit a continuous piecewise polynomial with fixed breakpoints.

    Parameters
    ----------
    ds : Dataset
    bp : BreakpointVector
    degree : int

    Returns
    -------
    model : PiecewiseModel
    mse : float
        Mean squared error of the fit on ``ds``.

    Raises
    ------
    EmptySegment, InvalidBreakpoints
        If ``bp`` does not partition ``ds`` properly.
    SingularSystem
        If the coefficients are not identifiable.
    """
    system = assemble_kkt(ds, bp, degree)
    theta, _ = solve_kkt(system)
    yhat = system.design @ theta.ravel()
    model = PiecewiseModel(degree, theta, bp, system.frames)
    return model, _mse(ds.ys, yhat)


def polyfit_single(ds, degree):
    """The k = 1 special case: plain polynomial regression over all data."""
    return fit_piecewise(ds, BreakpointVector.for_dataset(ds), degree)
