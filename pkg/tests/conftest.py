import numpy as np
import pytest
import scipy.linalg


def nullspace_fit(x, y, offsets, full, degree):
    """Reference constrained least squares by eliminating the constraints.

    Piece j is a polynomial in t = (x - m_j) / h_j, where m_j and h_j are the
    midpoint and half-width of [full[j], full[j+1]]. Builds the block design
    and continuity rows from scratch, takes an orthonormal basis Z of null(C)
    and solves the reduced problem min ||X Z w - y||.
    Returns (theta of shape (k, d+1), sse).
    """
    x = np.asarray(x, float)
    full = np.asarray(full, float)
    k = len(offsets) - 1
    w = degree + 1
    mid = (full[:-1] + full[1:]) / 2
    half = (full[1:] - full[:-1]) / 2

    def t(j, z):
        return (z - mid[j]) / half[j]

    X = np.zeros((x.size, k * w))
    for j in range(k):
        a, b = offsets[j], offsets[j + 1]
        for p in range(w):
            X[a:b, j * w + p] = t(j, x[a:b]) ** p
    if k == 1:
        Z = np.eye(w)
    else:
        C = np.zeros((k - 1, k * w))
        for j in range(k - 1):
            z = full[j + 1]
            C[j, j * w:(j + 1) * w] = [t(j, z) ** p for p in range(w)]
            C[j, (j + 1) * w:(j + 2) * w] = [-t(j + 1, z) ** p for p in range(w)]
        Z = scipy.linalg.null_space(C)
    coef, *_ = np.linalg.lstsq(X @ Z, y, rcond=None)
    theta = Z @ coef
    r = X @ theta - y
    return theta.reshape(k, w), float(r @ r)


def random_instance(rng, n, k, degree, noise=0.3):
    """Sorted distinct abscissae in [0, 10] and k-1 breakpoints on the grid with
    at least degree+1 samples in every segment."""
    from pwbreak import BreakpointVector, validate_and_sort

    while True:
        x = np.sort(rng.uniform(0, 10, n))
        if np.min(np.diff(x)) > 1e-6:
            break
    y = np.sin(x) + 0.1 * x ** 2 + rng.normal(0, noise, n)
    ds = validate_and_sort(x, y)
    while True:
        cuts = np.sort(rng.choice(np.arange(1, n), size=k - 1, replace=False))
        counts = np.diff(np.concatenate(([0], cuts, [n])))
        if counts.min() >= degree + 1:
            break
    interior = (ds.xs[cuts - 1] + ds.xs[cuts]) / 2
    return ds, BreakpointVector.for_dataset(ds, interior)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
