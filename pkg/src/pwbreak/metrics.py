"""Goodness-of-fit metrics."""

from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConstantTarget, LengthMismatch


def _pair(y, yhat):
    y = np.asarray(y, dtype=float).ravel()
    yhat = np.asarray(yhat, dtype=float).ravel()
    if y.size != yhat.size or y.size == 0:
        raise LengthMismatch(f"cannot compare {y.size} targets with {yhat.size} predictions")
    return y, yhat


def mse(y, yhat):
    """Mean squared error, (1/n) sum (y_i - yhat_i)^2."""
    y, yhat = _pair(y, yhat)
    r = y - yhat
    return float(np.dot(r, r) / r.size)


def rmse(y, yhat):
    return float(np.sqrt(mse(y, yhat)))


def mae(y, yhat):
    y, yhat = _pair(y, yhat)
    return float(np.mean(np.abs(y - yhat)))


def rae(y, yhat):
    """Relative absolute error against the constant mean predictor."""
    y, yhat = _pair(y, yhat)
    denom = np.sum(np.abs(y - y.mean()))
    if denom == 0:
        raise ConstantTarget("RAE is undefined for a constant target")
    return float(np.sum(np.abs(y - yhat)) / denom)


def r_squared(y, yhat):
    """Coefficient of determination, 1 - SS_res / SS_tot."""
    y, yhat = _pair(y, yhat)
    dev = y - y.mean()
    ss_tot = np.dot(dev, dev)
    if ss_tot == 0:
        raise ConstantTarget("R^2 is undefined for a constant target")
    r = y - yhat
    return float(1.0 - np.dot(r, r) / ss_tot)


@dataclass(frozen=True)
class MetricsReport:
    mse: float
    rmse: float
    mae: float
    rae: float
    r_squared: float
    bps: int

    def to_dict(self):
        return asdict(self)


def evaluate(y, yhat, bps=0):
    """Compute all metrics at once.

    RAE and R^2 are reported as NaN when the target is constant.
    """
    try:
        rae_ = rae(y, yhat)
        r2 = r_squared(y, yhat)
    except ConstantTarget:
        rae_ = r2 = float("nan")
    m = mse(y, yhat)
    return MetricsReport(mse=m, rmse=float(np.sqrt(m)), mae=mae(y, yhat),
                         rae=rae_, r_squared=r2, bps=int(bps))
