import numpy as np
import pytest

from pwbreak import ConstantTarget, LengthMismatch, evaluate, mae, mse, r_squared, rae, rmse


def test_hand_case():
    y, yhat = [1, 2, 3], [1, 2, 4]
    assert mse(y, yhat) == pytest.approx(1 / 3, abs=1e-12)
    assert mae(y, yhat) == pytest.approx(1 / 3, abs=1e-12)
    assert rae(y, yhat) == pytest.approx(0.5, abs=1e-12)
    assert r_squared(y, yhat) == pytest.approx(0.5, abs=1e-12)
    assert rmse(y, yhat) == pytest.approx(np.sqrt(1 / 3), abs=1e-12)


def test_symmetric_errors():
    assert mse([0, 0], [1, -1]) == pytest.approx(1.0, abs=1e-12)


def test_perfect_fit():
    y = [3.0, -1.0, 2.5]
    assert mse(y, y) == 0
    assert mae(y, y) == 0
    assert rae(y, y) == 0
    assert r_squared(y, y) == 1


def test_mean_predictor_baseline():
    y = np.array([1.0, 4.0, 2.0, 7.0])
    yhat = np.full_like(y, y.mean())
    assert rae(y, yhat) == pytest.approx(1.0, abs=1e-12)
    assert r_squared(y, yhat) == pytest.approx(0.0, abs=1e-12)


def test_constant_target():
    with pytest.raises(ConstantTarget):
        rae([2, 2], [1, 3])
    with pytest.raises(ConstantTarget):
        r_squared([2, 2], [1, 3])
    rep = evaluate([2, 2], [1, 3])
    assert np.isnan(rep.rae) and np.isnan(rep.r_squared)
    assert rep.mse == 1


@pytest.mark.parametrize("y, yhat", [([1, 2], [1]), ([], [])])
def test_length_checks(y, yhat):
    with pytest.raises(LengthMismatch):
        mse(y, yhat)


def test_invariances():
    rng = np.random.default_rng(1)
    y, yhat = rng.normal(size=30), rng.normal(size=30)
    c, a = 17.0, -3.0
    assert mse(y + c, yhat + c) == pytest.approx(mse(y, yhat), rel=1e-12)
    assert mae(y + c, yhat + c) == pytest.approx(mae(y, yhat), rel=1e-12)
    assert mse(a * y, a * yhat) == pytest.approx(a * a * mse(y, yhat), rel=1e-12)
    assert mae(a * y, a * yhat) == pytest.approx(abs(a) * mae(y, yhat), rel=1e-12)
    assert rae(a * y + c, a * yhat + c) == pytest.approx(rae(y, yhat), rel=1e-12)
    assert r_squared(a * y + c, a * yhat + c) == pytest.approx(r_squared(y, yhat), rel=1e-12)


def test_evaluate_report():
    rep = evaluate([1, 2, 3], [1, 2, 4], bps=2)
    d = rep.to_dict()
    assert d["bps"] == 2
    assert d["r_squared"] == pytest.approx(0.5)
