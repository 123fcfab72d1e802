import numpy as np
import pytest

from adaptnet.metrics import LearningCurve, aggregate, emse, msd, tail_slope_db, to_db
from adaptnet.signal_model import make_true_parameter


def test_msd_examples():
    w0 = make_true_parameter(5)
    assert msd(w0, w0) == 0.0
    assert msd(np.zeros(5), w0) == pytest.approx(2.5)
    a, b = np.array([1.0, 0, 0]), np.array([0, 2.0, 0])
    assert msd(a + b, np.zeros(3)) == pytest.approx(msd(a, 0) + msd(b, 0))


def test_emse_examples():
    w0 = np.zeros(5)
    err = np.array([0.1, 0.3, 0.0, 0.0, 0.0])
    assert emse(err, w0, np.eye(5)[0]) == pytest.approx(0.01)
    assert emse(err, w0, np.array([0.0, 0.0, 1.0, 0, 0])) == 0.0
    assert emse(w0, w0, np.ones(5)) == 0.0


def test_to_db():
    assert to_db(100.0) == pytest.approx(20.0)


def test_aggregate_passthrough_and_linearity():
    c = np.linspace(1.0, 2.0, 10)
    trans, steady = aggregate(c[None, :, None], 3)
    assert np.allclose(trans, c) and steady[0] == pytest.approx(c[-3:].mean())
    trans2, _ = aggregate(np.stack([c, 3 * c])[:, :, None], 1)
    assert np.allclose(trans2, 2 * c)


def test_aggregate_flat_tail():
    c = np.concatenate([np.linspace(5, 1, 50), np.full(100, 0.25)])
    _, steady = aggregate(np.tile(c[None, :, None], (2, 1, 3)), 100)
    assert np.allclose(steady, 0.25)


def test_aggregate_errors():
    with pytest.raises(ValueError):
        aggregate(np.zeros((0, 5, 2)), 1)
    with pytest.raises(ValueError):
        aggregate(np.zeros((1, 5, 2)), 6)


def test_tail_slope():
    c = 10 ** (-0.01 * np.arange(200) / 10)  # -0.01 dB per step
    assert tail_slope_db(c, 50) == pytest.approx(-0.01)


def _curve(rng, R):
    x = rng.exponential(1.0, (R, 20))
    return LearningCurve(x, x[:, 1:], np.zeros(3), np.zeros(3), 5)


def test_stderr_shrinks_as_inverse_sqrt_runs():
    rng = np.random.default_rng(0)
    errs = [np.mean(_curve(rng, R).stderr("msd")) for R in (400, 1600, 6400)]
    assert errs[0] / errs[1] == pytest.approx(2.0, rel=0.1)
    assert errs[1] / errs[2] == pytest.approx(2.0, rel=0.1)


def test_single_run_stderr_is_nan():
    c = _curve(np.random.default_rng(0), 1)
    assert np.all(np.isnan(c.stderr("emse")))
    assert np.isnan(c.steady("emse")[1])
