import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from et0lab.metrics import (
    EmptyInput,
    EvalMetrics,
    LengthMismatch,
    ZeroVariance,
    evaluate,
    mae,
    mean_metrics,
    r2,
    rmse,
)


def pearson_sq_exact(pred, obs) -> Fraction:
    """Squared Pearson correlation in exact rational arithmetic."""
    s = [Fraction(v) for v in pred]
    o = [Fraction(v) for v in obs]
    ms, mo = sum(s) / len(s), sum(o) / len(o)
    cov = sum((a - mo) * (b - ms) for a, b in zip(o, s))
    return cov * cov / (sum((a - mo) ** 2 for a in o) * sum((b - ms) ** 2 for b in s))


def test_rmse_examples():
    assert rmse([1.5, 2.5], [1.5, 2.5]) == 0.0
    assert rmse([2, 4], [1, 3]) == pytest.approx(1.0, abs=1e-9)
    assert rmse([0, 2], [0, 0]) == pytest.approx(math.sqrt(2), abs=1e-9)


def test_mae_examples():
    for mode in ("standard", "paper_literal"):
        assert mae([3, 4], [3, 4], mode) == 0.0
        assert mae([2, 2], [1, 1], mode) == pytest.approx(1.0, abs=1e-9)
    assert mae([1, -1], [0, 0], "standard") == pytest.approx(1.0, abs=1e-9)
    assert mae([1, -1], [0, 0], "paper_literal") == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(ValueError):
        mae([1], [1], "median")


def test_r2_examples():
    obs = np.array([0.3, 1.7, 2.2, 5.0, 4.1])
    assert r2(2 * obs + 1, obs) == pytest.approx(1.0, abs=1e-9)
    assert float(pearson_sq_exact([1, 2, 3, 5], [1, 2, 3, 4])) == pytest.approx(169 / 175, abs=1e-15)
    assert r2([1, 2, 3, 5], [1, 2, 3, 4]) == pytest.approx(169 / 175, abs=1e-9)
    with pytest.raises(ZeroVariance):
        r2([2, 2, 2], [1, 2, 3])
    with pytest.raises(ZeroVariance):
        r2([1.0], [2.0])


def test_errors():
    with pytest.raises(LengthMismatch):
        rmse([1, 2], [1])
    with pytest.raises(EmptyInput):
        mae([], [])
    with pytest.raises(EmptyInput):
        mean_metrics([])


vectors = st.integers(2, 40).flatmap(
    lambda n: st.tuples(
        arrays(np.float64, n, elements=st.floats(-100, 100)),
        arrays(np.float64, n, elements=st.floats(-100, 100)),
    )
)


@given(vectors)
def test_rmse_dominates_mae(pair):
    s, o = pair
    assert rmse(s, o) >= mae(s, o) - 1e-12
    assert mae(s, o) >= mae(s, o, "paper_literal") - 1e-12


@given(vectors, st.floats(0.01, 50).flatmap(lambda a: st.sampled_from([a, -a])), st.floats(-50, 50))
@settings(max_examples=200)
def test_r2_affine_invariance(pair, a, b):
    s, o = pair
    assume(np.ptp(s) > 1e-3 and np.ptp(o) > 1e-3)
    assert r2(a * s + b, o) == pytest.approx(r2(s, o), abs=1e-9)


@given(vectors)
def test_r2_matches_exact_arithmetic(pair):
    s, o = pair
    assume(np.ptp(s) > 1e-3 and np.ptp(o) > 1e-3)
    assert r2(s, o) == pytest.approx(float(pearson_sq_exact(s, o)), abs=1e-9)
    assert 0.0 <= r2(s, o) <= 1.0


@given(vectors)
def test_concatenated_halves(pair):
    s, o = pair
    assume(np.ptp(s) > 1e-3 and np.ptp(o) > 1e-3)
    one = evaluate(s, o)
    two = evaluate(np.concatenate([s, s]), np.concatenate([o, o]))
    for name, value in one.as_dict().items():
        assert two.as_dict()[name] == pytest.approx(value, rel=1e-9, abs=1e-12)


def test_mean_metrics():
    a = EvalMetrics(1.0, 0.5, 0.25, 0.9)
    b = EvalMetrics(3.0, 1.5, 0.75, 0.7)
    assert mean_metrics([a, b]) == EvalMetrics(2.0, 1.0, 0.5, 0.8)
