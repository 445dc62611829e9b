import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from skewfuzz.errors import MonitorError
from skewfuzz.metrics import MetricKind, MetricsReport
from skewfuzz.monitors import (
    IQROutlier,
    MaximumThreshold,
    MonitorBinding,
    NextComparison,
    Skewness,
    make_template,
    quartiles,
)

TEMPLATES = [MaximumThreshold(1.0), NextComparison(2.0), IQROutlier(1.5), Skewness(1.0)]


def test_maximum_threshold():
    v = MaximumThreshold(100).evaluate([120, 11, 9])
    assert v.triggered and v.score == 120


def test_next_comparison():
    v = NextComparison(5.0).evaluate([10, 2, 2, 2])
    assert v.triggered and v.score == 5.0
    assert NextComparison(5.0).score([5, 5]) == 1.0


def test_next_comparison_degenerate():
    assert NextComparison(5.0).score([3, 0, 0]) == math.inf
    assert NextComparison(5.0).score([0, 0]) == 0.0


def test_zero_variance_skewness():
    v = Skewness(2.0).evaluate([4.0, 4.0, 4.0, 4.0])
    assert v.score == 0 and not v.triggered


def test_iqr_examples():
    # max equals Q3 with positive IQR
    assert IQROutlier(1.5).score([1, 2, 3, 3, 3]) == 0.0
    assert IQROutlier(1.5).score([2, 2, 2, 2, 9]) == math.inf
    assert IQROutlier(1.5).score([2, 2, 2, 9]) == pytest.approx(3.0)
    assert IQROutlier(1.5).score([2, 2, 2, 2]) == 0.0


def test_quartiles():
    assert quartiles([1, 2, 3, 4]) == (1.75, 3.25)
    assert quartiles([5]) == (5.0, 5.0)


@pytest.mark.parametrize("t", TEMPLATES)
def test_empty_vector_errors(t):
    with pytest.raises(MonitorError):
        t.evaluate([])


def test_unknown_template():
    with pytest.raises(MonitorError):
        make_template("Median", 1.0)


def test_skewness_matches_scipy():
    rng = np.random.default_rng(1)
    for _ in range(50):
        v = rng.exponential(size=int(rng.integers(3, 40)))
        assert Skewness(0).score(v) == pytest.approx(stats.skew(v, bias=True), rel=1e-9, abs=1e-12)


def test_quartiles_match_numpy_reference():
    rng = np.random.default_rng(2)
    for _ in range(50):
        v = rng.normal(size=int(rng.integers(1, 30)))
        q1, q3 = quartiles(v)
        # Reference: the rank-interpolation rule written out directly.
        s = np.sort(v)

        def at(q):
            h = q * (len(s) - 1)
            lo = int(np.floor(h))
            hi = min(lo + 1, len(s) - 1)
            return s[lo] + (h - lo) * (s[hi] - s[lo])

        assert q1 == pytest.approx(at(0.25)) and q3 == pytest.approx(at(0.75))


def test_permutation_invariance_1000_vectors():
    rng = np.random.default_rng(3)
    for _ in range(1000):
        v = rng.integers(0, 50, size=int(rng.integers(1, 25))).astype(float)
        p = rng.permutation(v)
        for t in TEMPLATES:
            assert t.evaluate(v) == t.evaluate(p)


@settings(max_examples=300)
@given(st.lists(st.floats(0, 1e6, allow_nan=False), min_size=1, max_size=30), st.sampled_from(TEMPLATES))
def test_triggered_implies_threshold(values, template):
    v = template.evaluate(values)
    assert v.triggered == (v.score >= template.threshold)


def test_binding_reads_stage_metric():
    r = MetricsReport()
    for p, n in enumerate([10, 2, 2]):
        r.record_task(1, p, {MetricKind.ShuffleReadRecords: n})
    b = MonitorBinding(NextComparison(5.0), MetricKind.ShuffleReadRecords, 1)
    assert b.check(r).triggered
    with pytest.raises(MonitorError):
        MonitorBinding(NextComparison(5.0), MetricKind.ShuffleReadRecords, 4).check(r)


@pytest.mark.parametrize("top", [1.0, 10.0, 1e6])
def test_iqr_capped_on_four_values(top):
    # Q3 interpolates toward the max, so a lone straggler among four scores exactly 3.
    assert IQROutlier(100).score([0, 0, 0, top]) == pytest.approx(3.0)
