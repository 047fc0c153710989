import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from riverwse import smoothing
from riverwse.errors import DegenerateSeriesError, GeometryError, InsufficientDataError
from riverwse.smoothing import ChainageSeries, FilterParams


def series(values, step=0.1):
    values = np.asarray(values, dtype=float)
    return ChainageSeries(np.arange(values.size) * step, values)


def ewma_direct(x, alpha):
    """Brute-force adjusted EWMA: explicit weight sums per index."""
    out = np.empty_like(x, dtype=float)
    for t in range(len(x)):
        w = (1 - alpha) ** np.arange(t + 1)
        out[t] = np.sum(w * x[t::-1]) / w.sum()
    return out


class TestEwma:
    def test_constant_series(self):
        out = smoothing.ewma(series(np.full(20, 3.7)), span=5)
        np.testing.assert_allclose(out.values, 3.7, atol=1e-12)

    def test_span_one_identity(self):
        out = smoothing.ewma(series([0.0, 1.0]), span=1)
        np.testing.assert_allclose(out.values, [0.0, 1.0])

    def test_hand_evaluated_recurrence(self):
        # span 3 -> alpha 0.5; weights 1, 0.5, 0.25 backwards in time
        out = smoothing.ewma(series([1.0, 2.0, 3.0]), span=3)
        expected = [1.0, (0.5 * 2 + 0.25 * 1) / 0.75, (0.5 * 3 + 0.25 * 2 + 0.125 * 1) / 0.875]
        np.testing.assert_allclose(out.values, expected, atol=1e-4)

    def test_matches_direct_weight_sum(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=40)
        out = smoothing.ewma(series(x), span=7)
        np.testing.assert_allclose(out.values, ewma_direct(x, 2 / 8), atol=1e-12)

    def test_backward_is_reversed_forward(self):
        rng = np.random.default_rng(3)
        s = series(rng.normal(size=25))
        bwd = smoothing.ewma(s, span=6, direction=smoothing.BACKWARD)
        fwd_rev = smoothing.ewma(series(s.values[::-1]), span=6)
        np.testing.assert_allclose(bwd.values, fwd_rev.values[::-1], atol=1e-12)

    def test_recursive_form(self):
        x = np.array([1.0, 2.0, 3.0])
        out = smoothing.ewma(series(x), span=3, adjust=False)
        # y_t = 0.5 x_t + 0.5 y_{t-1}
        np.testing.assert_allclose(out.values, [1.0, 1.5, 2.25])

    def test_empty_series_error(self):
        with pytest.raises(InsufficientDataError):
            smoothing.ewma(ChainageSeries(np.array([]), np.array([])), span=3)

    def test_bounded_by_extremes(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=50)
        for adjust in (True, False):
            out = smoothing.ewma(series(x), span=9, adjust=adjust)
            assert out.values.min() >= x.min() - 1e-12
            assert out.values.max() <= x.max() + 1e-12


class TestFbewma:
    def test_constant(self):
        out = smoothing.fbewma(series(np.full(15, -2.5)), span=5)
        np.testing.assert_allclose(out.values, -2.5, atol=1e-12)

    def test_palindromic_symmetry(self):
        x = np.array([1.0, 3, 2, 5, 2, 3, 1])
        out = smoothing.fbewma(series(x), span=4)
        np.testing.assert_allclose(out.values, out.values[::-1], atol=1e-12)

    def test_compositional_oracle(self):
        rng = np.random.default_rng(6)
        s = series(rng.normal(size=80))
        f = smoothing.ewma(s, span=11, direction=smoothing.FORWARD)
        b = smoothing.ewma(s, span=11, direction=smoothing.BACKWARD)
        out = smoothing.fbewma(s, span=11)
        np.testing.assert_allclose(out.values, (f.values + b.values) / 2, atol=1e-12)

    def test_reversal_invariance(self):
        rng = np.random.default_rng(8)
        x = rng.normal(size=30)
        out = smoothing.fbewma(series(x), span=5).values
        out_rev = smoothing.fbewma(series(x[::-1]), span=5).values
        np.testing.assert_allclose(out, out_rev[::-1], atol=1e-12)


class TestRejectOutliers:
    def test_single_spike_removed(self):
        x = np.full(200, 100.0)
        x[77] = 101.0
        kept, removed = smoothing.reject_outliers(series(x), FilterParams())
        assert len(removed) == 1
        assert removed.values[0] == 101.0
        assert len(kept) == 199

    def test_fixed_point(self):
        rng = np.random.default_rng(9)
        x = 100 + rng.normal(0, 0.01, 300)
        kept, removed = smoothing.reject_outliers(series(x), FilterParams())
        assert len(removed) == 0
        np.testing.assert_array_equal(kept.values, x)

    def test_noiseless_line_all_kept(self):
        chain = np.arange(0, 100, 0.1)
        x = 50.0 + 1e-3 * chain
        kept, removed = smoothing.reject_outliers(
            ChainageSeries(chain, x), FilterParams(span=50, max_dev=0.1, iterations=3))
        assert len(removed) == 0

    def test_partition_of_input(self):
        rng = np.random.default_rng(10)
        x = rng.normal(0, 0.2, 150)
        s = series(x)
        kept, removed = smoothing.reject_outliers(s, FilterParams(span=10, max_dev=0.15))
        assert len(kept) + len(removed) == len(s)
        merged = np.sort(np.concatenate([kept.chainage, removed.chainage]))
        np.testing.assert_array_equal(merged, s.chainage)

    def test_all_removed_is_error(self):
        # Alternating huge jumps leave nothing within max_dev of the average.
        x = np.tile([0.0, 10.0], 50)
        with pytest.raises(DegenerateSeriesError):
            smoothing.reject_outliers(series(x), FilterParams(span=2, max_dev=0.01))

    def test_idempotent_after_convergence(self):
        rng = np.random.default_rng(12)
        x = rng.normal(0, 0.05, 400)
        x[::37] += 1.0
        kept, _ = smoothing.reject_outliers(series(x), FilterParams())
        kept2, removed2 = smoothing.reject_outliers(kept, FilterParams())
        assert len(removed2) == 0
        np.testing.assert_array_equal(kept2.values, kept.values)


def wvar_direct(x, alpha):
    """Direct weighted-variance formula per index, one direction."""
    out = np.empty_like(x, dtype=float)
    for t in range(len(x)):
        w = (1 - alpha) ** np.arange(t + 1)
        xs = x[t::-1]
        m = np.sum(w * xs) / w.sum()
        out[t] = np.sum(w * (xs - m) ** 2) / w.sum()
    return out


class TestFbewmsd:
    def test_constant_is_zero(self):
        out = smoothing.fbewmsd(series(np.full(30, 123.456)), window=10)
        np.testing.assert_allclose(out.values, 0.0, atol=1e-12)

    def test_two_point_window_one(self):
        out = smoothing.fbewmsd(series([5.0, 9.0]), window=1)
        np.testing.assert_allclose(out.values, [0.0, 0.0], atol=1e-12)

    def test_direct_formula_oracle(self):
        rng = np.random.default_rng(14)
        x = rng.normal(0, 1, 200)
        alpha = 2 / 11
        out = smoothing.fbewmsd(series(x), window=10)
        fwd = np.sqrt(wvar_direct(x, alpha))
        bwd = np.sqrt(wvar_direct(x[::-1], alpha))[::-1]
        np.testing.assert_allclose(out.values, (fwd + bwd) / 2, atol=1e-10)

    def test_nonnegative(self):
        rng = np.random.default_rng(15)
        out = smoothing.fbewmsd(series(rng.normal(size=100)), window=7)
        assert np.all(out.values >= 0)

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            smoothing.fbewmsd(series([1.0]), window=5)


class TestShiftInvariance:
    def test_constant_shift(self):
        rng = np.random.default_rng(16)
        x = rng.normal(0, 0.5, 120)
        s = series(x)
        s_shift = series(x + 250.0)
        np.testing.assert_allclose(
            smoothing.ewma(s_shift, span=8).values,
            smoothing.ewma(s, span=8).values + 250.0, atol=1e-10)
        np.testing.assert_allclose(
            smoothing.fbewma(s_shift, span=8).values,
            smoothing.fbewma(s, span=8).values + 250.0, atol=1e-10)
        np.testing.assert_allclose(
            smoothing.fbewmsd(s_shift, window=8).values,
            smoothing.fbewmsd(s, window=8).values, atol=1e-10)


class TestSeriesValidation:
    def test_non_increasing_chainage(self):
        with pytest.raises(GeometryError):
            ChainageSeries(np.array([0.0, 0.0, 1.0]), np.array([1.0, 2.0, 3.0]))

    def test_nonfinite_value(self):
        with pytest.raises(GeometryError):
            ChainageSeries(np.array([0.0, 1.0]), np.array([1.0, np.nan]))

    def test_csv_round_trip(self, tmp_path):
        s = series([1.25, -3.5, 100.125])
        smoothing.save_series_csv(s, tmp_path / "s.csv")
        s2 = smoothing.load_series_csv(tmp_path / "s.csv")
        np.testing.assert_allclose(s2.values, s.values, rtol=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=1, max_size=60),
       st.integers(1, 30), st.booleans())
def test_ewma_convex_combination_property(values, span, adjust):
    s = series(values)
    out = smoothing.ewma(s, span=span, adjust=adjust)
    assert out.values.min() >= min(values) - 1e-9
    assert out.values.max() <= max(values) + 1e-9
