"""Confusion ratios, relative variants, Pearson correlation and the CI-ratio."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from augoverlap import synth
from augoverlap.data import ViewSet
from augoverlap.errors import UndefinedMetricError
from augoverlap.metrics import MetricConfig, acr, arc, ci_ratio, gacr, garc, pearson


def _views(arr, n, c):
    return ViewSet(np.asarray(arr, dtype=float), n=n, c=c)


class TestMetricConfig:
    def test_defaults(self):
        cfg = MetricConfig()
        assert (cfg.a1, cfg.a2, cfg.k) == ("max", "min", 1)

    def test_validation(self):
        with pytest.raises(ValueError, match="statistics"):
            MetricConfig(a1="sum")
        with pytest.raises(ValueError, match="k must be"):
            MetricConfig(k=0)


class TestAcr:
    def test_no_confusion(self, small_views):
        assert acr(small_views) == 0.0

    def test_full_confusion(self):
        # foreign views closer than the sibling: every view is confused
        v = _views([[0.0, 0.0], [10.0, 0.0], [0.1, 0.0], [10.1, 0.0]], n=2, c=2)
        assert acr(v) == 1.0

    def test_tie_counts_as_confused(self):
        # the two middle views are exactly as far from their sibling as from the
        # nearest foreign view; the tie counts, so they are confused
        v = _views([[0.0], [1.0], [2.0], [3.0]], n=2, c=2)
        assert acr(v) == pytest.approx(0.5)

    def test_partial(self):
        # anchor 1's second view sits near anchor 0's views: it and anchor 0's
        # second view are confused, the two outer views are not
        v = _views([[0.0], [0.1], [5.0], [0.2]], n=2, c=2)
        assert acr(v) == pytest.approx(0.5)

    def test_validation(self):
        with pytest.raises(ValueError, match="2 anchors"):
            acr(_views([[0.0], [1.0]], n=1, c=2))
        with pytest.raises(ValueError, match="2 views"):
            acr(_views([[0.0], [1.0]], n=2, c=1))


class TestArc:
    def test_formula(self):
        assert arc(0.2, 0.6) == pytest.approx(2.0)
        assert arc(0.6, 0.2) == pytest.approx(0.5)

    def test_undefined_at_full_initial_confusion(self):
        with pytest.raises(UndefinedMetricError):
            arc(0.5, 1.0)


class TestGacr:
    def test_equals_acr_exhaustively(self, rng):
        for n in (2, 3, 4):
            for c in (2, 3):
                for m in (1, 2, 3):
                    for _ in range(5):
                        v = ViewSet(rng.standard_normal((n * c, m)), n=n, c=c)
                        assert gacr(v, MetricConfig("max", "min", 1)) == pytest.approx(acr(v))

    def test_min_min_is_most_lenient(self, rng):
        v = ViewSet(rng.standard_normal((12, 2)), n=4, c=3)
        strict = gacr(v, MetricConfig("max", "min", 1))
        lenient = gacr(v, MetricConfig("min", "min", 1))
        assert lenient <= strict

    def test_larger_k_reduces_confusion(self, rng):
        v = ViewSet(rng.standard_normal((20, 2)), n=5, c=4)
        assert gacr(v, MetricConfig("max", "min", 3)) <= gacr(v, MetricConfig("max", "min", 1))

    def test_k_bound_checked(self):
        v = _views([[0.0], [1.0], [2.0], [3.0]], n=2, c=2)
        with pytest.raises(ValueError, match="k=2 exceeds"):
            gacr(v, MetricConfig("max", "min", 2))

    def test_median_statistic(self, rng):
        v = ViewSet(rng.standard_normal((12, 2)), n=3, c=4)
        value = gacr(v, MetricConfig("median", "median", 1))
        assert 0.0 <= value <= 1.0


class TestGarc:
    def test_matches_arc_for_default_config(self, rng):
        # clustered views keep the initial confusion below 1 so ARC is defined
        centers = np.repeat(np.arange(4.0)[:, None] * 10.0, 3, axis=0) + np.zeros((12, 2))
        final = ViewSet(centers + 0.1 * rng.standard_normal((12, 2)), n=4, c=3)
        init = ViewSet(centers + 3.0 * rng.standard_normal((12, 2)), n=4, c=3)
        expected = arc(acr(final), acr(init))
        assert garc(final, init, MetricConfig("max", "min", 1)) == pytest.approx(expected)

    def test_undefined_when_init_saturated(self):
        confused = _views([[0.0], [10.0], [0.1], [10.1]], n=2, c=2)
        clean = _views([[0.0], [0.1], [10.0], [10.1]], n=2, c=2)
        with pytest.raises(UndefinedMetricError):
            garc(clean, confused)


class TestPearson:
    def test_exact_correlations(self):
        x = [1.0, 2.0, 3.0, 4.0]
        assert pearson(x, [2.0, 4.0, 6.0, 8.0]) == pytest.approx(1.0)
        assert pearson(x, [8.0, 6.0, 4.0, 2.0]) == pytest.approx(-1.0)

    def test_zero_variance(self):
        with pytest.raises(UndefinedMetricError):
            pearson([1.0, 1.0], [1.0, 2.0])

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            pearson([1.0], [1.0])
        with pytest.raises(ValueError):
            pearson([1.0, 2.0], [1.0, 2.0, 3.0])

    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(st.floats(-100, 100, allow_nan=False), min_size=3, max_size=10),
        st.integers(0, 2**31),
    )
    def test_bounded(self, xs, seed):
        rng = np.random.default_rng(seed)
        ys = rng.standard_normal(len(xs))
        x = np.asarray(xs)
        try:
            value = pearson(x, ys)
        except UndefinedMetricError:
            return  # constant (or denormal-only) input, nothing to bound
        assert -1.0 - 1e-9 <= value <= 1.0 + 1e-9


class TestCiRatio:
    def test_ci_pairs_near_one(self):
        ratio = ci_ratio(synth.ci_pairs(600, 3, 16, seed=0))
        assert 0.9 < ratio < 1.1

    def test_dependent_pairs_large(self):
        ratio = ci_ratio(synth.dependent_pairs(600, 3, 16, seed=0))
        assert ratio > 1.5

    def test_requires_labels(self):
        pairs = synth.ci_pairs(60, 3, 8, seed=0)
        from augoverlap.data import PositivePairs

        unlabeled = PositivePairs(pairs.left, pairs.right)
        with pytest.raises(ValueError, match="labels"):
            ci_ratio(unlabeled)

    def test_requires_normalized(self):
        from augoverlap.data import EmbeddingSet, LabelSet, PositivePairs

        raw = EmbeddingSet(np.ones((4, 2)))
        lab = LabelSet(np.array([0, 0, 1, 1]), k=2)
        with pytest.raises(ValueError, match="normalized"):
            ci_ratio(PositivePairs(raw, raw, lab, lab))

    def test_class_too_small(self):
        from augoverlap.data import EmbeddingSet, LabelSet, PositivePairs

        e = EmbeddingSet(np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 1.0]]), normalized=True)
        lab = LabelSet(np.array([0, 1, 1]), k=2)
        with pytest.raises(UndefinedMetricError, match="fewer than 2"):
            ci_ratio(PositivePairs(e, e, lab, lab))
