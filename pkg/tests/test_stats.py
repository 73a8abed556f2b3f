import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special, stats as scipy_stats

from skillatlas import gbt
from skillatlas.corpus import TransitionRecord
from skillatlas.stats import (
    StatsError,
    ablation,
    betainc_regularized,
    classifier_report,
    feature_gain,
    paired_t_test,
    resampled_significance,
    roc_curve,
    t_sf_two_sided,
)


class TestBetaInc:
    def test_against_scipy_grid(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            a = float(rng.uniform(0.5, 60))
            b = float(rng.uniform(0.5, 60))
            x = float(rng.uniform(0, 1))
            assert betainc_regularized(a, b, x) == pytest.approx(
                float(special.betainc(a, b, x)), abs=1e-9
            )

    def test_edges(self):
        assert betainc_regularized(2, 3, 0.0) == 0.0
        assert betainc_regularized(2, 3, 1.0) == 1.0

    @given(st.floats(0.5, 40), st.floats(0.5, 40),
           st.floats(0.01, 0.99), st.floats(0.01, 0.99))
    def test_monotone_in_x(self, a, b, x1, x2):
        lo, hi = sorted((x1, x2))
        v_lo, v_hi = betainc_regularized(a, b, lo), betainc_regularized(a, b, hi)
        assert 0.0 <= v_lo <= v_hi <= 1.0

    def test_t_tail_matches_scipy(self):
        for df in (1, 2, 3, 10, 50, 500):
            for t in (-4.0, -1.0, 0.5, 1.7320508075688772, 6.0):
                assert t_sf_two_sided(t, df) == pytest.approx(
                    float(2 * scipy_stats.t.sf(abs(t), df)), abs=1e-9
                )


class TestPairedT:
    def test_frozen_example(self):
        # d = [0, 1, 2]: t = sqrt(3), df = 2, p ~ 0.2254, effect size 1.0
        result = paired_t_test([1, 2, 3], [1, 1, 1])
        assert result.t_statistic == pytest.approx(math.sqrt(3), abs=1e-9)
        assert result.p_value == pytest.approx(0.22540333075851657, abs=1e-9)
        assert result.cohen_d == pytest.approx(1.0, abs=1e-12)
        assert result.n == 3

    def test_constant_shift_degenerate(self):
        with pytest.raises(StatsError, match="zero-variance"):
            paired_t_test([1, 2, 3], [2, 3, 4])

    def test_antisymmetry(self):
        x = [0.3, 1.2, 0.9, 2.2]
        y = [0.1, 1.5, 0.7, 1.0]
        assert paired_t_test(x, y).t_statistic == pytest.approx(
            -paired_t_test(y, x).t_statistic, abs=1e-12
        )

    def test_matches_reference_on_random_fixtures(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            n = int(rng.integers(3, 40))
            x = rng.normal(size=n)
            y = x + rng.normal(0.3, 0.8, size=n)
            ours = paired_t_test(x, y)
            ref = scipy_stats.ttest_rel(x, y)
            d = x - y
            assert ours.t_statistic == pytest.approx(float(ref.statistic), abs=1e-6)
            assert ours.p_value == pytest.approx(float(ref.pvalue), abs=1e-6)
            assert ours.cohen_d == pytest.approx(float(d.mean() / d.std(ddof=1)), abs=1e-6)


class _TableLookup:
    """Dict-backed pair-similarity stub for resampling tests."""

    def __init__(self, table, pool):
        self.table = table
        self.pool = pool

    def theta_between(self, year, source, target):
        return self.table.get((source, target))

    def candidates(self, year):
        return self.pool


def _planted_lookup(rng, n_occ=20):
    codes = [f"{1000 + i}" for i in range(n_occ)]
    table = {}
    for i, a in enumerate(codes):
        for j, b in enumerate(codes):
            base = 0.65 if abs(i - j) <= 1 else 0.1
            table[(a, b)] = min(1.0, max(0.0, base + rng.normal(0, 0.03)))
    return codes, table


class TestResampledSignificance:
    def test_planted_transitions_significant(self):
        rng = np.random.default_rng(0)
        codes, table = _planted_lookup(rng)
        # true transitions go to a neighbor: high similarity by construction
        transitions = []
        for k in range(120):
            i = int(rng.integers(len(codes) - 1))
            transitions.append(TransitionRecord(2018, codes[i], codes[i + 1]))
        report = resampled_significance(transitions, _TableLookup(table, codes), n_runs=40, seed=9)
        assert report.significant_fraction >= 0.95
        assert len(report.p_values) == 40

    def test_null_transitions_calibrated(self):
        rng = np.random.default_rng(3)
        codes, table = _planted_lookup(rng)
        transitions = [
            TransitionRecord(2018, codes[int(rng.integers(len(codes)))],
                             codes[int(rng.integers(len(codes)))])
            for _ in range(150)
        ]
        # targets drawn uniformly: the "true" sample is itself a random sample
        report = resampled_significance(transitions, _TableLookup(table, codes), n_runs=100, seed=5)
        assert report.significant_fraction <= 0.12

    def test_deterministic_and_exclude_same(self):
        rng = np.random.default_rng(1)
        codes, table = _planted_lookup(rng)
        transitions = [TransitionRecord(2018, codes[0], codes[0]) for _ in range(5)]
        transitions += [TransitionRecord(2018, codes[i], codes[i + 1]) for i in range(10)]
        r1 = resampled_significance(transitions, _TableLookup(table, codes), n_runs=10, seed=2,
                                    exclude_same=True)
        r2 = resampled_significance(transitions, _TableLookup(table, codes), n_runs=10, seed=2,
                                    exclude_same=True)
        assert r1 == r2
        assert r1.n_pairs == 10 and r1.skipped == 5


class TestClassifierReport:
    def _model_and_data(self, seed=0):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(300, 2))
        y = (x[:, 0] > 0).astype(int)
        model = gbt.train((x, y), gbt.GbtHyperparams(n_trees=20, max_depth=2), seed=1)
        return model, x, y

    def test_perfect_predictor(self):
        model, x, y = self._model_and_data()
        report = classifier_report(model, (x, y))
        assert report.accuracy == 1.0
        assert (0.0, 1.0) in report.roc_points
        assert report.auc == pytest.approx(1.0, abs=1e-9)
        assert report.tp + report.tn == len(y)

    def test_constant_half_predictor_on_balanced_data(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(200, 2))
        y = np.array([0, 1] * 100)
        model = gbt.train((x, y), gbt.GbtHyperparams(n_trees=0), seed=0)
        report = classifier_report(model, (x, y))
        assert report.accuracy == 0.5
        # every row predicted positive: one-sided confusion
        assert report.tn == 0 and report.fn == 0
        assert report.f1_macro == pytest.approx((2 * 100 / (2 * 100 + 100)) / 2, abs=1e-12)

    def test_roc_monotone_in_fpr(self):
        model, x, y = self._model_and_data(seed=5)
        report = classifier_report(model, (x, y))
        fprs = [p[0] for p in report.roc_points]
        assert all(b >= a for a, b in zip(fprs, fprs[1:]))

    def test_one_class_test_set_omits_roc(self):
        model, x, y = self._model_and_data()
        pos = y == 1
        report = classifier_report(model, (x[pos], y[pos]))
        assert report.roc_points is None and report.auc is None
        assert report.accuracy == 1.0

    def test_random_scores_auc_near_half(self):
        rng = np.random.default_rng(7)
        scores = rng.uniform(size=2000)
        y = np.array([0, 1] * 1000)
        _, auc = roc_curve(scores, y)
        assert 0.4 <= auc <= 0.6


class TestAblation:
    def _planted(self, seed=0, n=500):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(n, 4))
        y = (x[:, 2] > 0).astype(int)   # only feature 2 carries signal
        return x, y

    def test_single_signal_feature_identified(self):
        x, y = self._planted()
        report = ablation((x, y), ["f0", "f1", "f2", "f3"], seed=3)
        assert report.top_feature() == "f2"
        drops = {r.feature: r.accuracy_drop for r in report.rows}
        assert report.accuracy_full - drops["f2"] <= 0.6  # without f2: coin flip
        for name in ("f0", "f1", "f3"):
            assert drops[name] < 0.02

    def test_one_row_per_feature(self):
        x, y = self._planted(seed=1, n=200)
        report = ablation((x, y), ["a", "b", "c", "d"], seed=0)
        assert sorted(r.feature for r in report.rows) == ["a", "b", "c", "d"]

    def test_agrees_with_gain_on_planted_signal(self):
        x, y = self._planted(seed=2)
        names = ["f0", "f1", "f2", "f3"]
        report = ablation((x, y), names, seed=1)
        model = gbt.train((x, y), gbt.GbtHyperparams(n_trees=60, max_depth=3),
                          seed=4, feature_names=names)
        gain = feature_gain(model)
        assert report.top_feature() == gain.shares[0][0] == "f2"

    def test_needs_two_features(self):
        with pytest.raises(StatsError):
            ablation((np.zeros((10, 1)), np.array([0, 1] * 5)), ["only"], seed=0)


class TestFeatureGain:
    def test_single_split_model(self):
        x = np.array([[-1.0, 5.0], [1.0, 5.0], [-2.0, 5.0], [2.0, 5.0]])
        y = np.array([0, 1, 0, 1])
        model = gbt.train((x, y), gbt.GbtHyperparams(n_trees=1, max_depth=1, learning_rate=1.0),
                          seed=0, feature_names=["sig", "flat"])
        report = feature_gain(model)
        assert report.shares[0] == ("sig", 1.0)
        assert not report.undefined

    def test_shares_sum_to_one(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(300, 5))
        y = ((x[:, 0] + x[:, 3]) > 0).astype(int)
        model = gbt.train((x, y), gbt.GbtHyperparams(n_trees=30, max_depth=3), seed=2)
        report = feature_gain(model)
        assert sum(s for _, s in report.shares) == pytest.approx(1.0, abs=1e-9)

    def test_zero_split_model_flagged(self):
        x = np.zeros((10, 2))
        y = np.array([0, 1] * 5)
        model = gbt.train((x, y), gbt.GbtHyperparams(n_trees=3), seed=0)
        report = feature_gain(model)
        assert report.undefined
