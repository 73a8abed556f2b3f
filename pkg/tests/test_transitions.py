import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from skillatlas import gbt
from skillatlas.corpus import corpus_from_ads, filter_rare_skills
from skillatlas.features import (
    FEATURE_NAMES,
    YearSimilarityIndex,
    assemble_pair,
    build_training_set,
    occupation_stats,
    to_matrix,
)
from skillatlas.similarity import compute_rca, compute_theta
from skillatlas.synth import SynthConfig, generate_synthetic
from skillatlas.transitions import (
    RecommendationFilters,
    TransitionsError,
    _fractional_rank_percentile,
    build_map,
    demand_change,
    parse_period,
    recommend_occupations,
    recommend_skills,
)


class TestPeriods:
    def test_month_range(self):
        assert parse_period("2019-03:2019-04") == ((2019, 3), (2019, 4))
        assert parse_period("2019-11:2020-01") == ((2019, 11), (2019, 12), (2020, 1))

    def test_whole_year(self):
        assert parse_period("2018") == ((2018, None),)

    def test_malformed(self):
        with pytest.raises(TransitionsError):
            parse_period("2019-13")


class TestDemandChange:
    def _corpus(self, n_a, n_b):
        ads = []
        for i in range(n_a):
            ads.append({"id": f"a{i}", "year": 2019, "month": 3, "occupation": "8114",
                        "skills": ["x"]})
        for i in range(n_b):
            ads.append({"id": f"b{i}", "year": 2020, "month": 3, "occupation": "8114",
                        "skills": ["x"]})
        return corpus_from_ads(ads)

    def test_reference_values(self):
        corpus = self._corpus(323, 276)
        change = demand_change(corpus, "8114", parse_period("2019-03:2019-03"),
                               parse_period("2020-03:2020-03"))
        assert change.percent == pytest.approx(-14.551084, abs=1e-6)

    def test_reference_growth_value(self):
        change = demand_change(self._corpus(961, 1302), "8114",
                               parse_period("2019"), parse_period("2020"))
        assert change.percent == pytest.approx(35.483871, abs=1e-6)

    def test_plus_fifty_percent(self):
        change = demand_change(self._corpus(100, 150), "8114",
                               parse_period("2019"), parse_period("2020"))
        assert change.percent == pytest.approx(50.0, abs=1e-12)

    def test_equal_counts_zero(self):
        change = demand_change(self._corpus(40, 40), "8114",
                               parse_period("2019"), parse_period("2020"))
        assert change.percent == 0.0

    def test_zero_reference_undefined(self):
        change = demand_change(self._corpus(0, 10), "8114",
                               parse_period("2019"), parse_period("2020"))
        assert change.percent is None and change.count_current == 10


def _trained_fixture(seed=0):
    result = generate_synthetic(
        SynthConfig(n_occupations=8, n_ads=1200, n_transitions=250, years=(2018,)), seed
    )
    sim = YearSimilarityIndex(result.corpus, min_count=5)
    vectors, _ = build_training_set(result.transitions, result.corpus, result.employment,
                                    seed=1, sim=sim)
    x, y, names = to_matrix(vectors)
    model = gbt.train((x, y), gbt.GbtHyperparams(n_trees=40, max_depth=3), seed=2,
                      feature_names=names)
    return result, sim, model


class TestBuildMap:
    def test_shape_and_range(self):
        result, sim, model = _trained_fixture()
        tmap = build_map(model, result.corpus, result.employment, 2018, sim=sim)
        n = len(tmap.occupations)
        assert tmap.matrix.shape == (n, n)
        assert np.all(tmap.matrix > 0.0) and np.all(tmap.matrix < 1.0)

    def test_matches_pairwise_assembly(self):
        result, sim, model = _trained_fixture()
        tmap = build_map(model, result.corpus, result.employment, 2018, sim=sim)
        stats = occupation_stats(result.corpus, result.employment, 2018)
        rng = np.random.default_rng(0)
        codes = tmap.occupations
        for _ in range(12):
            s, t = (codes[int(i)] for i in rng.integers(0, len(codes), 2))
            fv = assemble_pair(s, t, 2018, stats, sim.theta_between(2018, s, t))
            x, _, _ = to_matrix([fv], features=model.feature_names[:19])
            x = x[:, : len(model.feature_names)]
            expected = gbt.predict_proba(model, x[0][: model.n_features])
            assert tmap.probability(s, t) == pytest.approx(expected, abs=1e-12)

    def test_asymmetry_representable(self):
        # Hand-built single-stump model on education_difference: moving toward
        # lower-education targets scores higher than the reverse direction.
        idx = FEATURE_NAMES.index("education_difference")
        model = gbt.GbtModel(
            base_score=0.0, n_features=19,
            feature=np.array([idx, -1, -1], dtype=np.int32),
            threshold=np.array([0.0, 0.0, 0.0]),
            left=np.array([1, -1, -1], dtype=np.int32),
            right=np.array([2, -1, -1], dtype=np.int32),
            value=np.array([0.0, 2.0, -2.0]),
            tree_offsets=np.array([0, 3], dtype=np.int64),
            gain=np.zeros(19),
            hyperparams=gbt.GbtHyperparams(n_trees=1),
            feature_names=tuple(FEATURE_NAMES),
        )
        result, sim, _ = _trained_fixture()
        stats = occupation_stats(result.corpus, result.employment, 2018)
        codes = sorted(stats)
        pairs = [(a, b) for a in codes for b in codes
                 if stats[a].min_education_years != stats[b].min_education_years]
        assert pairs, "fixture needs education variation"
        tmap = build_map(model, result.corpus, result.employment, 2018, sim=sim)
        a, b = pairs[0]
        assert tmap.probability(a, b) != tmap.probability(b, a)


class TestRecommendOccupations:
    def test_sorted_and_excludes_self(self):
        result, sim, model = _trained_fixture()
        tmap = build_map(model, result.corpus, result.employment, 2018, sim=sim)
        source = tmap.occupations[0]
        recs = recommend_occupations(tmap, source, result.corpus,
                                     parse_period("2018"), parse_period("2018"), n=5)
        assert all(r.target != source for r in recs)
        probs = [r.probability for r in recs]
        assert probs == sorted(probs, reverse=True)

    def test_filters_annotate_without_reordering(self):
        result, sim, model = _trained_fixture()
        tmap = build_map(model, result.corpus, result.employment, 2018, sim=sim)
        source = tmap.occupations[0]
        plain = recommend_occupations(tmap, source, result.corpus,
                                      parse_period("2018"), parse_period("2018"), n=6)
        filtered = recommend_occupations(
            tmap, source, result.corpus, parse_period("2018"), parse_period("2018"), n=6,
            filters=RecommendationFilters(min_postings=10**9),
        )
        assert [r.target for r in plain] == [r.target for r in filtered]
        assert all(r.filtered_by == ("min_postings",) for r in filtered)

    def test_unknown_source(self):
        result, sim, model = _trained_fixture()
        tmap = build_map(model, result.corpus, result.employment, 2018, sim=sim)
        with pytest.raises(TransitionsError, match="zzz"):
            recommend_occupations(tmap, "zzz", result.corpus,
                                  parse_period("2018"), parse_period("2018"))


class TestPercentiles:
    def test_hand_example(self):
        # (importance, distance) = (.9,.9), (.9,.1), (.1,.9):
        # importance pcts -> .75, .75, 0 ; distance pcts -> .75, 0, .75
        imp = _fractional_rank_percentile(np.array([0.9, 0.9, 0.1]))
        dist = _fractional_rank_percentile(np.array([0.9, 0.1, 0.9]))
        assert imp.tolist() == [0.75, 0.75, 0.0]
        assert dist.tolist() == [0.75, 0.0, 0.75]
        scores = imp * dist
        assert scores.tolist() == [0.5625, 0.0, 0.0]

    def test_rank_preserving_under_monotone_transform(self):
        rng = np.random.default_rng(8)
        vals = rng.uniform(size=30)
        p1 = _fractional_rank_percentile(vals)
        p2 = _fractional_rank_percentile(np.exp(4 * vals))
        assert np.allclose(p1, p2)

    @given(st.lists(st.floats(0, 1, allow_nan=False), min_size=1, max_size=40))
    def test_percentile_properties(self, values):
        pct = _fractional_rank_percentile(np.asarray(values))
        assert np.all(pct >= 0.0) and np.all(pct <= 1.0)
        order = np.argsort(values, kind="stable")
        ranks = pct[order]
        assert np.all(np.diff(ranks) >= -1e-12)  # non-decreasing along sorted values
        for i, a in enumerate(values):
            for j, b in enumerate(values):
                if a == b:
                    assert pct[i] == pct[j]  # ties share the average rank


class TestRecommendSkills:
    def _fixture(self):
        # Source cleans; target cares for patients but also still cleans a bit.
        ads = []
        for i in range(6):
            ads.append({"id": f"s{i}", "year": 2018, "occupation": "8112",
                        "skills": ["cleaning", "ironing"]})
        target_skills = [
            ["patient care", "hygiene assistance", "cleaning"],
            ["patient care", "hygiene assistance", "ironing"],
            ["patient care", "hygiene assistance", "cleaning"],
            ["patient care", "hygiene assistance", "paperwork"],
        ]
        for i, skills in enumerate(target_skills):
            ads.append({"id": f"t{i}", "year": 2018, "occupation": "4231", "skills": skills})
        corpus = corpus_from_ads(ads)
        retained = filter_rare_skills(corpus, 2018, 1)
        rca = compute_rca(corpus, 2018, retained)
        return corpus, rca, compute_theta(rca)

    def test_distinctive_target_skills_rank_top(self):
        corpus, rca, theta = self._fixture()
        recs = recommend_skills("8112", "4231", 2018, corpus, rca, theta)
        names = [r.name for r in recs]
        # specialized care-side skills beat the skills the source already holds
        assert set(names[:3]) == {"patient care", "hygiene assistance", "paperwork"}
        assert set(names[-2:]) == {"cleaning", "ironing"}
        by_name = {r.name: r for r in recs}
        # the lowest-distance held skill bottoms out at percentile zero: score 0
        assert by_name["ironing"].acquisition_score == 0.0
        assert by_name["cleaning"].acquisition_score < 0.1
        assert all(0.0 <= r.acquisition_score <= 1.0 for r in recs)

    def test_scores_sorted_with_id_ties(self):
        corpus, rca, theta = self._fixture()
        recs = recommend_skills("8112", "4231", 2018, corpus, rca, theta)
        for a, b in zip(recs, recs[1:]):
            assert (a.acquisition_score, -a.skill_id) >= (b.acquisition_score, -b.skill_id)

    def test_unknown_occupation_errors(self):
        corpus, rca, theta = self._fixture()
        with pytest.raises(Exception, match="empty slice"):
            recommend_skills("8112", "0000", 2018, corpus, rca, theta)
