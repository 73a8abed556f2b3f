import numpy as np
import pytest

from skillatlas.corpus import EmploymentRecord, TransitionRecord, corpus_from_ads
from skillatlas.features import (
    FEATURE_NAMES,
    FeatureError,
    YearSimilarityIndex,
    assemble_pair,
    build_training_set,
    demand_supply_features,
    occupation_stats,
    to_matrix,
)
from skillatlas.synth import SynthConfig, generate_synthetic


def _rich_corpus():
    ads = []
    salaries = {"1111": [50_000, 70_000, 90_000], "2222": [40_000, 44_000, 48_000]}
    for occ, (edu, exp) in {"1111": (12, 2), "2222": (16, 5)}.items():
        for i, sal in enumerate(salaries[occ]):
            ads.append(
                {
                    "id": f"{occ}-{i}",
                    "year": 2018,
                    "occupation": occ,
                    "industry": "A",
                    "skills": ["x", "y"] if occ == "1111" else ["x", "z"],
                    "salary": sal,
                    "education_years": edu + i,
                    "experience_years": exp + i,
                }
            )
    return corpus_from_ads(ads)


EMPLOYMENT = [
    EmploymentRecord("1111", 2018, 12.3, 24.6),
    EmploymentRecord("2222", 2018, 40.0, 70.0),
]


class TestOccupationStats:
    def test_median_and_min(self):
        stats = occupation_stats(_rich_corpus(), EMPLOYMENT, 2018)
        assert stats["1111"].median_salary == 70_000
        assert stats["1111"].min_education_years == 12
        assert stats["2222"].min_experience_years == 5
        assert stats["1111"].posting_frequency == 3

    def test_employment_join_passthrough(self):
        stats = occupation_stats(_rich_corpus(), EMPLOYMENT, 2018)
        assert stats["1111"].total_employed_thousands == 12.3

    def test_missing_employment_flagged(self):
        stats = occupation_stats(_rich_corpus(), [], 2018)
        assert stats["1111"].total_employed_thousands is None

    def test_zero_ad_occupation_absent(self):
        stats = occupation_stats(_rich_corpus(), EMPLOYMENT, 2018)
        assert "9999" not in stats


class TestAssemblePair:
    def test_education_difference(self):
        stats = occupation_stats(_rich_corpus(), EMPLOYMENT, 2018)
        fv = assemble_pair("1111", "2222", 2018, stats, 0.4)
        i = FEATURE_NAMES.index("education_difference")
        assert fv.values[i] == 16 - 12

    def test_self_pair_differences_zero(self):
        stats = occupation_stats(_rich_corpus(), EMPLOYMENT, 2018)
        fv = assemble_pair("1111", "1111", 2018, stats, 1.0)
        for name in FEATURE_NAMES[13:]:
            assert fv.values[FEATURE_NAMES.index(name)] == 0.0

    def test_theta_passthrough(self):
        stats = occupation_stats(_rich_corpus(), EMPLOYMENT, 2018)
        fv = assemble_pair("1111", "2222", 2018, stats, 14 / 55)
        assert fv.values[0] == 14 / 55

    def test_differences_recompute_exactly(self):
        stats = occupation_stats(_rich_corpus(), EMPLOYMENT, 2018)
        fv = assemble_pair("1111", "2222", 2018, stats, 0.3)
        src = fv.values[1:7]
        tgt = fv.values[7:13]
        assert np.array_equal(fv.values[13:], tgt - src)

    def test_unknown_occupation_named(self):
        stats = occupation_stats(_rich_corpus(), EMPLOYMENT, 2018)
        with pytest.raises(FeatureError, match="7777"):
            assemble_pair("1111", "7777", 2018, stats, 0.2)

    def test_missing_fields_imputed_and_flagged(self):
        ads = [
            {"id": "a", "year": 2018, "occupation": "1111", "skills": ["x", "y"], "salary": 50_000},
            {"id": "b", "year": 2018, "occupation": "2222", "skills": ["x", "z"]},
        ]
        corpus = corpus_from_ads(ads)
        stats = occupation_stats(corpus, [], 2018)
        fv = assemble_pair("1111", "2222", 2018, stats, 0.5)
        i = FEATURE_NAMES.index("target_median_salary")
        assert fv.missing[i]
        assert fv.values[i] == 50_000  # year median over the one present value


class TestTrainingSet:
    def _data(self, seed=0):
        result = generate_synthetic(SynthConfig(n_ads=900, n_transitions=120, years=(2018,)), seed)
        return result

    def test_balanced_and_negative_rules(self):
        result = self._data()
        vectors, report = build_training_set(result.transitions, result.corpus, result.employment, seed=3)
        assert report.positives == report.negatives
        assert len(vectors) == 2 * report.positives
        for pos, neg in zip(vectors[::2], vectors[1::2]):
            assert pos.label == 1 and neg.label == 0
            assert neg.source == pos.source and neg.year == pos.year
            assert neg.target != pos.target

    def test_deterministic_given_seed(self):
        result = self._data()
        v1, _ = build_training_set(result.transitions, result.corpus, result.employment, seed=5)
        v2, _ = build_training_set(result.transitions, result.corpus, result.employment, seed=5)
        assert [(v.source, v.target, v.label) for v in v1] == [(v.source, v.target, v.label) for v in v2]
        assert all(np.array_equal(a.values, b.values) for a, b in zip(v1, v2))

    def test_missing_stats_skipped_with_report(self):
        result = self._data()
        broken = result.transitions + [TransitionRecord(2018, "8888", "1000")]
        vectors, report = build_training_set(broken, result.corpus, result.employment, seed=1)
        assert report.skip_reasons.get("missing_stats") == 1

    def test_to_matrix_shapes_and_subsets(self):
        result = self._data()
        vectors, _ = build_training_set(result.transitions, result.corpus, result.employment, seed=2)
        x, y, names = to_matrix(vectors)
        assert x.shape == (len(vectors), len(names))
        assert set(y) == {0, 1}
        assert names[: len(FEATURE_NAMES)] == list(FEATURE_NAMES)
        x_theta, _, theta_names = to_matrix(vectors, features=("theta",))
        assert theta_names == ["theta"]
        assert np.array_equal(x_theta[:, 0], x[:, 0])
        assert len(demand_supply_features()) == 18


class TestSimilarityIndex:
    def test_pair_lookup_matches_direct_computation(self, c0):
        sim = YearSimilarityIndex(c0, min_count=1)
        value = sim.theta_between(2018, "1111", "2222")
        assert value == pytest.approx(14 / 55, abs=1e-12)
        assert sim.theta_between(2018, "2222", "1111") == value
        assert sim.candidates(2018) == ["1111", "2222"]
