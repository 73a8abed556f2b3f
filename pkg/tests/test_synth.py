from collections import Counter

import pytest

from skillatlas.corpus import filter_rare_skills
from skillatlas.synth import AdoptionPlant, SynthConfig, SynthError, generate_synthetic


def _key(result):
    corp = result.corpus
    return (
        tuple((a.id, a.year, a.occupation, tuple(sorted(a.skills)), a.salary) for a in corp.ads),
        corp.skill_names,
        tuple(result.employment),
        tuple(result.transitions),
    )


def test_deterministic_given_seed():
    cfg = SynthConfig(n_ads=300, n_transitions=100)
    assert _key(generate_synthetic(cfg, 7)) == _key(generate_synthetic(cfg, 7))
    assert _key(generate_synthetic(cfg, 7)) != _key(generate_synthetic(cfg, 8))


def test_disjoint_clusters_contain_transitions():
    # Two chain components; with zero noise no transition crosses them.
    edges = tuple((i, i + 1) for i in range(4)) + tuple((i, i + 1) for i in range(5, 9))
    cfg = SynthConfig(
        n_occupations=10, overlap=edges, transition_noise=0.0,
        n_ads=400, n_transitions=300,
    )
    result = generate_synthetic(cfg, 3)
    first = {str(1000 + i) for i in range(5)}
    for rec in result.transitions:
        assert (rec.source in first) == (rec.target in first)


def test_chain_adjacency_beats_distance():
    cfg = SynthConfig(
        n_occupations=10, overlap="chain", n_ads=2000,
        n_transitions=2000, transition_noise=0.05,
    )
    result = generate_synthetic(cfg, 11)
    codes = result.occupation_codes
    idx = {c: i for i, c in enumerate(codes)}
    counts = Counter()
    for rec in result.transitions:
        d = abs(idx[rec.source] - idx[rec.target])
        counts[d] += 1
    n_adjacent_pairs = 2 * 9
    n_distant_pairs = sum(2 * (10 - d) for d in range(2, 10))
    adjacent_rate = counts[1] / n_adjacent_pairs
    distant_rate = sum(counts[d] for d in range(2, 10)) / n_distant_pairs
    assert adjacent_rate > distant_rate


def test_infeasible_config_errors():
    with pytest.raises(SynthError, match="infeasible"):
        generate_synthetic(SynthConfig(n_skills_per_occupation=3, overlap="disjoint", skills_per_ad=6), 0)
    with pytest.raises(SynthError, match="overlap"):
        generate_synthetic(SynthConfig(overlap="wiggly"), 0)


def test_employment_records_cover_grid():
    cfg = SynthConfig(n_ads=200, years=(2016, 2017))
    result = generate_synthetic(cfg, 1)
    keys = {(r.occupation, r.year) for r in result.employment}
    assert len(keys) == cfg.n_occupations * 2
    assert all(r.total_employed_thousands >= 0 for r in result.employment)


def test_ads_have_fixed_skill_count_and_metadata():
    cfg = SynthConfig(n_ads=150, essential_occupations=(0,))
    result = generate_synthetic(cfg, 5)
    for ad in result.corpus.ads:
        assert len(ad.skills) == cfg.skills_per_ad
        assert ad.salary is not None and ad.education_years is not None
        assert 1 <= ad.month <= 12
    tagged = {a.occupation for a in result.corpus.ads if "essential" in a.tags}
    assert tagged == {"1000"}
    assert result.corpus.occupation_meta.get("1000") == {"essential": "yes"}


class TestAdoptionPlant:
    def _scenario(self, seed=0):
        plant = AdoptionPlant(
            seed_names=("Machine Learning", "Data Science"),
            adopting_industry="A",
            cluster_size=8,
            start_rate=0.0,
            end_rate=0.6,
        )
        cfg = SynthConfig(
            n_occupations=6, n_industries=2, overlap="disjoint",
            background_rate=0.0, n_background_skills=0,
            n_ads=600, years=(2015, 2016, 2017, 2018, 2019),
            replicate_years=True, ai_plant=plant, n_transitions=50,
        )
        return generate_synthetic(cfg, seed)

    def test_static_industry_ads_identical_across_years(self):
        result = self._scenario()
        corp = result.corpus
        by_year = {}
        for ad in corp.ads:
            if ad.industry == "B":
                key = tuple(sorted(corp.skill_name(s) for s in ad.skills))
                by_year.setdefault(ad.year, []).append((ad.occupation, key))
        snapshots = {y: sorted(v) for y, v in by_year.items()}
        baseline = snapshots[2015]
        assert all(s == baseline for s in snapshots.values())

    def test_adopting_industry_gains_cluster_skills(self):
        result = self._scenario()
        corp = result.corpus
        ml = corp.skill_id("Machine Learning")
        share = {}
        for year in (2015, 2017, 2019):
            ads = [a for a in corp.ads if a.industry == "A" and a.year == year]
            share[year] = sum(1 for a in ads if ml in a.skills or any(
                corp.skill_name(s).startswith("ai_skill") for s in a.skills)) / len(ads)
        assert share[2015] < share[2017] < share[2019]

    def test_seeds_retained_every_year(self):
        result = self._scenario()
        corp = result.corpus
        for year in (2015, 2016, 2017, 2018, 2019):
            retained = filter_rare_skills(corp, year, 5)
            assert corp.skill_id("Machine Learning") in retained
            assert corp.skill_id("Data Science") in retained

    def test_no_cluster_skills_outside_plant(self):
        result = self._scenario()
        corp = result.corpus
        for ad in corp.ads:
            if ad.industry == "B":
                names = {corp.skill_name(s) for s in ad.skills}
                assert not any(n.startswith("ai_skill") or n in ("Machine Learning", "Data Science") for n in names)
