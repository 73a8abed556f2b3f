import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from skillatlas.corpus import (
    CorpusError,
    LoadError,
    SliceError,
    corpus_from_ads,
    filter_rare_skills,
    load_corpus,
    load_employment_csv,
    load_transitions_csv,
)
from conftest import C0_ADS, make_corpus


def test_c0_shape(c0):
    assert len(c0.ads) == 4
    assert c0.n_skills() == 3
    assert c0.incidence(2018).shape == (4, 3)
    assert c0.load_report.rejected_count == 0


def test_incidence_row_sums_match_skill_counts(c0):
    row_sums = np.asarray(c0.incidence(2018).sum(axis=1)).ravel()
    expected = [len(ad.skills) for ad in c0.ads]
    assert row_sums.tolist() == expected


def test_ads_sorted_by_year_then_id():
    ads = list(reversed(C0_ADS))
    corpus = corpus_from_ads(ads)
    assert [a.id for a in corpus.ads] == ["j1", "j2", "j3", "j4"]


def test_interning_bijection(c0):
    for name in ("a", "b", "c"):
        assert c0.skill_name(c0.skill_id(name)) == name


def test_empty_skills_rejected_and_counted():
    ads = C0_ADS + [{"id": "j5", "year": 2018, "occupation": "1111", "skills": []}]
    corpus = corpus_from_ads(ads)
    assert len(corpus.ads) == 4
    assert corpus.load_report.rejected_count == 1
    assert corpus.load_report.reasons == {"empty_skills": 1}


def test_duplicate_id_rejected():
    ads = C0_ADS + [{"id": "j1", "year": 2018, "occupation": "1111", "skills": ["a"]}]
    corpus = corpus_from_ads(ads)
    assert corpus.load_report.reasons == {"duplicate_id": 1}


def test_invalid_year_rejected():
    ads = [{"id": "x", "year": "nope", "occupation": "1111", "skills": ["a"]}]
    corpus = corpus_from_ads(ads)
    assert corpus.load_report.reasons == {"invalid_year": 1}


def test_jsonl_load_and_determinism(tmp_path):
    path = tmp_path / "ads.jsonl"
    path.write_text("\n".join(json.dumps(ad) for ad in C0_ADS))
    c1 = load_corpus(path)
    c2 = load_corpus(path)
    assert [a.id for a in c1.ads] == ["j1", "j2", "j3", "j4"]
    assert c1.skill_names == c2.skill_names
    assert [a.skills for a in c1.ads] == [a.skills for a in c2.ads]


def test_jsonl_parse_failure_names_line(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"id": "j1", "year": 2018, "occupation": "1", "skills": ["a"]}\n{broken\n')
    with pytest.raises(LoadError, match=":2:"):
        load_corpus(path)


def test_missing_file_error():
    with pytest.raises(LoadError, match="no/such/file"):
        load_corpus("no/such/file.jsonl")


def test_csv_roundtrip(tmp_path):
    path = tmp_path / "ads.csv"
    path.write_text(
        "id,year,month,occupation,occupation6,industry,skills,salary,education_years,experience_years,tags\n"
        "j1,2018,3,1111,111111,A,a;b,50000,12,2,essential\n"
        "j2,2018,,1111,,A,a;b,,,,\n"
    )
    corpus = load_corpus(path)
    assert len(corpus.ads) == 2
    ad = corpus.ads[0]
    assert ad.month == 3 and ad.salary == 50000.0 and "essential" in ad.tags
    assert corpus.ads[1].salary is None


def test_salary_range_collapses_to_max():
    ads = [{"id": "j", "year": 2018, "occupation": "1", "skills": ["a"], "salary": [40000, 60000]}]
    corpus = corpus_from_ads(ads)
    assert corpus.ads[0].salary == 60000.0


def test_filter_rare_skills_counts(c0):
    names = lambda ids: {c0.skill_name(s) for s in ids}
    assert names(filter_rare_skills(c0, 2018, 2)) == {"a", "b", "c"}
    assert names(filter_rare_skills(c0, 2018, 3)) == {"a"}
    assert names(filter_rare_skills(c0, 2018, 1)) == {"a", "b", "c"}


def test_filter_rare_skills_unknown_year(c0):
    with pytest.raises(CorpusError, match="1999"):
        filter_rare_skills(c0, 1999)


@given(st.integers(min_value=1, max_value=6))
def test_filter_rare_skills_monotone(k):
    corpus = make_corpus([["a", "b"], ["a", "b"], ["a", "c"], ["c"], ["a", "d"]])
    assert filter_rare_skills(corpus, 2018, k) >= filter_rare_skills(corpus, 2018, k + 1)


def test_slice_explicit_ids(c0):
    js = c0.slice(2018, ad_ids=["j1", "j2"])
    assert {c0.skill_name(s) for s in js.skills} == {"a", "b"}
    js2 = c0.slice(2018, ad_ids=["j3", "j4"])
    assert {c0.skill_name(s) for s in js2.skills} == {"a", "c"}


def test_slice_empty_is_error(c0):
    with pytest.raises(SliceError, match="empty slice"):
        c0.slice(2018, occupation="9999")


def test_slice_by_occupation_partitions_year(c0):
    codes = c0.occupations_in_year(2018)
    seen = []
    for code in codes:
        seen.extend(c0.slice(2018, occupation=code).ad_indices)
    assert sorted(seen) == list(c0.year_index[2018])


def test_metadata_csv_titles_and_flags(tmp_path):
    ads = tmp_path / "ads.jsonl"
    ads.write_text(json.dumps(
        {"id": "x", "year": 2018, "occupation": "8112", "industry": "A", "skills": ["s"]}))
    occ_meta = tmp_path / "occ.csv"
    occ_meta.write_text(
        "code,title,automation_risk,essential\n"
        "8112,Domestic Cleaners,0.69,\n"
        "4231,Aged and Disabled Carers,0.17,yes\n"
    )
    ind_meta = tmp_path / "ind.csv"
    ind_meta.write_text("code,title\nA,Accommodation and Food Services\n")
    corpus = load_corpus(ads, occupation_meta_path=occ_meta, industry_meta_path=ind_meta)
    assert corpus.occupation_title("8112") == "Domestic Cleaners"
    assert corpus.industry_title("A") == "Accommodation and Food Services"
    assert corpus.occupation_meta["4231"] == {"automation_risk": "0.17", "essential": "yes"}
    assert corpus.occupation_title("9999") == "9999"  # unknown codes fall back


def test_employment_and_transitions_csv(tmp_path):
    emp = tmp_path / "emp.csv"
    emp.write_text(
        "occupation,year,total_employed_thousands,total_hours_worked_thousands\n"
        "1111,2018,12.3,24.6\n"
    )
    records = load_employment_csv(emp)
    assert records[0].total_employed_thousands == 12.3

    dup = tmp_path / "dup.csv"
    dup.write_text(emp.read_text() + "1111,2018,1,2\n")
    with pytest.raises(LoadError, match="duplicate"):
        load_employment_csv(dup)

    tr = tmp_path / "tr.csv"
    tr.write_text("year,source,target\n2018,1111,2222\n")
    recs = load_transitions_csv(tr)
    assert recs[0].source == "1111" and recs[0].target == "2222"
