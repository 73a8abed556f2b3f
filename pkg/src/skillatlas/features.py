"""Directed occupation-pair feature vectors and the labeled training set.

Each (source, target, year) pair gets 19 features: the skill-set similarity
between the two occupations, six demand/supply statistics per side, and six
signed target-minus-source differences. Occupation-level gaps are imputed
with the year's cross-occupation median and surfaced as missingness flags
the trainer may consume as auxiliary inputs; the 19-feature contract is
unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import Corpus, EmploymentRecord, TransitionRecord
from .corpus import filter_rare_skills
from .similarity import (
    RcaMatrix,
    ThetaMatrix,
    WeightedSkillSet,
    compute_rca,
    compute_theta,
    occupation_skillsets,
    skillset_similarity,
)


class FeatureError(ValueError):
    pass


# Stats fields that can be absent for an occupation-year.
OPTIONAL_STATS = (
    "median_salary",
    "min_education_years",
    "min_experience_years",
    "total_employed_thousands",
    "total_hours_worked_thousands",
)

FEATURE_NAMES = (
    "theta",
    "source_posting_frequency",
    "source_median_salary",
    "source_min_education_years",
    "source_min_experience_years",
    "source_total_employed",
    "source_total_hours",
    "target_posting_frequency",
    "target_median_salary",
    "target_min_education_years",
    "target_min_experience_years",
    "target_total_employed",
    "target_total_hours",
    "posting_frequency_difference",
    "median_salary_difference",
    "education_difference",
    "experience_difference",
    "employed_difference",
    "hours_difference",
)

_STAT_ORDER = ("posting_frequency",) + OPTIONAL_STATS


@dataclass(frozen=True)
class OccupationYearStats:
    occupation: str
    year: int
    posting_frequency: int
    median_salary: float | None
    min_education_years: float | None
    min_experience_years: float | None
    total_employed_thousands: float | None
    total_hours_worked_thousands: float | None


@dataclass(frozen=True)
class FeatureVector:
    source: str
    target: str
    year: int
    values: np.ndarray            # float64, length 19, imputed
    missing: np.ndarray           # bool, length 19, True where imputed
    label: int | None = None

    def __post_init__(self):
        if len(self.values) != len(FEATURE_NAMES) or len(self.missing) != len(FEATURE_NAMES):
            raise FeatureError("feature vector must carry exactly 19 values")


def occupation_stats(
    corpus: Corpus,
    employment: Sequence[EmploymentRecord],
    year: int,
) -> dict[str, OccupationYearStats]:
    """Demand-side stats from the year's ads joined with supply records.

    Occupations with ads but no employment record keep their demand stats
    with the supply fields flagged missing (None).
    """
    if year not in corpus.year_index:
        raise FeatureError(f"year {year} not present in corpus")
    supply = {(r.occupation, r.year): r for r in employment}
    grouped: dict[str, list] = {}
    for i in corpus.year_index[year]:
        grouped.setdefault(corpus.ads[i].occupation, []).append(corpus.ads[i])
    out: dict[str, OccupationYearStats] = {}
    for code in sorted(grouped):
        ads = grouped[code]
        salaries = [a.salary for a in ads if a.salary is not None]
        education = [a.education_years for a in ads if a.education_years is not None]
        experience = [a.experience_years for a in ads if a.experience_years is not None]
        rec = supply.get((code, year))
        out[code] = OccupationYearStats(
            occupation=code,
            year=year,
            posting_frequency=len(ads),
            median_salary=float(np.median(salaries)) if salaries else None,
            min_education_years=float(min(education)) if education else None,
            min_experience_years=float(min(experience)) if experience else None,
            total_employed_thousands=rec.total_employed_thousands if rec else None,
            total_hours_worked_thousands=rec.total_hours_worked_thousands if rec else None,
        )
    return out


def year_imputes(stats: Mapping[str, OccupationYearStats]) -> dict[str, float]:
    """Cross-occupation medians used to fill missing stat fields."""
    imputes = {}
    for fld in OPTIONAL_STATS:
        vals = [getattr(s, fld) for s in stats.values() if getattr(s, fld) is not None]
        imputes[fld] = float(np.median(vals)) if vals else 0.0
    return imputes


def assemble_pair(
    source: str,
    target: str,
    year: int,
    stats: Mapping[str, OccupationYearStats],
    theta_value: float,
    label: int | None = None,
) -> FeatureVector:
    """One 19-feature vector for a directed occupation pair."""
    for code in (source, target):
        if code not in stats:
            raise FeatureError(f"occupation {code} has no stats for {year}")
    if not 0.0 <= theta_value <= 1.0:
        raise FeatureError(f"theta value {theta_value} outside [0, 1]")
    imputes = year_imputes(stats)

    def side(code: str) -> tuple[list[float], list[bool]]:
        s = stats[code]
        vals = [float(s.posting_frequency)]
        miss = [False]
        for fld in OPTIONAL_STATS:
            raw = getattr(s, fld)
            vals.append(imputes[fld] if raw is None else float(raw))
            miss.append(raw is None)
        return vals, miss

    src_vals, src_miss = side(source)
    tgt_vals, tgt_miss = side(target)
    diffs = [t - s for s, t in zip(src_vals, tgt_vals)]
    diff_miss = [a or b for a, b in zip(src_miss, tgt_miss)]

    values = np.array([theta_value] + src_vals + tgt_vals + diffs, dtype=np.float64)
    missing = np.array([False] + src_miss + tgt_miss + diff_miss, dtype=bool)
    return FeatureVector(source=source, target=target, year=year,
                         values=values, missing=missing, label=label)


class YearSimilarityIndex:
    """Lazy per-year similarity artifacts with pairwise occupation lookups.

    Builds (retained vocabulary, RCA, theta, occupation skill sets) for a
    year on first use and memoizes pair similarities. Also provides the
    candidate-pool and lookup interface the resampling validator expects.
    """

    def __init__(self, corpus: Corpus, min_count: int = 5, level: str = "4digit"):
        self.corpus = corpus
        self.min_count = min_count
        self.level = level
        self._years: dict[int, tuple[RcaMatrix, ThetaMatrix, dict[str, WeightedSkillSet]]] = {}
        self._pair_cache: dict[tuple[int, str, str], float | None] = {}

    def year_artifacts(self, year: int):
        if year not in self._years:
            retained = filter_rare_skills(self.corpus, year, self.min_count)
            if not retained:
                raise FeatureError(f"no retained skills for year {year}")
            rca = compute_rca(self.corpus, year, retained)
            theta = compute_theta(rca)
            sets = occupation_skillsets(self.corpus, rca, year, level=self.level)
            self._years[year] = (rca, theta, sets)
        return self._years[year]

    def skillset(self, year: int, code: str) -> WeightedSkillSet | None:
        return self.year_artifacts(year)[2].get(code)

    def theta_between(self, year: int, source: str, target: str) -> float | None:
        key = (year, source, target)
        if key not in self._pair_cache:
            _, theta, sets = self.year_artifacts(year)
            s1, s2 = sets.get(source), sets.get(target)
            value = None if s1 is None or s2 is None else skillset_similarity(s1, s2, theta)
            self._pair_cache[key] = value
            self._pair_cache[(year, target, source)] = value
        return self._pair_cache[key]

    def candidates(self, year: int) -> list[str]:
        return sorted(self.year_artifacts(year)[2])


@dataclass(frozen=True)
class TrainingSetReport:
    positives: int
    negatives: int
    skipped: int
    skip_reasons: Mapping[str, int] = field(default_factory=dict)


def build_training_set(
    transitions: Sequence[TransitionRecord],
    corpus: Corpus,
    employment: Sequence[EmploymentRecord],
    seed: int = 0,
    min_count: int = 5,
    sim: YearSimilarityIndex | None = None,
) -> tuple[list[FeatureVector], TrainingSetReport]:
    """Balanced labeled training set: each observed transition is paired with
    one synthetic non-transition sharing its source and year, with the target
    drawn uniformly from the year's active occupations excluding the true
    target. Deterministic given the seed.
    """
    if not transitions:
        raise FeatureError("no transition records supplied")
    sim = sim or YearSimilarityIndex(corpus, min_count=min_count)
    rng = np.random.default_rng(seed)
    stats_by_year: dict[int, dict[str, OccupationYearStats]] = {}
    skip: dict[str, int] = {}
    vectors: list[FeatureVector] = []

    def bump(reason: str):
        skip[reason] = skip.get(reason, 0) + 1

    for rec in transitions:
        if rec.year not in corpus.year_index:
            bump("year_not_in_corpus")
            continue
        if rec.year not in stats_by_year:
            stats_by_year[rec.year] = occupation_stats(corpus, employment, rec.year)
        stats = stats_by_year[rec.year]
        if rec.source not in stats or rec.target not in stats:
            bump("missing_stats")
            continue
        theta_true = sim.theta_between(rec.year, rec.source, rec.target)
        if theta_true is None:
            bump("missing_skillset")
            continue

        pool = [c for c in sim.candidates(rec.year) if c != rec.target and c in stats]
        if not pool:
            bump("no_negative_candidates")
            continue
        fake = pool[int(rng.integers(len(pool)))]
        theta_fake = sim.theta_between(rec.year, rec.source, fake)
        if theta_fake is None:
            bump("missing_skillset")
            continue

        vectors.append(assemble_pair(rec.source, rec.target, rec.year, stats, theta_true, label=1))
        vectors.append(assemble_pair(rec.source, fake, rec.year, stats, theta_fake, label=0))

    n_pos = sum(1 for v in vectors if v.label == 1)
    report = TrainingSetReport(
        positives=n_pos,
        negatives=len(vectors) - n_pos,
        skipped=sum(skip.values()),
        skip_reasons=dict(sorted(skip.items())),
    )
    return vectors, report


def to_matrix(
    vectors: Sequence[FeatureVector],
    features: Sequence[str] = FEATURE_NAMES,
    include_missingness: bool = True,
) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Design matrix, labels and column names for a feature subset.

    Missingness indicator columns are appended only for selected features
    that are actually missing somewhere in the data, named miss_<feature>.
    """
    unknown = [f for f in features if f not in FEATURE_NAMES]
    if unknown:
        raise FeatureError(f"unknown features: {unknown}")
    idx = [FEATURE_NAMES.index(f) for f in features]
    x = np.array([v.values[idx] for v in vectors], dtype=np.float64)
    names = list(features)
    if include_missingness and vectors:
        miss = np.array([v.missing[idx] for v in vectors], dtype=bool)
        for j in np.flatnonzero(miss.any(axis=0)):
            x = np.column_stack([x, miss[:, j].astype(np.float64)])
            names.append(f"miss_{features[j]}")
    labels = np.array([-1 if v.label is None else v.label for v in vectors], dtype=np.int64)
    return x, labels, names


def demand_supply_features() -> tuple[str, ...]:
    """The 18 labor demand + supply features (everything but theta)."""
    return tuple(f for f in FEATURE_NAMES if f != "theta")


def training_set_rows(vectors: Sequence[FeatureVector]) -> Iterable[list]:
    """CSV rows: header then one row per vector (19 features + metadata)."""
    yield list(FEATURE_NAMES) + ["label", "year", "source", "target"]
    for v in vectors:
        yield [repr(float(x)) for x in v.values] + [
            "" if v.label is None else v.label, v.year, v.source, v.target,
        ]
