"""Transitions map construction and occupation/skill recommendations.

The map holds classifier probabilities for every directed occupation pair
active in a year; recommendations rank targets by probability and annotate
them with posting-demand shifts between two periods. Skill recommendations
score each target-occupation skill by importance within the target times
its distance from the source skill set, both percentile-transformed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import gbt
from .corpus import Corpus, EmploymentRecord
from .features import (
    FEATURE_NAMES,
    OPTIONAL_STATS,
    FeatureError,
    OccupationYearStats,
    YearSimilarityIndex,
    occupation_stats,
    year_imputes,
)
from .similarity import RcaMatrix, ThetaMatrix, jobset_weights, skillset_similarity


class TransitionsError(ValueError):
    pass


# A period is a tuple of (year, month) entries; month None matches any month.
Period = tuple[tuple[int, int | None], ...]


def parse_period(text: str) -> Period:
    """"2019-03:2019-04" -> consecutive months; "2018" -> the whole year."""
    text = text.strip()
    if ":" in text:
        start, end = text.split(":", 1)
        sy, sm = _parse_year_month(start)
        ey, em = _parse_year_month(end)
        if sm is None or em is None:
            raise TransitionsError(f"period range needs months: {text}")
        months = []
        y, m = sy, sm
        while (y, m) <= (ey, em):
            months.append((y, m))
            m += 1
            if m > 12:
                y, m = y + 1, 1
            if len(months) > 120:
                raise TransitionsError(f"period too long: {text}")
        return tuple(months)
    return (_parse_year_month(text),)


def _parse_year_month(text: str) -> tuple[int, int | None]:
    parts = text.strip().split("-")
    try:
        if len(parts) == 1:
            return int(parts[0]), None
        if len(parts) == 2:
            month = int(parts[1])
            if not 1 <= month <= 12:
                raise ValueError
            return int(parts[0]), month
    except ValueError:
        pass
    raise TransitionsError(f"malformed period: {text!r}")


@dataclass(frozen=True)
class DemandChange:
    count_reference: int
    count_current: int
    percent: float | None   # None when the reference count is zero


def demand_change(corpus: Corpus, occupation: str, period_a: Period, period_b: Period) -> DemandChange:
    """Posting counts in two periods and the percent change from a to b."""

    def count(period: Period) -> int:
        total = 0
        for year, month in period:
            if year not in corpus.year_index:
                continue
            for i in corpus.year_index[year]:
                ad = corpus.ads[i]
                if ad.occupation == occupation and (month is None or ad.month == month):
                    total += 1
        return total

    a, b = count(period_a), count(period_b)
    percent = 100.0 * (b - a) / a if a > 0 else None
    return DemandChange(count_reference=a, count_current=b, percent=percent)


@dataclass(frozen=True)
class TransitionsMap:
    """P[target, source] over the year's active occupations."""

    year: int
    occupations: tuple[str, ...]
    matrix: np.ndarray
    excluded: tuple[str, ...] = ()

    def index_of(self, code: str) -> int:
        try:
            return self.occupations.index(code)
        except ValueError:
            raise TransitionsError(f"occupation {code} not in map") from None

    def probability(self, source: str, target: str) -> float:
        return float(self.matrix[self.index_of(target), self.index_of(source)])


def _stat_sides(stats: Mapping[str, OccupationYearStats], codes: Sequence[str]):
    """Per-occupation stat values (imputed) and missing flags, feature order."""
    imputes = year_imputes(stats)
    values = np.zeros((len(codes), 6))
    missing = np.zeros((len(codes), 6), dtype=bool)
    for i, code in enumerate(codes):
        s = stats[code]
        values[i, 0] = float(s.posting_frequency)
        for j, fld in enumerate(OPTIONAL_STATS, start=1):
            raw = getattr(s, fld)
            values[i, j] = imputes[fld] if raw is None else float(raw)
            missing[i, j] = raw is None
    return values, missing


def pairwise_skillset_similarity(
    sets: Mapping[str, "object"], theta: ThetaMatrix, codes: Sequence[str]
) -> np.ndarray:
    """Theta between every pair of weighted skill sets, vectorized.

    The weight matrix is sparse (each set touches a few dozen skills), so
    the two products cost nnz * n rather than n_sets * n^2.
    """
    import scipy.sparse as sp

    n_skills = len(theta.skill_ids)
    rows, cols, data = [], [], []
    sums = np.zeros(len(codes))
    for i, code in enumerate(codes):
        s = sets[code]
        idx = np.searchsorted(theta.skill_ids, s.skill_ids)
        rows.extend([i] * len(idx))
        cols.extend(idx.tolist())
        data.extend(s.weights.tolist())
        sums[i] = s.weights.sum()
    w = sp.csr_matrix((data, (rows, cols)), shape=(len(codes), n_skills))
    left = w @ theta.matrix if theta.is_dense else (w @ theta.matrix).toarray()
    cross = np.asarray(left @ w.T.toarray())
    return cross / np.outer(sums, sums)


def build_map(
    model: gbt.GbtModel,
    corpus: Corpus,
    employment: Sequence[EmploymentRecord],
    year: int,
    min_count: int = 5,
    sim: YearSimilarityIndex | None = None,
) -> TransitionsMap:
    """Predict the probability of every directed occupation pair in a year.

    Occupations lacking stats or a usable skill set are excluded and listed.
    The assembled design matrix reproduces assemble_pair feature for feature
    (including imputation and missingness columns the model was fit with).
    """
    sim = sim or YearSimilarityIndex(corpus, min_count=min_count)
    stats = occupation_stats(corpus, employment, year)
    _, theta, sets = sim.year_artifacts(year)
    codes = sorted(set(stats) & set(sets))
    excluded = tuple(sorted((set(stats) | set(sets)) - set(codes)))
    if not codes:
        raise TransitionsError(f"no occupations with stats and skill sets in {year}")

    theta_pairs = pairwise_skillset_similarity(sets, theta, codes)
    theta_pairs = np.clip(theta_pairs, 0.0, 1.0)
    side_vals, side_miss = _stat_sides(stats, codes)

    n = len(codes)
    si = np.repeat(np.arange(n), n)   # source index per pair-row
    ti = np.tile(np.arange(n), n)     # target index per pair-row
    base = np.empty((n * n, len(FEATURE_NAMES)))
    base[:, 0] = theta_pairs[si, ti]
    base[:, 1:7] = side_vals[si]
    base[:, 7:13] = side_vals[ti]
    base[:, 13:19] = side_vals[ti] - side_vals[si]
    miss = np.zeros((n * n, len(FEATURE_NAMES)), dtype=bool)
    miss[:, 1:7] = side_miss[si]
    miss[:, 7:13] = side_miss[ti]
    miss[:, 13:19] = side_miss[si] | side_miss[ti]

    x = _columns_for_model(model, base, miss)
    proba = gbt.predict_proba(model, x)
    matrix = np.empty((n, n))
    matrix[ti, si] = proba
    return TransitionsMap(year=year, occupations=tuple(codes), matrix=matrix, excluded=excluded)


def _columns_for_model(model: gbt.GbtModel, base: np.ndarray, miss: np.ndarray) -> np.ndarray:
    """Select/append columns to match the model's training schema."""
    if model.feature_names is None:
        if model.n_features != base.shape[1]:
            raise TransitionsError(
                f"model expects {model.n_features} unnamed features; "
                f"pair assembly produces {base.shape[1]}"
            )
        return base
    cols = []
    for name in model.feature_names:
        if name in FEATURE_NAMES:
            cols.append(base[:, FEATURE_NAMES.index(name)])
        elif name.startswith("miss_") and name[5:] in FEATURE_NAMES:
            cols.append(miss[:, FEATURE_NAMES.index(name[5:])].astype(np.float64))
        else:
            raise TransitionsError(f"model feature {name!r} cannot be assembled")
    return np.column_stack(cols)


@dataclass(frozen=True)
class RecommendationFilters:
    min_percent_change: float | None = None
    required_tag: str | None = None
    min_postings: int | None = None


@dataclass(frozen=True)
class OccupationRecommendation:
    target: str
    title: str
    probability: float
    posting_frequency_reference: int
    posting_frequency_current: int
    percent_change: float | None
    tags: tuple[str, ...] = ()
    filtered_by: tuple[str, ...] = ()   # empty means the item passed all filters


def _occupation_tags(corpus: Corpus, code: str, year: int | None = None) -> tuple[str, ...]:
    tags = set()
    meta = corpus.occupation_meta.get(code, {})
    for key, value in meta.items():
        if key != "automation_risk" and str(value).lower() in ("1", "true", "yes"):
            tags.add(key)
    years = [year] if year is not None else list(corpus.year_index)
    for y in years:
        for i in corpus.year_index.get(y, ()):
            ad = corpus.ads[i]
            if ad.occupation == code:
                tags.update(ad.tags)
    return tuple(sorted(tags))


def recommend_occupations(
    tmap: TransitionsMap,
    source: str,
    corpus: Corpus,
    period_a: Period,
    period_b: Period,
    n: int = 10,
    filters: RecommendationFilters | None = None,
    include_self: bool = False,
) -> list[OccupationRecommendation]:
    """Top-n transition targets for a source, annotated with demand change.

    Filters are evaluated after ranking: failing items stay in the list with
    their failed filter names recorded, so a caller can show why they were
    screened out. Ordering is by probability descending, ties by code.
    """
    col = tmap.index_of(source)
    order = sorted(
        (i for i in range(len(tmap.occupations)) if include_self or tmap.occupations[i] != source),
        key=lambda i: (-tmap.matrix[i, col], tmap.occupations[i]),
    )
    out = []
    for i in order[:n]:
        code = tmap.occupations[i]
        change = demand_change(corpus, code, period_a, period_b)
        tags = _occupation_tags(corpus, code, tmap.year)
        failed = []
        if filters is not None:
            if filters.min_percent_change is not None and (
                change.percent is None or change.percent < filters.min_percent_change
            ):
                failed.append("min_percent_change")
            if filters.required_tag is not None and filters.required_tag not in tags:
                failed.append("required_tag")
            if filters.min_postings is not None and change.count_current < filters.min_postings:
                failed.append("min_postings")
        out.append(
            OccupationRecommendation(
                target=code,
                title=corpus.occupation_title(code),
                probability=float(tmap.matrix[i, col]),
                posting_frequency_reference=change.count_reference,
                posting_frequency_current=change.count_current,
                percent_change=change.percent,
                tags=tags,
                filtered_by=tuple(failed),
            )
        )
    return out


@dataclass(frozen=True)
class SkillRecommendation:
    skill_id: int
    name: str
    importance: float
    distance: float
    importance_percentile: float
    distance_percentile: float
    acquisition_score: float


def _fractional_rank_percentile(values: np.ndarray) -> np.ndarray:
    """(rank - 1) / (n - 1) with average ranks for ties; 1.0 for a singleton."""
    n = len(values)
    if n == 1:
        return np.ones(1)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(n)
    i = 0
    while i < n:
        j = i
        while j + 1 < n and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return (ranks - 1.0) / (n - 1.0)


def recommend_skills(
    source: str,
    target: str,
    year: int,
    corpus: Corpus,
    rca: RcaMatrix,
    theta: ThetaMatrix,
) -> list[SkillRecommendation]:
    """Rank the target occupation's skills by the acquisition composite score.

    For each candidate skill: importance = mean RCA within the target's ads;
    distance = 1 - Theta(source skill set, {skill}); both are percentile-
    transformed within the candidate list and multiplied. High scores mean
    important skills the source's workers are far from.
    """
    target_set = jobset_weights(corpus, rca, corpus.slice(year, occupation=target), label=target)
    source_set = jobset_weights(corpus, rca, corpus.slice(year, occupation=source), label=source)

    src_cols = np.asarray([theta.column_of(s) for s in source_set.skill_ids])
    cand_cols = np.asarray([theta.column_of(s) for s in target_set.skill_ids])
    block = theta.submatrix(src_cols, cand_cols)
    similarities = (source_set.weights @ block) / source_set.weights.sum()
    distances = 1.0 - similarities

    imp_pct = _fractional_rank_percentile(target_set.weights)
    dist_pct = _fractional_rank_percentile(distances)
    scores = imp_pct * dist_pct

    rows = []
    for i, skill in enumerate(target_set.skill_ids):
        rows.append(
            SkillRecommendation(
                skill_id=int(skill),
                name=corpus.skill_name(int(skill)),
                importance=float(target_set.weights[i]),
                distance=float(distances[i]),
                importance_percentile=float(imp_pct[i]),
                distance_percentile=float(dist_pct[i]),
                acquisition_score=float(scores[i]),
            )
        )
    rows.sort(key=lambda r: (-r.acquisition_score, r.skill_id))
    return rows
