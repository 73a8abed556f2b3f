"""Technology-adoption leading indicator from dynamic seed-anchored skill sets.

Per year, every retained skill is scored by its mean pairwise similarity to
a fixed list of seed skills; the top-N make up that year's technology skill
set, weighted by those scores. The indicator for an industry is the yearly
skill-set similarity between the industry and the technology set: rising
values mean the industry's skill demands are closing the gap.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .corpus import Corpus, SliceError
from .similarity import (
    RcaMatrix,
    SimilarityError,
    ThetaMatrix,
    WeightedSkillSet,
    jobset_weights,
    skillset_similarity,
)

log = logging.getLogger(__name__)


class IndicatorError(ValueError):
    pass


DEFAULT_SEEDS = (
    "Artificial Intelligence",
    "Machine Learning",
    "Data Science",
    "Data Mining",
    "Big Data",
)


@dataclass(frozen=True)
class SeedConfig:
    seed_names: tuple[str, ...] = DEFAULT_SEEDS
    top_n: int = 100
    years: tuple[int, ...] = ()
    weighting: str = "mean_theta"   # or "uniform"

    def __post_init__(self):
        if not self.seed_names:
            raise IndicatorError("need at least one seed skill name")
        if self.top_n < len(self.seed_names):
            raise IndicatorError("top_n must be at least the number of seeds")
        if self.weighting not in ("mean_theta", "uniform"):
            raise IndicatorError(f"unknown weighting: {self.weighting}")


def resolve_seeds(corpus: Corpus, theta: ThetaMatrix, names: Sequence[str]) -> list[int]:
    """Exact case-insensitive seed-name resolution against the retained
    vocabulary; unresolved seeds are skipped with a warning."""
    by_lower = {}
    for skill_id in theta.skill_ids:
        by_lower.setdefault(corpus.skill_name(int(skill_id)).lower(), int(skill_id))
    resolved = []
    for name in names:
        skill_id = by_lower.get(name.lower())
        if skill_id is None:
            log.warning("seed skill %r not in the year's retained vocabulary", name)
        else:
            resolved.append(skill_id)
    return resolved


def dynamic_skill_set(
    corpus: Corpus,
    theta: ThetaMatrix,
    config: SeedConfig,
    year: int,
) -> WeightedSkillSet:
    """Top-N skills by mean similarity to the resolved seeds, seeds included.

    Scores double as the set's weights under mean_theta weighting; ties in
    the ranking break on skill id.
    """
    seeds = resolve_seeds(corpus, theta, config.seed_names)
    if not seeds:
        raise IndicatorError(f"no seed skill resolvable in year {year}")
    seed_cols = np.asarray([theta.column_of(s) for s in seeds])
    all_cols = np.arange(len(theta.skill_ids))
    scores = theta.submatrix(all_cols, seed_cols).mean(axis=1)

    seed_set = set(seeds)
    order = sorted(range(len(all_cols)), key=lambda i: (-scores[i], int(theta.skill_ids[i])))
    chosen = [i for i in order if int(theta.skill_ids[i]) in seed_set]
    budget = min(config.top_n, len(all_cols))
    for i in order:
        if len(chosen) >= budget:
            break
        if int(theta.skill_ids[i]) not in seed_set:
            chosen.append(i)
    chosen.sort(key=lambda i: int(theta.skill_ids[i]))

    ids = np.asarray([int(theta.skill_ids[i]) for i in chosen])
    if config.weighting == "uniform":
        weights = np.ones(len(ids))
    else:
        weights = np.asarray([float(scores[i]) for i in chosen])
    return WeightedSkillSet(label=f"tech-skills-{year}", skill_ids=ids, weights=weights)


@dataclass(frozen=True)
class IndicatorSeries:
    industry: str
    title: str
    values: Mapping[int, float | None]   # None marks a missing (industry, year) cell
    percent_change: float | None

    def value_list(self, years: Sequence[int]) -> list[float | None]:
        return [self.values.get(y) for y in years]


def _percent_change(values: Mapping[int, float | None], years: Sequence[int]) -> float | None:
    if not years:
        return None
    first, last = values.get(years[0]), values.get(years[-1])
    if first is None or last is None or first == 0.0:
        return None
    return 100.0 * (last - first) / first


def adoption_series(
    corpus: Corpus,
    rca_by_year: Mapping[int, RcaMatrix],
    theta_by_year: Mapping[int, ThetaMatrix],
    config: SeedConfig,
    industries: Sequence[str] | None = None,
    years: Sequence[int] | None = None,
) -> list[IndicatorSeries]:
    """Yearly similarity of each industry's skill set to the technology set.

    Cells where an industry has no ads (or no retained skills) in a year are
    None rather than zero. Percent change is taken between the first and
    last requested years.
    """
    years = sorted(years if years is not None else theta_by_year)
    missing = [y for y in years if y not in theta_by_year or y not in rca_by_year]
    if missing:
        raise IndicatorError(f"no similarity artifacts for years {missing}")
    if industries is None:
        industries = sorted({i for y in years for i in corpus.industries_in_year(y)})

    tech_sets = {y: dynamic_skill_set(corpus, theta_by_year[y], config, y) for y in years}
    out = []
    for industry in industries:
        values: dict[int, float | None] = {}
        for y in years:
            try:
                ind_set = jobset_weights(
                    corpus, rca_by_year[y], corpus.slice(y, industry=industry), label=industry
                )
            except (SliceError, SimilarityError):
                values[y] = None
                continue
            values[y] = float(skillset_similarity(ind_set, tech_sets[y], theta_by_year[y]))
        out.append(
            IndicatorSeries(
                industry=industry,
                title=corpus.industry_title(industry),
                values=values,
                percent_change=_percent_change(values, years),
            )
        )
    return out
