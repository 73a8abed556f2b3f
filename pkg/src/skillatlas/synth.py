"""Synthetic corpus generator with planted structure.

Each occupation gets a core skill cluster; clusters overlap along a
configurable graph. Ground-truth transitions are drawn with probability
increasing in core-skill overlap, damped by an education-gap asymmetry and
pulled toward high-demand targets, so both the skill-similarity signal and
the asymmetric labor-market signals are recoverable by downstream models.

An optional adoption plant replicates one base year of ads across all years
and injects a growing share of technology-cluster skills into a single
industry, leaving every other industry's ads byte-identical year over year.
Generation is a pure function of (config, seed).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus, EmploymentRecord, TransitionRecord, corpus_from_ads


class SynthError(ValueError):
    pass


@dataclass(frozen=True)
class AdoptionPlant:
    """Linear technology-skill injection into one industry's ads."""

    seed_names: tuple[str, ...]
    adopting_industry: str
    cluster_size: int = 10
    start_rate: float = 0.0
    end_rate: float = 0.5
    ai_skills_per_ad: int = 2
    anchor_ads_per_year: int = 6


@dataclass(frozen=True)
class SynthConfig:
    n_occupations: int = 10
    n_skills_per_occupation: int = 8
    overlap: str | tuple[tuple[int, int], ...] = "chain"
    overlap_size: int = 3
    n_background_skills: int = 8
    background_rate: float = 0.25
    skills_per_ad: int = 6
    n_ads: int = 2000
    years: tuple[int, ...] = (2016, 2017, 2018)
    n_industries: int = 2
    n_transitions: int = 600
    transition_noise: float = 0.1
    education_pull: float = 0.8
    demand_pull: float = 0.5
    essential_occupations: tuple[int, ...] = ()
    replicate_years: bool = False
    ai_plant: AdoptionPlant | None = None


@dataclass(frozen=True)
class SynthResult:
    corpus: Corpus
    employment: list[EmploymentRecord]
    transitions: list[TransitionRecord]
    occupation_codes: tuple[str, ...] = ()
    core_skills: dict[str, frozenset[str]] = field(default_factory=dict)


def occupation_code(index: int) -> str:
    return str(1000 + index)


def _edges(config: SynthConfig) -> tuple[tuple[int, int], ...]:
    if isinstance(config.overlap, tuple):
        edges = config.overlap
    elif config.overlap == "chain":
        edges = tuple((i, i + 1) for i in range(config.n_occupations - 1))
    elif config.overlap == "disjoint":
        edges = ()
    else:
        raise SynthError(f"unknown overlap graph: {config.overlap!r}")
    for a, b in edges:
        if not (0 <= a < config.n_occupations and 0 <= b < config.n_occupations) or a == b:
            raise SynthError(f"invalid overlap edge ({a}, {b})")
    return edges


def _cores(config: SynthConfig) -> list[set[str]]:
    """Per-occupation core skill names: own block plus edge-shared blocks."""
    cores = [
        {f"occ{o:03d}_skill{i:02d}" for i in range(config.n_skills_per_occupation)}
        for o in range(config.n_occupations)
    ]
    for a, b in _edges(config):
        lo, hi = sorted((a, b))
        shared = {f"shared{lo:03d}_{hi:03d}_{i:02d}" for i in range(config.overlap_size)}
        cores[a] |= shared
        cores[b] |= shared
    return cores


def generate_synthetic(config: SynthConfig, seed: int) -> SynthResult:
    """Generate (corpus, employment records, transition records)."""
    cfg = config
    if cfg.n_occupations < 1 or cfg.n_skills_per_occupation < 1:
        raise SynthError("need at least one occupation and one core skill")
    if not cfg.years:
        raise SynthError("need at least one year")
    if cfg.n_industries < 1 or cfg.n_industries > cfg.n_occupations:
        raise SynthError("n_industries must be in [1, n_occupations]")
    if not 0.0 <= cfg.transition_noise <= 1.0:
        raise SynthError("transition_noise must be in [0, 1]")

    cores = _cores(cfg)
    smallest_core = min(len(c) for c in cores)
    if cfg.skills_per_ad > smallest_core:
        raise SynthError(
            f"infeasible config: skills_per_ad={cfg.skills_per_ad} exceeds the "
            f"smallest core cluster ({smallest_core} skills)"
        )
    if cfg.ai_plant is not None:
        _check_plant(cfg)

    rng = np.random.default_rng(seed)
    k = cfg.n_occupations
    years = tuple(sorted(cfg.years))

    popularity = rng.uniform(0.5, 1.5, size=k)
    popularity /= popularity.sum()
    education = np.round(rng.uniform(10, 18, size=k)).astype(int)
    experience = np.round(rng.uniform(0, 8, size=k)).astype(int)
    salary = 40_000.0 + 6_000.0 * (education - 10) + rng.normal(0.0, 3_000.0, size=k)
    industry_of = [chr(ord("A") + (o * cfg.n_industries) // k) for o in range(k)]
    background = [f"common_skill{i:02d}" for i in range(cfg.n_background_skills)]

    if cfg.replicate_years:
        base = _draw_year_ads(cfg, rng, years[0], _per_year_counts(cfg, years)[years[0]],
                              cores, background, popularity, education, experience,
                              salary, industry_of)
        raw_ads = []
        for year in years:
            for j, ad in enumerate(base):
                copy = dict(ad)
                copy["id"] = f"ad{year}_{j:06d}"
                copy["year"] = year
                copy["skills"] = list(ad["skills"])
                raw_ads.append(copy)
    else:
        raw_ads = []
        counts = _per_year_counts(cfg, years)
        for year in years:
            raw_ads.extend(
                _draw_year_ads(cfg, rng, year, counts[year], cores, background,
                               popularity, education, experience, salary, industry_of)
            )

    if cfg.ai_plant is not None:
        _apply_plant(cfg, raw_ads, years)

    occ_table = {occupation_code(o): f"Occupation {occupation_code(o)}" for o in range(k)}
    ind_table = {c: f"Industry {c}" for c in sorted(set(industry_of))}
    occ_meta = {}
    for o in cfg.essential_occupations:
        occ_meta[occupation_code(o)] = {"essential": "yes"}
    if cfg.ai_plant is not None:
        occ_table["9000"] = "Technology Research"
        ind_table["Z"] = "Industry Z"

    corpus = corpus_from_ads(raw_ads, occ_table, ind_table, occ_meta)

    employment = []
    base_emp = 20.0 + 400.0 * popularity
    trend = rng.normal(0.0, 0.02, size=k)
    hours_factor = rng.uniform(1.6, 2.0, size=k)
    for o in range(k):
        for yi, year in enumerate(years):
            employed = float(base_emp[o] * (1.0 + trend[o] * yi))
            employment.append(
                EmploymentRecord(
                    occupation=occupation_code(o),
                    year=year,
                    total_employed_thousands=round(float(employed), 3),
                    total_hours_worked_thousands=round(float(employed * hours_factor[o]), 3),
                )
            )

    transitions = _draw_transitions(cfg, rng, years, cores, popularity, education)

    return SynthResult(
        corpus=corpus,
        employment=employment,
        transitions=transitions,
        occupation_codes=tuple(occupation_code(o) for o in range(k)),
        core_skills={occupation_code(o): frozenset(cores[o]) for o in range(k)},
    )


def _per_year_counts(cfg: SynthConfig, years: tuple[int, ...]) -> dict[int, int]:
    base, rem = divmod(cfg.n_ads, len(years))
    return {year: base + (1 if i < rem else 0) for i, year in enumerate(years)}


def _draw_year_ads(cfg, rng, year, n, cores, background, popularity,
                   education, experience, salary, industry_of) -> list[dict]:
    core_arrays = [np.asarray(sorted(c)) for c in cores]
    bg_array = np.asarray(background) if background else None
    essential = set(cfg.essential_occupations)

    occs = rng.choice(cfg.n_occupations, size=n, p=popularity)
    months = rng.integers(1, 13, size=n)
    edu_jitter = rng.integers(0, 3, size=n)
    exp_jitter = rng.integers(0, 3, size=n)
    sal_noise = rng.normal(0.0, 0.05, size=n)
    if bg_array is not None and cfg.background_rate > 0:
        n_bgs = rng.binomial(cfg.skills_per_ad, cfg.background_rate, size=n)
        n_bgs = np.minimum(n_bgs, min(len(background), cfg.skills_per_ad - 1))
    else:
        n_bgs = np.zeros(n, dtype=np.int64)

    ads = []
    for j in range(n):
        o = int(occs[j])
        n_bg = int(n_bgs[j])
        picks = list(rng.choice(core_arrays[o], size=cfg.skills_per_ad - n_bg, replace=False))
        if n_bg:
            picks.extend(rng.choice(bg_array, size=n_bg, replace=False))
        code = occupation_code(o)
        ads.append(
            {
                "id": f"ad{year}_{j:06d}",
                "year": year,
                "month": int(months[j]),
                "occupation": code,
                "occupation6": code + "11",
                "industry": industry_of[o],
                "skills": sorted(str(s) for s in picks),
                "salary": round(float(salary[o] * (1.0 + sal_noise[j])), -2),
                "education_years": int(education[o] + edu_jitter[j]),
                "experience_years": int(experience[o] + exp_jitter[j]),
                "tags": ["essential"] if o in essential else [],
            }
        )
    return ads


def _transition_weights(cfg: SynthConfig, cores, popularity, education) -> np.ndarray:
    """Planted target weights per source: overlap * education asym * demand."""
    k = cfg.n_occupations
    weights = np.zeros((k, k))
    for s in range(k):
        for t in range(k):
            inter = len(cores[s] & cores[t])
            union = len(cores[s] | cores[t])
            jac = inter / union if union else 0.0
            uphill = max(0, education[t] - education[s])
            weights[s, t] = (
                jac
                * np.exp(-cfg.education_pull * uphill)
                * popularity[t] ** cfg.demand_pull
            )
    return weights


def _draw_transitions(cfg, rng, years, cores, popularity, education) -> list[TransitionRecord]:
    weights = _transition_weights(cfg, cores, popularity, education)
    k = cfg.n_occupations
    records = []
    for _ in range(cfg.n_transitions):
        year = int(years[rng.integers(0, len(years))])
        s = int(rng.choice(k, p=popularity))
        if cfg.transition_noise > 0 and rng.random() < cfg.transition_noise:
            t = int(rng.integers(0, k))
        else:
            row = weights[s]
            total = row.sum()
            if total <= 0:
                t = s
            else:
                t = int(rng.choice(k, p=row / total))
        records.append(TransitionRecord(year=year, source=occupation_code(s), target=occupation_code(t)))
    return records


# -- adoption plant ----------------------------------------------------------


def _check_plant(cfg: SynthConfig) -> None:
    plant = cfg.ai_plant
    if not plant.seed_names:
        raise SynthError("adoption plant needs at least one seed skill name")
    if plant.cluster_size < len(plant.seed_names):
        raise SynthError("infeasible config: cluster smaller than its seed skills")
    if len(plant.seed_names) > cfg.skills_per_ad:
        raise SynthError("infeasible config: more seed skills than skills per ad")
    if not cfg.replicate_years:
        raise SynthError("adoption plant requires replicate_years=True")
    if not 0.0 <= plant.start_rate <= plant.end_rate <= 1.0:
        raise SynthError("plant rates must satisfy 0 <= start <= end <= 1")
    if plant.ai_skills_per_ad >= cfg.skills_per_ad:
        raise SynthError("infeasible config: injection would replace every core skill")
    if plant.ai_skills_per_ad > plant.cluster_size:
        raise SynthError("infeasible config: injection draws more skills than the cluster holds")


def _plant_cluster(plant: AdoptionPlant) -> list[str]:
    extras = [f"ai_skill{i:02d}" for i in range(plant.cluster_size - len(plant.seed_names))]
    return list(plant.seed_names) + extras


def _apply_plant(cfg: SynthConfig, raw_ads: list[dict], years: tuple[int, ...]) -> None:
    """Inject cluster skills into a growing prefix of the adopting industry's ads.

    The injected prefix is nested across years and each ad's replacement is a
    pure function of its position, so a year differs from the previous one
    only by newly injected ads. Anchor ads keep the seed skills above any
    rare-skill threshold in every year.
    """
    plant = cfg.ai_plant
    cluster = _plant_cluster(plant)
    seeds = list(plant.seed_names)
    non_seed = cluster[len(seeds):]

    by_year: dict[int, list[dict]] = {y: [] for y in years}
    for ad in raw_ads:
        if ad["industry"] == plant.adopting_industry:
            by_year[ad["year"]].append(ad)
    for y in years:
        by_year[y].sort(key=lambda a: a["id"])

    span = max(len(years) - 1, 1)
    for yi, year in enumerate(years):
        ads = by_year[year]
        rate = plant.start_rate + (plant.end_rate - plant.start_rate) * (yi / span)
        n_inject = int(round(rate * len(ads)))
        for j in range(min(n_inject, len(ads))):
            ad = ads[j]
            skills = sorted(ad["skills"])
            injected = [cluster[(j * plant.ai_skills_per_ad + m) % len(cluster)]
                        for m in range(plant.ai_skills_per_ad)]
            keep = [s for s in skills if s not in injected]
            ad["skills"] = sorted(keep[: cfg.skills_per_ad - plant.ai_skills_per_ad] + injected)

    # Constant research-lab ads carrying every seed skill each year.
    pad = min(cfg.skills_per_ad - len(seeds), len(non_seed))
    for year in years:
        for j in range(plant.anchor_ads_per_year):
            fill = [non_seed[(j + m) % len(non_seed)] for m in range(pad)] if pad > 0 else []
            raw_ads.append(
                {
                    "id": f"lab{year}_{j:04d}",
                    "year": year,
                    "month": 1 + (j % 12),
                    "occupation": "9000",
                    "occupation6": "900011",
                    "industry": "Z",
                    "skills": sorted(set(seeds + fill)),
                    "salary": 90_000.0,
                    "education_years": 18,
                    "experience_years": 5,
                    "tags": [],
                }
            )
