"""Job-ad corpus: loading, validation, indexing, slicing, rare-skill filtering.

A corpus is an immutable store of job ads. Each ad carries a set of interned
skill ids plus occupation/industry codes and optional salary, education,
experience and month fields. Per calendar year the corpus keeps a sparse
binary job-by-skill incidence matrix, which is the input to all similarity
computations.
"""

from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp


class CorpusError(ValueError):
    pass


class LoadError(CorpusError):
    pass


class SliceError(CorpusError):
    pass


@dataclass(frozen=True)
class JobAd:
    """One job advertisement with interned skill ids."""

    id: str
    year: int
    occupation: str
    skills: frozenset[int]
    industry: str = ""
    occupation6: str | None = None
    salary: float | None = None
    education_years: float | None = None
    experience_years: float | None = None
    month: int | None = None
    tags: frozenset[str] = frozenset()


@dataclass(frozen=True)
class EmploymentRecord:
    """Supply-side statistics for one occupation in one year (000's)."""

    occupation: str
    year: int
    total_employed_thousands: float
    total_hours_worked_thousands: float


@dataclass(frozen=True)
class TransitionRecord:
    """One observed occupational transition (source held the year before)."""

    year: int
    source: str
    target: str


@dataclass(frozen=True)
class LoadReport:
    total: int
    loaded: int
    rejected_count: int
    reasons: Mapping[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class JobAdSet:
    """A slice of the corpus: ad positions plus the induced skill set."""

    label: str
    ad_indices: tuple[int, ...]
    skills: frozenset[int]

    def __len__(self) -> int:
        return len(self.ad_indices)


class Corpus:
    """Immutable indexed collection of job ads.

    Ads are ordered by (year, id); skill ids are assigned by sorted skill
    name, so two loads of the same logical content produce identical
    corpora. Safe for concurrent reads after construction.
    """

    def __init__(
        self,
        ads: Sequence[JobAd],
        skill_names: Sequence[str],
        occupation_table: Mapping[str, str],
        industry_table: Mapping[str, str],
        load_report: LoadReport | None = None,
        occupation_meta: Mapping[str, Mapping[str, str]] | None = None,
    ):
        self.ads: tuple[JobAd, ...] = tuple(ads)
        self.skill_names: tuple[str, ...] = tuple(skill_names)
        self.skill_ids: dict[str, int] = {s: i for i, s in enumerate(self.skill_names)}
        self.occupation_table: dict[str, str] = dict(occupation_table)
        self.industry_table: dict[str, str] = dict(industry_table)
        self.occupation_meta: dict[str, dict[str, str]] = {
            k: dict(v) for k, v in (occupation_meta or {}).items()
        }
        self.load_report = load_report or LoadReport(len(ads), len(ads), 0, {})

        self.year_index: dict[int, list[int]] = {}
        for pos, ad in enumerate(self.ads):
            self.year_index.setdefault(ad.year, []).append(pos)

        self._incidence: dict[int, sp.csr_matrix] = {}
        for year, positions in self.year_index.items():
            self._incidence[year] = self._build_incidence(positions)

    def _build_incidence(self, positions: Sequence[int]) -> sp.csr_matrix:
        indptr = np.zeros(len(positions) + 1, dtype=np.int64)
        indices = []
        for row, pos in enumerate(positions):
            cols = sorted(self.ads[pos].skills)
            indices.extend(cols)
            indptr[row + 1] = indptr[row] + len(cols)
        mat = sp.csr_matrix(
            (
                np.ones(len(indices), dtype=np.int8),
                np.asarray(indices, dtype=np.int32),
                indptr,
            ),
            shape=(len(positions), len(self.skill_names)),
        )
        return mat

    # -- lookups ---------------------------------------------------------

    @property
    def years(self) -> list[int]:
        return sorted(self.year_index)

    def n_skills(self) -> int:
        return len(self.skill_names)

    def skill_name(self, skill_id: int) -> str:
        return self.skill_names[skill_id]

    def skill_id(self, name: str) -> int:
        return self.skill_ids[name]

    def incidence(self, year: int) -> sp.csr_matrix:
        """Binary job-by-skill matrix for a year; rows follow year_index order."""
        self._require_year(year)
        return self._incidence[year]

    def occupation_title(self, code: str) -> str:
        return self.occupation_table.get(code, code)

    def industry_title(self, code: str) -> str:
        return self.industry_table.get(code, code)

    def _require_year(self, year: int) -> None:
        if year not in self.year_index:
            raise CorpusError(f"year {year} not present in corpus")

    # -- slicing ---------------------------------------------------------

    def slice(
        self,
        year: int,
        occupation: str | None = None,
        occupation6: str | None = None,
        industry: str | None = None,
        ad_ids: Iterable[str] | None = None,
    ) -> JobAdSet:
        """Select a year's ads by one criterion and return the induced skill set.

        Exactly one of occupation / occupation6 / industry / ad_ids must be
        given. An empty result is an error: downstream importance and
        similarity measures are undefined on empty skill sets.
        """
        self._require_year(year)
        criteria = [occupation, occupation6, industry, ad_ids]
        if sum(c is not None for c in criteria) != 1:
            raise SliceError("exactly one slice criterion required")

        if ad_ids is not None:
            wanted = set(ad_ids)
            picked = [i for i in self.year_index[year] if self.ads[i].id in wanted]
            label = f"ads[{len(wanted)}]"
        elif occupation is not None:
            picked = [i for i in self.year_index[year] if self.ads[i].occupation == occupation]
            label = f"occupation:{occupation}"
        elif occupation6 is not None:
            picked = [i for i in self.year_index[year] if self.ads[i].occupation6 == occupation6]
            label = f"occupation6:{occupation6}"
        else:
            picked = [i for i in self.year_index[year] if self.ads[i].industry == industry]
            label = f"industry:{industry}"

        if not picked:
            raise SliceError(f"empty slice: {label} in {year}")
        skills = frozenset().union(*(self.ads[i].skills for i in picked))
        return JobAdSet(label=label, ad_indices=tuple(picked), skills=skills)

    def occupations_in_year(self, year: int, level: str = "4digit") -> list[str]:
        self._require_year(year)
        if level == "6digit":
            codes = {
                self.ads[i].occupation6
                for i in self.year_index[year]
                if self.ads[i].occupation6 is not None
            }
        else:
            codes = {self.ads[i].occupation for i in self.year_index[year]}
        return sorted(codes)

    def industries_in_year(self, year: int) -> list[str]:
        self._require_year(year)
        return sorted({self.ads[i].industry for i in self.year_index[year] if self.ads[i].industry})


def filter_rare_skills(corpus: Corpus, year: int, min_count: int = 5) -> frozenset[int]:
    """Skills appearing in at least ``min_count`` of the year's ads.

    Monotone in min_count: raising the threshold can only shrink the set.
    """
    if min_count < 1:
        raise CorpusError("min_count must be a positive integer")
    if year not in corpus.year_index:
        raise CorpusError(f"year {year} not present in corpus")
    mat = corpus.incidence(year)
    counts = np.bincount(mat.indices, minlength=mat.shape[1])
    return frozenset(int(s) for s in np.flatnonzero(counts >= min_count))


# -- construction ----------------------------------------------------------


def corpus_from_ads(
    raw_ads: Sequence[Mapping],
    occupation_table: Mapping[str, str] | None = None,
    industry_table: Mapping[str, str] | None = None,
    occupation_meta: Mapping[str, Mapping[str, str]] | None = None,
) -> Corpus:
    """Build a corpus from dicts with skill names (not yet interned).

    Invalid records are dropped and counted in the load report.
    """
    kept: list[dict] = []
    reasons: Counter[str] = Counter()
    seen_ids: set[str] = set()
    for rec in raw_ads:
        reason = _validate(rec, seen_ids)
        if reason is not None:
            reasons[reason] += 1
            continue
        seen_ids.add(str(rec["id"]))
        kept.append(dict(rec))

    names = sorted({s for rec in kept for s in rec["skills"]})
    ids = {s: i for i, s in enumerate(names)}

    ads = []
    occ_table = dict(occupation_table or {})
    ind_table = dict(industry_table or {})
    for rec in kept:
        occ = str(rec["occupation"])
        ind = str(rec.get("industry") or "")
        occ_table.setdefault(occ, occ)
        if ind:
            ind_table.setdefault(ind, ind)
        ads.append(
            JobAd(
                id=str(rec["id"]),
                year=int(rec["year"]),
                occupation=occ,
                skills=frozenset(ids[s] for s in rec["skills"]),
                industry=ind,
                occupation6=str(rec["occupation6"]) if rec.get("occupation6") else None,
                salary=_salary_value(rec.get("salary")),
                education_years=_opt_float(rec.get("education_years")),
                experience_years=_opt_float(rec.get("experience_years")),
                month=int(rec["month"]) if rec.get("month") else None,
                tags=frozenset(rec.get("tags") or ()),
            )
        )
    ads.sort(key=lambda a: (a.year, a.id))
    report = LoadReport(
        total=len(raw_ads),
        loaded=len(ads),
        rejected_count=sum(reasons.values()),
        reasons=dict(sorted(reasons.items())),
    )
    return Corpus(ads, names, occ_table, ind_table, report, occupation_meta)


def _validate(rec: Mapping, seen_ids: set[str]) -> str | None:
    if not rec.get("id"):
        return "missing_id"
    if str(rec["id"]) in seen_ids:
        return "duplicate_id"
    year = rec.get("year")
    if not isinstance(year, int) or isinstance(year, bool) or not (1900 <= year <= 2200):
        return "invalid_year"
    if not rec.get("occupation"):
        return "missing_occupation"
    skills = rec.get("skills")
    if not skills:
        return "empty_skills"
    if not all(isinstance(s, str) and s for s in skills):
        return "invalid_skills"
    month = rec.get("month")
    if month is not None and (not isinstance(month, int) or not 1 <= month <= 12):
        return "invalid_month"
    for fld in ("education_years", "experience_years"):
        v = rec.get(fld)
        if v is not None and (not isinstance(v, (int, float)) or v < 0):
            return f"invalid_{fld}"
    return None


def _salary_value(raw) -> float | None:
    # A two-element range collapses to its maximum: occupation medians are
    # taken over the top of each advertised band.
    if raw is None:
        return None
    if isinstance(raw, (list, tuple)):
        return float(max(raw))
    return float(raw)


def _opt_float(raw) -> float | None:
    return None if raw is None else float(raw)


# -- file loading ----------------------------------------------------------

AD_CSV_COLUMNS = [
    "id", "year", "month", "occupation", "occupation6", "industry",
    "skills", "salary", "education_years", "experience_years", "tags",
]


def load_corpus(
    path: str | Path,
    format: str | None = None,
    occupation_meta_path: str | Path | None = None,
    industry_meta_path: str | Path | None = None,
) -> Corpus:
    """Load a corpus from a JSONL or CSV ads file.

    JSONL: one object per line with keys id, year, occupation, skills (list)
    and optional month, occupation6, industry, salary (number or [lo, hi]),
    education_years, experience_years, tags (list). CSV: the same fields as
    columns, with skills and tags semicolon-separated. Unknown keys/columns
    are ignored. Structurally unparseable lines abort with the line number;
    semantically invalid records are dropped and counted.
    """
    path = Path(path)
    if not path.exists():
        raise LoadError(f"input file not found: {path}")
    if format is None:
        format = "csv" if path.suffix.lower() == ".csv" else "jsonl"
    if format == "jsonl":
        raw = _read_jsonl(path)
    elif format == "csv":
        raw = _read_ads_csv(path)
    else:
        raise LoadError(f"unknown corpus format: {format}")

    occ_table, occ_meta = _read_meta(occupation_meta_path)
    ind_table, _ = _read_meta(industry_meta_path)
    return corpus_from_ads(raw, occ_table, ind_table, occ_meta)


def _read_jsonl(path: Path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise LoadError(f"{path}:{lineno}: parse failure: {exc.msg}") from exc
            if not isinstance(rec, dict):
                raise LoadError(f"{path}:{lineno}: parse failure: expected an object")
            records.append(rec)
    return records


def _read_ads_csv(path: Path) -> list[dict]:
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "id" not in reader.fieldnames:
            raise LoadError(f"{path}:1: parse failure: missing header with 'id' column")
        for lineno, row in enumerate(reader, start=2):
            rec: dict = {
                "id": row.get("id") or None,
                "occupation": row.get("occupation") or None,
                "occupation6": row.get("occupation6") or None,
                "industry": row.get("industry") or None,
                "skills": [s for s in (row.get("skills") or "").split(";") if s],
                "tags": [t for t in (row.get("tags") or "").split(";") if t],
            }
            try:
                rec["year"] = int(row["year"]) if row.get("year") else None
                rec["month"] = int(row["month"]) if row.get("month") else None
                for fld in ("salary", "education_years", "experience_years"):
                    rec[fld] = float(row[fld]) if row.get(fld) else None
            except ValueError as exc:
                raise LoadError(f"{path}:{lineno}: parse failure: {exc}") from exc
            records.append(rec)
    return records


def _read_meta(path: str | Path | None) -> tuple[dict[str, str], dict[str, dict[str, str]]]:
    """Metadata CSV: code,title plus optional automation_risk / essential columns."""
    if path is None:
        return {}, {}
    table: dict[str, str] = {}
    meta: dict[str, dict[str, str]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            code = row.get("code")
            if not code:
                continue
            table[code] = row.get("title") or code
            extra = {
                k: v for k, v in row.items()
                if k not in ("code", "title") and v not in (None, "")
            }
            if extra:
                meta[code] = extra
    return table, meta


def load_employment_csv(path: str | Path) -> list[EmploymentRecord]:
    """CSV: occupation,year,total_employed_thousands,total_hours_worked_thousands."""
    records = []
    seen: set[tuple[str, int]] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.DictReader(fh), start=2):
            try:
                rec = EmploymentRecord(
                    occupation=row["occupation"],
                    year=int(row["year"]),
                    total_employed_thousands=float(row["total_employed_thousands"]),
                    total_hours_worked_thousands=float(row["total_hours_worked_thousands"]),
                )
            except (KeyError, ValueError) as exc:
                raise LoadError(f"{path}:{lineno}: parse failure: {exc}") from exc
            key = (rec.occupation, rec.year)
            if key in seen:
                raise LoadError(f"{path}:{lineno}: duplicate employment record for {key}")
            if rec.total_employed_thousands < 0 or rec.total_hours_worked_thousands < 0:
                raise LoadError(f"{path}:{lineno}: negative employment figures")
            seen.add(key)
            records.append(rec)
    return records


def load_transitions_csv(path: str | Path) -> list[TransitionRecord]:
    """CSV: year,source,target."""
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.DictReader(fh), start=2):
            try:
                records.append(
                    TransitionRecord(year=int(row["year"]), source=row["source"], target=row["target"])
                )
            except (KeyError, ValueError) as exc:
                raise LoadError(f"{path}:{lineno}: parse failure: {exc}") from exc
    return records
