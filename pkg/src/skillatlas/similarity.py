"""Skill and skill-set similarity from per-year job-ad incidence.

Pipeline, per calendar year over the retained vocabulary:

  RCA(j, s)      share-of-shares importance of skill s in ad j
  e(j, s)        effective use, RCA >= 1
  theta(s1, s2)  co-effective-use count / larger effective-use total
  w(s, S)        mean RCA of s over a job-ad set
  Theta(S1, S2)  importance-weighted average pairwise theta

All sums are scoped to one year's ads and the retained skills. Everything
here is a pure function of immutable inputs; duplicate every ad and all
outputs are unchanged (the measures are share-based).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .corpus import Corpus, JobAdSet

# Above this vocabulary size theta switches to sparse storage. Values are
# identical either way.
DENSE_MAX_SKILLS = 20_000


class SimilarityError(ValueError):
    pass


@dataclass(frozen=True)
class RcaMatrix:
    """Sparse job-by-skill RCA values for one year (zero where skill absent)."""

    year: int
    skill_ids: np.ndarray          # retained vocabulary, sorted (columns)
    ad_indices: np.ndarray         # corpus ad positions (rows)
    values: sp.csr_matrix          # float64, nnz exactly where x(j,s)=1
    dropped_ads: tuple[int, ...]   # year's ads with no retained skill

    def column_of(self, skill_id: int) -> int:
        col = int(np.searchsorted(self.skill_ids, skill_id))
        if col >= len(self.skill_ids) or self.skill_ids[col] != skill_id:
            raise SimilarityError(f"skill {skill_id} not in retained vocabulary")
        return col

    def row_of(self, ad_index: int) -> int | None:
        row = int(np.searchsorted(self.ad_indices, ad_index))
        if row < len(self.ad_indices) and self.ad_indices[row] == ad_index:
            return row
        return None


@dataclass(frozen=True)
class ThetaMatrix:
    """Symmetric pairwise skill similarity over the retained vocabulary.

    theta(s, s) = 1 for any skill with at least one effective use, else 0;
    pairs with no effective use on both sides are defined as 0.
    """

    year: int
    skill_ids: np.ndarray
    effective_counts: np.ndarray
    matrix: np.ndarray | sp.csr_matrix

    @property
    def is_dense(self) -> bool:
        return isinstance(self.matrix, np.ndarray)

    def column_of(self, skill_id: int) -> int:
        col = int(np.searchsorted(self.skill_ids, skill_id))
        if col >= len(self.skill_ids) or self.skill_ids[col] != skill_id:
            raise SimilarityError(f"skill {skill_id} not in theta vocabulary")
        return col

    def value(self, s1: int, s2: int) -> float:
        i, j = self.column_of(s1), self.column_of(s2)
        return float(self.matrix[i, j])

    def submatrix(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        """Dense block theta[rows x cols] by column index."""
        if self.is_dense:
            return self.matrix[np.ix_(rows, cols)]
        return np.asarray(self.matrix[rows][:, cols].todense())

    def toarray(self) -> np.ndarray:
        return self.matrix if self.is_dense else np.asarray(self.matrix.todense())


@dataclass(frozen=True)
class WeightedSkillSet:
    """Skills with non-negative importance weights, at least one positive."""

    label: str
    skill_ids: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if len(self.skill_ids) != len(self.weights):
            raise SimilarityError("skill_ids and weights must have equal length")
        if len(self.skill_ids) == 0:
            raise SimilarityError(f"empty skill set: {self.label}")
        if np.any(np.asarray(self.weights) < 0):
            raise SimilarityError(f"negative weight in skill set: {self.label}")
        if not np.any(np.asarray(self.weights) > 0):
            raise SimilarityError(f"all-zero weights in skill set: {self.label}")


def compute_rca(corpus: Corpus, year: int, retained: frozenset[int] | set[int]) -> RcaMatrix:
    """Revealed comparative advantage of each retained skill in each ad.

    RCA(j,s) = [x(j,s) / sum_s' x(j,s')] / [sum_j' x(j',s) / sum_j's' x(j',s')]
    with all four sums over the year's ads and retained skills only. Ads
    whose entire skill set was filtered out are excluded and reported.
    """
    if year not in corpus.year_index:
        raise SimilarityError(f"year {year} not present in corpus")
    positions = np.asarray(corpus.year_index[year], dtype=np.int64)
    cols = np.asarray(sorted(retained), dtype=np.int64)
    if len(cols) == 0:
        raise SimilarityError("retained skill set is empty")
    if np.any(cols < 0) or np.any(cols >= corpus.n_skills()):
        raise SimilarityError("retained contains unknown skill ids")

    x = corpus.incidence(year)
    if len(cols) != x.shape[1]:
        x = x[:, cols].tocsr()
    keep = np.diff(x.indptr) > 0
    dropped = tuple(int(p) for p in positions[~keep])
    if not keep.all():
        x = x[keep]
    ad_indices = positions[keep]
    if x.shape[0] == 0:
        raise SimilarityError(f"no ads with retained skills in year {year}")

    r = np.diff(x.indptr).astype(np.float64)            # per-ad skill counts
    c = np.bincount(x.indices, minlength=len(cols)).astype(np.float64)
    total = float(r.sum())

    rows_of_nnz = np.repeat(np.arange(x.shape[0]), np.diff(x.indptr))
    data = total / (r[rows_of_nnz] * c[x.indices])
    values = sp.csr_matrix((data, x.indices.copy(), x.indptr.copy()), shape=x.shape)
    return RcaMatrix(
        year=year,
        skill_ids=cols,
        ad_indices=ad_indices,
        values=values,
        dropped_ads=dropped,
    )


def compute_theta(rca: RcaMatrix) -> ThetaMatrix:
    """Pairwise skill similarity from co-occurring effective use.

    theta(s1,s2) = sum_j e(j,s1) e(j,s2) / max(sum_j e(j,s1), sum_j e(j,s2)).
    Integer co-occurrence counts are taken first and divided once, so the
    result is bit-identical to the naive triple loop.
    """
    # eliminate_zeros mutates its arrays, so the index structure is copied
    e = sp.csr_matrix(
        (
            (rca.values.data >= 1.0).astype(np.int64),
            rca.values.indices.copy(),
            rca.values.indptr.copy(),
        ),
        shape=rca.values.shape,
    )
    e.eliminate_zeros()
    counts = np.bincount(e.indices, minlength=e.shape[1]).astype(np.int64)
    co = (e.T @ e).tocoo()

    n = len(rca.skill_ids)
    if n <= DENSE_MAX_SKILLS:
        matrix = np.zeros((n, n), dtype=np.float64)
        matrix[co.row, co.col] = co.data
        # divide row blocks in place to avoid a second n*n denominator array
        block = 512
        counts_f = counts.astype(np.float64)
        for start in range(0, n, block):
            stop = min(start + block, n)
            denom = np.maximum.outer(counts_f[start:stop], counts_f)
            np.divide(matrix[start:stop], denom, where=denom > 0.0,
                      out=matrix[start:stop])
    else:
        denom = np.maximum(counts[co.row], counts[co.col]).astype(np.float64)
        matrix = sp.csr_matrix(
            (co.data.astype(np.float64) / denom, (co.row, co.col)), shape=(n, n)
        )
    return ThetaMatrix(
        year=rca.year,
        skill_ids=rca.skill_ids.copy(),
        effective_counts=counts,
        matrix=matrix,
    )


def skill_importance(corpus: Corpus, rca: RcaMatrix, jobset: JobAdSet, skill: int) -> float:
    """Mean RCA of one skill over a job-ad set (zero where absent)."""
    if len(jobset) == 0:
        raise SimilarityError("empty job-ad set")
    col = rca.column_of(skill)
    acc = 0.0
    for pos in jobset.ad_indices:
        row = rca.row_of(pos)
        if row is not None:
            acc += rca.values[row, col]
    return acc / len(jobset)


def jobset_weights(corpus: Corpus, rca: RcaMatrix, jobset: JobAdSet, label: str | None = None) -> WeightedSkillSet:
    """Weighted skill set of a slice: induced retained skills with Eq-3 weights.

    Ads dropped from the RCA matrix still count in the denominator with zero
    contribution. Skills of the slice outside the retained vocabulary are
    omitted.
    """
    if len(jobset) == 0:
        raise SimilarityError("empty job-ad set")
    rows = [r for r in (rca.row_of(p) for p in jobset.ad_indices) if r is not None]
    if not rows:
        raise SimilarityError(f"no retained skills in job-ad set: {jobset.label}")
    indptr, indices, data = rca.values.indptr, rca.values.indices, rca.values.data
    if len(rows) == rca.values.shape[0]:
        cols_cat, data_cat = indices, data
    else:
        cols_cat = np.concatenate([indices[indptr[r]: indptr[r + 1]] for r in rows])
        data_cat = np.concatenate([data[indptr[r]: indptr[r + 1]] for r in rows])
    sums = np.bincount(cols_cat, weights=data_cat, minlength=len(rca.skill_ids))
    cols = np.flatnonzero(sums > 0)
    if len(cols) == 0:
        raise SimilarityError(f"no retained skills in job-ad set: {jobset.label}")
    return WeightedSkillSet(
        label=label or jobset.label,
        skill_ids=rca.skill_ids[cols].copy(),
        weights=sums[cols] / len(jobset),
    )


def skillset_similarity(s1: WeightedSkillSet, s2: WeightedSkillSet, theta: ThetaMatrix) -> float:
    """Importance-weighted average pairwise theta between two skill sets.

    Theta(S1,S2) = sum sum w(s1) w(s2) theta(s1,s2) / sum sum w(s1) w(s2).
    Symmetric, in [0, 1]; singleton sets reduce to theta; invariant under
    uniform positive rescaling of either weight vector.
    """
    cols1 = np.asarray([theta.column_of(s) for s in s1.skill_ids])
    cols2 = np.asarray([theta.column_of(s) for s in s2.skill_ids])
    c = float(s1.weights.sum()) * float(s2.weights.sum())
    if c <= 0.0:
        raise SimilarityError("degenerate skill sets: all weight products zero")
    block = theta.submatrix(cols1, cols2)
    num = float(s1.weights @ block @ s2.weights)
    return num / c


def occupation_skillsets(
    corpus: Corpus,
    rca: RcaMatrix,
    year: int,
    level: str = "4digit",
) -> dict[str, WeightedSkillSet]:
    """One weighted skill set per occupation active in the year.

    At the 6-digit level, ads without an occupation6 code are excluded.
    Occupations whose ads carry no retained skills are absent from the
    result (their weights would be all zero).
    """
    if level not in ("4digit", "6digit"):
        raise SimilarityError(f"unknown occupation level: {level}")
    grouped: dict[str, list[int]] = {}
    for i in corpus.year_index[year]:
        ad = corpus.ads[i]
        code = ad.occupation6 if level == "6digit" else ad.occupation
        if code is not None:
            grouped.setdefault(code, []).append(i)
    out: dict[str, WeightedSkillSet] = {}
    for code in sorted(grouped):
        positions = grouped[code]
        jobset = JobAdSet(
            label=code,
            ad_indices=tuple(positions),
            skills=frozenset().union(*(corpus.ads[i].skills for i in positions)),
        )
        try:
            out[code] = jobset_weights(corpus, rca, jobset, label=code)
        except SimilarityError:
            continue
    return out
