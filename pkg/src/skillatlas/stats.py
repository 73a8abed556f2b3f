"""Validation toolkit: paired tests, resampled significance, classifier
metrics, ablation, and gain-based feature importance.

The t-distribution tail probability is computed here directly through the
regularized incomplete beta function (continued-fraction expansion), so the
package needs no statistics dependency; reference implementations are used
only in the test suite to cross-check it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from . import gbt
from .corpus import TransitionRecord


class StatsError(ValueError):
    pass


# -- incomplete beta / t-distribution ---------------------------------------

_BETA_EPS = 1e-15
_BETA_FPMIN = 1e-300
_BETA_MAXIT = 300


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz scheme)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _BETA_FPMIN:
        d = _BETA_FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _BETA_MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETA_FPMIN:
            d = _BETA_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _BETA_FPMIN:
            c = _BETA_FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETA_FPMIN:
            d = _BETA_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _BETA_FPMIN:
            c = _BETA_FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETA_EPS:
            return h
    raise StatsError("incomplete beta continued fraction did not converge")


def betainc_regularized(a: float, b: float, x: float) -> float:
    """I_x(a, b), accurate to ~1e-12 over the t-test parameter range."""
    if a <= 0 or b <= 0:
        raise StatsError("beta parameters must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_sf_two_sided(t: float, df: float) -> float:
    """Two-sided tail probability of Student's t."""
    if df < 1:
        raise StatsError("degrees of freedom must be >= 1")
    return betainc_regularized(df / 2.0, 0.5, df / (df + t * t))


# -- paired test -------------------------------------------------------------


@dataclass(frozen=True)
class PairedTestResult:
    t_statistic: float
    p_value: float
    cohen_d: float
    n: int


def paired_t_test(x: Sequence[float], y: Sequence[float]) -> PairedTestResult:
    """Paired t-test on d = x - y with the paired Cohen's d effect size."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise StatsError("samples must be equal-length vectors")
    n = len(x)
    if n < 2:
        raise StatsError("need at least two pairs")
    d = x - y
    sd = float(d.std(ddof=1))
    if sd == 0.0:
        raise StatsError("zero-variance differences: paired t-test undefined")
    mean = float(d.mean())
    t = mean / (sd / math.sqrt(n))
    return PairedTestResult(
        t_statistic=t,
        p_value=t_sf_two_sided(t, n - 1),
        cohen_d=mean / sd,
        n=n,
    )


# -- resampled significance ---------------------------------------------------


class PairSimilarityLookup(Protocol):
    def theta_between(self, year: int, source: str, target: str) -> float | None: ...
    def candidates(self, year: int) -> Sequence[str]: ...


@dataclass(frozen=True)
class ResampleReport:
    n_runs: int
    significant_fraction: float
    p_values: tuple[float, ...]
    n_pairs: int
    skipped: int
    alpha: float = 0.05


def resampled_significance(
    transitions: Sequence[TransitionRecord],
    theta_lookup: PairSimilarityLookup,
    n_runs: int = 100,
    seed: int = 0,
    exclude_same: bool = False,
    alpha: float = 0.05,
    log_transform: bool = False,
) -> ResampleReport:
    """Repeatedly test observed transitions against random re-targetings.

    Each run keeps every observed source and draws a random target distinct
    from the true one, then paired-tests the true similarities against the
    resampled ones. Returns the fraction of runs significant at alpha.
    Deterministic given the seed. With log_transform the test runs on
    log-similarities (values clamped to 1e-12 before the log).
    """
    usable: list[tuple[int, str, str, float]] = []
    skipped = 0
    for rec in transitions:
        if exclude_same and rec.source == rec.target:
            skipped += 1
            continue
        value = theta_lookup.theta_between(rec.year, rec.source, rec.target)
        if value is None:
            skipped += 1
            continue
        usable.append((rec.year, rec.source, rec.target, value))
    if len(usable) < 2:
        raise StatsError("fewer than two testable transitions")

    pools: dict[int, list[str]] = {}
    for year, _, _, _ in usable:
        if year not in pools:
            pools[year] = list(theta_lookup.candidates(year))

    def maybe_log(arr: np.ndarray) -> np.ndarray:
        return np.log(np.maximum(arr, 1e-12)) if log_transform else arr

    true_vals = maybe_log(np.array([v for (_, _, _, v) in usable]))
    rng = np.random.default_rng(seed)
    p_values = []
    for _ in range(n_runs):
        fake_vals = np.empty(len(usable))
        for i, (year, source, target, _) in enumerate(usable):
            pool = pools[year]
            while True:
                pick = pool[int(rng.integers(len(pool)))]
                if pick != target:
                    break
            value = theta_lookup.theta_between(year, source, pick)
            fake_vals[i] = 0.0 if value is None else value
        result = paired_t_test(true_vals, maybe_log(fake_vals))
        p_values.append(result.p_value)

    significant = sum(1 for p in p_values if p < alpha)
    return ResampleReport(
        n_runs=n_runs,
        significant_fraction=significant / n_runs,
        p_values=tuple(p_values),
        n_pairs=len(usable),
        skipped=skipped,
        alpha=alpha,
    )


# -- classifier metrics --------------------------------------------------------


@dataclass(frozen=True)
class ClassifierReport:
    accuracy: float
    f1_macro: float
    tp: int
    fp: int
    tn: int
    fn: int
    recall_positive: float
    recall_negative: float
    roc_points: tuple[tuple[float, float], ...] | None
    auc: float | None


def roc_curve(scores: np.ndarray, y: np.ndarray) -> tuple[tuple[tuple[float, float], ...], float]:
    """(FPR, TPR) points swept over the unique scores, plus trapezoidal AUC."""
    scores = np.asarray(scores, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n_pos, n_neg = int((y == 1).sum()), int((y == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise StatsError("ROC needs both classes present")
    points = []
    for thr in np.concatenate([[np.inf], np.unique(scores)[::-1]]):
        hit = scores >= thr
        points.append((float((hit & (y == 0)).sum() / n_neg), float((hit & (y == 1)).sum() / n_pos)))
    xs = np.array([p[0] for p in points])
    ys = np.array([p[1] for p in points])
    return tuple(points), float(np.trapezoid(ys, xs))


def classifier_report(model: gbt.GbtModel, data) -> ClassifierReport:
    """Threshold-0.5 metrics plus an ROC sweep over the unique probabilities."""
    x, y = gbt._as_xy(data)
    if len(y) == 0:
        raise StatsError("empty test set")
    proba = gbt.predict_proba(model, x)
    pred = (proba >= 0.5).astype(np.int64)
    tp = int(((pred == 1) & (y == 1)).sum())
    fp = int(((pred == 1) & (y == 0)).sum())
    tn = int(((pred == 0) & (y == 0)).sum())
    fn = int(((pred == 0) & (y == 1)).sum())

    def f1(tp_, fp_, fn_):
        denom = 2 * tp_ + fp_ + fn_
        return 2 * tp_ / denom if denom else 0.0

    recall_pos = tp / (tp + fn) if (tp + fn) else 0.0
    recall_neg = tn / (tn + fp) if (tn + fp) else 0.0
    f1_macro = (f1(tp, fp, fn) + f1(tn, fn, fp)) / 2.0

    roc = None
    auc = None
    if len(np.unique(y)) == 2:
        roc, auc = roc_curve(proba, y)
    return ClassifierReport(
        accuracy=(tp + tn) / len(y),
        f1_macro=f1_macro,
        tp=tp, fp=fp, tn=tn, fn=fn,
        recall_positive=recall_pos,
        recall_negative=recall_neg,
        roc_points=roc,
        auc=auc,
    )


# -- ablation and feature importance -------------------------------------------


@dataclass(frozen=True)
class AblationRow:
    feature: str
    accuracy_without: float
    accuracy_drop: float


@dataclass(frozen=True)
class AblationReport:
    accuracy_full: float
    rows: tuple[AblationRow, ...]   # sorted by drop, largest first

    def top_feature(self) -> str:
        return self.rows[0].feature


def ablation(
    data,
    feature_names: Sequence[str],
    seed: int = 0,
    hp: gbt.GbtHyperparams | None = None,
    test_fraction: float = 0.2,
) -> AblationReport:
    """Retrain with each feature removed under the same split and seeds and
    record the accuracy drop against the full model."""
    x, y = gbt._as_xy(data)
    if x.shape[1] != len(feature_names):
        raise StatsError("feature_names length mismatch")
    if x.shape[1] < 2:
        raise StatsError("ablation needs at least two features")
    hp = hp or gbt.GbtHyperparams(n_trees=120, learning_rate=0.1, max_depth=4)

    rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, 0xAB1)))
    test_mask = np.zeros(len(y), dtype=bool)
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        idx = idx[rng.permutation(len(idx))]
        test_mask[idx[: max(1, int(round(test_fraction * len(idx))))]] = True

    def fit_acc(columns: np.ndarray) -> float:
        model = gbt.train((x[~test_mask][:, columns], y[~test_mask]), hp, seed=seed)
        return gbt.accuracy(model, (x[test_mask][:, columns], y[test_mask]))

    full_acc = fit_acc(np.arange(x.shape[1]))
    rows = []
    for j, name in enumerate(feature_names):
        keep = np.array([c for c in range(x.shape[1]) if c != j])
        acc = fit_acc(keep)
        rows.append(AblationRow(feature=name, accuracy_without=acc,
                                accuracy_drop=full_acc - acc))
    rows.sort(key=lambda r: (-r.accuracy_drop, r.feature))
    return AblationReport(accuracy_full=full_acc, rows=tuple(rows))


@dataclass(frozen=True)
class GainReport:
    shares: tuple[tuple[str, float], ...]   # descending share, ties by name
    undefined: bool = False


def feature_gain(model: gbt.GbtModel) -> GainReport:
    """Per-feature share of total split gain, normalized to sum 1."""
    names = model.feature_names or tuple(f"f{i}" for i in range(model.n_features))
    total = float(model.gain.sum())
    if total <= 0.0:
        return GainReport(shares=tuple((n, 0.0) for n in names), undefined=True)
    pairs = [(names[i], float(model.gain[i]) / total) for i in range(model.n_features)]
    pairs.sort(key=lambda kv: (-kv[1], kv[0]))
    return GainReport(shares=tuple(pairs), undefined=False)
