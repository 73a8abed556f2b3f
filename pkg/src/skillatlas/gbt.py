"""Gradient-boosted decision trees for binary classification, from scratch.

Second-order (Newton) boosting on logistic loss with exact greedy splits:
each tree is grown level by level over presorted feature columns, leaf
values are G / (H + lambda) scaled by the learning rate, and per-feature
split gains accumulate into a ledger for importance analysis. Training is
deterministic given the seed; all randomness (row/feature subsampling,
search sampling, fold shuffling) comes from seeds derived with SeedSequence,
so concurrent evaluation of configurations cannot change results.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np
from numba import njit


class GbtError(ValueError):
    pass


MODEL_FORMAT = "gbt-model"
MODEL_VERSION = 1


@dataclass(frozen=True)
class GbtHyperparams:
    n_trees: int = 150
    learning_rate: float = 0.1
    max_depth: int = 3
    min_samples_leaf: int = 1
    row_subsample: float = 1.0
    feature_subsample: float = 1.0
    l2_leaf_penalty: float = 1.0

    def validate(self) -> None:
        if self.n_trees < 0:
            raise GbtError("n_trees must be >= 0")
        if not 0.0 < self.learning_rate <= 1.0:
            raise GbtError("learning_rate must be in (0, 1]")
        if not 1 <= self.max_depth <= 16:
            raise GbtError("max_depth must be in [1, 16]")
        if self.min_samples_leaf < 1:
            raise GbtError("min_samples_leaf must be >= 1")
        for name in ("row_subsample", "feature_subsample"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise GbtError(f"{name} must be in (0, 1]")
        if self.l2_leaf_penalty < 0.0:
            raise GbtError("l2_leaf_penalty must be >= 0")


@dataclass(frozen=True)
class GbtModel:
    """Fitted ensemble: flat node arrays with absolute child indices.

    feature[i] < 0 marks a leaf; value[i] is its additive log-odds
    contribution (already scaled by the learning rate). Prediction is
    sigmoid(base_score + sum over trees of the reached leaf values).
    """

    base_score: float
    n_features: int
    feature: np.ndarray          # int32 per node
    threshold: np.ndarray        # float64 per node
    left: np.ndarray             # int32 per node
    right: np.ndarray            # int32 per node
    value: np.ndarray            # float64 per node
    tree_offsets: np.ndarray     # int64, len n_trees + 1
    gain: np.ndarray             # float64 per feature
    hyperparams: GbtHyperparams
    feature_names: tuple[str, ...] | None = None
    train_losses: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def n_trees(self) -> int:
        return len(self.tree_offsets) - 1


@njit(cache=True, nogil=True)
def _mean_logloss(y, raw):
    n = len(y)
    acc = 0.0
    for i in range(n):
        p = 1.0 / (1.0 + math.exp(-raw[i]))
        if p < 1e-15:
            p = 1e-15
        elif p > 1.0 - 1e-15:
            p = 1.0 - 1e-15
        if y[i] == 1:
            acc -= math.log(p)
        else:
            acc -= math.log(1.0 - p)
    return acc / n


@njit(cache=True, nogil=True)
def _boost_kernel(x, xs_vals, xs_idx, y, n_trees, lr, max_depth, min_leaf, lam,
                  row_masks, feat_sel, base):
    n, d = x.shape
    max_nodes = (1 << (max_depth + 1)) - 1

    cap = max(n_trees * max_nodes, 1)
    out_feat = np.full(cap, -1, np.int32)
    out_thr = np.zeros(cap, np.float64)
    out_left = np.full(cap, -1, np.int32)
    out_right = np.full(cap, -1, np.int32)
    out_value = np.zeros(cap, np.float64)
    tree_offsets = np.zeros(n_trees + 1, np.int64)
    gain_ledger = np.zeros(d, np.float64)
    losses = np.zeros(n_trees + 1, np.float64)

    raw = np.full(n, base, np.float64)
    g = np.zeros(n, np.float64)
    h = np.zeros(n, np.float64)
    node_of = np.zeros(n, np.int32)

    feat_l = np.full(max_nodes, -1, np.int32)
    thr_l = np.zeros(max_nodes, np.float64)
    left_l = np.full(max_nodes, -1, np.int32)
    right_l = np.full(max_nodes, -1, np.int32)
    val_l = np.zeros(max_nodes, np.float64)
    ng = np.zeros(max_nodes, np.float64)
    nh = np.zeros(max_nodes, np.float64)
    ncnt = np.zeros(max_nodes, np.int64)
    best_gain = np.zeros(max_nodes, np.float64)
    best_feat = np.full(max_nodes, -1, np.int32)
    best_thr = np.zeros(max_nodes, np.float64)
    run_g = np.zeros(max_nodes, np.float64)
    run_h = np.zeros(max_nodes, np.float64)
    run_cnt = np.zeros(max_nodes, np.int64)
    last_val = np.zeros(max_nodes, np.float64)
    is_open = np.zeros(max_nodes, np.uint8)

    losses[0] = _mean_logloss(y, raw)
    write = 0

    for m in range(n_trees):
        tree_offsets[m] = write
        for i in range(n):
            p = 1.0 / (1.0 + math.exp(-raw[i]))
            if p < 1e-15:
                p = 1e-15
            elif p > 1.0 - 1e-15:
                p = 1.0 - 1e-15
            g[i] = y[i] - p
            h[i] = p * (1.0 - p)

        for nd in range(max_nodes):
            feat_l[nd] = -1
            left_l[nd] = -1
            right_l[nd] = -1
            ng[nd] = 0.0
            nh[nd] = 0.0
            ncnt[nd] = 0
        for i in range(n):
            if row_masks[m, i]:
                node_of[i] = 0
                ng[0] += g[i]
                nh[0] += h[i]
                ncnt[0] += 1
            else:
                node_of[i] = -1

        level_start = 0
        level_end = 1
        for _depth in range(max_depth):
            any_open = False
            for nd in range(level_start, level_end):
                can = ncnt[nd] >= 2 * min_leaf and ncnt[nd] >= 2
                is_open[nd] = 1 if can else 0
                best_gain[nd] = 0.0
                best_feat[nd] = -1
                if can:
                    any_open = True
            if not any_open:
                break

            for f in range(d):
                if not feat_sel[m, f]:
                    continue
                for nd in range(level_start, level_end):
                    if is_open[nd]:
                        run_g[nd] = 0.0
                        run_h[nd] = 0.0
                        run_cnt[nd] = 0
                for pos in range(n):
                    r = xs_idx[f, pos]
                    nd = node_of[r]
                    if nd < level_start or nd >= level_end or not is_open[nd]:
                        continue
                    v = xs_vals[f, pos]
                    rc = run_cnt[nd]
                    if rc > 0 and v != last_val[nd]:
                        cl = rc
                        cr = ncnt[nd] - rc
                        if cl >= min_leaf and cr >= min_leaf:
                            gl = run_g[nd]
                            hl = run_h[nd]
                            gr = ng[nd] - gl
                            hr = nh[nd] - hl
                            gn = 0.5 * (
                                gl * gl / (hl + lam)
                                + gr * gr / (hr + lam)
                                - ng[nd] * ng[nd] / (nh[nd] + lam)
                            )
                            if gn > best_gain[nd] + 1e-12:
                                best_gain[nd] = gn
                                best_feat[nd] = f
                                best_thr[nd] = 0.5 * (last_val[nd] + v)
                    run_g[nd] += g[r]
                    run_h[nd] += h[r]
                    run_cnt[nd] += 1
                    last_val[nd] = v

            next_end = level_end
            for nd in range(level_start, level_end):
                if is_open[nd] and best_feat[nd] >= 0:
                    feat_l[nd] = best_feat[nd]
                    thr_l[nd] = best_thr[nd]
                    left_l[nd] = next_end
                    right_l[nd] = next_end + 1
                    gain_ledger[best_feat[nd]] += best_gain[nd]
                    next_end += 2
            if next_end == level_end:
                break
            for i in range(n):
                nd = node_of[i]
                if level_start <= nd < level_end and feat_l[nd] >= 0:
                    if x[i, feat_l[nd]] <= thr_l[nd]:
                        child = left_l[nd]
                    else:
                        child = right_l[nd]
                    node_of[i] = child
                    ng[child] += g[i]
                    nh[child] += h[i]
                    ncnt[child] += 1
            level_start = level_end
            level_end = next_end

        n_nodes = level_end
        for nd in range(n_nodes):
            if feat_l[nd] < 0:
                denom = nh[nd] + lam
                val_l[nd] = lr * ng[nd] / denom if denom > 0.0 else 0.0
            else:
                val_l[nd] = 0.0

        for i in range(n):
            nd = 0
            while feat_l[nd] >= 0:
                if x[i, feat_l[nd]] <= thr_l[nd]:
                    nd = left_l[nd]
                else:
                    nd = right_l[nd]
            raw[i] += val_l[nd]

        for nd in range(n_nodes):
            out_feat[write + nd] = feat_l[nd]
            out_thr[write + nd] = thr_l[nd]
            out_left[write + nd] = left_l[nd] + write if left_l[nd] >= 0 else -1
            out_right[write + nd] = right_l[nd] + write if right_l[nd] >= 0 else -1
            out_value[write + nd] = val_l[nd]
        write += n_nodes
        losses[m + 1] = _mean_logloss(y, raw)

    tree_offsets[n_trees] = write
    return (out_feat[:write], out_thr[:write], out_left[:write], out_right[:write],
            out_value[:write], tree_offsets, gain_ledger, losses)


@njit(cache=True, nogil=True)
def _predict_raw(x, feat, thr, left, right, value, tree_offsets, base):
    n = x.shape[0]
    n_trees = len(tree_offsets) - 1
    out = np.full(n, base, np.float64)
    for t in range(n_trees):
        root = tree_offsets[t]
        for i in range(n):
            nd = root
            while feat[nd] >= 0:
                if x[i, feat[nd]] <= thr[nd]:
                    nd = left[nd]
                else:
                    nd = right[nd]
            out[i] += value[nd]
    return out


def _as_xy(data) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(data, tuple) and len(data) == 2:
        x, y = data
        return np.ascontiguousarray(x, dtype=np.float64), np.asarray(y, dtype=np.int64)
    vectors = list(data)
    x = np.array([v.values for v in vectors], dtype=np.float64)
    y = np.array([v.label for v in vectors], dtype=np.int64)
    return x, y


def train(data, hp: GbtHyperparams, seed: int = 0,
          feature_names: Sequence[str] | None = None) -> GbtModel:
    """Fit the boosted ensemble. Deterministic given (data, hp, seed)."""
    hp.validate()
    x, y = _as_xy(data)
    if x.ndim != 2 or len(x) != len(y):
        raise GbtError("training data must be a (n, d) matrix with n labels")
    if not np.all(np.isfinite(x)):
        raise GbtError("features must be finite")
    classes = np.unique(y)
    if not np.array_equal(classes, np.array([0, 1])):
        if len(classes) < 2:
            raise GbtError("training data contains a single class")
        raise GbtError("labels must be 0/1")
    if feature_names is not None and len(feature_names) != x.shape[1]:
        raise GbtError("feature_names length mismatch")

    n, d = x.shape
    p_bar = min(max(float(y.mean()), 1e-15), 1 - 1e-15)
    base = math.log(p_bar / (1.0 - p_bar))

    order = np.empty((d, n), dtype=np.int32)
    vals = np.empty((d, n), dtype=np.float64)
    for f in range(d):
        idx = np.argsort(x[:, f], kind="stable")
        order[f] = idx
        vals[f] = x[idx, f]

    rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, 0x5EED)))
    if hp.row_subsample < 1.0:
        row_masks = rng.random((hp.n_trees, n)) < hp.row_subsample
    else:
        row_masks = np.ones((hp.n_trees, n), dtype=bool)
    feat_sel = np.zeros((hp.n_trees, d), dtype=bool)
    n_feat = max(1, int(round(hp.feature_subsample * d)))
    for m in range(hp.n_trees):
        if n_feat >= d:
            feat_sel[m] = True
        else:
            feat_sel[m, rng.choice(d, size=n_feat, replace=False)] = True

    (feat, thr, left, right, value, offsets, gain, losses) = _boost_kernel(
        x, vals, order, y.astype(np.int64), hp.n_trees, float(hp.learning_rate),
        int(hp.max_depth), int(hp.min_samples_leaf), float(hp.l2_leaf_penalty),
        np.ascontiguousarray(row_masks), np.ascontiguousarray(feat_sel), base,
    )
    return GbtModel(
        base_score=base, n_features=d,
        feature=feat, threshold=thr, left=left, right=right, value=value,
        tree_offsets=offsets, gain=gain, hyperparams=hp,
        feature_names=tuple(feature_names) if feature_names is not None else None,
        train_losses=losses,
    )


def predict_proba(model: GbtModel, x) -> np.ndarray | float:
    """Transition probability: sigmoid of base plus summed leaf values."""
    arr = np.asarray(getattr(x, "values", x), dtype=np.float64)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.shape[1] != model.n_features:
        raise GbtError(f"expected {model.n_features} features, got {arr.shape[1]}")
    raw = _predict_raw(np.ascontiguousarray(arr), model.feature, model.threshold,
                       model.left, model.right, model.value, model.tree_offsets,
                       model.base_score)
    proba = 1.0 / (1.0 + np.exp(-raw))
    return float(proba[0]) if single else proba


def accuracy(model: GbtModel, data) -> float:
    x, y = _as_xy(data)
    proba = predict_proba(model, x)
    return float(((proba >= 0.5).astype(np.int64) == y).mean())


# -- serialization -----------------------------------------------------------


def model_to_dict(model: GbtModel) -> dict:
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "base_score": model.base_score,
        "n_features": model.n_features,
        "feature_names": list(model.feature_names) if model.feature_names else None,
        "hyperparams": model.hyperparams.__dict__,
        "trees": {
            "feature": model.feature.tolist(),
            "threshold": model.threshold.tolist(),
            "left": model.left.tolist(),
            "right": model.right.tolist(),
            "value": model.value.tolist(),
            "offsets": model.tree_offsets.tolist(),
        },
        "gain": model.gain.tolist(),
    }


def model_from_dict(payload: dict) -> GbtModel:
    if payload.get("format") != MODEL_FORMAT:
        raise GbtError("not a model payload")
    if payload.get("version") != MODEL_VERSION:
        raise GbtError(f"unsupported model version {payload.get('version')}")
    trees = payload["trees"]
    names = payload.get("feature_names")
    return GbtModel(
        base_score=float(payload["base_score"]),
        n_features=int(payload["n_features"]),
        feature=np.asarray(trees["feature"], dtype=np.int32),
        threshold=np.asarray(trees["threshold"], dtype=np.float64),
        left=np.asarray(trees["left"], dtype=np.int32),
        right=np.asarray(trees["right"], dtype=np.int32),
        value=np.asarray(trees["value"], dtype=np.float64),
        tree_offsets=np.asarray(trees["offsets"], dtype=np.int64),
        gain=np.asarray(payload["gain"], dtype=np.float64),
        hyperparams=GbtHyperparams(**payload["hyperparams"]),
        feature_names=tuple(names) if names else None,
    )


def save_model(model: GbtModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), sort_keys=True))


def load_model(path) -> GbtModel:
    return model_from_dict(json.loads(Path(path).read_text()))


# -- randomized search and the split protocol --------------------------------


@dataclass(frozen=True)
class HyperparamSpace:
    """Sampling ranges; learning_rate is drawn log-uniformly."""

    n_trees: tuple[int, int] = (50, 400)
    learning_rate: tuple[float, float] = (0.02, 0.3)
    max_depth: tuple[int, int] = (2, 6)
    min_samples_leaf: tuple[int, int] = (1, 20)
    row_subsample: tuple[float, float] = (0.6, 1.0)
    feature_subsample: tuple[float, float] = (0.6, 1.0)
    l2_leaf_penalty: tuple[float, float] = (0.0, 5.0)

    def sample(self, rng: np.random.Generator) -> GbtHyperparams:
        lo, hi = self.learning_rate
        return GbtHyperparams(
            n_trees=int(rng.integers(self.n_trees[0], self.n_trees[1] + 1)),
            learning_rate=float(np.exp(rng.uniform(np.log(lo), np.log(hi)))),
            max_depth=int(rng.integers(self.max_depth[0], self.max_depth[1] + 1)),
            min_samples_leaf=int(rng.integers(self.min_samples_leaf[0], self.min_samples_leaf[1] + 1)),
            row_subsample=float(rng.uniform(*self.row_subsample)),
            feature_subsample=float(rng.uniform(*self.feature_subsample)),
            l2_leaf_penalty=float(rng.uniform(*self.l2_leaf_penalty)),
        )


DEFAULT_SPACE = HyperparamSpace()

# Small-compute counterpart used with n_configs=50 desk-scale searches.
DESK_SPACE = HyperparamSpace(n_trees=(40, 140), learning_rate=(0.05, 0.3), max_depth=(2, 4))


def stratified_kfold(y: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Fold index per row; each class is shuffled then dealt round-robin."""
    folds = np.zeros(len(y), dtype=np.int64)
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        idx = idx[rng.permutation(len(idx))]
        folds[idx] = np.arange(len(idx)) % k
    return folds


@dataclass(frozen=True)
class CvRow:
    index: int
    hp: GbtHyperparams
    fold_accuracies: tuple[float, ...]
    mean_accuracy: float


def _derived_seed(*parts) -> int:
    return int(np.random.SeedSequence(entropy=tuple(int(p) for p in parts)).generate_state(1)[0])


def random_search_cv(
    data,
    n_configs: int = 2500,
    k_folds: int = 5,
    seed: int = 0,
    space: HyperparamSpace = DEFAULT_SPACE,
    n_threads: int = 1,
) -> tuple[GbtHyperparams, list[CvRow]]:
    """Uniformly sample configurations, score each by mean stratified-k-fold
    accuracy, return the best (ties go to the first sampled)."""
    if k_folds < 2:
        raise GbtError("k_folds must be >= 2")
    if n_configs < 1:
        raise GbtError("n_configs must be >= 1")
    x, y = _as_xy(data)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, 0xC0FF)))
    configs = [space.sample(rng) for _ in range(n_configs)]
    folds = stratified_kfold(y, k_folds, rng)

    def evaluate(ci: int) -> CvRow:
        hp = configs[ci]
        accs = []
        for f in range(k_folds):
            train_idx = folds != f
            test_idx = ~train_idx
            model = train((x[train_idx], y[train_idx]), hp, seed=_derived_seed(seed, ci, f))
            accs.append(accuracy(model, (x[test_idx], y[test_idx])))
        return CvRow(index=ci, hp=hp, fold_accuracies=tuple(accs),
                     mean_accuracy=float(np.mean(accs)))

    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            rows = list(pool.map(evaluate, range(n_configs)))
    else:
        rows = [evaluate(ci) for ci in range(n_configs)]
    best = max(rows, key=lambda r: (r.mean_accuracy, -r.index))
    return best.hp, rows


@dataclass(frozen=True)
class RepeatResult:
    repeat: int
    best_hp: GbtHyperparams
    cv_accuracy: float
    test_accuracy: float


@dataclass(frozen=True)
class SplitProtocolReport:
    accuracies: tuple[float, ...]
    mean: float
    std: float
    repeats: tuple[RepeatResult, ...]


def evaluate_split_protocol(
    data,
    seed: int = 0,
    n_repeats: int = 10,
    n_configs: int = 50,
    k_folds: int = 5,
    space: HyperparamSpace = DESK_SPACE,
    test_fraction: float = 0.2,
    n_threads: int = 1,
) -> SplitProtocolReport:
    """Repeat {stratified 80/20 split, randomized search on train, final fit,
    test accuracy} with a fresh derived seed per repetition; the mean and
    standard deviation across repetitions summarize model stability."""
    x, y = _as_xy(data)
    repeats = []
    for rep in range(n_repeats):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, rep, 0x51117)))
        test_mask = np.zeros(len(y), dtype=bool)
        for cls in np.unique(y):
            idx = np.flatnonzero(y == cls)
            idx = idx[rng.permutation(len(idx))]
            n_test = max(1, int(round(test_fraction * len(idx))))
            test_mask[idx[:n_test]] = True
        x_train, y_train = x[~test_mask], y[~test_mask]
        x_test, y_test = x[test_mask], y[test_mask]
        best_hp, rows = random_search_cv(
            (x_train, y_train), n_configs=n_configs, k_folds=k_folds,
            seed=_derived_seed(seed, rep), space=space, n_threads=n_threads,
        )
        best_cv = max(r.mean_accuracy for r in rows)
        model = train((x_train, y_train), best_hp, seed=_derived_seed(seed, rep, 7))
        repeats.append(RepeatResult(
            repeat=rep, best_hp=best_hp, cv_accuracy=best_cv,
            test_accuracy=accuracy(model, (x_test, y_test)),
        ))
    accs = tuple(r.test_accuracy for r in repeats)
    return SplitProtocolReport(
        accuracies=accs,
        mean=float(np.mean(accs)),
        std=float(np.std(accs, ddof=1)) if len(accs) > 1 else 0.0,
        repeats=tuple(repeats),
    )
