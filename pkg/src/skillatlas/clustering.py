"""K-medoids clustering and a 2-D spectral layout over distance matrices.

Distances are the bounded complements of the similarity measures: 1 - theta
between skills, 1 - Theta between occupations or industries.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


class ClusteringError(ValueError):
    pass


@dataclass(frozen=True)
class ClusterAssignment:
    k: int
    medoids: tuple[int, ...]
    labels: dict[int, int]
    total_cost: float


@dataclass(frozen=True)
class Layout2D:
    coordinates: dict[int, tuple[float, float]]


def _check_distances(d: np.ndarray) -> np.ndarray:
    d = np.asarray(d, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ClusteringError("distance matrix must be square")
    if not np.allclose(d, d.T, atol=1e-12):
        raise ClusteringError("distance matrix must be symmetric")
    if not np.allclose(np.diag(d), 0.0, atol=1e-12):
        raise ClusteringError("distance matrix must have a zero diagonal")
    return d


def _assign(d: np.ndarray, medoids: np.ndarray) -> tuple[np.ndarray, float]:
    cols = d[:, medoids]
    labels = np.argmin(cols, axis=1)  # ties: lowest medoid position
    cost = float(cols[np.arange(len(d)), labels].sum())
    return labels, cost


def k_medoids(
    distances: np.ndarray,
    k: int,
    seed: int = 0,
    max_iter: int = 100,
    n_restarts: int = 1,
    entity_ids: Sequence[int] | None = None,
) -> ClusterAssignment:
    """PAM-style k-medoids: greedy best-swap descent from a random start.

    Each iteration applies the single (medoid, candidate) swap with the
    largest strict cost decrease; ties break on the first candidate in
    index order, so results are deterministic given the seed. Restarts
    keep the lowest-cost run.
    """
    d = _check_distances(distances)
    n = len(d)
    if not 1 <= k <= n:
        raise ClusteringError(f"k={k} out of range for {n} entities")
    ids = list(range(n)) if entity_ids is None else list(entity_ids)
    if len(ids) != n:
        raise ClusteringError("entity_ids length mismatch")

    rng = np.random.default_rng(seed)
    best: tuple[float, np.ndarray, np.ndarray] | None = None
    for _ in range(max(1, n_restarts)):
        medoids = np.sort(rng.choice(n, size=k, replace=False))
        labels, cost = _assign(d, medoids)
        for _ in range(max_iter):
            improved = False
            best_delta = -1e-12
            best_swap = None
            in_set = np.zeros(n, dtype=bool)
            in_set[medoids] = True
            candidates = np.flatnonzero(~in_set)
            if len(candidates) == 0:
                break
            for mi in range(k):
                rest = np.delete(medoids, mi)
                if len(rest):
                    base = d[:, rest].min(axis=1)
                else:
                    base = np.full(n, np.inf)
                # cost after swapping medoid mi for each candidate c, vectorized
                trial = np.minimum(base[:, None], d[:, candidates]).sum(axis=0)
                deltas = trial - cost
                ci = int(np.argmin(deltas))
                if deltas[ci] < best_delta:
                    best_delta = float(deltas[ci])
                    best_swap = (mi, int(candidates[ci]))
                    improved = True
            if not improved:
                break
            mi, c = best_swap
            medoids = np.sort(np.concatenate([np.delete(medoids, mi), [c]]))
            labels, cost = _assign(d, medoids)
        if best is None or cost < best[0] - 1e-15:
            best = (cost, medoids.copy(), labels.copy())

    cost, medoids, labels = best
    # medoid's own cluster index is its position in the sorted medoid list
    label_map = {ids[i]: int(labels[i]) for i in range(n)}
    return ClusterAssignment(
        k=k,
        medoids=tuple(ids[m] for m in medoids),
        labels=label_map,
        total_cost=cost,
    )


def recompute_cost(distances: np.ndarray, assignment: ClusterAssignment,
                   entity_ids: Sequence[int] | None = None) -> float:
    """Sum of distances from each entity to its assigned medoid."""
    d = np.asarray(distances, dtype=np.float64)
    ids = list(range(len(d))) if entity_ids is None else list(entity_ids)
    pos = {e: i for i, e in enumerate(ids)}
    total = 0.0
    for entity, cluster in assignment.labels.items():
        total += d[pos[entity], pos[assignment.medoids[cluster]]]
    return total


def mds_layout(
    distances: np.ndarray,
    seed: int = 0,
    entity_ids: Sequence[int] | None = None,
) -> Layout2D:
    """Classical metric MDS: double-center the squared distances, take the
    top two spectral directions. Axis signs are fixed so the largest-
    magnitude coordinate on each axis is positive; the seed parameter is
    accepted for interface symmetry but the embedding is deterministic.
    """
    del seed
    d = _check_distances(distances)
    n = len(d)
    if n < 3:
        raise ClusteringError("layout needs at least 3 entities")
    ids = list(range(n)) if entity_ids is None else list(entity_ids)

    j = np.eye(n) - np.full((n, n), 1.0 / n)
    b = -0.5 * j @ (d ** 2) @ j
    evals, evecs = np.linalg.eigh(b)
    order = np.argsort(evals)[::-1][:2]
    coords = np.zeros((n, 2))
    for axis, idx in enumerate(order):
        lam = max(float(evals[idx]), 0.0)
        coords[:, axis] = evecs[:, idx] * np.sqrt(lam)
    for axis in range(2):
        col = coords[:, axis]
        anchor = int(np.argmax(np.abs(col)))
        if col[anchor] < 0:
            coords[:, axis] = -col
    return Layout2D(coordinates={ids[i]: (float(coords[i, 0]), float(coords[i, 1])) for i in range(n)})
