"""Comparison classifiers over bags: fixed-k voting and threshold-qualification.

``fixed_k_classify`` is the classical rule that predicts the label appearing
in the most bags among a fixed number of neighbors.  ``aknn_classify`` is an
adaptive alternative that grows the neighborhood until one label's bag
frequency exceeds ``1/c`` by the elimination threshold and then predicts it;
unlike the margin-elimination classifier it looks only at the leading
frequency, never at gaps between labels.
"""

from __future__ import annotations

import numpy as np

from . import knn_index
from .core import PartialDataset
from .plaknn import PlaknnConfig, _effective_t, _require_matching_index, threshold


def fixed_k_classify(
    train: PartialDataset,
    index: knn_index.NeighborIndex,
    x: np.ndarray,
    k: int,
) -> int:
    """Most frequent label among the k nearest bags; ties go to the smallest."""
    _require_matching_index(train, index)
    if not 1 <= k <= train.n:
        raise ValueError(f"k must be in 1..{train.n}, got {k}")
    order = knn_index.nearest_order(knn_index.sq_distances(index, x), k)
    counts = train.membership_matrix()[order].sum(axis=0)
    return int(np.argmax(counts)) + 1


def fixed_k_batch(
    train: PartialDataset,
    index: knn_index.NeighborIndex,
    queries: np.ndarray,
    k: int,
) -> np.ndarray:
    _require_matching_index(train, index)
    if not 1 <= k <= train.n:
        raise ValueError(f"k must be in 1..{train.n}, got {k}")
    queries = np.asarray(queries, dtype=np.float64)
    memb = train.membership_matrix()
    labels = np.empty(queries.shape[0], dtype=np.int64)
    for start in range(0, queries.shape[0], 256):
        chunk = queries[start : start + 256]
        d2 = knn_index.sq_distance_chunk(index, chunk)
        for i in range(chunk.shape[0]):
            order = knn_index.nearest_order(d2[i], k)
            labels[start + i] = int(np.argmax(memb[order].sum(axis=0))) + 1
    return labels


def aknn_decision(
    train: PartialDataset,
    index: knn_index.NeighborIndex,
    x: np.ndarray,
    config: PlaknnConfig,
) -> tuple[int, int | None]:
    """Label plus the neighborhood size at which it first qualified.

    Qualification at step k means the label's empirical bag frequency among
    the k nearest bags beats 1/c by at least the step-k threshold.  If no
    label qualifies within the iteration cap, the second element is None and
    the label falls back to the most frequent one at the cap (ties to the
    smallest label, as everywhere in this package).
    """
    _require_matching_index(train, index)
    n = train.n
    c = train.label_space.c
    t_cap = _effective_t(config.T, n)
    d0 = config.resolve_d0(train.dim)
    order = knn_index.nearest_order(knn_index.sq_distances(index, x), t_cap)
    counts = np.cumsum(train.membership_matrix()[order], axis=0)

    ks = np.arange(1, t_cap + 1, dtype=np.float64)
    deltas = np.array(
        [threshold(n, k, config.delta, c, config.c1, d0) for k in range(1, t_cap + 1)]
    )
    qualified = counts / ks[:, None] - 1.0 / c >= deltas[:, None]
    hits = qualified.any(axis=1)
    if hits.any():
        k0 = int(np.argmax(hits))
        return int(np.argmax(qualified[k0])) + 1, k0 + 1
    return int(np.argmax(counts[-1])) + 1, None


def aknn_classify(
    train: PartialDataset,
    index: knn_index.NeighborIndex,
    x: np.ndarray,
    config: PlaknnConfig,
) -> int:
    """First label whose bag frequency clears 1/c by the threshold."""
    return aknn_decision(train, index, x, config)[0]


def aknn_batch(
    train: PartialDataset,
    index: knn_index.NeighborIndex,
    queries: np.ndarray,
    config: PlaknnConfig,
) -> np.ndarray:
    queries = np.asarray(queries, dtype=np.float64)
    return np.array(
        [aknn_classify(train, index, q, config) for q in queries], dtype=np.int64
    )
