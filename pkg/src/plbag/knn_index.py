"""Exact brute-force nearest-neighbor retrieval with a deterministic order.

Neighbors are ranked by squared Euclidean distance with ties broken by the
original training index, which makes every downstream classifier run
reproducible.  A :class:`NeighborStream` yields neighbors one at a time so a
caller can grow its neighborhood incrementally without sorting the whole
training set up front.
"""

from __future__ import annotations

import heapq

import numpy as np


class NeighborIndex:
    """Immutable matrix of training points answering exact queries."""

    __slots__ = ("points",)

    def __init__(self, points: np.ndarray) -> None:
        points = np.ascontiguousarray(points, dtype=np.float64)
        if points.ndim != 2 or points.shape[0] < 1 or points.shape[1] < 1:
            raise ValueError("points must be a nonempty (n, d) matrix")
        if not np.all(np.isfinite(points)):
            raise ValueError("points must be finite")
        points = points.copy()
        points.flags.writeable = False
        self.points = points

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def build(points: np.ndarray) -> NeighborIndex:
    """Construct an index over the given training points."""
    return NeighborIndex(points)


def sq_distances(index: NeighborIndex, query: np.ndarray) -> np.ndarray:
    """Squared Euclidean distance from the query to every training point.

    Squared distances preserve the neighbor ordering and avoid square roots.
    """
    query = np.asarray(query, dtype=np.float64)
    if query.shape != (index.dim,):
        raise ValueError(f"query has dimension {query.shape}, index expects ({index.dim},)")
    diff = index.points - query[None, :]
    return (diff * diff).sum(axis=-1)


def sq_distance_chunk(index: NeighborIndex, queries: np.ndarray) -> np.ndarray:
    """Row-wise squared distances for a chunk of queries, shape (m, n).

    Computed from explicit differences, never the expanded dot-product form,
    so each row is bit-identical to :func:`sq_distances` on that query.
    """
    queries = np.asarray(queries, dtype=np.float64)
    if queries.ndim != 2 or queries.shape[1] != index.dim:
        raise ValueError("queries must be an (m, d) matrix matching the index dimension")
    diff = index.points[None, :, :] - queries[:, None, :]
    return (diff * diff).sum(axis=-1)


def nearest_order(sqd: np.ndarray, limit: int) -> np.ndarray:
    """Indices of the ``limit`` nearest points under (distance, index) order.

    Selection at the boundary is exact: among points tied at the cutoff
    distance, lower original indices win.
    """
    n = sqd.shape[0]
    limit = min(limit, n)
    if limit == n:
        return np.lexsort((np.arange(n), sqd))
    cutoff = np.partition(sqd, limit - 1)[limit - 1]
    below = np.flatnonzero(sqd < cutoff)
    below = below[np.lexsort((below, sqd[below]))]
    at = np.flatnonzero(sqd == cutoff)
    take = limit - below.shape[0]
    return np.concatenate([below, at[:take]])


class NeighborStream:
    """Single-consumer iterator over training indices by increasing distance.

    Each training index is emitted exactly once; the k-th emission is the
    k-th nearest neighbor under the (distance, index) total order.
    """

    __slots__ = ("_heap", "_sqd")

    def __init__(self, index: NeighborIndex, query: np.ndarray) -> None:
        sqd = sq_distances(index, query)
        self._sqd = sqd
        heap = [(float(sqd[i]), i) for i in range(index.n)]
        heapq.heapify(heap)
        self._heap = heap

    def __iter__(self) -> "NeighborStream":
        return self

    def __next__(self) -> int:
        if not self._heap:
            raise StopIteration
        _, idx = heapq.heappop(self._heap)
        return idx

    def sq_distance(self, idx: int) -> float:
        return float(self._sqd[idx])


def stream(index: NeighborIndex, query: np.ndarray) -> NeighborStream:
    """Open a neighbor stream for the query."""
    return NeighborStream(index, query)
