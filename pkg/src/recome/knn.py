"""Exact K-nearest-neighbour lists and the kernel bandwidth."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset

# bound on chunk_rows * n * m doubles held by one distance block
_BLOCK_ELEMS = 1 << 22


class DegenerateDatasetError(ValueError):
    pass


@dataclass(frozen=True)
class KnnIndex:
    """Row ``u`` lists the K nearest neighbours of object ``u``, nearest first.

    Distance ties are broken by ascending object index, and an object is
    never its own neighbour.
    """

    k: int
    neighbors: np.ndarray
    distances: np.ndarray

    @property
    def n(self) -> int:
        return self.neighbors.shape[0]


def pairwise_block(x: np.ndarray, rows: slice) -> np.ndarray:
    """Euclidean distances from ``x[rows]`` to every row of ``x``.

    Uses explicit differences rather than the Gram expansion so that
    d(u, v) == d(v, u) bit for bit.
    """
    diff = x[rows, None, :] - x[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def _knn_rows(x: np.ndarray, k: int, start: int, stop: int):
    d = pairwise_block(x, slice(start, stop))
    d[np.arange(stop - start), np.arange(start, stop)] = np.inf
    n = x.shape[0]
    if k < n - 1:
        # any entry tied with the k-th value must stay a candidate so that
        # the stable sort below sees the whole tie group
        kth = np.partition(d, k - 1, axis=1)[:, k - 1]
        nbrs = np.empty((stop - start, k), dtype=np.int64)
        for r in range(stop - start):
            cand = np.flatnonzero(d[r] <= kth[r])
            order = np.argsort(d[r, cand], kind="stable")[:k]
            nbrs[r] = cand[order]
    else:
        nbrs = np.argsort(d, axis=1, kind="stable")[:, :k]
    dist = np.take_along_axis(d, nbrs, axis=1)
    return nbrs, dist


def build_knn(dataset: Dataset, k: int, threads: int = 1) -> KnnIndex:
    """Exact brute-force KNN under Euclidean distance.

    Rows are computed in independent blocks; ``threads > 1`` evaluates the
    blocks concurrently and yields the same arrays as a sequential run.
    """
    x = np.ascontiguousarray(dataset.points, dtype=float)
    n, m = x.shape
    if not (isinstance(k, (int, np.integer)) and 1 <= k <= n - 1):
        raise ValueError(f"k must be an integer in [1, {n - 1}], got {k!r}")
    k = int(k)
    step = max(1, min(n, _BLOCK_ELEMS // max(1, n * m)))
    bounds = [(s, min(n, s + step)) for s in range(0, n, step)]
    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: _knn_rows(x, k, *b), bounds))
    else:
        parts = [_knn_rows(x, k, *b) for b in bounds]
    neighbors = np.vstack([p[0] for p in parts])
    distances = np.vstack([p[1] for p in parts])
    neighbors.setflags(write=False)
    distances.setflags(write=False)
    return KnnIndex(k, neighbors, distances)


def default_k(n: int) -> int:
    """floor(sqrt(n)) clamped to [1, n - 1]."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return max(1, min(n - 1, math.isqrt(n)))


def bandwidth_sigma(index: KnnIndex) -> float:
    """Mean distance from each object to its K-th nearest neighbour."""
    sigma = float(index.distances[:, -1].mean())
    if not sigma > 0:
        raise DegenerateDatasetError(
            "kernel bandwidth is zero: every object coincides with its K nearest neighbours"
        )
    return sigma


def write_knn_csv(index: KnnIndex, path) -> None:
    """Debug export: id, K neighbour ids, K distances per row."""
    k = index.k
    header = ["id"] + [f"nbr{j}" for j in range(k)] + [f"dist{j}" for j in range(k)]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for u in range(index.n):
            cells = [str(u)]
            cells += [str(int(v)) for v in index.neighbors[u]]
            cells += [repr(float(d)) for d in index.distances[u]]
            fh.write(",".join(cells) + "\n")
