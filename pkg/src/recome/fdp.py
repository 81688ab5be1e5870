"""Minimal density-peaks baseline (fixed number of centres, NKD density).

Centres are the ``c`` objects with the largest ``gamma = density * delta``,
where ``delta`` is the distance to the nearest denser object. Every other
object joins the cluster of that nearest denser object.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .knn import _BLOCK_ELEMS, pairwise_block
from .merge import ClusterLabeling, relabel_by_first_member


@dataclass(frozen=True)
class FdpModel:
    delta: np.ndarray
    gamma: np.ndarray
    nearest_denser: np.ndarray  # -1 for the densest object
    centers: np.ndarray


def density_order(density: np.ndarray) -> np.ndarray:
    """Objects from densest to sparsest; equal densities by ascending index."""
    return np.lexsort((np.arange(len(density)), -density))


def fit_fdp(dataset: Dataset, c: int, density) -> FdpModel:
    x = np.ascontiguousarray(dataset.points, dtype=float)
    n, m = x.shape
    density = np.asarray(density, dtype=float)
    if density.shape != (n,) or np.any(density <= 0):
        raise ValueError("density must be a positive n-vector")
    if not (isinstance(c, (int, np.integer)) and 1 <= c <= n):
        raise ValueError(f"number of centres must be in [1, {n}], got {c!r}")

    # rank[u] < rank[v] means u precedes v in the density order; this is a
    # strict total order, so every object but the first has a denser peer
    order = density_order(density)
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(n)

    delta = np.empty(n)
    parent = np.full(n, -1, dtype=np.int64)
    diameter = 0.0
    step = max(1, min(n, _BLOCK_ELEMS // max(1, n * m)))
    for s in range(0, n, step):
        e = min(n, s + step)
        d = pairwise_block(x, slice(s, e))
        diameter = max(diameter, float(d.max()))
        denser = rank[None, :] < rank[s:e, None]
        d = np.where(denser, d, np.inf)
        j = np.argmin(d, axis=1)
        delta[s:e] = d[np.arange(e - s), j]
        parent[s:e] = np.where(np.isfinite(delta[s:e]), j, -1)
    top = order[0]
    delta[top] = diameter
    parent[top] = -1

    gamma = density * delta
    # gamma ties go to the denser object, so the densest is always a centre
    centers = np.lexsort((rank, -gamma))[:c]
    return FdpModel(delta, gamma, parent, np.sort(centers))


def fdp_cluster(dataset: Dataset, c: int, density, k: int = 0) -> ClusterLabeling:
    model = fit_fdp(dataset, c, density)
    n = dataset.n
    raw = np.full(n, -1, dtype=np.int64)
    raw[model.centers] = model.centers
    for u in density_order(np.asarray(density, dtype=float)):
        if raw[u] < 0:
            raw[u] = raw[model.nearest_denser[u]]
    labels = relabel_by_first_member(raw)
    labels.setflags(write=False)
    return ClusterLabeling(labels, int(labels.max()) + 1, float("nan"), k)
