"""Core objects and atom clusters.

A core object is an NKD maximum over its own K-neighbourhood (RNKD == 1).
Every other object points at its nearest strictly denser K-neighbour; the
chains end at cores and each core's basin is one atom cluster.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .density import DensityProfile, neighborhood_max
from .knn import KnnIndex


@dataclass(frozen=True)
class AtomForest:
    cores: np.ndarray   # sorted core indices
    parent: np.ndarray  # parent[u] == u for cores
    atom_id: np.ndarray  # root core of each object

    @property
    def num_atoms(self) -> int:
        return len(self.cores)


def find_cores(profile: DensityProfile, index: KnnIndex | None = None) -> np.ndarray:
    """Indices with RNKD equal to 1, ascending.

    With ``index`` given the local-maximum condition is evaluated on the NKD
    values directly; the result is identical.
    """
    if index is not None:
        mask = profile.nkd >= neighborhood_max(index, profile.nkd)
    else:
        mask = profile.rnkd == 1.0
    return np.flatnonzero(mask)


def build_forest(index: KnnIndex, profile: DensityProfile, cores) -> AtomForest:
    nkd = profile.nkd
    n = index.n
    cores = np.asarray(sorted(int(c) for c in cores), dtype=np.int64)
    is_core = np.zeros(n, dtype=bool)
    is_core[cores] = True

    # neighbour rows are already ordered by (distance, index), so the first
    # strictly denser entry is the nearest one under the tie-break rule
    denser = nkd[index.neighbors] > nkd[:, None]
    has_denser = denser.any(axis=1)
    bad = ~is_core & ~has_denser
    if bad.any():
        raise AssertionError(
            f"non-core object {int(np.flatnonzero(bad)[0])} has no denser neighbour"
        )
    first = np.argmax(denser, axis=1)
    parent = index.neighbors[np.arange(n), first].astype(np.int64)
    parent[is_core] = cores

    # pointer jumping; converges in O(log depth) rounds
    root = parent.copy()
    while True:
        nxt = root[root]
        if np.array_equal(nxt, root):
            break
        root = nxt
    if not is_core[root].all():
        raise AssertionError("parent chain ended outside the core set")
    parent.setflags(write=False)
    root.setflags(write=False)
    return AtomForest(cores, parent, root)
