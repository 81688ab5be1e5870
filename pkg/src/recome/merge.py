"""KNN graph, alpha-thresholded core merging, and the end-to-end clusterer."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .atoms import AtomForest, build_forest, find_cores
from .dataset import Dataset
from .density import DensityProfile, density_profile
from .knn import KnnIndex, build_knn, default_k


@dataclass(frozen=True)
class KnnGraph:
    """Directed KNN edges plus the symmetric (undirected) adjacency in CSR form."""

    out_edges: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray

    @property
    def n(self) -> int:
        return self.out_edges.shape[0]

    def undirected_neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def adjacency_lists(self, undirected: bool = True) -> list:
        if not undirected:
            return self.out_edges.tolist()
        flat = self.indices.tolist()
        ptr = self.indptr.tolist()
        return [flat[ptr[u]:ptr[u + 1]] for u in range(self.n)]

    def undirected_edges(self):
        """Each undirected edge once as ``(u, v)`` with ``u < v``, sorted."""
        rows = np.repeat(np.arange(self.n), np.diff(self.indptr))
        keep = rows < self.indices
        return rows[keep], self.indices[keep]


def build_graph(index: KnnIndex) -> KnnGraph:
    n, k = index.neighbors.shape
    src = np.repeat(np.arange(n, dtype=np.int64), k)
    dst = index.neighbors.reshape(-1).astype(np.int64)
    a = np.concatenate([src, dst])
    b = np.concatenate([dst, src])
    key = np.unique(a * n + b)
    rows, cols = np.divmod(key, n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, rows + 1, 1)
    indptr = np.cumsum(indptr)
    out = np.array(index.neighbors, dtype=np.int64)
    for arr in (out, indptr, cols):
        arr.setflags(write=False)
    return KnnGraph(out, indptr, cols)


def surviving_components(graph: KnnGraph, rnkd: np.ndarray, alpha: float) -> np.ndarray:
    """Component id per node after deleting every node with RNKD <= alpha.

    Deleted nodes get id -1.
    """
    alive = rnkd > alpha
    u, v = graph.undirected_edges()
    keep = alive[u] & alive[v]
    n = graph.n
    mat = csr_matrix(
        (np.ones(int(keep.sum()), dtype=np.int8), (u[keep], v[keep])), shape=(n, n)
    )
    _, comp = connected_components(mat, directed=False)
    return np.where(alive, comp, -1)


def merge_cores(graph: KnnGraph, profile: DensityProfile, cores, alpha: float) -> list:
    """Partition the cores into blocks joined by alpha-reachable paths.

    Returns a list of blocks (sorted lists of core indices), ordered by
    smallest member. At ``alpha == 1`` every node is deleted and each core
    is its own block.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha!r}")
    cores = sorted(int(c) for c in cores)
    comp = surviving_components(graph, profile.rnkd, alpha)
    blocks: dict = {}
    for c in cores:
        key = ("solo", c) if comp[c] < 0 else ("comp", int(comp[c]))
        blocks.setdefault(key, []).append(c)
    return sorted(blocks.values(), key=lambda b: b[0])


@dataclass(frozen=True)
class ClusterLabeling:
    labels: np.ndarray
    num_clusters: int
    alpha: float
    k: int

    def sizes(self) -> list:
        return np.bincount(self.labels, minlength=self.num_clusters).tolist()


def relabel_by_first_member(raw: np.ndarray) -> np.ndarray:
    """Renumber arbitrary ids to 0..c-1 in order of first appearance."""
    _, first, inverse = np.unique(raw, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    return rank[inverse.reshape(-1)]


@dataclass
class Recome:
    """Fitted density structure for one dataset and K.

    Everything that does not depend on alpha is computed once, so labelings
    at many alpha values are cheap.
    """

    index: KnnIndex
    profile: DensityProfile
    forest: AtomForest
    graph: KnnGraph

    @classmethod
    def fit(cls, dataset: Dataset, k: int | None = None, threads: int = 1) -> "Recome":
        k = default_k(dataset.n) if k is None else k
        index = build_knn(dataset, k, threads=threads)
        profile = density_profile(index)
        cores = find_cores(profile, index)
        forest = build_forest(index, profile, cores)
        return cls(index, profile, forest, build_graph(index))

    @property
    def k(self) -> int:
        return self.index.k

    @property
    def cores(self) -> np.ndarray:
        return self.forest.cores

    def labeling(self, alpha: float) -> ClusterLabeling:
        if not 0.0 <= alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {alpha!r}")
        comp = surviving_components(self.graph, self.profile.rnkd, alpha)
        cores = self.forest.cores
        # deleted cores (alpha == 1) stay singletons
        core_key = np.where(comp[cores] >= 0, comp[cores], self.graph.n + cores)
        key_of = np.full(self.graph.n, -1, dtype=np.int64)
        key_of[cores] = core_key
        labels = relabel_by_first_member(key_of[self.forest.atom_id])
        labels.setflags(write=False)
        return ClusterLabeling(labels, int(labels.max()) + 1, float(alpha), self.k)


def cluster(dataset: Dataset, k: int | None, alpha: float, threads: int = 1) -> ClusterLabeling:
    """Run the full pipeline at one alpha."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha!r}")
    return Recome.fit(dataset, k, threads=threads).labeling(alpha)
