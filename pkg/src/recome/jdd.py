"""Jump-discontinuity discovery for the merge threshold alpha.

The cluster count is a step function of alpha. Its jumps sit exactly at the
inter-core capacities: the best achievable minimum RNKD along any path
between two cores (the start node excluded). Capacities from one source are
found with a Dijkstra-style best-first search that maximises the bottleneck
instead of minimising a sum.
"""

from __future__ import annotations

import heapq
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dataset import Dataset
from .merge import ClusterLabeling, KnnGraph, Recome


@dataclass(frozen=True)
class CapacityResult:
    source: int
    capacity: np.ndarray  # lambda(v); exact for visited v
    visited_order: tuple
    unreachable: tuple = ()


def max_capacity_search(
    adjacency,
    weights,
    source: int,
    targets=None,
    debug: bool = False,
) -> CapacityResult:
    """Maximum left-open capacity from ``source`` to every node.

    Parameters
    ----------
    adjacency : KnnGraph or sequence of neighbour lists
        A ``KnnGraph`` is searched over its undirected view; pass
        ``graph.adjacency_lists(undirected=False)`` to follow the directed
        KNN edges ``v -> N_K(v)`` only.
    weights : array-like
        Node weights in [0, 1] (RNKD).
    source : int
    targets : iterable of int, optional
        Stop once all of these have been settled. ``None`` runs to
        exhaustion.
    debug : bool
        Re-check the search invariant after every extraction: each settled
        node holds the exact capacity and each unsettled node the best
        capacity through settled nodes only. Quadratic; small graphs only.

    Returns
    -------
    CapacityResult
        Targets never reached keep capacity 0 and are listed in
        ``unreachable``.
    """
    if isinstance(adjacency, KnnGraph):
        adjacency = adjacency.adjacency_lists(undirected=True)
    w = [float(x) for x in weights]
    n = len(w)
    lam = [0.0] * n
    lam[source] = 1.0
    visited = [False] * n
    pending = set(range(n) if targets is None else (int(t) for t in targets))
    pending.discard(source)
    order = []
    exact = _threshold_capacities(adjacency, w, source) if debug else None

    heap = [(-1.0, source)]
    while heap and pending:
        neg, v = heapq.heappop(heap)
        if visited[v] or -neg != lam[v]:
            continue
        visited[v] = True
        order.append(v)
        pending.discard(v)
        lv = lam[v]
        for u in adjacency[v]:
            if visited[u]:
                continue
            cand = lv if lv < w[u] else w[u]
            if cand > lam[u]:
                lam[u] = cand
                heapq.heappush(heap, (-cand, u))
        if debug:
            _check_invariant(adjacency, w, source, lam, visited, exact)

    lam_arr = np.array(lam)
    lost = tuple(sorted(t for t in pending if not visited[t] and lam[t] == 0.0))
    return CapacityResult(source, lam_arr, tuple(order), lost)


def _threshold_capacities(adjacency, w, source):
    """Capacities by thresholded reachability, independent of the search."""
    n = len(w)
    cap = [0.0] * n
    cap[source] = 1.0
    for t in sorted(set(w), reverse=True):
        seen = {source}
        stack = [source]
        while stack:
            v = stack.pop()
            for u in adjacency[v]:
                if u not in seen and w[u] >= t:
                    seen.add(u)
                    stack.append(u)
        for u in seen:
            if u != source and cap[u] == 0.0:
                cap[u] = t
    return cap


def _check_invariant(adjacency, w, source, lam, visited, exact):
    n = len(w)
    via = [0.0] * n
    via[source] = 1.0
    for v in range(n):
        if visited[v]:
            for u in adjacency[v]:
                if not visited[u]:
                    via[u] = max(via[u], min(lam[v], w[u]))
    for v in range(n):
        if visited[v]:
            assert lam[v] == exact[v], f"settled node {v}: {lam[v]} != {exact[v]}"
        elif v != source:
            assert lam[v] == via[v], f"open node {v}: {lam[v]} != {via[v]}"


_shared: dict = {}


def _init_worker(adjacency, weights, cores):
    _shared.update(adjacency=adjacency, weights=weights, cores=cores)


def _search_from(source):
    cores = _shared["cores"]
    res = max_capacity_search(_shared["adjacency"], _shared["weights"], source, cores)
    return [float(res.capacity[v]) for v in cores if v != source]


def inter_core_capacities(
    graph: KnnGraph,
    rnkd,
    cores,
    undirected: bool = True,
    threads: int = 1,
) -> dict:
    """``{(u, v): c(u, v)}`` for every ordered pair of distinct cores.

    One search per source core; ``threads > 1`` spreads the sources over
    worker processes. The result does not depend on the worker count.
    """
    cores = [int(c) for c in sorted(cores)]
    init = (graph.adjacency_lists(undirected=undirected), [float(x) for x in rnkd], cores)
    if threads > 1 and len(cores) > 1:
        with ProcessPoolExecutor(max_workers=threads, initializer=_init_worker, initargs=init) as pool:
            rows = list(pool.map(_search_from, cores, chunksize=max(1, len(cores) // (4 * threads))))
    else:
        _init_worker(*init)
        try:
            rows = [_search_from(u) for u in cores]
        finally:
            _shared.clear()
    out = {}
    for u, row in zip(cores, rows):
        others = [v for v in cores if v != u]
        for v, c in zip(others, row):
            out[(u, v)] = c
    return out


def jd_set(graph: KnnGraph, profile, cores, undirected: bool = True, threads: int = 1) -> list:
    """Ascending jump-discontinuity list, with the baseline 0 first.

    Each value is the weakest-node RNKD on a maximum-capacity path between
    two cores, which is the capacity itself.
    """
    rnkd = getattr(profile, "rnkd", profile)
    caps = inter_core_capacities(graph, rnkd, cores, undirected=undirected, threads=threads)
    values = set(caps.values())
    values.add(0.0)
    return sorted(values)


@dataclass
class JdEntry:
    alpha: float
    labeling: ClusterLabeling
    metrics: Optional[dict] = None

    @property
    def num_clusters(self) -> int:
        return self.labeling.num_clusters


@dataclass
class JdResult:
    model: Recome
    jd_values: list
    entries: list = field(default_factory=list)

    @property
    def num_clusters(self) -> list:
        return [e.num_clusters for e in self.entries]

    def best(self, key: str = "nmi") -> JdEntry:
        scored = [e for e in self.entries if e.metrics is not None]
        if not scored:
            raise ValueError("no metrics recorded; sweep needs ground-truth labels")
        # first maximum wins, so ties resolve to the smaller alpha
        return max(scored, key=lambda e: e.metrics[key])


def sweep(
    dataset: Dataset,
    k: int | None = None,
    undirected: bool = True,
    threads: int = 1,
    model: Recome | None = None,
) -> JdResult:
    """Cluster at every jump discontinuity; score against labels when present."""
    from .metrics import evaluate

    model = model or Recome.fit(dataset, k, threads=threads)
    values = jd_set(model.graph, model.profile, model.cores, undirected=undirected, threads=threads)
    result = JdResult(model, values)
    for alpha in values:
        labeling = model.labeling(alpha)
        metrics = None
        if dataset.labels is not None:
            metrics = evaluate(labeling.labels, dataset.labels).as_dict()
        result.entries.append(JdEntry(alpha, labeling, metrics))
    return result
