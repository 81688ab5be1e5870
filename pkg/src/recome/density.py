"""KNN kernel density (NKD) and its neighbourhood-relative form (RNKD)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .knn import KnnIndex, bandwidth_sigma


@dataclass(frozen=True)
class DensityProfile:
    nkd: np.ndarray
    rnkd: np.ndarray
    sigma: float

    @property
    def n(self) -> int:
        return self.nkd.shape[0]


def compute_nkd(index: KnnIndex, sigma: float) -> np.ndarray:
    """Laplace-kernel density over each object's K nearest neighbours.

    ``rho[u] = sum_j exp(-distances[u, j] / sigma)``, so ``0 < rho <= K``.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    return np.exp(-index.distances / sigma).sum(axis=1)


def neighborhood_max(index: KnnIndex, nkd: np.ndarray) -> np.ndarray:
    """max of ``nkd`` over the closed neighbourhood ``N_K(u) + {u}``."""
    return np.maximum(nkd, nkd[index.neighbors].max(axis=1))


def compute_rnkd(index: KnnIndex, nkd: np.ndarray) -> np.ndarray:
    """Density relative to the densest object of the closed K-neighbourhood.

    Objects attaining their neighbourhood maximum get exactly 1.0 (assigned,
    not divided), so the core test never depends on rounding.
    """
    nkd = np.asarray(nkd, dtype=float)
    if np.any(nkd <= 0):
        raise ValueError("nkd values must be positive")
    top = neighborhood_max(index, nkd)
    rnkd = nkd / top
    rnkd[nkd >= top] = 1.0
    return rnkd


def density_profile(index: KnnIndex) -> DensityProfile:
    sigma = bandwidth_sigma(index)
    nkd = compute_nkd(index, sigma)
    return DensityProfile(nkd, compute_rnkd(index, nkd), sigma)


def write_density_csv(profile: DensityProfile, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("id,nkd,rnkd\n")
        for u in range(profile.n):
            fh.write(f"{u},{float(profile.nkd[u])!r},{float(profile.rnkd[u])!r}\n")
