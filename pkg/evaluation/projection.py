"""
Parameter-Space Projection
Principal components of VAR coefficient vectors for cluster plots
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sklearn.decomposition import PCA

from utils.errors import MetricError


@dataclass(frozen=True, eq=False)
class PcaProjection:
    coordinates: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray
    explained_variance_ratio: np.ndarray
    mean: np.ndarray

    def reconstruct(self) -> np.ndarray:
        """Map coordinates back to parameter space"""
        return self.coordinates @ self.components + self.mean


def pca_project(thetas: Sequence[np.ndarray], n_components: int = 3) -> PcaProjection:
    """
    Project parameter vectors onto their leading principal components

    Components are ordered by explained variance; each is signed so its
    largest-magnitude loading is positive.

    Args:
        thetas: Parameter vectors of equal length p
        n_components: Number of components, at most p

    Returns:
        PcaProjection
    """
    data = np.asarray([np.asarray(theta, dtype=float) for theta in thetas])
    if data.ndim != 2 or data.shape[0] < 2:
        raise MetricError(f"PCA needs at least 2 parameter vectors, got {data.shape[0] if data.ndim else 0}")
    p = data.shape[1]
    if not 1 <= n_components <= p:
        raise MetricError(f"n_components must lie in [1, {p}], got {n_components}")
    n_components = min(n_components, data.shape[0])

    pca = PCA(n_components=n_components, svd_solver="full")
    pca.fit(data)

    components = pca.components_.copy()
    pivots = np.argmax(np.abs(components), axis=1)
    signs = np.sign(components[np.arange(n_components), pivots])
    signs[signs == 0] = 1.0
    components *= signs[:, None]

    mean = pca.mean_
    coordinates = (data - mean) @ components.T

    total = float(np.sum(np.var(data, axis=0, ddof=1)))
    ratio = pca.explained_variance_ / total if total > 0 else np.zeros(n_components)

    return PcaProjection(
        coordinates=coordinates,
        components=components,
        explained_variance=pca.explained_variance_.copy(),
        explained_variance_ratio=ratio,
        mean=mean.copy(),
    )
