"""
k-Medoids Clustering
PAM (BUILD + SWAP) over a precomputed dissimilarity matrix
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from loguru import logger

from modeling.dissimilarity import DissimilarityCalculator, DissimilarityMatrix, dissimilarity_calculator
from modeling.var_model import VarFit
from utils.errors import ClusteringError

MAX_SWAP_ITERATIONS = 200


@dataclass(frozen=True, eq=False)
class ClusteringResult:
    """
    Medoids and one-hot cluster allocations

    Clusters are indexed by descending size, so cluster 0 (C1) is the largest.
    """

    k: int
    medoid_indices: np.ndarray
    assignment: np.ndarray
    total_cost: float
    measure: str
    account_ids: List[str]
    seed: int = 0
    iterations: int = 0

    @property
    def labels(self) -> np.ndarray:
        return np.argmax(self.assignment, axis=1)

    @property
    def medoid_ids(self) -> List[str]:
        return [self.account_ids[i] for i in self.medoid_indices]

    @property
    def sizes(self) -> np.ndarray:
        return self.assignment.sum(axis=0)


def assign_to_medoids(d_to_medoids: Sequence[float]) -> np.ndarray:
    """
    One-hot allocation to the closest medoid, ties to the lowest index

    Args:
        d_to_medoids: Dissimilarities to the k medoids

    Returns:
        Integer one-hot vector of length k
    """
    distances = np.asarray(d_to_medoids, dtype=float)
    if distances.size == 0:
        raise ClusteringError("Cannot assign with an empty dissimilarity vector")
    if not np.all(np.isfinite(distances)):
        raise ClusteringError("Dissimilarities to medoids must be finite")
    z = np.zeros(distances.size, dtype=np.int64)
    z[int(np.argmin(distances))] = 1
    return z


class KMedoids:
    """
    Partitioning Around Medoids
    """

    def __init__(self, max_iter: int = MAX_SWAP_ITERATIONS, n_jobs: int = 1):
        """
        Initialize k-medoids

        Args:
            max_iter: Cap on SWAP iterations
            n_jobs: Threads used to evaluate candidate swaps
        """
        self.max_iter = max_iter
        self.n_jobs = n_jobs
        self.tolerance = 1e-12

    def build_phase(self, d: np.ndarray, k: int) -> List[int]:
        """Greedy BUILD: each step adds the object with the largest cost reduction"""
        n = d.shape[0]
        medoids = [int(np.argmin(d.sum(axis=1)))]
        nearest = d[:, medoids[0]].copy()

        while len(medoids) < k:
            gains = np.maximum(nearest[:, None] - d, 0.0).sum(axis=0)
            gains[medoids] = -np.inf
            candidate = int(np.argmax(gains))
            medoids.append(candidate)
            nearest = np.minimum(nearest, d[:, candidate])

        return medoids

    def _swap_costs(self, d: np.ndarray, medoids: List[int], position: int) -> np.ndarray:
        """Total cost of replacing medoids[position] with each object"""
        others = [m for i, m in enumerate(medoids) if i != position]
        if others:
            nearest_other = d[:, others].min(axis=1)
            return np.minimum(nearest_other[:, None], d).sum(axis=0)
        return d.sum(axis=0)

    def swap_phase(self, d: np.ndarray, medoids: List[int]) -> tuple:
        """
        Best-improvement SWAP until no strictly improving exchange exists

        Returns:
            Tuple of (medoids, cost, iterations)
        """
        medoids = list(medoids)
        cost = float(d[:, medoids].min(axis=1).sum())
        iterations = 0

        while iterations < self.max_iter:
            if self.n_jobs > 1:
                candidate_costs = Parallel(n_jobs=self.n_jobs, prefer="threads")(
                    delayed(self._swap_costs)(d, medoids, position) for position in range(len(medoids))
                )
            else:
                candidate_costs = [self._swap_costs(d, medoids, position) for position in range(len(medoids))]

            table = np.vstack(candidate_costs)
            table[:, medoids] = np.inf
            # row-major argmin breaks ties toward the lowest (position, object)
            position, candidate = np.unravel_index(int(np.argmin(table)), table.shape)
            best = float(table[position, candidate])

            if not best < cost - self.tolerance * max(1.0, abs(cost)):
                break

            logger.debug(f"Swap medoid {medoids[position]} -> {candidate}: cost {cost:.6f} -> {best:.6f}")
            medoids[position] = int(candidate)
            cost = best
            iterations += 1

        return medoids, cost, iterations

    def canonicalize(self, d: np.ndarray, medoids: List[int]) -> tuple:
        """
        Order medoids by descending cluster size (ties by medoid index) and
        assign every object, each medoid to its own cluster
        """
        def allocate(ordered: List[int]) -> np.ndarray:
            labels = np.argmin(d[:, ordered], axis=1)
            labels[ordered] = np.arange(len(ordered))
            return labels

        labels = allocate(medoids)
        sizes = np.bincount(labels, minlength=len(medoids))
        order = sorted(range(len(medoids)), key=lambda i: (-sizes[i], medoids[i]))
        ordered = [medoids[i] for i in order]
        return ordered, allocate(ordered)

    def k_medoids(self, matrix: DissimilarityMatrix, k: int, seed: int = 0) -> ClusteringResult:
        """
        PAM clustering

        Args:
            matrix: Precomputed dissimilarities
            k: Number of clusters, 2 <= k < n
            seed: Recorded for provenance; BUILD and SWAP are deterministic

        Returns:
            ClusteringResult with canonical cluster order
        """
        d = np.asarray(matrix.values, dtype=float)
        n = d.shape[0]
        if not 2 <= k < n:
            raise ClusteringError(f"k must satisfy 2 <= k < n = {n}, got {k}")
        if not np.all(np.isfinite(d)):
            raise ClusteringError("Dissimilarity matrix contains non-finite values")

        medoids = self.build_phase(d, k)
        medoids, _, iterations = self.swap_phase(d, medoids)
        if iterations >= self.max_iter:
            logger.warning(f"⚠️  PAM stopped at the iteration cap ({self.max_iter})")
        medoids, labels = self.canonicalize(d, medoids)

        assignment = np.zeros((n, k), dtype=np.int64)
        assignment[np.arange(n), labels] = 1
        total_cost = float(d[np.arange(n), np.array(medoids)[labels]].sum())

        logger.info(f"✅ PAM converged after {iterations} swaps: k = {k}, cost = {total_cost:.4f}")
        return ClusteringResult(
            k=k,
            medoid_indices=np.array(medoids, dtype=np.int64),
            assignment=assignment,
            total_cost=total_cost,
            measure=matrix.measure,
            account_ids=list(matrix.account_ids),
            seed=seed,
            iterations=iterations,
        )

    def assign_test_accounts(
        self,
        test_fits: Sequence[VarFit],
        test_ids: Sequence[str],
        medoid_fits: Sequence[VarFit],
        medoid_ids: Sequence[str],
        measure: str = "ellipsoid",
        alpha: float = 0.05,
        n_samples: int = 20_000,
        seed: int = 0,
        calculator: Optional[DissimilarityCalculator] = None,
    ) -> np.ndarray:
        """
        Allocate hold-out accounts to the nearest fitted medoid

        Only the n_test x k dissimilarities to the medoids are computed.

        Returns:
            Integer array of shape (n_test, k), one-hot rows
        """
        calculator = calculator or dissimilarity_calculator
        if not test_fits:
            return np.zeros((0, len(medoid_fits)), dtype=np.int64)

        distances = calculator.cross_dissimilarities(
            test_fits, test_ids, medoid_fits, medoid_ids, measure, alpha, n_samples, seed, self.n_jobs
        )
        return np.vstack([assign_to_medoids(row) for row in distances])


# Global instance
k_medoids = KMedoids()
