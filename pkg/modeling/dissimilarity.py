"""
Dissimilarity Measures
Ellipsoid-overlap and Euclidean dissimilarities between VAR fits
"""

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import List, Literal, Optional, Sequence, Tuple, Union

import joblib
import numpy as np
from joblib import Parallel, delayed
from loguru import logger

from modeling.ellipsoid import ConfidenceEllipsoid, EllipsoidBuilder, ellipsoid_builder
from modeling.var_model import VarFit
from utils.errors import BehaviourError, DissimilarityError, EllipsoidError
from utils.seeding import pair_rng

Measure = Literal["ellipsoid", "euclidean"]

MIN_MC_SAMPLES = 1_000
DEFAULT_MC_SAMPLES = 20_000


@dataclass(frozen=True, eq=False)
class DissimilarityMatrix:
    """
    Symmetric pairwise dissimilarities with provenance
    """

    values: np.ndarray
    measure: str
    account_ids: List[str]
    mc_samples: int = 0
    seed: int = 0
    alpha: Optional[float] = None

    @property
    def n(self) -> int:
        return int(self.values.shape[0])


def euclidean_distance(theta_r: np.ndarray, theta_s: np.ndarray) -> float:
    """Euclidean distance between two parameter vectors"""
    theta_r = np.asarray(theta_r, dtype=float)
    theta_s = np.asarray(theta_s, dtype=float)
    if theta_r.shape != theta_s.shape:
        raise ValueError(f"Parameter vectors differ in length ({theta_r.size} vs {theta_s.size})")
    return float(np.sqrt(np.sum((theta_r - theta_s) ** 2)))


class DissimilarityCalculator:
    """
    Compute pairwise dissimilarities between confidence ellipsoids
    """

    def __init__(self, builder: EllipsoidBuilder = ellipsoid_builder):
        """
        Initialize dissimilarity calculator

        Args:
            builder: Ellipsoid builder (fixes the scaling convention)
        """
        self.builder = builder
        self.batch_size = 256

    def overlap_volume_mc(
        self,
        e_r: ConfidenceEllipsoid,
        e_s: ConfidenceEllipsoid,
        n_samples: int = DEFAULT_MC_SAMPLES,
        seed: Union[int, np.random.Generator] = 0,
    ) -> Tuple[float, float]:
        """
        Monte Carlo intersection volume

        Points are drawn uniformly inside the smaller ellipsoid and tested for
        membership in the other one.

        Args:
            e_r: First ellipsoid
            e_s: Second ellipsoid
            n_samples: Number of uniform draws
            seed: Seed or generator

        Returns:
            Tuple of (volume estimate, binomial standard error)
        """
        if e_r.p != e_s.p:
            raise EllipsoidError(f"Ellipsoid dimensions differ ({e_r.p} vs {e_s.p})")
        if n_samples < MIN_MC_SAMPLES:
            raise ValueError(f"n_samples must be at least {MIN_MC_SAMPLES}, got {n_samples}")

        small, other = (e_r, e_s) if e_r.volume <= e_s.volume else (e_s, e_r)

        if np.array_equal(e_r.center, e_s.center) and np.array_equal(e_r.shape, e_s.shape):
            return small.volume, 0.0

        # disjoint when the centres are further apart than the longest semi-axes combined
        gap = np.linalg.norm(e_r.center - e_s.center)
        if gap > e_r.semi_axes.max() + e_s.semi_axes.max():
            return 0.0, 0.0

        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        p = small.p
        directions = rng.standard_normal((n_samples, p))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        radii = rng.random(n_samples) ** (1.0 / p)
        points = small.center + (directions * radii[:, None]) @ small.cholesky.T

        fraction = float(np.mean(other.contains(points)))
        estimate = small.volume * fraction
        std_error = small.volume * np.sqrt(fraction * (1.0 - fraction) / n_samples)
        return estimate, float(std_error)

    def overlap_ratio(
        self,
        e_r: ConfidenceEllipsoid,
        e_s: ConfidenceEllipsoid,
        n_samples: int = DEFAULT_MC_SAMPLES,
        seed: Union[int, np.random.Generator] = 0,
    ) -> float:
        """
        Intersection over union of two ellipsoids, clamped to [0, 1]
        """
        if e_r.volume <= 0 or e_s.volume <= 0:
            raise EllipsoidError("Overlap ratio requires ellipsoids with positive volume")

        intersection, _ = self.overlap_volume_mc(e_r, e_s, n_samples, seed)
        ratio = intersection / (e_r.volume + e_s.volume - intersection)
        if not 0.0 <= ratio <= 1.0:
            logger.debug(f"Clamped overlap ratio {ratio:.6f} to [0, 1]")
        return float(min(max(ratio, 0.0), 1.0))

    def ellipsoid_dissimilarity(
        self,
        e_r: ConfidenceEllipsoid,
        e_s: ConfidenceEllipsoid,
        n_samples: int = DEFAULT_MC_SAMPLES,
        seed: Union[int, np.random.Generator] = 0,
    ) -> float:
        """d = 1 - R"""
        return 1.0 - self.overlap_ratio(e_r, e_s, n_samples, seed)

    def build_ellipsoids(
        self, fits: Sequence[VarFit], account_ids: Sequence[str], alpha: float
    ) -> List[ConfidenceEllipsoid]:
        """Ellipsoids for every fit, attributing failures to accounts"""
        ellipsoids = []
        for account_id, fit in zip(account_ids, fits):
            try:
                ellipsoids.append(self.builder.build_ellipsoid(fit, alpha))
            except BehaviourError as e:
                raise DissimilarityError(account_id, e) from e
        return ellipsoids

    def _pair_values(
        self,
        pairs: Sequence[Tuple[int, int]],
        rows: Sequence,
        columns: Sequence,
        measure: str,
        n_samples: int,
        seed: int,
    ) -> List[float]:
        if measure == "euclidean":
            return [euclidean_distance(rows[i], columns[j]) for i, j in pairs]
        return [
            self.ellipsoid_dissimilarity(rows[i], columns[j], n_samples, pair_rng(seed, i, j))
            for i, j in pairs
        ]

    def _compute_pairs(
        self,
        pairs: List[Tuple[int, int]],
        rows: Sequence,
        columns: Sequence,
        measure: str,
        n_samples: int,
        seed: int,
        n_jobs: int,
    ) -> List[float]:
        batches = [pairs[start:start + self.batch_size] for start in range(0, len(pairs), self.batch_size)]
        results = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(self._pair_values)(batch, rows, columns, measure, n_samples, seed) for batch in batches
        )
        return [value for batch in results for value in batch]

    def _objects(self, fits: Sequence[VarFit], account_ids: Sequence[str], measure: str, alpha: float) -> list:
        if measure == "euclidean":
            return [fit.theta for fit in fits]
        if measure == "ellipsoid":
            return self.build_ellipsoids(fits, account_ids, alpha)
        raise ValueError(f"Unknown measure '{measure}'")

    def build_matrix(
        self,
        fits: Sequence[VarFit],
        account_ids: Sequence[str],
        measure: Measure = "ellipsoid",
        alpha: float = 0.05,
        n_samples: int = DEFAULT_MC_SAMPLES,
        seed: int = 0,
        n_jobs: int = 1,
    ) -> DissimilarityMatrix:
        """
        Full pairwise dissimilarity matrix

        Each pair (i, j), i < j, draws from its own generator keyed on
        (seed, i, j), so the result does not depend on n_jobs.

        Args:
            fits: VAR fits
            account_ids: Ids aligned with fits
            measure: `ellipsoid` or `euclidean`
            alpha: Significance level of the ellipsoids
            n_samples: Monte Carlo draws per pair
            seed: Matrix seed
            n_jobs: Worker threads

        Returns:
            DissimilarityMatrix
        """
        n = len(fits)
        if n < 2:
            raise ValueError(f"Need at least 2 fits, got {n}")
        if len(account_ids) != n:
            raise ValueError("account_ids must align with fits")

        logger.info(f"🔍 Computing {measure} dissimilarities for {n} accounts ({n * (n - 1) // 2} pairs)")
        objects = self._objects(fits, account_ids, measure, alpha)
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        values = self._compute_pairs(pairs, objects, objects, measure, n_samples, seed, n_jobs)

        matrix = np.zeros((n, n))
        for (i, j), value in zip(pairs, values):
            matrix[i, j] = matrix[j, i] = value

        logger.info(f"✅ {measure} dissimilarity matrix ready")
        return DissimilarityMatrix(
            values=matrix,
            measure=measure,
            account_ids=list(account_ids),
            mc_samples=n_samples if measure == "ellipsoid" else 0,
            seed=seed,
            alpha=alpha if measure == "ellipsoid" else None,
        )

    def cross_dissimilarities(
        self,
        row_fits: Sequence[VarFit],
        row_ids: Sequence[str],
        column_fits: Sequence[VarFit],
        column_ids: Sequence[str],
        measure: Measure = "ellipsoid",
        alpha: float = 0.05,
        n_samples: int = DEFAULT_MC_SAMPLES,
        seed: int = 0,
        n_jobs: int = 1,
    ) -> np.ndarray:
        """
        Rectangular dissimilarities between two sets of fits

        Returns:
            Array of shape (len(row_fits), len(column_fits))
        """
        rows = self._objects(row_fits, row_ids, measure, alpha)
        columns = self._objects(column_fits, column_ids, measure, alpha)
        pairs = [(i, j) for i in range(len(rows)) for j in range(len(columns))]
        values = self._compute_pairs(pairs, rows, columns, measure, n_samples, seed, n_jobs)
        return np.array(values, dtype=float).reshape(len(rows), len(columns))


def fits_digest(fits: Sequence[VarFit], account_ids: Sequence[str]) -> str:
    """SHA-256 over ids and the fields the ellipsoids depend on"""
    digest = hashlib.sha256()
    for account_id, fit in zip(account_ids, fits):
        digest.update(account_id.encode("utf-8"))
        digest.update(np.ascontiguousarray(fit.theta, dtype=np.float64).tobytes())
        digest.update(np.ascontiguousarray(fit.psi, dtype=np.float64).tobytes())
        digest.update(int(fit.t_len).to_bytes(8, "little"))
    return digest.hexdigest()


class MatrixCache:
    """
    Binary cache of dissimilarity matrices
    """

    def __init__(self, cache_dir: Path):
        """
        Initialize matrix cache

        Args:
            cache_dir: Directory holding joblib files
        """
        self.cache_dir = Path(cache_dir)

    def key(
        self,
        measure: str,
        alpha: float,
        n_samples: int,
        seed: int,
        digest: str,
        c_convention: str = "squared",
    ) -> str:
        raw = f"{measure}|{alpha!r}|{n_samples}|{seed}|{c_convention}|{digest}"
        return hashlib.sha256(raw.encode("utf-8")).hexdigest()[:32]

    def path_for(self, key: str) -> Path:
        return self.cache_dir / f"dissimilarity_{key}.joblib"

    def load(self, key: str) -> Optional[DissimilarityMatrix]:
        path = self.path_for(key)
        if not path.is_file():
            return None
        logger.info(f"✅ Dissimilarity matrix loaded from cache ({path.name})")
        return joblib.load(path)

    def store(self, key: str, matrix: DissimilarityMatrix) -> Path:
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        path = self.path_for(key)
        joblib.dump(matrix, path)
        return path


# Global instance
dissimilarity_calculator = DissimilarityCalculator()
