"""
Synthetic Portfolio Generator
Simulates clustered VAR(1) account behaviour with known ground truth
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from data.account_profile import MAX_DELINQUENCY, AccountProfile
from utils.errors import SyntheticSpecError

BURN_IN = 50


class ClusterSpec(BaseModel):
    """Generator of one behavioural cluster"""

    coefficients: List[List[float]]
    noise_covariance: List[List[float]]
    default_probability: float = Field(default=0.05, ge=0.0, le=1.0)
    default_timing: Literal["uniform", "late"] = "uniform"
    miss_rate: float = Field(default=0.02, ge=0.0, le=1.0)
    n_accounts: Optional[int] = Field(default=None, gt=0)

    @field_validator("coefficients", "noise_covariance")
    @classmethod
    def _two_by_two(cls, value: List[List[float]]) -> List[List[float]]:
        if len(value) != 2 or any(len(row) != 2 for row in value):
            raise ValueError("must be a 2x2 matrix")
        return value

    @model_validator(mode="after")
    def _stationary_and_spd(self) -> "ClusterSpec":
        radius = float(np.max(np.abs(np.linalg.eigvals(np.array(self.coefficients)))))
        if radius >= 1.0:
            raise ValueError(f"coefficient matrix has spectral radius {radius:.4f} >= 1 (non-stationary)")
        noise = np.array(self.noise_covariance)
        if not np.allclose(noise, noise.T) or np.linalg.eigvalsh(noise).min() <= 0:
            raise ValueError("noise covariance must be symmetric positive definite")
        return self


class SyntheticSpec(BaseModel):
    """Synthetic portfolio specification"""

    clusters: List[ClusterSpec] = Field(min_length=1)
    accounts_per_cluster: int = Field(gt=0)
    length_range: Tuple[int, int] = (20, 37)
    seed: int = 0
    credit_limits: List[float] = Field(default_factory=lambda: [1000.0, 2500.0, 5000.0])

    @field_validator("length_range")
    @classmethod
    def _ordered_range(cls, value: Tuple[int, int]) -> Tuple[int, int]:
        low, high = value
        if low < 1 or high < low:
            raise ValueError("length_range must satisfy 1 <= min <= max")
        return value

    @field_validator("credit_limits")
    @classmethod
    def _positive_limits(cls, value: List[float]) -> List[float]:
        if not value or min(value) <= 0:
            raise ValueError("credit limits must be positive")
        return value


@dataclass(frozen=True)
class SyntheticPortfolio:
    accounts: List[AccountProfile]
    true_clusters: Dict[str, int]


def default_spec(seed: int = 7) -> SyntheticSpec:
    """
    Three well-separated clusters; the third is the high-risk one

    Utilisation is a balance-to-limit ratio, so its monthly shocks are an
    order of magnitude smaller than those of the log repayment ratio.
    """
    return SyntheticSpec(
        clusters=[
            ClusterSpec(
                coefficients=[[0.8, 0.0], [0.0, 0.8]],
                noise_covariance=[[1.0, 0.02], [0.02, 0.005]],
                default_probability=0.05,
            ),
            ClusterSpec(
                coefficients=[[-0.6, 3.0], [0.0, -0.5]],
                noise_covariance=[[1.0, 0.0], [0.0, 0.005]],
                default_probability=0.05,
            ),
            ClusterSpec(
                coefficients=[[0.2, -5.0], [0.05, 0.2]],
                noise_covariance=[[1.0, -0.02], [-0.02, 0.005]],
                default_probability=0.9,
                default_timing="late",
            ),
        ],
        accounts_per_cluster=100,
        length_range=(20, 37),
        seed=seed,
    )


class SyntheticGenerator:
    """
    Generate synthetic behavioural portfolios
    """

    def __init__(self):
        """Initialize synthetic generator"""
        self.burn_in = BURN_IN
        self.spell_range = (3, 6)

    def load_spec(self, source: Union[str, Path, dict, SyntheticSpec]) -> SyntheticSpec:
        """
        Parse a specification from a model, a dict, a JSON file, or the name `default`

        Args:
            source: Specification source

        Returns:
            Validated specification
        """
        if isinstance(source, SyntheticSpec):
            return source
        try:
            if isinstance(source, dict):
                return SyntheticSpec.model_validate(source)
            if str(source) in ("default", "default.spec"):
                return default_spec()
            path = Path(source)
            if not path.is_file():
                raise FileNotFoundError(f"Synthetic spec not found: {path}")
            return SyntheticSpec.model_validate(json.loads(path.read_text(encoding="utf-8")))
        except ValidationError as e:
            raise SyntheticSpecError(f"Invalid synthetic spec: {e}") from e

    def simulate_var1(
        self, rng: np.random.Generator, coefficients: np.ndarray, noise_chol: np.ndarray, t_len: int
    ) -> np.ndarray:
        """
        VAR(1) path from a zero initial state, burn-in discarded

        Returns:
            Array of shape (t_len, 2)
        """
        total = t_len + self.burn_in
        shocks = rng.standard_normal((total, 2)) @ noise_chol.T
        path = np.zeros((total, 2))
        state = np.zeros(2)
        for t in range(total):
            state = coefficients @ state + shocks[t]
            path[t] = state
        return path[self.burn_in:]

    def simulate_delinquency(self, rng: np.random.Generator, cluster: ClusterSpec, t_len: int) -> np.ndarray:
        """
        Missed-payment counts: isolated single misses plus, for defaulting
        accounts, one spell of consecutive misses that then cures
        """
        counts = np.where(rng.random(t_len) < cluster.miss_rate, 1, 0)

        if rng.random() < cluster.default_probability and t_len >= 3:
            last_onset = t_len - 3
            if cluster.default_timing == "late":
                first_onset = min(-(-2 * t_len // 3), last_onset)
            else:
                first_onset = 0
            onset = int(rng.integers(first_onset, last_onset + 1))
            spell = min(int(rng.integers(self.spell_range[0], self.spell_range[1] + 1)), t_len - onset)
            counts[onset:onset + spell] = np.minimum(np.arange(1, spell + 1), MAX_DELINQUENCY)
            if onset > 0:
                counts[onset - 1] = 0
            if onset + spell < t_len:
                counts[onset + spell] = 0

        return counts

    def generate_synthetic(self, spec: Union[SyntheticSpec, dict, str, Path]) -> SyntheticPortfolio:
        """
        Simulate a clustered portfolio

        Args:
            spec: Specification (or a source accepted by load_spec)

        Returns:
            Accounts in generation order with their true cluster labels
        """
        spec = self.load_spec(spec)
        rng = np.random.default_rng(spec.seed)
        low, high = spec.length_range

        accounts: List[AccountProfile] = []
        true_clusters: Dict[str, int] = {}
        index = 0

        for label, cluster in enumerate(spec.clusters):
            coefficients = np.array(cluster.coefficients, dtype=float)
            noise_chol = np.linalg.cholesky(np.array(cluster.noise_covariance, dtype=float))

            for _ in range(cluster.n_accounts or spec.accounts_per_cluster):
                index += 1
                account_id = f"acc{index:05d}"
                t_len = int(rng.integers(low, high + 1))
                path = self.simulate_var1(rng, coefficients, noise_chol, t_len)
                limit = float(rng.choice(spec.credit_limits))
                credit_limit = np.full(t_len, limit)
                delinquency = self.simulate_delinquency(rng, cluster, t_len)

                accounts.append(
                    AccountProfile.from_series(
                        account_id,
                        repay=path[:, 0],
                        balance=path[:, 1] * credit_limit,
                        credit_limit=credit_limit,
                        delinquency=delinquency,
                    )
                )
                true_clusters[account_id] = label

        logger.info(f"✅ Generated {len(accounts)} synthetic accounts in {len(spec.clusters)} clusters")
        return SyntheticPortfolio(accounts, true_clusters)


# Global instance
synthetic_generator = SyntheticGenerator()
