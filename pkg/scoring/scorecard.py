"""
Scorecard Designs
Aggregate behaviour features and design matrices for the default models
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from data.account_profile import AccountProfile
from utils.errors import ScoringError

INTERCEPT = "(Intercept)"
AGGREGATE_TERMS = ["mean_repay", "mean_utilisation"]
DESIGNS = ("cluster_dummies", "aggregate", "combined")


@dataclass(frozen=True)
class AggregateFeatures:
    mean_repay: float
    mean_utilisation: float

    def as_array(self) -> np.ndarray:
        return np.array([self.mean_repay, self.mean_utilisation])


def aggregate_features(account: AccountProfile) -> AggregateFeatures:
    """Sample means of repayment and utilisation over the profile"""
    return AggregateFeatures(
        mean_repay=float(np.mean(account.repay)),
        mean_utilisation=float(np.mean(account.utilisation)),
    )


def model_name(design: str, measure: str) -> str:
    """Row label of a model in reports, e.g. `cluster_dummies[ellipsoid]`"""
    return design if design == "aggregate" else f"{design}[{measure}]"


def cluster_terms(k: int) -> List[str]:
    """Dummy names C2..Ck (C1 is the baseline)"""
    return [f"C{label}" for label in range(2, k + 1)]


def build_design(
    aggregates: Optional[np.ndarray],
    assignment: Optional[np.ndarray],
    design: str,
) -> Tuple[np.ndarray, List[str]]:
    """
    Design matrix with intercept

    Args:
        aggregates: (n, 2) array of mean repayment and utilisation
        assignment: (n, k) one-hot cluster allocations, C1 first
        design: `cluster_dummies`, `aggregate` or `combined`

    Returns:
        Tuple of (matrix, term names)
    """
    if design not in DESIGNS:
        raise ScoringError(f"Unknown design '{design}'")

    blocks: List[np.ndarray] = []
    terms: List[str] = [INTERCEPT]

    if design in ("cluster_dummies", "combined"):
        if assignment is None:
            raise ScoringError(f"Design '{design}' requires cluster allocations")
        assignment = np.atleast_2d(np.asarray(assignment))
        blocks.append(assignment[:, 1:].astype(float))
        terms.extend(cluster_terms(assignment.shape[1]))

    if design in ("aggregate", "combined"):
        if aggregates is None:
            raise ScoringError(f"Design '{design}' requires aggregate features")
        aggregates = np.asarray(aggregates, dtype=float).reshape(-1, len(AGGREGATE_TERMS))
        blocks.append(aggregates)
        terms.extend(AGGREGATE_TERMS)

    n_rows = {block.shape[0] for block in blocks}
    if len(n_rows) != 1:
        raise ScoringError("Cluster allocations and aggregate features cover different accounts")

    n = n_rows.pop()
    matrix = np.column_stack([np.ones(n)] + blocks)
    return matrix, terms

