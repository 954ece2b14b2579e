"""
Shared fixtures for the behaviour clusters test suite
"""

import json
from pathlib import Path
from typing import List

import numpy as np
import pytest

from data.account_profile import AccountProfile
from modeling.var_model import VarEstimator, VarFit

STABLE_A = np.array([[0.5, 0.1], [-0.2, 0.4]])


def simulate_var1(coefficients: np.ndarray, t_len: int, seed: int, burn_in: int = 50) -> np.ndarray:
    """Bivariate VAR(1) path with unit-variance shocks"""
    rng = np.random.default_rng(seed)
    shocks = rng.standard_normal((t_len + burn_in, 2))
    path = np.zeros((t_len + burn_in, 2))
    for t in range(1, t_len + burn_in):
        path[t] = coefficients @ path[t - 1] + shocks[t]
    return path[burn_in:]


def make_account(account_id: str, t_len: int = 24, seed: int = 0, delinquency=None, limit: float = 1000.0):
    """Account whose (repay, utilisation) follow STABLE_A"""
    path = simulate_var1(STABLE_A, t_len, seed)
    credit_limit = np.full(t_len, limit)
    if delinquency is None:
        delinquency = np.zeros(t_len, dtype=int)
    return AccountProfile.from_series(account_id, path[:, 0], path[:, 1] * limit, credit_limit, delinquency)


def constant_account(account_id: str, t_len: int = 3, defaulted: bool = False) -> AccountProfile:
    delinquency = np.zeros(t_len, dtype=int)
    if defaulted:
        delinquency[:3] = [1, 2, 3]
    return AccountProfile.from_series(account_id, np.ones(t_len), np.ones(t_len), np.full(t_len, 10.0), delinquency)


@pytest.fixture
def account_factory():
    return make_account


@pytest.fixture
def var_fits() -> List[VarFit]:
    """Six VAR fits from two well-separated coefficient regimes"""
    estimator = VarEstimator()
    regimes = [np.array([[0.7, 0.0], [0.0, 0.7]]), np.array([[-0.6, 0.2], [0.0, -0.5]])]
    fits = []
    for i in range(6):
        path = simulate_var1(regimes[i % 2], 40, seed=100 + i)
        fits.append(estimator.fit_var1(path[:, 0], path[:, 1]))
    return fits


@pytest.fixture
def fit_ids() -> List[str]:
    return [f"acc{i:03d}" for i in range(1, 7)]


def two_cluster_spec(default_probability: float = 0.8, accounts_per_cluster: int = 20) -> dict:
    """Small synthetic spec: a quiet cluster and a late-defaulting one"""
    return {
        "clusters": [
            {
                "coefficients": [[0.8, 0.0], [0.0, 0.8]],
                "noise_covariance": [[1.0, 0.2], [0.2, 0.5]],
                "default_probability": 0.0,
            },
            {
                "coefficients": [[-0.6, 0.3], [0.0, -0.5]],
                "noise_covariance": [[1.0, 0.0], [0.0, 0.5]],
                "default_probability": default_probability,
                "default_timing": "late",
            },
        ],
        "accounts_per_cluster": accounts_per_cluster,
        "length_range": [20, 30],
        "seed": 3,
    }


@pytest.fixture
def spec_file(tmp_path: Path) -> Path:
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(two_cluster_spec()), encoding="utf-8")
    return path
