"""
Data Splitter
Account-level train/test partitions and observation/forecast windows
"""

import math
from typing import List, Tuple

import numpy as np
from loguru import logger

from data.account_profile import AccountProfile
from utils.errors import DataValidationError

MIN_FORECAST_LENGTH = 3


class DataSplitter:
    """
    Split portfolios and profiles
    """

    def __init__(self):
        """Initialize data splitter"""
        self.observation_share = (2, 3)

    def train_size(self, n_accounts: int, train_fraction: float) -> int:
        """round(train_fraction * N), halves rounded up"""
        return int(math.floor(train_fraction * n_accounts + 0.5))

    def split_train_test(
        self,
        accounts: List[AccountProfile],
        train_fraction: float = 0.6,
        seed: int = 0,
        stratify: bool = False,
    ) -> Tuple[List[AccountProfile], List[AccountProfile]]:
        """
        Uniform random account-level split

        With `stratify`, defaulters and non-defaulters are split separately with
        the same fraction, so sizes may differ from round(fraction * N) by one.

        Args:
            accounts: Portfolio
            train_fraction: Share of accounts used for training
            seed: Split seed
            stratify: Split within ever-default strata

        Returns:
            Tuple of (train, test), each in input order
        """
        n_accounts = len(accounts)
        if n_accounts < 2:
            raise DataValidationError(f"Need at least 2 accounts to split, got {n_accounts}")
        if not 0.0 < train_fraction < 1.0:
            raise DataValidationError(f"train_fraction must lie in (0, 1), got {train_fraction}")

        rng = np.random.default_rng(seed)

        if stratify:
            labels = np.array([a.ever_default for a in accounts])
            chosen = []
            for stratum in (0, 1):
                members = np.flatnonzero(labels == stratum)
                size = self.train_size(members.size, train_fraction)
                chosen.append(rng.permutation(members)[:size])
            train_index = np.concatenate(chosen)
        else:
            size = self.train_size(n_accounts, train_fraction)
            train_index = rng.permutation(n_accounts)[:size]

        if train_index.size == 0 or train_index.size == n_accounts:
            raise DataValidationError(
                f"Split of {n_accounts} accounts at fraction {train_fraction} leaves an empty partition"
            )

        in_train = np.zeros(n_accounts, dtype=bool)
        in_train[train_index] = True
        train = [a for a, flag in zip(accounts, in_train) if flag]
        test = [a for a, flag in zip(accounts, in_train) if not flag]

        logger.info(f"✅ Split {n_accounts} accounts: {len(train)} train / {len(test)} test")
        return train, test

    def observation_length(self, t_len: int) -> int:
        """floor(2 T_s / 3)"""
        numerator, denominator = self.observation_share
        return (numerator * t_len) // denominator

    def split_observation_forecast(self, account: AccountProfile) -> Tuple[AccountProfile, int]:
        """
        Observation prefix and forecast-window default label

        Args:
            account: Full profile with T_s >= 3

        Returns:
            Tuple of (prefix profile, 1 if any default flag falls in the forecast window)
        """
        if account.t_len < MIN_FORECAST_LENGTH:
            raise DataValidationError(
                f"Account '{account.account_id}': T_s = {account.t_len} leaves an empty forecast window",
                account_ids=[account.account_id],
            )

        months = self.observation_length(account.t_len)
        forecast_label = int(account.default_flag[months:].max())
        return account.prefix(months), forecast_label


# Global instance
data_splitter = DataSplitter()
