"""
Account Profile
Monthly behaviour series of one credit account and the series derived from it
"""

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from utils.errors import DataValidationError

MAX_DELINQUENCY = 12


def compute_utilisation(balance: np.ndarray, credit_limit: np.ndarray) -> np.ndarray:
    """
    Utilisation rate: month-end balance divided by credit limit

    Values outside [0, 1] (overpayment, over-limit balances) are kept as-is.

    Args:
        balance: Month-end total balance
        credit_limit: Monthly credit limit

    Returns:
        Element-wise ratio
    """
    balance = np.asarray(balance, dtype=float)
    credit_limit = np.asarray(credit_limit, dtype=float)

    if balance.shape != credit_limit.shape:
        raise DataValidationError(
            f"Balance and credit limit lengths differ ({balance.size} vs {credit_limit.size})"
        )

    bad = np.flatnonzero(credit_limit <= 0)
    if bad.size:
        month = int(bad[0]) + 1
        raise DataValidationError(f"Credit limit is not positive at month {month}", month=month)

    return balance / credit_limit


def derive_default(delinquency: np.ndarray, consecutive_misses: int = 3) -> Tuple[np.ndarray, int]:
    """
    Default flags from a cumulative missed-payment count

    A month is flagged when the count rose in each of the last
    `consecutive_misses` months and has reached at least `consecutive_misses`.
    The count before the first observed month is taken as 0.

    Args:
        delinquency: Missed-payment count per month
        consecutive_misses: Run length that constitutes default

    Returns:
        Tuple of (binary flag per month, ever_default)
    """
    counts = np.asarray(delinquency)
    if counts.size and counts.min() < 0:
        month = int(np.flatnonzero(counts < 0)[0]) + 1
        raise DataValidationError(f"Negative delinquency count at month {month}", month=month)

    increased = np.diff(np.concatenate(([0], counts))) > 0
    flags = np.zeros(counts.size, dtype=np.int8)
    run = 0
    for t, up in enumerate(increased):
        run = run + 1 if up else 0
        if run >= consecutive_misses and counts[t] >= consecutive_misses:
            flags[t] = 1

    return flags, int(flags.max()) if flags.size else 0


@dataclass(frozen=True, eq=False)
class AccountProfile:
    """
    One customer's behaviour series

    All series share the same length T_s. Utilisation and default flags are
    derived on construction through `from_series`.
    """

    account_id: str
    repay: np.ndarray
    balance: np.ndarray
    credit_limit: np.ndarray
    delinquency: np.ndarray
    utilisation: np.ndarray
    default_flag: np.ndarray
    consecutive_misses: int = field(default=3)

    @classmethod
    def from_series(
        cls,
        account_id: str,
        repay,
        balance,
        credit_limit,
        delinquency,
        consecutive_misses: int = 3,
    ) -> "AccountProfile":
        """Validate raw series and derive utilisation and default flags"""
        repay = np.asarray(repay, dtype=float)
        balance = np.asarray(balance, dtype=float)
        credit_limit = np.asarray(credit_limit, dtype=float)
        delinquency = np.asarray(delinquency)

        lengths = {repay.size, balance.size, credit_limit.size, delinquency.size}
        if len(lengths) != 1:
            raise DataValidationError(f"Account '{account_id}': series lengths differ", account_ids=[account_id])
        if repay.size < 1:
            raise DataValidationError(f"Account '{account_id}': empty profile", account_ids=[account_id])
        if np.any(np.mod(delinquency, 1) != 0) or delinquency.min() < 0 or delinquency.max() > MAX_DELINQUENCY:
            raise DataValidationError(
                f"Account '{account_id}': delinquency must be an integer in [0, {MAX_DELINQUENCY}]",
                account_ids=[account_id],
            )
        delinquency = delinquency.astype(np.int64)

        try:
            utilisation = compute_utilisation(balance, credit_limit)
        except DataValidationError as e:
            raise DataValidationError(f"Account '{account_id}': {e}", account_ids=[account_id], month=e.month) from e

        flags, _ = derive_default(delinquency, consecutive_misses)
        return cls(account_id, repay, balance, credit_limit, delinquency, utilisation, flags, consecutive_misses)

    @property
    def t_len(self) -> int:
        return int(self.repay.size)

    @property
    def ever_default(self) -> int:
        return int(self.default_flag.max())

    def prefix(self, months: int) -> "AccountProfile":
        """First `months` months of the profile"""
        return AccountProfile.from_series(
            self.account_id,
            self.repay[:months],
            self.balance[:months],
            self.credit_limit[:months],
            self.delinquency[:months],
            self.consecutive_misses,
        )
