"""
Data Validation Module
Validates long-format account tables before profiles are built
"""

from typing import Any, Dict, List

import numpy as np
import pandas as pd
from loguru import logger

from data.account_profile import MAX_DELINQUENCY, AccountProfile
from utils.errors import DataValidationError, ParseError, SchemaError

# canonical field -> CSV column
DEFAULT_SCHEMA: Dict[str, str] = {
    "account_id": "account_id",
    "month": "month",
    "repay": "repay",
    "balance": "balance",
    "credit_limit": "credit_limit",
    "delinquency": "delinquency",
}

NUMERIC_FIELDS = ["month", "repay", "balance", "credit_limit", "delinquency"]


class DataValidator:
    """
    Validate account tables
    """

    def __init__(self):
        """Initialize data validator"""
        self.schema = dict(DEFAULT_SCHEMA)

    def resolve_schema(self, schema: Dict[str, str] = None) -> Dict[str, str]:
        """Merge a partial column mapping over the default schema"""
        resolved = dict(self.schema)
        resolved.update(schema or {})
        return resolved

    def validate_columns(self, df: pd.DataFrame, schema: Dict[str, str]) -> None:
        """
        Check that every mapped column is present

        Args:
            df: Raw table
            schema: Canonical field to column mapping
        """
        for field_name, column in schema.items():
            if column not in df.columns:
                raise SchemaError(column, f"Missing column '{column}' (field '{field_name}')")

    def coerce_numeric(self, df: pd.DataFrame, schema: Dict[str, str]) -> pd.DataFrame:
        """
        Convert numeric columns, reporting the first unparseable cell

        Row numbers are 1-based file lines, the header being line 1.
        """
        converted = df.copy()
        for field_name in NUMERIC_FIELDS:
            column = schema[field_name]
            values = pd.to_numeric(df[column], errors="coerce")
            bad = values.isna()
            if bad.any():
                position = int(np.flatnonzero(bad.to_numpy())[0])
                raise ParseError(row=position + 2, column=column, value=df[column].iloc[position])
            converted[column] = values
        return converted

    def validate_months(self, account_id: str, months: np.ndarray) -> None:
        """Months must run 1, 2, ..., T_s without gaps or duplicates"""
        if np.unique(months).size != months.size:
            raise DataValidationError(f"Account '{account_id}': duplicated month index", account_ids=[account_id])
        ordered = np.sort(months)
        if ordered[0] != 1 or np.any(np.diff(ordered) != 1):
            raise DataValidationError(
                f"Account '{account_id}': month index must be consecutive starting at 1",
                account_ids=[account_id],
            )

    def build_profiles(
        self, df: pd.DataFrame, schema: Dict[str, str] = None, consecutive_misses: int = 3
    ) -> List[AccountProfile]:
        """
        Validate a long-format table and build one profile per account

        Args:
            df: Raw table with string account ids
            schema: Column mapping
            consecutive_misses: Default rule run length

        Returns:
            Profiles in order of first appearance
        """
        schema = self.resolve_schema(schema)
        self.validate_columns(df, schema)
        table = self.coerce_numeric(df, schema)

        delinquency = table[schema["delinquency"]]
        out_of_range = (delinquency < 0) | (delinquency > MAX_DELINQUENCY) | (delinquency % 1 != 0)
        if out_of_range.any():
            ids = sorted(table.loc[out_of_range, schema["account_id"]].astype(str).unique())
            raise DataValidationError(
                f"Delinquency must be an integer in [0, {MAX_DELINQUENCY}]; offending accounts: {', '.join(ids)}",
                account_ids=ids,
            )

        non_positive = table[schema["credit_limit"]] <= 0
        if non_positive.any():
            ids = sorted(table.loc[non_positive, schema["account_id"]].astype(str).unique())
            raise DataValidationError(
                f"Credit limit must be positive (utilisation undefined); offending accounts: {', '.join(ids)}",
                account_ids=ids,
            )

        profiles = []
        for account_id, group in table.groupby(schema["account_id"], sort=False):
            account_id = str(account_id)
            months = group[schema["month"]].to_numpy()
            self.validate_months(account_id, months)
            group = group.iloc[np.argsort(months, kind="stable")]
            profiles.append(
                AccountProfile.from_series(
                    account_id,
                    group[schema["repay"]].to_numpy(dtype=float),
                    group[schema["balance"]].to_numpy(dtype=float),
                    group[schema["credit_limit"]].to_numpy(dtype=float),
                    group[schema["delinquency"]].to_numpy(),
                    consecutive_misses,
                )
            )

        return profiles

    def get_portfolio_summary(self, accounts: List[AccountProfile]) -> Dict[str, Any]:
        """
        Summary of a validated portfolio

        Args:
            accounts: Account profiles

        Returns:
            Dictionary with portfolio summary
        """
        if not accounts:
            return {"account_count": 0}

        lengths = np.array([a.t_len for a in accounts])
        utilisation = np.concatenate([a.utilisation for a in accounts])
        summary = {
            "account_count": len(accounts),
            "min_length": int(lengths.min()),
            "max_length": int(lengths.max()),
            "utilisation_mean": float(utilisation.mean()),
            "utilisation_min": float(utilisation.min()),
            "utilisation_max": float(utilisation.max()),
            "default_count": int(sum(a.ever_default for a in accounts)),
        }
        return summary


# Global instance
data_validator = DataValidator()
