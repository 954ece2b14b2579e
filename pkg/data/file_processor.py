"""
Account File Processing
Reads and writes long-format account CSV files and synthetic ground-truth sidecars
"""

import hashlib
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd
from loguru import logger

from data.account_profile import AccountProfile
from data.data_validator import DEFAULT_SCHEMA, data_validator

TRUE_CLUSTER_COLUMNS = ["account_id", "true_cluster"]


class FileProcessor:
    """
    Handle account file reading, writing and fingerprinting
    """

    def __init__(self):
        """Initialize file processor"""
        self.encoding = "utf-8"

    def read_csv(self, file_path: Path, id_column: Optional[str] = None) -> pd.DataFrame:
        """
        Read a UTF-8 CSV with exact float round-trip

        Args:
            file_path: Path to the file
            id_column: Column to keep as string

        Returns:
            Raw DataFrame
        """
        path = Path(file_path)
        if not path.is_file():
            raise FileNotFoundError(f"Input file not found: {path}")

        dtype = {id_column: str} if id_column else None
        return pd.read_csv(
            path,
            dtype=dtype,
            encoding=self.encoding,
            float_precision="round_trip",
            keep_default_na=False,
            na_values=[""],
        )

    def load_accounts(
        self, file_path: Path, schema: Optional[Dict[str, str]] = None, consecutive_misses: int = 3
    ) -> List[AccountProfile]:
        """
        Load and validate account profiles from a long-format CSV

        Args:
            file_path: Path to the CSV
            schema: Optional partial column mapping
            consecutive_misses: Default rule run length

        Returns:
            One profile per distinct account id
        """
        resolved = data_validator.resolve_schema(schema)
        df = self.read_csv(file_path, id_column=resolved["account_id"])
        accounts = data_validator.build_profiles(df, resolved, consecutive_misses)

        logger.info(f"✅ Loaded {len(accounts)} accounts from {Path(file_path).name}")
        return accounts

    def accounts_to_frame(self, accounts: List[AccountProfile]) -> pd.DataFrame:
        """Long-format table in the default schema"""
        frames = [
            pd.DataFrame(
                {
                    "account_id": account.account_id,
                    "month": range(1, account.t_len + 1),
                    "repay": account.repay,
                    "balance": account.balance,
                    "credit_limit": account.credit_limit,
                    "delinquency": account.delinquency,
                }
            )
            for account in accounts
        ]
        if not frames:
            return pd.DataFrame(columns=list(DEFAULT_SCHEMA.values()))
        return pd.concat(frames, ignore_index=True)

    def write_accounts(self, accounts: List[AccountProfile], file_path: Path) -> Path:
        """
        Write profiles as long-format CSV

        Args:
            accounts: Profiles to write
            file_path: Destination

        Returns:
            Path written
        """
        path = Path(file_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.accounts_to_frame(accounts).to_csv(path, index=False, encoding=self.encoding, lineterminator="\n")
        logger.info(f"📄 Wrote {len(accounts)} accounts to {path}")
        return path

    def write_true_clusters(self, true_clusters: Dict[str, int], file_path: Path) -> Path:
        """Write the `account_id, true_cluster` sidecar"""
        path = Path(file_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame = pd.DataFrame(list(true_clusters.items()), columns=TRUE_CLUSTER_COLUMNS)
        frame.to_csv(path, index=False, encoding=self.encoding, lineterminator="\n")
        return path

    def read_true_clusters(self, file_path: Path) -> Dict[str, int]:
        """Read a ground-truth sidecar"""
        frame = self.read_csv(file_path, id_column="account_id")
        return dict(zip(frame["account_id"], frame["true_cluster"].astype(int)))

    def get_file_info(self, file_path: Path) -> Dict[str, Any]:
        """
        Fingerprint of an input file for the run manifest

        Args:
            file_path: Path to the file

        Returns:
            Dictionary with name, size and SHA-256 digest
        """
        path = Path(file_path)
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        return {"filename": path.name, "size_bytes": path.stat().st_size, "sha256": digest}


# Global instance
file_processor = FileProcessor()
