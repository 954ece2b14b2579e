import numpy as np
import pandas as pd
import pytest

from data.data_validator import data_validator
from data.file_processor import file_processor
from utils.errors import DataValidationError, ParseError, SchemaError


def write_table(path, rows):
    pd.DataFrame(rows, columns=["account_id", "month", "repay", "balance", "credit_limit", "delinquency"]).to_csv(
        path, index=False
    )
    return path


def test_accounts_round_trip_exactly(tmp_path, account_factory):
    accounts = [account_factory(f"{i:04d}", t_len=10 + i, seed=i) for i in range(4)]
    path = file_processor.write_accounts(accounts, tmp_path / "accounts.csv")
    loaded = file_processor.load_accounts(path)

    assert [a.account_id for a in loaded] == ["0000", "0001", "0002", "0003"]
    for original, reread in zip(accounts, loaded):
        np.testing.assert_array_equal(original.repay, reread.repay)
        np.testing.assert_array_equal(original.balance, reread.balance)
        np.testing.assert_array_equal(original.utilisation, reread.utilisation)
        np.testing.assert_array_equal(original.default_flag, reread.default_flag)


def test_rows_are_sorted_by_month(tmp_path):
    path = write_table(
        tmp_path / "a.csv",
        [["x", 2, 2.0, 20.0, 100.0, 1], ["x", 1, 1.0, 10.0, 100.0, 0], ["x", 3, 3.0, 30.0, 100.0, 2]],
    )
    (account,) = file_processor.load_accounts(path)
    np.testing.assert_array_equal(account.repay, [1.0, 2.0, 3.0])
    np.testing.assert_allclose(account.utilisation, [0.1, 0.2, 0.3])


def test_missing_column_is_reported(tmp_path):
    path = tmp_path / "a.csv"
    pd.DataFrame({"account_id": ["x"], "month": [1], "repay": [1.0], "balance": [1.0], "credit_limit": [5.0]}).to_csv(
        path, index=False
    )
    with pytest.raises(SchemaError) as error:
        file_processor.load_accounts(path)
    assert error.value.column == "delinquency"


def test_non_numeric_cell_reports_file_row(tmp_path):
    path = write_table(tmp_path / "a.csv", [["x", 1, 1.0, 1.0, 5.0, 0], ["x", 2, "oops", 1.0, 5.0, 0]])
    with pytest.raises(ParseError) as error:
        file_processor.load_accounts(path)
    assert error.value.row == 3
    assert error.value.column == "repay"


def test_month_gap_is_rejected(tmp_path):
    path = write_table(tmp_path / "a.csv", [["x", 1, 1.0, 1.0, 5.0, 0], ["x", 3, 1.0, 1.0, 5.0, 0]])
    with pytest.raises(DataValidationError):
        file_processor.load_accounts(path)


def test_non_positive_limit_lists_accounts(tmp_path):
    path = write_table(
        tmp_path / "a.csv",
        [["x", 1, 1.0, 1.0, 5.0, 0], ["y", 1, 1.0, 1.0, 0.0, 0], ["z", 1, 1.0, 1.0, -2.0, 0]],
    )
    with pytest.raises(DataValidationError) as error:
        file_processor.load_accounts(path)
    assert error.value.account_ids == ["y", "z"]


def test_custom_schema_mapping(tmp_path):
    path = tmp_path / "a.csv"
    pd.DataFrame(
        {"id": ["q", "q"], "m": [1, 2], "pay": [0.5, 0.6], "bal": [1.0, 2.0], "lim": [4.0, 4.0], "dq": [0, 0]}
    ).to_csv(path, index=False)
    schema = {
        "account_id": "id",
        "month": "m",
        "repay": "pay",
        "balance": "bal",
        "credit_limit": "lim",
        "delinquency": "dq",
    }
    (account,) = file_processor.load_accounts(path, schema=schema)
    assert account.account_id == "q"
    np.testing.assert_allclose(account.utilisation, [0.25, 0.5])


def test_missing_file_raises(tmp_path):
    with pytest.raises(FileNotFoundError):
        file_processor.load_accounts(tmp_path / "absent.csv")


def test_true_clusters_round_trip(tmp_path):
    path = file_processor.write_true_clusters({"a": 0, "b": 2}, tmp_path / "truth.csv")
    assert file_processor.read_true_clusters(path) == {"a": 0, "b": 2}


def test_file_info_fingerprint(tmp_path, account_factory):
    path = file_processor.write_accounts([account_factory("a")], tmp_path / "accounts.csv")
    info = file_processor.get_file_info(path)
    assert info["filename"] == "accounts.csv"
    assert len(info["sha256"]) == 64
    assert info["size_bytes"] == path.stat().st_size


def test_portfolio_summary(account_factory):
    accounts = [account_factory("a", t_len=10), account_factory("b", t_len=14, delinquency=[0] * 11 + [1, 2, 3])]
    summary = data_validator.get_portfolio_summary(accounts)
    assert summary["account_count"] == 2
    assert summary["min_length"] == 10
    assert summary["max_length"] == 14
    assert summary["default_count"] == 1
