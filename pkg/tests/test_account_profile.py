import numpy as np
import pytest

from data.account_profile import AccountProfile, compute_utilisation, derive_default
from utils.errors import DataValidationError


def brute_force_flags(counts, run_length=3):
    extended = [0] + list(counts)
    flags = []
    for t in range(len(counts)):
        rises = [extended[m + 1] > extended[m] for m in range(t - run_length + 1, t + 1) if m >= 0]
        flags.append(int(len(rises) == run_length and all(rises)))
    return flags


def test_utilisation_is_balance_over_limit():
    result = compute_utilisation(np.array([250.0, -50.0, 1200.0]), np.array([1000.0, 1000.0, 1000.0]))
    np.testing.assert_allclose(result, [0.25, -0.05, 1.2])


def test_utilisation_rejects_zero_limit():
    with pytest.raises(DataValidationError) as error:
        compute_utilisation(np.array([1.0, 2.0]), np.array([10.0, 0.0]))
    assert error.value.month == 2


def test_three_consecutive_misses_default():
    flags, ever = derive_default(np.array([0, 1, 2, 3, 0]))
    assert flags.tolist() == [0, 0, 0, 1, 0]
    assert ever == 1


def test_default_from_first_month_uses_zero_before_series():
    flags, ever = derive_default(np.array([1, 2, 3]))
    assert flags.tolist() == [0, 0, 1]
    assert ever == 1


def test_interrupted_misses_do_not_default():
    flags, ever = derive_default(np.array([1, 2, 0, 1, 2, 0]))
    assert flags.sum() == 0
    assert ever == 0


def test_default_matches_brute_force_on_random_paths():
    rng = np.random.default_rng(11)
    for _ in range(300):
        t_len = int(rng.integers(1, 25))
        counts = np.minimum(np.cumsum(rng.integers(0, 2, t_len)) * rng.integers(0, 2, t_len), 12)
        flags, ever = derive_default(counts)
        expected = brute_force_flags(counts)
        assert flags.tolist() == expected
        assert ever == max(expected)


def test_profile_rejects_unequal_series():
    with pytest.raises(DataValidationError):
        AccountProfile.from_series("a", [1.0, 2.0], [1.0], [5.0, 5.0], [0, 0])


def test_profile_rejects_delinquency_above_twelve():
    with pytest.raises(DataValidationError) as error:
        AccountProfile.from_series("a", [1.0], [1.0], [5.0], [13])
    assert error.value.account_ids == ["a"]


def test_prefix_recomputes_flags(account_factory):
    account = account_factory("a", t_len=12, delinquency=[0] * 9 + [1, 2, 3])
    assert account.ever_default == 1
    prefix = account.prefix(8)
    assert prefix.t_len == 8
    assert prefix.ever_default == 0
    np.testing.assert_array_equal(prefix.repay, account.repay[:8])
