import numpy as np
import pytest

from modeling.dissimilarity import (
    DissimilarityCalculator,
    MatrixCache,
    dissimilarity_calculator,
    euclidean_distance,
    fits_digest,
)
from modeling.ellipsoid import ConfidenceEllipsoid
from modeling.var_model import VarFit
from utils.errors import DissimilarityError


def unit_disc(x: float) -> ConfidenceEllipsoid:
    return ConfidenceEllipsoid.from_shape(np.array([x, 0.0]), np.eye(2))


def lens_area(distance: float) -> float:
    """Intersection of two unit discs whose centres are `distance` apart"""
    return 2.0 * np.arccos(distance / 2.0) - (distance / 2.0) * np.sqrt(4.0 - distance**2)


def test_unit_disc_overlap_within_binomial_error():
    lens = lens_area(1.0)
    expected = lens / (2.0 * np.pi - lens)
    assert lens == pytest.approx(1.2284, abs=1e-4)

    volume, std_error = dissimilarity_calculator.overlap_volume_mc(unit_disc(0.0), unit_disc(1.0), 100_000, seed=5)
    assert abs(volume - lens) < 4.0 * std_error

    ratio = dissimilarity_calculator.overlap_ratio(unit_disc(0.0), unit_disc(1.0), 100_000, seed=5)
    ratio_error = std_error * 2.0 * np.pi / (2.0 * np.pi - lens) ** 2
    assert abs(ratio - expected) < 4.0 * ratio_error


@pytest.mark.slow
def test_unit_disc_overlap_converges():
    lens = lens_area(1.0)
    expected = lens / (2.0 * np.pi - lens)
    ratio = dissimilarity_calculator.overlap_ratio(unit_disc(0.0), unit_disc(1.0), 1_000_000, seed=17)
    assert abs(ratio - expected) / expected < 0.01


def test_identical_ellipsoids_have_zero_dissimilarity():
    assert dissimilarity_calculator.ellipsoid_dissimilarity(unit_disc(0.3), unit_disc(0.3), 1_000, seed=1) == 0.0


def test_distant_ellipsoids_have_unit_dissimilarity():
    assert dissimilarity_calculator.ellipsoid_dissimilarity(unit_disc(0.0), unit_disc(5.0), 1_000, seed=1) == 1.0


def test_nested_ellipsoids_ratio_is_volume_share():
    inner = ConfidenceEllipsoid.from_shape(np.zeros(2), 0.25 * np.eye(2))
    outer = ConfidenceEllipsoid.from_shape(np.zeros(2), np.eye(2))
    assert dissimilarity_calculator.overlap_ratio(inner, outer, 5_000, seed=3) == pytest.approx(0.25)


def test_too_few_samples_rejected():
    with pytest.raises(ValueError):
        dissimilarity_calculator.overlap_volume_mc(unit_disc(0.0), unit_disc(1.0), 999, seed=0)


def test_euclidean_distance():
    assert euclidean_distance(np.zeros(4), np.array([1.0, 2.0, 2.0, 0.0])) == 3.0
    with pytest.raises(ValueError):
        euclidean_distance(np.zeros(4), np.zeros(3))


def test_matrix_is_symmetric_with_zero_diagonal(var_fits, fit_ids):
    matrix = dissimilarity_calculator.build_matrix(var_fits, fit_ids, "ellipsoid", 0.05, 2_000, seed=7)
    assert matrix.values.shape == (6, 6)
    np.testing.assert_array_equal(matrix.values, matrix.values.T)
    np.testing.assert_array_equal(np.diag(matrix.values), 0.0)
    assert np.all((matrix.values >= 0.0) & (matrix.values <= 1.0))
    assert matrix.account_ids == fit_ids
    assert (matrix.mc_samples, matrix.seed, matrix.alpha) == (2_000, 7, 0.05)


def test_matrix_does_not_depend_on_thread_count(var_fits, fit_ids):
    single = dissimilarity_calculator.build_matrix(var_fits, fit_ids, "ellipsoid", 0.05, 2_000, seed=7, n_jobs=1)
    calculator = DissimilarityCalculator()
    calculator.batch_size = 2
    threaded = calculator.build_matrix(var_fits, fit_ids, "ellipsoid", 0.05, 2_000, seed=7, n_jobs=4)
    np.testing.assert_array_equal(single.values, threaded.values)


def test_same_regime_accounts_are_closer(var_fits, fit_ids):
    matrix = dissimilarity_calculator.build_matrix(var_fits, fit_ids, "ellipsoid", 0.05, 2_000, seed=7)
    within = matrix.values[0, 2]
    across = matrix.values[0, 1]
    assert within < across


def test_euclidean_matrix_matches_theta_distances(var_fits, fit_ids):
    matrix = dissimilarity_calculator.build_matrix(var_fits, fit_ids, "euclidean")
    thetas = np.array([fit.theta for fit in var_fits])
    expected = np.sqrt(((thetas[:, None, :] - thetas[None, :, :]) ** 2).sum(axis=2))
    np.testing.assert_allclose(matrix.values, expected, atol=1e-12)
    assert matrix.mc_samples == 0
    assert matrix.alpha is None


def test_cross_dissimilarities_shape(var_fits, fit_ids):
    values = dissimilarity_calculator.cross_dissimilarities(
        var_fits[:4], fit_ids[:4], var_fits[4:], fit_ids[4:], "ellipsoid", 0.05, 1_000, seed=2
    )
    assert values.shape == (4, 2)


def test_failing_fit_names_the_account(var_fits, fit_ids):
    short = VarFit(theta=np.zeros(4), psi=np.eye(4), sigma_u=np.eye(2), t_len=5, n_eff=4)
    with pytest.raises(DissimilarityError) as error:
        dissimilarity_calculator.build_matrix(
            var_fits[:2] + [short], fit_ids[:2] + ["short"], "ellipsoid", 0.05, 1_000
        )
    assert error.value.account_id == "short"


def test_matrix_cache_round_trip(tmp_path, var_fits, fit_ids):
    cache = MatrixCache(tmp_path / "cache")
    matrix = dissimilarity_calculator.build_matrix(var_fits, fit_ids, "euclidean")
    key = cache.key("euclidean", 0.05, 20_000, 1, fits_digest(var_fits, fit_ids))

    assert cache.load(key) is None
    cache.store(key, matrix)
    restored = cache.load(key)
    np.testing.assert_array_equal(restored.values, matrix.values)
    assert restored.account_ids == fit_ids


def test_fits_digest_tracks_parameters(var_fits, fit_ids):
    changed = list(var_fits)
    changed[0] = VarFit(
        theta=var_fits[0].theta + 1e-12,
        psi=var_fits[0].psi,
        sigma_u=var_fits[0].sigma_u,
        t_len=var_fits[0].t_len,
        n_eff=var_fits[0].n_eff,
    )
    assert fits_digest(var_fits, fit_ids) == fits_digest(list(var_fits), list(fit_ids))
    assert fits_digest(var_fits, fit_ids) != fits_digest(changed, fit_ids)


def overlapping_pair(transform=np.eye(4), shift=np.zeros(4)):
    first_shape = np.diag([1.0, 2.0, 0.5, 1.5])
    second_shape = np.array([[1.5, 0.4, 0.0, 0.0], [0.4, 1.0, 0.0, 0.2], [0.0, 0.0, 0.8, 0.0], [0.0, 0.2, 0.0, 1.2]])
    first_center = np.zeros(4)
    second_center = np.array([0.6, -0.3, 0.2, 0.4])
    return (
        ConfidenceEllipsoid.from_shape(transform @ first_center + shift, transform @ first_shape @ transform.T),
        ConfidenceEllipsoid.from_shape(transform @ second_center + shift, transform @ second_shape @ transform.T),
    )


def test_overlap_ratio_is_affine_invariant():
    transform = np.array([[2.0, 0.5, 0.0, 0.0], [0.0, 1.0, 0.3, 0.0], [0.1, 0.0, 0.5, 0.0], [0.0, 0.0, 0.4, 3.0]])
    plain = dissimilarity_calculator.overlap_ratio(*overlapping_pair(), 100_000, seed=8)
    mapped = dissimilarity_calculator.overlap_ratio(*overlapping_pair(transform, np.full(4, 5.0)), 100_000, seed=9)
    assert 0.05 < plain < 0.95
    assert mapped == pytest.approx(plain, abs=0.01)


def test_contained_ellipsoid_overlap_is_its_own_volume():
    inner = ConfidenceEllipsoid.from_shape(np.array([0.3, -0.2, 0.1, 0.0]), 0.2 * np.eye(4))
    outer = ConfidenceEllipsoid.from_shape(np.zeros(4), np.diag([2.0, 3.0, 2.5, 4.0]))
    for first, second in ((inner, outer), (outer, inner)):
        volume, std_error = dissimilarity_calculator.overlap_volume_mc(first, second, 5_000, seed=4)
        assert abs(volume - inner.volume) <= 3.0 * std_error + 1e-12 * inner.volume
    ratio = dissimilarity_calculator.overlap_ratio(inner, outer, 5_000, seed=4)
    assert ratio == pytest.approx(inner.volume / outer.volume)


def test_standard_error_falls_with_root_n():
    pair = overlapping_pair()
    errors = [dissimilarity_calculator.overlap_volume_mc(*pair, n, seed=6)[1] for n in (1_000, 10_000, 100_000)]
    for coarse, fine in zip(errors, errors[1:]):
        assert coarse / fine == pytest.approx(np.sqrt(10.0), rel=0.2)
