import json

import numpy as np
import pytest

from modeling.clustering import k_medoids
from modeling.dissimilarity import DissimilarityMatrix
from reports.report_generator import FIT_COLUMNS, report_generator
from scoring.experiments import ModelledSample


def test_fits_survive_a_round_trip(tmp_path, var_fits, fit_ids):
    path = report_generator.write_fits(fit_ids, var_fits, tmp_path / "fits_train.csv")
    ids, fits = report_generator.read_fits(path)
    assert ids == fit_ids
    for original, restored in zip(var_fits, fits):
        np.testing.assert_array_equal(restored.theta, original.theta)
        np.testing.assert_array_equal(restored.psi, original.psi)
        np.testing.assert_array_equal(restored.sigma_u, original.sigma_u)
        assert (restored.t_len, restored.n_eff) == (original.t_len, original.n_eff)


def test_fits_header(tmp_path, var_fits, fit_ids):
    path = report_generator.write_fits(fit_ids, var_fits, tmp_path / "fits.csv")
    header = path.read_text(encoding="utf-8").splitlines()[0]
    assert header.split(",") == FIT_COLUMNS


def test_matrix_round_trip_keeps_ids_and_values(tmp_path):
    rng = np.random.default_rng(4)
    values = rng.random((4, 4))
    values = (values + values.T) / 2.0
    np.fill_diagonal(values, 0.0)
    ids = ["007", "b", "c", "d"]
    matrix = DissimilarityMatrix(values, "ellipsoid", ids, 1000, 5, 0.05)

    path = report_generator.write_matrix(matrix, tmp_path / "matrix_ellipsoid.csv")
    restored = report_generator.read_matrix(path, "ellipsoid", 1000, 5, 0.05)
    assert restored.account_ids == ids
    np.testing.assert_array_equal(restored.values, values)


def test_clusters_are_written_one_based(tmp_path):
    values = np.array(
        [[0.0, 0.1, 0.9, 0.8], [0.1, 0.0, 0.85, 0.9], [0.9, 0.85, 0.0, 0.1], [0.8, 0.9, 0.1, 0.0]]
    )
    matrix = DissimilarityMatrix(values, "euclidean", ["a", "b", "c", "d"])
    clustering = k_medoids.k_medoids(matrix, 2)
    test_assignment = np.array([[0, 1], [1, 0]])

    csv_path, json_path = report_generator.write_clusters(
        clustering, ["t1", "t2"], test_assignment, tmp_path / "clusters.csv", tmp_path / "clusters.json"
    )
    frame = report_generator.read_csv(csv_path)
    assert set(frame["cluster"]) == {1, 2}
    summary = json.loads(json_path.read_text(encoding="utf-8"))
    assert summary["k"] == 2
    assert summary["test_sizes"] == [1, 1]

    allocations = report_generator.read_clusters(csv_path, 2)
    assert list(allocations["train_ids"]) == ["a", "b", "c", "d"]
    np.testing.assert_array_equal(allocations["test"], test_assignment)
    assert allocations["train"].sum(axis=1).tolist() == [1, 1, 1, 1]


def test_labels_round_trip(tmp_path, var_fits, fit_ids):
    sample = ModelledSample(
        partition="train",
        account_ids=fit_ids,
        fits=var_fits,
        labels=np.array([0, 1, 0, 0, 1, 0]),
        aggregates=np.arange(12, dtype=float).reshape(6, 2) / 7.0,
    )
    path = report_generator.write_labels([sample], tmp_path / "labels.csv")
    frame = report_generator.read_labels(path)
    assert frame["account_id"].tolist() == fit_ids
    assert frame["label"].tolist() == [0, 1, 0, 0, 1, 0]
    np.testing.assert_array_equal(frame[["mean_repay", "mean_utilisation"]].to_numpy(), sample.aggregates)


def test_split_lists_train_before_test(tmp_path):
    path = report_generator.write_split(["a", "b"], ["c"], tmp_path / "split.csv")
    frame = report_generator.read_csv(path)
    assert frame["account_id"].tolist() == ["a", "b", "c"]
    assert frame["partition"].tolist() == ["train", "train", "test"]


def test_missing_artifacts_point_at_the_previous_stage(tmp_path):
    with pytest.raises(FileNotFoundError, match="previous stage"):
        report_generator.read_csv(tmp_path / "absent.csv")


def test_manifest_contents():
    manifest = report_generator.build_manifest(
        {"k": 3}, {"root": 0}, None, ["predict/scores_aggregate.csv", "manifest.json", "accounts.csv"]
    )
    assert manifest["artifacts"] == ["accounts.csv", "manifest.json", "predict/scores_aggregate.csv"]
    assert set(manifest["libraries"]) == {"numpy", "pandas", "scipy", "scikit-learn"}
    assert manifest["deviations"]
    assert not any("time" in key for key in manifest)


def test_manifest_records_portfolio_and_measures():
    summary = {"account_count": 2, "default_count": 1}
    manifest = report_generator.build_manifest(
        {"k": 3}, {"root": 0}, None, [], portfolio=summary, evaluated_measures=["ellipsoid", "euclidean"]
    )
    assert manifest["portfolio"] == summary
    assert manifest["evaluated_measures"] == ["ellipsoid", "euclidean"]
