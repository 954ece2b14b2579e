import itertools

import numpy as np
import pytest
from sklearn.metrics import adjusted_rand_score

from modeling.clustering import KMedoids, assign_to_medoids, k_medoids
from modeling.dissimilarity import DissimilarityMatrix
from modeling.var_model import VarFit
from utils.errors import ClusteringError


def as_matrix(values, measure="euclidean"):
    return DissimilarityMatrix(np.asarray(values, dtype=float), measure, [f"a{i}" for i in range(len(values))])


def random_matrix(rng, n):
    points = rng.normal(size=(n, 2))
    return np.sqrt(((points[:, None, :] - points[None, :, :]) ** 2).sum(axis=2))


def exhaustive_cost(d, k):
    return min(d[:, list(medoids)].min(axis=1).sum() for medoids in itertools.combinations(range(d.shape[0]), k))


def blocks():
    """Three tight groups of sizes 4, 3 and 2"""
    groups = [0, 0, 0, 0, 1, 1, 1, 2, 2]
    centres = {0: 0.0, 1: 10.0, 2: 25.0}
    x = np.array([centres[g] + 0.1 * i for i, g in enumerate(groups)])
    return np.abs(x[:, None] - x[None, :]), groups


def test_pam_reaches_exhaustive_optimum_on_small_problems():
    rng = np.random.default_rng(21)
    optimal = 0
    for _ in range(50):
        d = random_matrix(rng, 6)
        result = k_medoids.k_medoids(as_matrix(d), 2)
        best = exhaustive_cost(d, 2)
        assert result.total_cost >= best - 1e-9
        optimal += abs(result.total_cost - best) < 1e-9
    assert optimal >= 45


def test_well_separated_groups_are_recovered():
    d, groups = blocks()
    result = k_medoids.k_medoids(as_matrix(d), 3)
    assert result.labels.tolist() == groups
    assert result.sizes.tolist() == [4, 3, 2]


def test_clusters_are_ordered_by_size_and_contain_their_medoids():
    rng = np.random.default_rng(8)
    result = k_medoids.k_medoids(as_matrix(random_matrix(rng, 30)), 4)
    sizes = result.sizes
    assert all(sizes[i] >= sizes[i + 1] for i in range(3))
    for cluster, medoid in enumerate(result.medoid_indices):
        assert result.labels[medoid] == cluster
    np.testing.assert_array_equal(result.assignment.sum(axis=1), 1)


def test_total_cost_sums_distances_to_own_medoid():
    rng = np.random.default_rng(9)
    d = random_matrix(rng, 12)
    result = k_medoids.k_medoids(as_matrix(d), 3)
    medoids = result.medoid_indices[result.labels]
    assert result.total_cost == pytest.approx(d[np.arange(12), medoids].sum())


def test_result_does_not_depend_on_threads():
    rng = np.random.default_rng(10)
    matrix = as_matrix(random_matrix(rng, 25))
    serial = KMedoids(n_jobs=1).k_medoids(matrix, 3)
    threaded = KMedoids(n_jobs=3).k_medoids(matrix, 3)
    np.testing.assert_array_equal(serial.medoid_indices, threaded.medoid_indices)
    np.testing.assert_array_equal(serial.assignment, threaded.assignment)


def test_k_must_lie_between_two_and_n():
    d, _ = blocks()
    with pytest.raises(ClusteringError):
        k_medoids.k_medoids(as_matrix(d), 1)
    with pytest.raises(ClusteringError):
        k_medoids.k_medoids(as_matrix(d), 9)


def test_non_finite_matrix_is_rejected():
    d, _ = blocks()
    d[0, 1] = d[1, 0] = np.nan
    with pytest.raises(ClusteringError):
        k_medoids.k_medoids(as_matrix(d), 2)


def test_ties_go_to_the_lowest_index():
    assert assign_to_medoids([0.3, 0.1, 0.1]).tolist() == [0, 1, 0]
    assert assign_to_medoids([0.0, 0.0]).tolist() == [1, 0]


def test_assignment_needs_finite_distances():
    with pytest.raises(ClusteringError):
        assign_to_medoids([])
    with pytest.raises(ClusteringError):
        assign_to_medoids([0.1, np.inf])


def test_test_account_matching_a_medoid_joins_its_cluster():
    def fit(theta):
        return VarFit(theta=np.asarray(theta, dtype=float), psi=np.eye(4), sigma_u=np.eye(2), t_len=30, n_eff=29)

    medoids = [fit([0.0, 0.0, 0.0, 0.0]), fit([1.0, 1.0, 0.0, 0.0]), fit([-1.0, 0.0, 2.0, 0.0])]
    tests = [fit([1.0, 1.0, 0.0, 0.0]), fit([-0.9, 0.0, 1.8, 0.0]), fit([0.1, 0.0, 0.0, 0.0])]
    assignment = k_medoids.assign_test_accounts(
        tests, ["t1", "t2", "t3"], medoids, ["m1", "m2", "m3"], measure="euclidean"
    )
    assert assignment.tolist() == [[0, 1, 0], [0, 0, 1], [1, 0, 0]]


def test_no_test_accounts():
    assignment = k_medoids.assign_test_accounts([], [], [None, None], ["m1", "m2"], measure="euclidean")
    assert assignment.shape == (0, 2)


def test_swaps_never_raise_the_cost():
    rng = np.random.default_rng(11)
    d = random_matrix(rng, 40)
    start = k_medoids.build_phase(d, 4)
    costs = [KMedoids(max_iter=m).swap_phase(d, start)[1] for m in range(8)]
    assert costs[0] == pytest.approx(d[:, start].min(axis=1).sum())
    assert all(later <= earlier for earlier, later in zip(costs, costs[1:]))


def test_relabelling_objects_permutes_the_partition():
    rng = np.random.default_rng(12)
    d = random_matrix(rng, 30)
    order = rng.permutation(30)
    original = k_medoids.k_medoids(as_matrix(d), 3)
    shuffled = k_medoids.k_medoids(as_matrix(d[np.ix_(order, order)]), 3)

    labels = np.empty(30, dtype=int)
    labels[order] = shuffled.labels
    assert adjusted_rand_score(original.labels, labels) == 1.0
    assert shuffled.total_cost == pytest.approx(original.total_cost)
