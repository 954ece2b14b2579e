"""
Cluster Profiler
Describes clusters in data space: sizes, default frequencies, behaviour means and delinquency trends
"""

from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd
from loguru import logger
from scipy.optimize import linear_sum_assignment
from sklearn.metrics import adjusted_rand_score

from data.account_profile import AccountProfile
from evaluation.projection import pca_project


def cluster_names(k: int) -> List[str]:
    return [f"C{label}" for label in range(1, k + 1)]


class ClusterProfiler:
    """
    Profile clusters found in parameter space
    """

    def __init__(self):
        """Initialize cluster profiler"""
        self.n_components = 3

    def cluster_sizes(self, labels: np.ndarray, k: int) -> pd.DataFrame:
        """Size and share of each cluster"""
        sizes = np.bincount(np.asarray(labels, dtype=np.int64), minlength=k)
        total = max(int(sizes.sum()), 1)
        return pd.DataFrame({"cluster": cluster_names(k), "size": sizes, "proportion": sizes / total})

    def default_crosstab(self, labels: np.ndarray, defaults: np.ndarray, k: int) -> pd.DataFrame:
        """
        Non-default and default frequencies per cluster

        Args:
            labels: 0-based cluster per account
            defaults: Binary default label per account
            k: Number of clusters

        Returns:
            DataFrame with cluster, non_default, default, default_rate
        """
        table = pd.crosstab(
            pd.Categorical(np.asarray(labels), categories=range(k)),
            pd.Categorical(np.asarray(defaults), categories=[0, 1]),
            dropna=False,
        )
        frame = pd.DataFrame(
            {
                "cluster": cluster_names(k),
                "non_default": table[0].to_numpy(dtype=np.int64),
                "default": table[1].to_numpy(dtype=np.int64),
            }
        )
        counts = frame["non_default"] + frame["default"]
        frame["default_rate"] = np.where(counts > 0, frame["default"] / counts.where(counts > 0, 1), np.nan)
        return frame

    def behaviour_means(self, profiles: Sequence[AccountProfile], labels: np.ndarray) -> pd.DataFrame:
        """
        Log sample means of repayment, balance and credit limit per account

        Non-positive means have no logarithm and are left empty.
        """
        rows = []
        for profile, label in zip(profiles, labels):
            means = [float(np.mean(series)) for series in (profile.repay, profile.balance, profile.credit_limit)]
            rows.append(
                [profile.account_id, f"C{int(label) + 1}"] + [np.log(m) if m > 0 else np.nan for m in means]
            )
        return pd.DataFrame(
            rows, columns=["account_id", "cluster", "log_mean_repay", "log_mean_balance", "log_mean_credit_limit"]
        )

    def delinquency_by_month(self, profiles: Sequence[AccountProfile], labels: np.ndarray, k: int) -> pd.DataFrame:
        """Mean delinquency count per cluster at each month, over accounts observed that month"""
        long = pd.DataFrame(
            [
                (f"C{int(label) + 1}", month, count)
                for profile, label in zip(profiles, labels)
                for month, count in enumerate(profile.delinquency, start=1)
            ],
            columns=["cluster", "month", "delinquency"],
        )
        if long.empty:
            return pd.DataFrame(columns=["month"] + cluster_names(k))

        wide = long.pivot_table(index="month", columns="cluster", values="delinquency", aggfunc="mean")
        wide = wide.reindex(columns=cluster_names(k)).reset_index()
        wide.columns.name = None
        return wide

    def pca_frame(self, account_ids: Sequence[str], thetas: Sequence[np.ndarray], labels: np.ndarray) -> pd.DataFrame:
        """Coordinates on the leading principal components with explained variance shares"""
        n_components = min(self.n_components, len(thetas[0]))
        projection = pca_project(thetas, n_components)
        frame = pd.DataFrame({"account_id": list(account_ids), "cluster": [f"C{int(c) + 1}" for c in labels]})
        for i in range(projection.coordinates.shape[1]):
            frame[f"pc{i + 1}"] = projection.coordinates[:, i]
        for i, share in enumerate(projection.explained_variance_ratio):
            frame[f"pc{i + 1}_variance_ratio"] = share
        return frame

    def cluster_agreement(self, true_labels: Sequence[int], labels: Sequence[int]) -> Dict[str, float]:
        """
        Agreement between recovered and true clusters

        Misassignment rate is one minus the accuracy under the best one-to-one
        matching of labels (Hungarian algorithm).
        """
        true_labels = np.asarray(true_labels, dtype=np.int64)
        labels = np.asarray(labels, dtype=np.int64)
        confusion = pd.crosstab(labels, true_labels).to_numpy()
        rows, columns = linear_sum_assignment(-confusion)
        matched = int(confusion[rows, columns].sum())
        return {
            "adjusted_rand_index": float(adjusted_rand_score(true_labels, labels)),
            "misassignment_rate": 1.0 - matched / max(labels.size, 1),
            "n_accounts": int(labels.size),
        }

    def profile_clusters(
        self,
        profiles: Sequence[AccountProfile],
        labels: np.ndarray,
        defaults: np.ndarray,
        k: int,
        thetas: Sequence[np.ndarray] = (),
        true_clusters: Optional[Mapping[str, int]] = None,
    ) -> Dict[str, object]:
        """
        All profiling tables for one clustering of the training sample

        Args:
            profiles: Modelled training profiles
            labels: 0-based cluster per profile
            defaults: Training default labels
            k: Number of clusters
            thetas: VAR coefficient vectors for the PCA export
            true_clusters: Ground-truth labels by account id (synthetic data)

        Returns:
            Dictionary of DataFrames plus the agreement summary when available
        """
        labels = np.asarray(labels)
        tables: Dict[str, object] = {
            "cluster_sizes": self.cluster_sizes(labels, k),
            "default_crosstab": self.default_crosstab(labels, defaults, k),
            "behaviour_means": self.behaviour_means(profiles, labels),
            "delinquency_by_month": self.delinquency_by_month(profiles, labels, k),
        }
        ids = [profile.account_id for profile in profiles]
        if len(thetas) >= 2:
            tables["pca"] = self.pca_frame(ids, thetas, labels)
        if true_clusters:
            known = [i for i, account_id in enumerate(ids) if account_id in true_clusters]
            if known:
                agreement = self.cluster_agreement([true_clusters[ids[i]] for i in known], labels[known])
                tables["agreement"] = agreement
                logger.info(
                    f"📊 Agreement with true clusters: ARI = {agreement['adjusted_rand_index']:.4f}, "
                    f"misassignment = {agreement['misassignment_rate']:.4f}"
                )
        return tables


# Global instance
cluster_profiler = ClusterProfiler()
