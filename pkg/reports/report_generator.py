"""
Report Generator
Writes and reads the CSV/JSON artifacts of every pipeline stage
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import scipy
import sklearn
from loguru import logger

from config import APP_VERSION
from evaluation.metrics import REPORT_COLUMNS, EvaluationReport
from modeling.clustering import ClusteringResult
from modeling.dissimilarity import DissimilarityMatrix
from modeling.var_model import VarFit
from scoring.experiments import ExcludedAccount, ModelledSample
from scoring.logistic_model import LogisticModel

P = 4
THETA_COLUMNS = [f"theta_{i}" for i in range(1, P + 1)]
PSI_COLUMNS = [f"psi_{i}_{j}" for i in range(1, P + 1) for j in range(i, P + 1)]
SIGMA_COLUMNS = ["sigma_1_1", "sigma_1_2", "sigma_2_2"]
FIT_COLUMNS = ["account_id", "t_len", "n_eff"] + THETA_COLUMNS + PSI_COLUMNS + SIGMA_COLUMNS
LABEL_COLUMNS = ["account_id", "partition", "label", "mean_repay", "mean_utilisation"]

DEVIATION_NOTES = [
    "Ellipsoid shape is p * F(p, T - p - 1, 1 - alpha) * Psi (squared-radius convention) unless c_convention = sqrt.",
    "Ellipsoid volume uses the determinant of the full scaled shape matrix c * Psi.",
    "Monte Carlo overlap samples uniformly inside the smaller ellipsoid; ratios are clamped to [0, 1].",
    "Near-singular coefficient covariances are ridge-regularised with 1e-8 * trace / p on the diagonal.",
    "Hold-out accounts are allocated to the nearest training medoid; clusters are ordered by descending size.",
    "Accounts shorter than t_min (or with degenerate series) are excluded and listed in excluded.csv.",
]


class ReportGenerator:
    """
    Persist pipeline artifacts as UTF-8 CSV and JSON
    """

    def __init__(self):
        """Initialize report generator"""
        self.encoding = "utf-8"

    # Generic writers

    def write_csv(self, frame: pd.DataFrame, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, encoding=self.encoding, lineterminator="\n")
        logger.debug(f"📄 Wrote {path.name} ({len(frame)} rows)")
        return path

    def read_csv(self, path: Path) -> pd.DataFrame:
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"Artifact not found: {path} (run the previous stage first)")
        return pd.read_csv(
            path,
            encoding=self.encoding,
            float_precision="round_trip",
            dtype={"account_id": str},
            keep_default_na=False,
            na_values=[""],
        )

    def write_json(self, data: Dict[str, Any], path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(data, indent=2, ensure_ascii=False) + "\n", encoding=self.encoding)
        logger.debug(f"📄 Wrote {path.name}")
        return path

    # Split and labels

    def write_split(self, train_ids: Sequence[str], test_ids: Sequence[str], path: Path) -> Path:
        frame = pd.DataFrame(
            {
                "account_id": list(train_ids) + list(test_ids),
                "partition": ["train"] * len(train_ids) + ["test"] * len(test_ids),
            }
        )
        return self.write_csv(frame, path)

    def write_labels(self, samples: Sequence[ModelledSample], path: Path) -> Path:
        """Modelled accounts with their labels and aggregate features"""
        frames = [
            pd.DataFrame(
                {
                    "account_id": sample.account_ids,
                    "partition": sample.partition,
                    "label": sample.labels,
                    "mean_repay": sample.aggregates[:, 0],
                    "mean_utilisation": sample.aggregates[:, 1],
                },
                columns=LABEL_COLUMNS,
            )
            for sample in samples
        ]
        return self.write_csv(pd.concat(frames, ignore_index=True), path)

    def read_labels(self, path: Path) -> pd.DataFrame:
        return self.read_csv(path)

    def write_excluded(self, excluded: Sequence[ExcludedAccount], path: Path) -> Path:
        frame = pd.DataFrame(
            [(e.account_id, e.partition, e.reason) for e in excluded], columns=["account_id", "partition", "reason"]
        )
        return self.write_csv(frame, path)

    # VAR fits

    def fits_frame(self, account_ids: Sequence[str], fits: Sequence[VarFit]) -> pd.DataFrame:
        """One row per fit: theta, upper triangle of Psi and of Sigma_u"""
        upper = np.triu_indices(P)
        rows = []
        for account_id, fit in zip(account_ids, fits):
            sigma = fit.sigma_u
            rows.append(
                [account_id, fit.t_len, fit.n_eff]
                + list(fit.theta)
                + list(fit.psi[upper])
                + [sigma[0, 0], sigma[0, 1], sigma[1, 1]]
            )
        return pd.DataFrame(rows, columns=FIT_COLUMNS)

    def write_fits(self, account_ids: Sequence[str], fits: Sequence[VarFit], path: Path) -> Path:
        path = self.write_csv(self.fits_frame(account_ids, fits), path)
        logger.info(f"📄 Wrote {len(fits)} VAR fits to {path.name}")
        return path

    def read_fits(self, path: Path) -> Tuple[List[str], List[VarFit]]:
        """Inverse of write_fits"""
        frame = self.read_csv(path)
        missing = [column for column in FIT_COLUMNS if column not in frame.columns]
        if missing:
            raise ValueError(f"{Path(path).name} lacks columns {missing}")

        upper = np.triu_indices(P)
        fits = []
        for row in frame.itertuples(index=False):
            record = row._asdict()
            psi = np.zeros((P, P))
            psi[upper] = [record[column] for column in PSI_COLUMNS]
            psi = psi + np.triu(psi, 1).T
            sigma = np.array(
                [[record["sigma_1_1"], record["sigma_1_2"]], [record["sigma_1_2"], record["sigma_2_2"]]], dtype=float
            )
            fits.append(
                VarFit(
                    theta=np.array([record[column] for column in THETA_COLUMNS], dtype=float),
                    psi=psi,
                    sigma_u=sigma,
                    t_len=int(record["t_len"]),
                    n_eff=int(record["n_eff"]),
                )
            )
        return frame["account_id"].tolist(), fits

    # Dissimilarities and clusters

    def write_matrix(self, matrix: DissimilarityMatrix, path: Path) -> Path:
        """Square CSV; header and first column hold the account ids"""
        frame = pd.DataFrame(matrix.values, columns=matrix.account_ids)
        frame.insert(0, "account_id", matrix.account_ids)
        path = self.write_csv(frame, path)
        logger.info(f"📄 Wrote {matrix.n}x{matrix.n} {matrix.measure} matrix to {path.name}")
        return path

    def read_matrix(
        self, path: Path, measure: str, mc_samples: int = 0, seed: int = 0, alpha: Optional[float] = None
    ) -> DissimilarityMatrix:
        frame = self.read_csv(path)
        ids = frame["account_id"].tolist()
        values = frame[ids].to_numpy(dtype=float) if ids else np.zeros((0, 0))
        return DissimilarityMatrix(values, measure, ids, mc_samples, seed, alpha)

    def write_clusters(
        self,
        clustering: ClusteringResult,
        test_ids: Sequence[str],
        test_assignment: np.ndarray,
        csv_path: Path,
        json_path: Path,
    ) -> Tuple[Path, Path]:
        """
        Cluster allocations (1-based, C1 largest) and a JSON summary

        Args:
            clustering: Training clustering
            test_ids: Hold-out account ids
            test_assignment: Hold-out one-hot allocations
            csv_path: `account_id, partition, cluster` destination
            json_path: Summary destination

        Returns:
            Tuple of written paths
        """
        test_labels = np.argmax(test_assignment, axis=1) if len(test_ids) else np.zeros(0, dtype=np.int64)
        frame = pd.DataFrame(
            {
                "account_id": list(clustering.account_ids) + list(test_ids),
                "partition": ["train"] * len(clustering.account_ids) + ["test"] * len(test_ids),
                "cluster": np.concatenate([clustering.labels, test_labels]).astype(np.int64) + 1,
            }
        )
        self.write_csv(frame, csv_path)

        summary = {
            "measure": clustering.measure,
            "k": clustering.k,
            "medoid_ids": clustering.medoid_ids,
            "sizes": [int(size) for size in clustering.sizes],
            "test_sizes": [int(size) for size in np.bincount(test_labels, minlength=clustering.k)],
            "total_cost": clustering.total_cost,
            "swap_iterations": clustering.iterations,
            "seed": clustering.seed,
        }
        self.write_json(summary, json_path)
        logger.info(f"📄 Wrote {clustering.measure} clusters (sizes {summary['sizes']})")
        return Path(csv_path), Path(json_path)

    def read_clusters(self, path: Path, k: int) -> Dict[str, np.ndarray]:
        """One-hot allocations per partition, rows in file order"""
        frame = self.read_csv(path)
        allocations = {}
        for partition in ("train", "test"):
            labels = frame.loc[frame["partition"] == partition, "cluster"].to_numpy(dtype=np.int64) - 1
            onehot = np.zeros((labels.size, k), dtype=np.int64)
            onehot[np.arange(labels.size), labels] = 1
            allocations[partition] = onehot
            allocations[f"{partition}_ids"] = frame.loc[frame["partition"] == partition, "account_id"].to_numpy()
        return allocations

    # Models and evaluation

    def write_coefficients(self, model: LogisticModel, path: Path) -> Path:
        return self.write_csv(model.coefficient_table(), path)

    def write_scores(self, account_ids: Sequence[str], labels: np.ndarray, scores: np.ndarray, path: Path) -> Path:
        frame = pd.DataFrame({"account_id": list(account_ids), "label": labels, "score": scores})
        return self.write_csv(frame, path)

    def read_scores(self, path: Path) -> pd.DataFrame:
        return self.read_csv(path)

    def write_evaluation(self, reports: Sequence[EvaluationReport], json_path: Path, csv_path: Path) -> None:
        """Evaluation as JSON (all fields) and CSV (`model, h_measure, ks, gini, auc`)"""
        self.write_json({"models": [report.to_dict() for report in reports]}, json_path)
        self.write_csv(pd.DataFrame([report.to_row() for report in reports], columns=REPORT_COLUMNS), csv_path)
        logger.info(f"📊 Wrote evaluation of {len(reports)} models")

    # Manifest

    def build_manifest(
        self,
        config: Dict[str, Any],
        seeds: Dict[str, int],
        input_info: Optional[Dict[str, Any]] = None,
        artifacts: Optional[List[str]] = None,
        portfolio: Optional[Dict[str, Any]] = None,
        evaluated_measures: Optional[List[str]] = None,
    ) -> Dict[str, Any]:
        """
        Everything needed to rerun the pipeline

        Args:
            config: Manifest view of the configuration
            seeds: Root and derived seeds
            input_info: Input file fingerprint
            artifacts: Relative artifact paths
            portfolio: Portfolio summary of the input accounts
            evaluated_measures: Measures with evaluation files in the output directory

        Returns:
            Manifest dictionary
        """
        return {
            "app_version": APP_VERSION,
            "libraries": {
                "numpy": np.__version__,
                "pandas": pd.__version__,
                "scipy": scipy.__version__,
                "scikit-learn": sklearn.__version__,
            },
            "config": config,
            "seeds": seeds,
            "input": input_info,
            "portfolio": portfolio,
            "evaluated_measures": list(evaluated_measures or []),
            "deviations": DEVIATION_NOTES,
            "artifacts": sorted(artifacts or []),
        }

    def write_manifest(self, manifest: Dict[str, Any], path: Path) -> Path:
        path = self.write_json(manifest, path)
        logger.info(f"📄 Wrote run manifest to {path}")
        return path


# Global instance
report_generator = ReportGenerator()
