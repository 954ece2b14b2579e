"""
Pipeline Runner
Stage functions shared by one-shot and stage-wise runs; each stage reads the previous stage's artifacts
"""

from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
from loguru import logger

from config import PipelineConfig, settings
from data.account_profile import AccountProfile
from data.data_splitter import data_splitter
from data.data_validator import data_validator
from data.file_processor import file_processor
from data.synthetic_generator import synthetic_generator
from evaluation.metrics import EvaluationReport, evaluate_scores
from modeling.dissimilarity import DissimilarityMatrix, MatrixCache, fits_digest
from reports.cluster_profiler import cluster_profiler
from reports.excel_exporter import excel_exporter
from reports.report_generator import report_generator
from scoring.experiments import CLUSTER_DESIGNS, ExperimentRunner, ModelledSample
from scoring.scorecard import model_name
from utils.errors import BehaviourError, ConfigError
from utils.seeding import MC_ASSIGN, MC_PAIRS, SPLIT, SYNTHETIC, derive_seed

ACCOUNTS_FILE = "accounts.csv"
TRUE_CLUSTERS_FILE = "true_clusters.csv"
SPLIT_FILE = "split.csv"
MANIFEST_FILE = "manifest.json"
WORKBOOK_FILE = "scorecard.xlsx"
NON_ARTIFACTS = {"run.log", "FAILED"}


def model_stem(design: str, measure: str) -> str:
    """File-name form of a model label"""
    return design if design == "aggregate" else f"{design}_{measure}"


class PipelineRunner:
    """
    Execute pipeline stages for one configuration
    """

    def __init__(self, config: PipelineConfig):
        """
        Initialize pipeline runner

        Args:
            config: Validated run configuration
        """
        self.config = config
        self.output_dir = Path(config.output_dir)
        self.experiments = ExperimentRunner.from_options(config.t_min, config.covariance, config.c_convention)
        self.cache = MatrixCache(self.output_dir / settings.cache_dir_name)

    # Paths and seeds

    def experiment_dir(self, experiment: str) -> Path:
        return self.output_dir / experiment

    def seeds(self) -> Dict[str, int]:
        root = self.config.seed
        return {
            "root": root,
            SPLIT: derive_seed(root, SPLIT),
            MC_PAIRS: derive_seed(root, MC_PAIRS),
            MC_ASSIGN: derive_seed(root, MC_ASSIGN),
            SYNTHETIC: derive_seed(root, SYNTHETIC),
        }

    @property
    def uses_clusters(self) -> bool:
        return any(design in CLUSTER_DESIGNS for design in self.config.designs)

    # Inputs

    def accounts_path(self) -> Path:
        if self.config.input_path is not None:
            return Path(self.config.input_path)
        return self.output_dir / ACCOUNTS_FILE

    def load_portfolio(self) -> List[AccountProfile]:
        """Input accounts, or the simulated portfolio written by `simulate`"""
        path = self.accounts_path()
        if self.config.synthetic_spec is not None and not path.is_file():
            raise FileNotFoundError(f"Synthetic accounts not found: {path} (run `simulate` first)")
        return file_processor.load_accounts(path, consecutive_misses=self.config.consecutive_misses)

    def true_clusters(self) -> Optional[Dict[str, int]]:
        path = self.output_dir / TRUE_CLUSTERS_FILE
        if self.config.synthetic_spec is None or not path.is_file():
            return None
        return file_processor.read_true_clusters(path)

    def load_sample(self, experiment: str, partition: str) -> ModelledSample:
        """Rebuild a modelled sample from labels.csv and the fits file"""
        directory = self.experiment_dir(experiment)
        labels = report_generator.read_labels(directory / "labels.csv")
        labels = labels[labels["partition"] == partition]
        ids, fits = report_generator.read_fits(directory / f"fits_{partition}.csv")
        if ids != labels["account_id"].tolist():
            raise BehaviourError(f"{experiment}: fits_{partition}.csv and labels.csv disagree; rerun `fit`")
        return ModelledSample(
            partition=partition,
            account_ids=ids,
            fits=fits,
            labels=labels["label"].to_numpy(dtype=np.int64),
            aggregates=labels[["mean_repay", "mean_utilisation"]].to_numpy(dtype=float).reshape(-1, 2),
        )

    # Stages

    def simulate(self) -> Path:
        """Generate the synthetic portfolio and its ground-truth sidecar"""
        if self.config.synthetic_spec is None:
            raise ConfigError("`simulate` requires a synthetic spec (--synthetic)")

        spec = synthetic_generator.load_spec(self.config.synthetic_spec)
        spec = spec.model_copy(update={"seed": self.seeds()[SYNTHETIC]})
        portfolio = synthetic_generator.generate_synthetic(spec)

        path = file_processor.write_accounts(portfolio.accounts, self.output_dir / ACCOUNTS_FILE)
        file_processor.write_true_clusters(portfolio.true_clusters, self.output_dir / TRUE_CLUSTERS_FILE)
        return path

    def fit(self) -> None:
        """Split the portfolio and fit VAR(1) models on each experiment's modelled windows"""
        accounts = self.load_portfolio()
        seeds = self.seeds()
        train, test = data_splitter.split_train_test(
            accounts, self.config.train_fraction, seeds[SPLIT], self.config.stratify
        )
        report_generator.write_split(
            [a.account_id for a in train], [a.account_id for a in test], self.output_dir / SPLIT_FILE
        )

        for experiment in self.config.experiments:
            directory = self.experiment_dir(experiment)
            train_sample, excluded_train = self.experiments.prepare_sample(train, experiment, "train")
            test_sample, excluded_test = self.experiments.prepare_sample(test, experiment, "test")

            report_generator.write_labels([train_sample, test_sample], directory / "labels.csv")
            report_generator.write_fits(train_sample.account_ids, train_sample.fits, directory / "fits_train.csv")
            report_generator.write_fits(test_sample.account_ids, test_sample.fits, directory / "fits_test.csv")
            report_generator.write_excluded(excluded_train + excluded_test, directory / "excluded.csv")

        self.write_manifest()

    def dissim(self) -> None:
        """Training dissimilarity matrix per experiment, served from the cache when possible"""
        if not self.uses_clusters:
            logger.info("⏭️  No cluster design selected; skipping dissimilarities")
            return

        config = self.config
        for experiment in config.experiments:
            train = self.load_sample(experiment, "train")
            key = self.cache.key(
                config.measure,
                config.alpha,
                config.n_samples,
                self.seeds()[MC_PAIRS],
                fits_digest(train.fits, train.account_ids),
                config.c_convention,
            )
            matrix = self.cache.load(key)
            if matrix is None:
                matrix = self.experiments.train_matrix(
                    train, config.measure, config.alpha, config.n_samples, config.seed, config.threads
                )
                self.cache.store(key, matrix)
            report_generator.write_matrix(matrix, self.experiment_dir(experiment) / f"matrix_{config.measure}.csv")

    def read_matrix(self, experiment: str) -> DissimilarityMatrix:
        config = self.config
        ellipsoid = config.measure == "ellipsoid"
        return report_generator.read_matrix(
            self.experiment_dir(experiment) / f"matrix_{config.measure}.csv",
            config.measure,
            config.n_samples if ellipsoid else 0,
            self.seeds()[MC_PAIRS],
            config.alpha if ellipsoid else None,
        )

    def cluster(self) -> None:
        """PAM on the training matrix, hold-out allocation and cluster profiles"""
        if not self.uses_clusters:
            logger.info("⏭️  No cluster design selected; skipping clustering")
            return

        config = self.config
        portfolio = {account.account_id: account for account in self.load_portfolio()}
        truth = self.true_clusters()

        for experiment in config.experiments:
            directory = self.experiment_dir(experiment)
            train = self.load_sample(experiment, "train")
            test = self.load_sample(experiment, "test")
            matrix = self.read_matrix(experiment)
            if matrix.account_ids != train.account_ids:
                raise BehaviourError(f"{experiment}: matrix and training fits disagree; rerun `dissim`")

            clustering, test_assignment = self.experiments.cluster_matrix(
                matrix, train, test, config.k, config.alpha, config.n_samples, config.seed, config.threads
            )
            measure = config.measure
            report_generator.write_clusters(
                clustering,
                test.account_ids,
                test_assignment,
                directory / f"clusters_{measure}.csv",
                directory / f"clusters_{measure}.json",
            )

            profiles = [self.experiments.modelled_window(portfolio[i], experiment)[0] for i in train.account_ids]
            tables = cluster_profiler.profile_clusters(
                profiles,
                clustering.labels,
                train.labels,
                config.k,
                thetas=[fit.theta for fit in train.fits],
                true_clusters=truth,
            )
            for name, table in tables.items():
                if isinstance(table, pd.DataFrame):
                    report_generator.write_csv(table, directory / f"{name}_{measure}.csv")
                else:
                    report_generator.write_json(table, directory / f"{name}_{measure}.json")

    def score(self) -> None:
        """Fit every design on the training sample and score the hold-out sample"""
        config = self.config
        for experiment in config.experiments:
            directory = self.experiment_dir(experiment)
            train = self.load_sample(experiment, "train")
            test = self.load_sample(experiment, "test")
            self.experiments.check_labels(experiment, train, test)

            allocations = {"train": None, "test": None}
            if self.uses_clusters:
                allocations = report_generator.read_clusters(directory / f"clusters_{config.measure}.csv", config.k)
                ids = (list(allocations["train_ids"]), list(allocations["test_ids"]))
                if ids != (train.account_ids, test.account_ids):
                    raise BehaviourError(f"{experiment}: clusters and fits disagree; rerun `cluster`")

            for design in config.designs:
                name = model_name(design, config.measure)
                fitted, scores = self.experiments.score_design(
                    design,
                    train.aggregates,
                    allocations["train"],
                    train.labels,
                    test.aggregates,
                    allocations["test"],
                    model=name,
                    ridge=config.ridge,
                )
                stem = model_stem(design, config.measure)
                report_generator.write_coefficients(fitted, directory / f"coefficients_{stem}.csv")
                report_generator.write_scores(test.account_ids, test.labels, scores, directory / f"scores_{stem}.csv")
                if fitted.separation_flag:
                    logger.warning(f"⚠️  {experiment}/{name}: coefficients reflect quasi-complete separation")

    def evaluate(self) -> Dict[str, List[EvaluationReport]]:
        """Four metrics per model and experiment, optional workbook, final manifest"""
        config = self.config
        results: Dict[str, List[EvaluationReport]] = {}

        for experiment in config.experiments:
            directory = self.experiment_dir(experiment)
            reports = []
            for design in config.designs:
                scores = report_generator.read_scores(directory / f"scores_{model_stem(design, config.measure)}.csv")
                measure = config.measure if design in CLUSTER_DESIGNS else None
                reports.append(
                    evaluate_scores(
                        scores["score"].to_numpy(dtype=float),
                        scores["label"].to_numpy(dtype=np.int64),
                        model_name(design, config.measure),
                        design,
                        measure,
                        config.severity,
                    )
                )
            report_generator.write_evaluation(
                reports,
                directory / f"evaluation_{config.measure}.json",
                directory / f"evaluation_{config.measure}.csv",
            )
            results[experiment] = reports

        if config.excel:
            self.export_workbook(results)
        self.write_manifest()
        return results

    def pipeline(self) -> Dict[str, List[EvaluationReport]]:
        """ingest -> fit -> matrix -> cluster -> score -> evaluate"""
        if self.config.synthetic_spec is not None:
            self.simulate()
        self.fit()
        self.dissim()
        self.cluster()
        self.score()
        return self.evaluate()

    # Manifest and workbook

    def artifact_list(self) -> List[str]:
        cache_dir = self.output_dir / settings.cache_dir_name
        return [
            path.relative_to(self.output_dir).as_posix()
            for path in self.output_dir.rglob("*")
            if path.is_file() and path.name not in NON_ARTIFACTS and cache_dir not in path.parents
        ]

    def evaluated_measures(self) -> List[str]:
        """Measures with an evaluation file in any experiment directory"""
        found = {
            path.stem[len("evaluation_"):]
            for experiment in self.config.experiments
            for path in self.experiment_dir(experiment).glob("evaluation_*.json")
        }
        return sorted(found)

    def write_manifest(self) -> Path:
        input_info = None
        portfolio = None
        accounts = self.accounts_path()
        if accounts.is_file():
            input_info = file_processor.get_file_info(accounts)
            portfolio = data_validator.get_portfolio_summary(self.load_portfolio())
        manifest = report_generator.build_manifest(
            self.config.manifest_dict(),
            self.seeds(),
            input_info,
            self.artifact_list(),
            portfolio=portfolio,
            evaluated_measures=self.evaluated_measures(),
        )
        return report_generator.write_manifest(manifest, self.output_dir / MANIFEST_FILE)

    def export_workbook(self, results: Dict[str, List[EvaluationReport]]) -> None:
        config = self.config
        evaluation = pd.DataFrame(
            [
                {"experiment": experiment, **report.to_dict()}
                for experiment, reports in results.items()
                for report in reports
            ]
        )
        coefficients = []
        clusters = []
        for experiment in results:
            directory = self.experiment_dir(experiment)
            for design in config.designs:
                table = report_generator.read_csv(directory / f"coefficients_{model_stem(design, config.measure)}.csv")
                table.insert(0, "model", model_name(design, config.measure))
                table.insert(0, "experiment", experiment)
                coefficients.append(table)
            sizes = directory / f"cluster_sizes_{config.measure}.csv"
            if sizes.is_file():
                table = report_generator.read_csv(sizes)
                table.insert(0, "experiment", experiment)
                clusters.append(table)

        manifest = pd.DataFrame(
            [(key, str(value)) for key, value in config.manifest_dict().items()], columns=["setting", "value"]
        )
        sheets = {
            "Evaluation": evaluation,
            "Coefficients": pd.concat(coefficients, ignore_index=True),
            "Manifest": manifest,
        }
        if clusters:
            sheets["Clusters"] = pd.concat(clusters, ignore_index=True)

        success, _, error = excel_exporter.export_workbook(sheets, self.output_dir / WORKBOOK_FILE)
        if not success:
            logger.warning(f"⚠️  Workbook not written: {error}")
