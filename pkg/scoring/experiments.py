"""
Default Experiments
Prediction and forecasting experiments built from clustering and logistic scorecards
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from data.account_profile import AccountProfile
from data.data_splitter import DataSplitter, data_splitter
from evaluation.metrics import EvaluationReport, evaluate_scores
from modeling.clustering import ClusteringResult, KMedoids
from modeling.dissimilarity import DissimilarityCalculator, DissimilarityMatrix, dissimilarity_calculator
from modeling.ellipsoid import EllipsoidBuilder
from modeling.var_model import VarEstimator, VarFit, var_estimator
from scoring.logistic_model import LogisticFitter, LogisticModel, logistic_fitter
from scoring.scorecard import aggregate_features, build_design, model_name
from utils.errors import BehaviourError, OneClassError
from utils.seeding import MC_ASSIGN, MC_PAIRS, derive_seed

CLUSTER_DESIGNS = ("cluster_dummies", "combined")


@dataclass
class ModelledSample:
    """
    Accounts of one partition that entered modelling

    For forecasting, profiles and fits cover the observation prefix only and
    labels come from the forecast window.
    """

    partition: str
    account_ids: List[str]
    fits: List[VarFit]
    labels: np.ndarray
    aggregates: np.ndarray
    profiles: List[AccountProfile] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.account_ids)


@dataclass(frozen=True)
class ExcludedAccount:
    account_id: str
    partition: str
    reason: str


@dataclass
class ExperimentResult:
    experiment: str
    train: ModelledSample
    test: ModelledSample
    excluded: List[ExcludedAccount]
    matrix: Optional[DissimilarityMatrix] = None
    clustering: Optional[ClusteringResult] = None
    test_assignment: Optional[np.ndarray] = None
    models: Dict[str, LogisticModel] = field(default_factory=dict)
    scores: Dict[str, np.ndarray] = field(default_factory=dict)
    reports: List[EvaluationReport] = field(default_factory=list)


class ExperimentRunner:
    """
    Run the prediction and forecasting experiments
    """

    def __init__(
        self,
        estimator: VarEstimator = var_estimator,
        calculator: DissimilarityCalculator = dissimilarity_calculator,
        fitter: LogisticFitter = logistic_fitter,
        splitter: DataSplitter = data_splitter,
    ):
        """
        Initialize experiment runner

        Args:
            estimator: VAR estimator (minimum length, covariance structure)
            calculator: Dissimilarity calculator (ellipsoid convention)
            fitter: Logistic fitter
            splitter: Observation/forecast splitter
        """
        self.estimator = estimator
        self.calculator = calculator
        self.fitter = fitter
        self.splitter = splitter

    @classmethod
    def from_options(
        cls, t_min: int = 8, covariance: str = "kronecker", c_convention: str = "squared"
    ) -> "ExperimentRunner":
        """Runner with non-default estimation options"""
        return cls(
            estimator=VarEstimator(t_min=t_min, covariance=covariance),
            calculator=DissimilarityCalculator(EllipsoidBuilder(c_convention)),
        )

    def modelled_window(self, account: AccountProfile, experiment: str) -> Tuple[AccountProfile, int]:
        """Profile entering the models and its label"""
        if experiment == "predict":
            return account, account.ever_default
        if experiment == "forecast":
            return self.splitter.split_observation_forecast(account)
        raise ValueError(f"Unknown experiment '{experiment}'")

    def prepare_sample(
        self, accounts: Sequence[AccountProfile], experiment: str, partition: str
    ) -> Tuple[ModelledSample, List[ExcludedAccount]]:
        """
        Fit VAR(1) models on the modelled windows

        Accounts whose window is too short or degenerate are excluded and
        reported rather than aborting the experiment.

        Args:
            accounts: Full account profiles
            experiment: `predict` or `forecast`
            partition: `train` or `test`

        Returns:
            Tuple of (sample, excluded accounts)
        """
        ids: List[str] = []
        fits: List[VarFit] = []
        labels: List[int] = []
        aggregates: List[np.ndarray] = []
        profiles: List[AccountProfile] = []
        excluded: List[ExcludedAccount] = []

        for account in accounts:
            try:
                profile, label = self.modelled_window(account, experiment)
                fit = self.estimator.fit_account(profile)
            except BehaviourError as e:
                excluded.append(ExcludedAccount(account.account_id, partition, str(e)))
                continue
            ids.append(account.account_id)
            fits.append(fit)
            labels.append(label)
            aggregates.append(aggregate_features(profile).as_array())
            profiles.append(profile)

        if excluded:
            logger.warning(f"⚠️  Excluded {len(excluded)} {partition} accounts from the {experiment} experiment")

        sample = ModelledSample(
            partition=partition,
            account_ids=ids,
            fits=fits,
            labels=np.array(labels, dtype=np.int64),
            aggregates=np.array(aggregates, dtype=float).reshape(-1, 2),
            profiles=profiles,
        )
        return sample, excluded

    def check_labels(self, experiment: str, *samples: ModelledSample) -> None:
        """Both classes must be present in every partition"""
        for sample in samples:
            if sample.n == 0 or sample.labels.min() == sample.labels.max():
                raise OneClassError(
                    f"{experiment} experiment: {sample.partition} labels contain a single class ({sample.n} accounts)"
                )

    def train_matrix(
        self,
        train: ModelledSample,
        measure: str = "ellipsoid",
        alpha: float = 0.05,
        n_samples: int = 20_000,
        seed: int = 0,
        n_jobs: int = 1,
    ) -> DissimilarityMatrix:
        """Pairwise dissimilarities of the training fits"""
        return self.calculator.build_matrix(
            train.fits, train.account_ids, measure, alpha, n_samples, derive_seed(seed, MC_PAIRS), n_jobs
        )

    def cluster_matrix(
        self,
        matrix: DissimilarityMatrix,
        train: ModelledSample,
        test: ModelledSample,
        k: int = 3,
        alpha: float = 0.05,
        n_samples: int = 20_000,
        seed: int = 0,
        n_jobs: int = 1,
    ) -> Tuple[ClusteringResult, np.ndarray]:
        """
        PAM on the training matrix, then allocation of the test accounts

        Returns:
            Tuple of (training clustering, test one-hot allocations)
        """
        pam = KMedoids(n_jobs=n_jobs)
        clustering = pam.k_medoids(matrix, k, seed)
        medoid_fits = [train.fits[i] for i in clustering.medoid_indices]
        test_assignment = pam.assign_test_accounts(
            test.fits,
            test.account_ids,
            medoid_fits,
            clustering.medoid_ids,
            matrix.measure,
            alpha,
            n_samples,
            derive_seed(seed, MC_ASSIGN),
            calculator=self.calculator,
        )
        return clustering, test_assignment

    def score_design(
        self,
        design: str,
        train_aggregates: np.ndarray,
        train_assignment: Optional[np.ndarray],
        train_labels: np.ndarray,
        test_aggregates: np.ndarray,
        test_assignment: Optional[np.ndarray],
        model: str = "",
        ridge: float = 0.0,
    ) -> Tuple[LogisticModel, np.ndarray]:
        """
        Fit one design on the training sample and score the test sample

        Returns:
            Tuple of (fitted model, test default probabilities)
        """
        x_train, terms = build_design(train_aggregates, train_assignment, design)
        x_test, _ = build_design(test_aggregates, test_assignment, design)
        fitted = self.fitter.fit_logistic(x_train, train_labels, terms, design=model or design, ridge=ridge)
        return fitted, self.fitter.predict_proba(fitted, x_test)

    def run_experiment(
        self,
        experiment: str,
        train_accounts: Sequence[AccountProfile],
        test_accounts: Sequence[AccountProfile],
        designs: Sequence[str] = ("cluster_dummies", "aggregate", "combined"),
        measure: str = "ellipsoid",
        k: int = 3,
        alpha: float = 0.05,
        n_samples: int = 20_000,
        seed: int = 0,
        n_jobs: int = 1,
        ridge: float = 0.0,
        severity: Optional[Tuple[float, float]] = None,
    ) -> ExperimentResult:
        """
        Full experiment in memory

        Args:
            experiment: `predict` (label = ever default over the profile) or
                `forecast` (models on the first 2/3, label from the last 1/3)
            train_accounts: Training profiles
            test_accounts: Hold-out profiles
            designs: Designs to fit
            measure: Dissimilarity for the cluster designs
            k: Number of clusters
            alpha: Ellipsoid significance level
            n_samples: Monte Carlo draws per pair
            seed: Root seed
            n_jobs: Worker threads
            ridge: Optional logistic L2 penalty
            severity: H-measure Beta parameters

        Returns:
            ExperimentResult with one report per design
        """
        logger.info(f"🔍 Running {experiment} experiment: {len(train_accounts)} train / {len(test_accounts)} test")
        train, excluded_train = self.prepare_sample(train_accounts, experiment, "train")
        test, excluded_test = self.prepare_sample(test_accounts, experiment, "test")
        result = ExperimentResult(experiment, train, test, excluded_train + excluded_test)

        self.check_labels(experiment, train, test)

        if any(design in CLUSTER_DESIGNS for design in designs):
            result.matrix = self.train_matrix(train, measure, alpha, n_samples, seed, n_jobs)
            result.clustering, result.test_assignment = self.cluster_matrix(
                result.matrix, train, test, k, alpha, n_samples, seed, n_jobs
            )

        train_assignment = result.clustering.assignment if result.clustering is not None else None
        for design in designs:
            name = model_name(design, measure)
            fitted, scores = self.score_design(
                design,
                train.aggregates,
                train_assignment,
                train.labels,
                test.aggregates,
                result.test_assignment,
                model=name,
                ridge=ridge,
            )
            result.models[name] = fitted
            result.scores[name] = scores
            provenance = measure if design in CLUSTER_DESIGNS else None
            result.reports.append(evaluate_scores(scores, test.labels, name, design, provenance, severity))

        logger.info(f"✅ {experiment} experiment complete ({len(result.reports)} models)")
        return result

    def run_prediction_experiment(
        self,
        train_accounts: Sequence[AccountProfile],
        test_accounts: Sequence[AccountProfile],
        design: str = "cluster_dummies",
        **options,
    ) -> EvaluationReport:
        """Default prediction over the full profiles for one design"""
        result = self.run_experiment("predict", train_accounts, test_accounts, designs=[design], **options)
        return result.reports[0]

    def run_forecast_experiment(
        self,
        train_accounts: Sequence[AccountProfile],
        test_accounts: Sequence[AccountProfile],
        design: str = "cluster_dummies",
        **options,
    ) -> EvaluationReport:
        """Default forecasting from the observation prefix for one design"""
        result = self.run_experiment("forecast", train_accounts, test_accounts, designs=[design], **options)
        return result.reports[0]


# Global instance
experiment_runner = ExperimentRunner()
