"""
Logistic Default Models
Maximum likelihood logistic regression by iteratively reweighted least squares
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from loguru import logger
from scipy import linalg, special, stats

from utils.errors import OneClassError, RankDeficientError, ScoringError

MAX_ITERATIONS = 100
BETA_TOLERANCE = 1e-8
SEPARATION_THRESHOLD = 15.0
STALL_TOLERANCE = 1e-10
MAX_HALVINGS = 30

COEFFICIENT_COLUMNS = ["term", "estimate", "std_error", "z_value", "p_value"]


@dataclass(frozen=True, eq=False)
class LogisticModel:
    """
    Fitted coefficients (intercept first) with Wald statistics
    """

    design: str
    terms: List[str]
    beta: np.ndarray
    std_errors: np.ndarray
    z_values: np.ndarray
    p_values: np.ndarray
    converged: bool
    separation_flag: bool
    iterations: int = 0
    log_likelihood: float = float("nan")

    def coefficient_table(self) -> pd.DataFrame:
        """`term, estimate, std_error, z_value, p_value`"""
        return pd.DataFrame(
            {
                "term": self.terms,
                "estimate": self.beta,
                "std_error": self.std_errors,
                "z_value": self.z_values,
                "p_value": self.p_values,
            },
            columns=COEFFICIENT_COLUMNS,
        )


def log_likelihood(features: np.ndarray, labels: np.ndarray, beta: np.ndarray) -> float:
    """Bernoulli log-likelihood, overflow-safe"""
    eta = features @ beta
    return float(np.sum(labels * eta - np.logaddexp(0.0, eta)))


class LogisticFitter:
    """
    Fit and apply logistic regression models
    """

    def __init__(self, max_iter: int = MAX_ITERATIONS, tolerance: float = BETA_TOLERANCE):
        """
        Initialize logistic fitter

        Args:
            max_iter: IRLS iteration cap
            tolerance: Convergence threshold on max |delta beta|
        """
        self.max_iter = max_iter
        self.tolerance = tolerance

    def check_rank(self, features: np.ndarray, terms: Sequence[str]) -> None:
        """Raise RankDeficientError naming the columns dependent on the others"""
        _, r, pivots = linalg.qr(features, mode="economic", pivoting=True)
        diagonal = np.abs(np.diag(r))
        threshold = diagonal.max() * max(features.shape) * np.finfo(float).eps if diagonal.size else 0.0
        rank = int(np.sum(diagonal > threshold))
        if rank < features.shape[1]:
            raise RankDeficientError([terms[i] for i in sorted(pivots[rank:])])

    def fit_logistic(
        self,
        features: np.ndarray,
        labels: Sequence[int],
        terms: Optional[Sequence[str]] = None,
        design: str = "custom",
        ridge: float = 0.0,
    ) -> LogisticModel:
        """
        Maximum likelihood fit with step-halving IRLS

        The first column is the intercept and is never penalised. Under
        quasi-complete separation the likelihood has no maximum; iteration
        stops once the log-likelihood stalls and separation_flag is set.

        Args:
            features: Design matrix with intercept column
            labels: Binary outcomes
            terms: Column names (defaults to x0, x1, ...)
            design: Design name recorded on the model
            ridge: Optional L2 penalty on non-intercept coefficients

        Returns:
            LogisticModel
        """
        x = np.asarray(features, dtype=float)
        y = np.asarray(labels, dtype=float)
        if x.ndim != 2 or x.shape[0] != y.size:
            raise ScoringError(f"Design matrix shape {x.shape} does not match {y.size} labels")
        if not np.all(np.isin(y, (0.0, 1.0))):
            raise ScoringError("Labels must be binary 0/1")
        if y.min() == y.max():
            raise OneClassError(f"All {y.size} labels are {int(y[0])}; both classes are required")
        terms = list(terms) if terms is not None else [f"x{i}" for i in range(x.shape[1])]
        if len(terms) != x.shape[1]:
            raise ScoringError(f"{len(terms)} term names for {x.shape[1]} columns")
        if not np.all(np.isfinite(x)):
            raise ScoringError("Design matrix contains non-finite values")

        self.check_rank(x, terms)

        penalty = np.full(x.shape[1], ridge)
        penalty[0] = 0.0

        def objective(b: np.ndarray) -> float:
            return log_likelihood(x, y, b) - 0.5 * float(np.sum(penalty * b * b))

        beta = np.zeros(x.shape[1])
        current = objective(beta)
        converged = False
        iterations = 0

        while iterations < self.max_iter:
            iterations += 1
            mu = special.expit(x @ beta)
            weights = mu * (1.0 - mu)
            gradient = x.T @ (y - mu) - penalty * beta
            information = (x * weights[:, None]).T @ x + np.diag(penalty)
            try:
                step = linalg.solve(information, gradient, assume_a="pos")
            except (linalg.LinAlgError, ValueError):
                step = linalg.lstsq(information, gradient)[0]

            candidate = beta + step
            updated = objective(candidate)
            halvings = 0
            while updated < current and halvings < MAX_HALVINGS:
                step = step / 2.0
                candidate = beta + step
                updated = objective(candidate)
                halvings += 1

            change = float(np.max(np.abs(candidate - beta)))
            previous = current
            beta, current = candidate, updated

            if change < self.tolerance:
                converged = True
                break
            # diverging coefficient: stop once the likelihood no longer moves
            if np.max(np.abs(beta)) > SEPARATION_THRESHOLD:
                if abs(current - previous) / (abs(current) + 0.1) < STALL_TOLERANCE:
                    break

        separation = bool(np.max(np.abs(beta)) > SEPARATION_THRESHOLD)
        if separation:
            worst = terms[int(np.argmax(np.abs(beta)))]
            logger.warning(f"⚠️  Quasi-complete separation in '{design}': |{worst}| > {SEPARATION_THRESHOLD:g}")
        elif not converged:
            logger.warning(f"⚠️  Logistic fit '{design}' hit the iteration cap ({self.max_iter})")

        mu = special.expit(x @ beta)
        weights = mu * (1.0 - mu)
        information = (x * weights[:, None]).T @ x + np.diag(penalty)
        try:
            covariance = linalg.inv(information)
        except linalg.LinAlgError as e:
            raise ScoringError(f"Fisher information is singular for design '{design}'") from e

        std_errors = np.sqrt(np.clip(np.diag(covariance), 0.0, None))
        with np.errstate(divide="ignore", invalid="ignore"):
            z_values = np.where(std_errors > 0, beta / std_errors, np.nan)
        p_values = 2.0 * stats.norm.sf(np.abs(z_values))

        logger.info(f"✅ Fitted '{design}' in {iterations} IRLS iterations (log-likelihood {current:.4f})")
        return LogisticModel(
            design=design,
            terms=terms,
            beta=beta,
            std_errors=std_errors,
            z_values=z_values,
            p_values=p_values,
            converged=converged,
            separation_flag=separation,
            iterations=iterations,
            log_likelihood=log_likelihood(x, y, beta),
        )

    def predict_proba(self, model: LogisticModel, features: np.ndarray) -> np.ndarray:
        """
        Default probabilities sigma(x beta)

        Args:
            model: Fitted model
            features: Design matrix with the model's columns

        Returns:
            Probability per row
        """
        x = np.atleast_2d(np.asarray(features, dtype=float))
        if x.shape[1] != model.beta.size:
            raise ScoringError(f"Design has {x.shape[1]} columns; model '{model.design}' expects {model.beta.size}")
        return special.expit(x @ model.beta)


# Global instance
logistic_fitter = LogisticFitter()
