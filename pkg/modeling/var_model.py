"""
VAR(1) Estimation
Equation-by-equation least squares for bivariate (repayment, utilisation) series
"""

from dataclasses import dataclass
from typing import Literal

import numpy as np
from loguru import logger

from utils.errors import DataValidationError, DegenerateSeriesError, TooShortError

P = 4
T_MIN = 8


@dataclass(frozen=True, eq=False)
class VarFit:
    """
    Estimated VAR(1) coefficients and their uncertainty

    theta packs the 2x2 coefficient matrix row-major, so theta[0:2] is the
    repayment equation and theta[2:4] the utilisation equation.
    """

    theta: np.ndarray
    psi: np.ndarray
    sigma_u: np.ndarray
    t_len: int
    n_eff: int

    @property
    def coefficients(self) -> np.ndarray:
        return self.theta.reshape(2, 2)

    @property
    def p(self) -> int:
        return int(self.theta.size)

    def fitted_values(self, lagged: np.ndarray) -> np.ndarray:
        """One-step fitted values for rows of lagged observations"""
        return np.asarray(lagged) @ self.coefficients.T


class VarEstimator:
    """
    Fit VAR(1) models without intercept
    """

    def __init__(self, t_min: int = T_MIN, covariance: Literal["kronecker", "block_diagonal"] = "kronecker"):
        """
        Initialize VAR estimator

        Args:
            t_min: Minimum series length accepted
            covariance: Coefficient covariance structure
        """
        self.t_min = t_min
        self.covariance = covariance

    def fit_var1(self, repay: np.ndarray, utilisation: np.ndarray) -> VarFit:
        """
        Least squares fit of y(t) = A y(t-1) + u(t)

        Args:
            repay: Monthly repayment series
            utilisation: Monthly utilisation series

        Returns:
            VarFit with Psi = Sigma_u kron (Z'Z)^-1
        """
        repay = np.asarray(repay, dtype=float)
        utilisation = np.asarray(utilisation, dtype=float)

        if repay.shape != utilisation.shape or repay.ndim != 1:
            raise DataValidationError("Repayment and utilisation series must be 1-D and of equal length")
        if not (np.all(np.isfinite(repay)) and np.all(np.isfinite(utilisation))):
            raise DataValidationError("Series contain non-finite values")

        t_len = repay.size
        if t_len < self.t_min:
            raise TooShortError(t_len, self.t_min)

        y = np.column_stack([repay, utilisation])
        z = y[:-1]
        target = y[1:]
        n_eff = t_len - 1

        if np.any(np.ptp(z, axis=0) == 0):
            raise DegenerateSeriesError("A lagged regressor is constant")
        gram = z.T @ z
        if np.linalg.matrix_rank(gram) < 2:
            raise DegenerateSeriesError("Lagged regressors are collinear (singular Z'Z)")

        gram_inv = np.linalg.inv(gram)
        # column i holds the coefficients of equation i
        beta = np.linalg.solve(gram, z.T @ target)
        coefficients = beta.T

        residuals = target - z @ beta
        sigma_u = residuals.T @ residuals / (n_eff - 2)
        sigma_u = 0.5 * (sigma_u + sigma_u.T)

        # Kronecker block (i, j) is sigma_ij (Z'Z)^-1, matching row-major theta
        psi = np.kron(sigma_u, gram_inv)
        if self.covariance == "block_diagonal":
            psi = np.kron(np.diag(np.diag(sigma_u)), gram_inv)
        psi = 0.5 * (psi + psi.T)

        return VarFit(theta=coefficients.ravel(), psi=psi, sigma_u=sigma_u, t_len=t_len, n_eff=n_eff)

    def is_stationary(self, fit: VarFit) -> bool:
        """Spectral radius of the coefficient matrix below one"""
        return bool(np.max(np.abs(np.linalg.eigvals(fit.coefficients))) < 1.0)

    def fit_account(self, account) -> VarFit:
        """Fit an AccountProfile's (repay, utilisation) series"""
        fit = self.fit_var1(account.repay, account.utilisation)
        if not self.is_stationary(fit):
            logger.warning(f"⚠️  Non-stationary VAR(1) fit for account '{account.account_id}' (kept)")
        return fit


# Global instance
var_estimator = VarEstimator()
