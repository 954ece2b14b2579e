"""
Confidence Ellipsoids
(1 - alpha) Wald regions of VAR coefficient estimates
"""

from dataclasses import dataclass
from typing import Literal

import numpy as np
from loguru import logger
from scipy import linalg, special, stats

from modeling.var_model import VarFit
from utils.errors import EllipsoidError

RIDGE_DELTA = 1e-8
CONDITION_LIMIT = 1e12


def f_quantile(df1: int, df2: int, prob: float) -> float:
    """
    Quantile of the F distribution via the inverse regularized incomplete beta

    If B ~ Beta(df1/2, df2/2) then F = (df2 B) / (df1 (1 - B)). The beta inverse
    is polished with Newton steps on the F CDF.

    Args:
        df1: Numerator degrees of freedom
        df2: Denominator degrees of freedom
        prob: Probability in (0, 1)

    Returns:
        x with CDF_F(x; df1, df2) = prob
    """
    if not 0.0 < prob < 1.0:
        raise ValueError(f"prob must lie in (0, 1), got {prob}")
    if df1 < 1 or df2 < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got ({df1}, {df2})")

    b = special.betaincinv(df1 / 2.0, df2 / 2.0, prob)
    x = df2 * b / (df1 * (1.0 - b))

    for _ in range(3):
        error = special.betainc(df1 / 2.0, df2 / 2.0, df1 * x / (df1 * x + df2)) - prob
        if abs(error) < 1e-13:
            break
        density = stats.f.pdf(x, df1, df2)
        if density <= 0 or not np.isfinite(density):
            break
        x = max(x - error / density, 0.5 * x)

    return float(x)


def ellipsoid_volume_of(shape: np.ndarray) -> float:
    """pi^(p/2) |shape|^(1/2) / Gamma(p/2 + 1)"""
    p = shape.shape[0]
    sign, logdet = np.linalg.slogdet(shape)
    if sign <= 0:
        return 0.0
    return float(np.exp(0.5 * p * np.log(np.pi) + 0.5 * logdet - special.gammaln(0.5 * p + 1.0)))


@dataclass(frozen=True, eq=False)
class ConfidenceEllipsoid:
    """
    Region {x : (x - center)' shape^-1 (x - center) <= 1}

    shape is the full scaled matrix c * Psi; the cached volume uses its
    determinant.
    """

    center: np.ndarray
    shape: np.ndarray
    alpha: float
    volume: float
    cholesky: np.ndarray
    regularized: bool = False

    @property
    def p(self) -> int:
        return int(self.center.size)

    @property
    def semi_axes(self) -> np.ndarray:
        return np.sqrt(np.clip(np.linalg.eigvalsh(self.shape), 0.0, None))

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Membership of each row of `points`"""
        offsets = np.atleast_2d(points) - self.center
        solved = linalg.solve_triangular(self.cholesky, offsets.T, lower=True)
        return np.einsum("ij,ij->j", solved, solved) <= 1.0

    @classmethod
    def from_shape(cls, center: np.ndarray, shape: np.ndarray, alpha: float = 0.05) -> "ConfidenceEllipsoid":
        """Ellipsoid from an explicit positive-definite shape matrix"""
        center = np.asarray(center, dtype=float)
        shape = np.asarray(shape, dtype=float)
        try:
            chol = np.linalg.cholesky(shape)
        except np.linalg.LinAlgError as e:
            raise EllipsoidError("Shape matrix is not positive definite") from e
        return cls(center, shape, alpha, ellipsoid_volume_of(shape), chol)


class EllipsoidBuilder:
    """
    Build confidence ellipsoids from VAR fits
    """

    def __init__(self, c_convention: Literal["squared", "sqrt"] = "squared"):
        """
        Initialize ellipsoid builder

        Args:
            c_convention: `squared` scales Psi by p F (exact Wald region);
                `sqrt` scales by sqrt(p F) for sensitivity checks
        """
        self.c_convention = c_convention
        self.ridge_delta = RIDGE_DELTA

    def scale_factor(self, p: int, t_len: int, alpha: float) -> float:
        """Multiplier applied to Psi"""
        df2 = t_len - p - 1
        if df2 < 1:
            raise EllipsoidError(f"Insufficient degrees of freedom: T_s - p - 1 = {df2}")
        if not 0.0 < alpha < 1.0:
            raise EllipsoidError(f"alpha must lie in (0, 1), got {alpha}")
        squared_radius = p * f_quantile(p, df2, 1.0 - alpha)
        return squared_radius if self.c_convention == "squared" else float(np.sqrt(squared_radius))

    def regularize(self, shape: np.ndarray) -> np.ndarray:
        """Add delta * trace / p to the diagonal"""
        p = shape.shape[0]
        ridge = self.ridge_delta * np.trace(shape) / p
        if not ridge > 0:
            raise EllipsoidError("Coefficient covariance has zero trace; cannot regularise to positive definite")
        return shape + ridge * np.eye(p)

    def build_ellipsoid(self, fit: VarFit, alpha: float = 0.05) -> ConfidenceEllipsoid:
        """
        (1 - alpha) confidence ellipsoid of a VAR fit

        Args:
            fit: VAR(1) estimate
            alpha: Significance level

        Returns:
            Ellipsoid with center theta and shape c * Psi
        """
        p = fit.p
        shape = self.scale_factor(p, fit.t_len, alpha) * fit.psi
        shape = 0.5 * (shape + shape.T)

        regularized = False
        chol = None
        try:
            if np.linalg.cond(shape) < CONDITION_LIMIT:
                chol = np.linalg.cholesky(shape)
        except np.linalg.LinAlgError:
            chol = None

        if chol is None:
            shape = self.regularize(shape)
            try:
                chol = np.linalg.cholesky(shape)
            except np.linalg.LinAlgError as e:
                raise EllipsoidError("Coefficient covariance is not regularisable to positive definite") from e
            regularized = True
            logger.warning(f"⚠️  Regularised near-singular coefficient covariance (T_s = {fit.t_len})")

        return ConfidenceEllipsoid(
            center=fit.theta.copy(),
            shape=shape,
            alpha=alpha,
            volume=ellipsoid_volume_of(shape),
            cholesky=chol,
            regularized=regularized,
        )

    def ellipsoid_volume(self, ellipsoid: ConfidenceEllipsoid) -> float:
        """Closed-form hyper-volume of an ellipsoid"""
        return ellipsoid_volume_of(ellipsoid.shape)


# Global instance
ellipsoid_builder = EllipsoidBuilder()
