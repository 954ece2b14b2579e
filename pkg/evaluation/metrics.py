"""
Scorecard Metrics
AUC, KS, Gini and the H-measure for binary default scores
"""

from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy import special, stats

from utils.errors import MetricError

REPORT_COLUMNS = ["model", "h_measure", "ks", "gini", "auc"]


@dataclass(frozen=True)
class EvaluationReport:
    """
    Four-metric assessment of one model on the test sample
    """

    model: str
    design: str
    measure: Optional[str]
    h_measure: float
    ks: float
    gini: float
    auc: float
    auc_std_error: float
    n_test: int
    n_positive: int

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def to_row(self) -> Dict[str, Any]:
        """Row in `model, h_measure, ks, gini, auc` order"""
        return {column: getattr(self, column) for column in REPORT_COLUMNS}


def _validate(scores: Sequence[float], labels: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=float).ravel()
    y = np.asarray(labels).ravel()
    if s.size != y.size:
        raise MetricError(f"{s.size} scores for {y.size} labels")
    if not np.all(np.isin(y, (0, 1))):
        raise MetricError("Labels must be binary 0/1")
    if not np.all(np.isfinite(s)):
        raise MetricError("Scores must be finite")
    y = y.astype(np.int64)
    if y.sum() == 0 or y.sum() == y.size:
        raise MetricError("Both classes must be present to evaluate scores")
    return s, y


def auc(scores: Sequence[float], labels: Sequence[int]) -> Tuple[float, float]:
    """
    Area under the ROC curve with its Hanley-McNeil standard error

    Mann-Whitney form; tied scores earn half credit through average ranks.

    Returns:
        Tuple of (auc, std_error)
    """
    s, y = _validate(scores, labels)
    n_pos = int(y.sum())
    n_neg = y.size - n_pos

    ranks = stats.rankdata(s)
    u = ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0
    area = float(u / (n_pos * n_neg))

    q1 = area / (2.0 - area)
    q2 = 2.0 * area * area / (1.0 + area)
    variance = (area * (1.0 - area) + (n_pos - 1) * (q1 - area**2) + (n_neg - 1) * (q2 - area**2)) / (n_pos * n_neg)
    return area, float(np.sqrt(max(variance, 0.0)))


def _class_cdfs(s: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Class-conditional empirical CDFs at 0 and every distinct score"""
    _, inverse = np.unique(s, return_inverse=True)
    positives = np.bincount(inverse, weights=y)
    negatives = np.bincount(inverse, weights=1 - y)
    f0 = np.concatenate(([0.0], np.cumsum(negatives) / negatives.sum()))
    f1 = np.concatenate(([0.0], np.cumsum(positives) / positives.sum()))
    return f0, f1


def ks_statistic(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Largest gap between the two class-conditional score CDFs"""
    s, y = _validate(scores, labels)
    f0, f1 = _class_cdfs(s, y)
    return float(np.max(np.abs(f1 - f0)))


def gini(scores: Sequence[float], labels: Sequence[int]) -> float:
    """2 AUC - 1"""
    area, _ = auc(scores, labels)
    return 2.0 * area - 1.0


def _lower_hull(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Indices of the lower convex hull of points sorted by x (monotone chain)"""
    hull = []
    for i in range(x.size):
        if hull and x[i] == x[hull[-1]] and y[i] == y[hull[-1]]:
            continue
        while len(hull) >= 2:
            o, a = hull[-2], hull[-1]
            cross = (x[a] - x[o]) * (y[i] - y[o]) - (y[a] - y[o]) * (x[i] - x[o])
            if cross > 0:
                break
            hull.pop()
        hull.append(i)
    return np.array(hull)


def h_measure(
    scores: Sequence[float],
    labels: Sequence[int],
    severity: Optional[Tuple[float, float]] = None,
) -> float:
    """
    Hand's H-measure

    Expected minimum misclassification loss over a Beta severity distribution
    of the cost ratio, read off the convex hull of the ROC curve and
    normalised by the loss of the best trivial classifier. Scores that rank
    defaults below non-defaults (AUC < 0.5) are reversed first.

    Args:
        scores: Higher means more likely to default
        labels: 1 for default
        severity: Beta shape parameters (a, b); default (1 + pi1, 1 + pi0)

    Returns:
        H in [0, 1]
    """
    s, y = _validate(scores, labels)
    n_pos = int(y.sum())
    pi1 = n_pos / y.size
    pi0 = 1.0 - pi1
    a, b = severity if severity is not None else (1.0 + pi1, 1.0 + pi0)
    if a <= 0 or b <= 0:
        raise MetricError(f"Severity parameters must be positive, got ({a}, {b})")

    if auc(s, y)[0] < 0.5:
        logger.warning("⚠️  ROC curve lies mostly below the diagonal; scores reversed for the H-measure")
        s = -s

    f0, f1 = _class_cdfs(s, y)
    hull = _lower_hull(f0, np.minimum(f1, f0))
    g0, g1 = f0[hull], f1[hull]
    g1 = np.minimum(g1, g0)

    step0 = np.diff(g0)
    step1 = np.diff(g1)
    costs = np.concatenate(([0.0], pi1 * step1 / (pi0 * step0 + pi1 * step1), [1.0]))

    b00 = special.beta(a, b)
    b10 = special.beta(1.0 + a, b)
    b01 = special.beta(a, 1.0 + b)
    integral0 = special.betainc(1.0 + a, b, costs) * b10 / b00
    integral1 = special.betainc(a, 1.0 + b, costs) * b01 / b00

    loss = float(np.sum(pi0 * (1.0 - g0) * np.diff(integral0) + pi1 * g1 * np.diff(integral1)))

    trivial0 = special.betainc(1.0 + a, b, pi1) * b10 / b00
    trivial1 = (1.0 - special.betainc(a, 1.0 + b, pi1)) * b01 / b00
    max_loss = pi0 * trivial0 + pi1 * trivial1

    return float(min(max(1.0 - loss / max_loss, 0.0), 1.0))


def evaluate_scores(
    scores: Sequence[float],
    labels: Sequence[int],
    model: str,
    design: str,
    measure: Optional[str] = None,
    severity: Optional[Tuple[float, float]] = None,
) -> EvaluationReport:
    """
    All four metrics for one model

    Args:
        scores: Predicted default probabilities on the test sample
        labels: Observed test labels
        model: Report row label
        design: Design name
        measure: Dissimilarity behind the cluster terms (None for aggregate)
        severity: H-measure Beta parameters

    Returns:
        EvaluationReport
    """
    s, y = _validate(scores, labels)
    area, std_error = auc(s, y)
    report = EvaluationReport(
        model=model,
        design=design,
        measure=measure,
        h_measure=h_measure(s, y, severity),
        ks=ks_statistic(s, y),
        gini=2.0 * area - 1.0,
        auc=area,
        auc_std_error=std_error,
        n_test=int(y.size),
        n_positive=int(y.sum()),
    )
    logger.info(f"📊 {model}: H = {report.h_measure:.4f}, KS = {report.ks:.4f}, AUC = {report.auc:.4f}")
    return report
