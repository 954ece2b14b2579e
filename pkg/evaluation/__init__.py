"""
Evaluation Package
Scorecard metrics and parameter-space projections
"""

from evaluation.metrics import EvaluationReport, auc, evaluate_scores, gini, h_measure, ks_statistic
from evaluation.projection import pca_project

__all__ = ['EvaluationReport', 'auc', 'ks_statistic', 'gini', 'h_measure', 'evaluate_scores', 'pca_project']
