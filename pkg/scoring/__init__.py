"""
Scoring Package
Logistic default models, scorecard designs and the prediction/forecast experiments
"""

from scoring.experiments import experiment_runner
from scoring.logistic_model import logistic_fitter

__all__ = ['logistic_fitter', 'experiment_runner']
