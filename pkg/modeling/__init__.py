"""
Modeling Package
VAR(1) estimation, confidence ellipsoids, dissimilarities and k-medoids clustering
"""

from modeling.clustering import k_medoids
from modeling.dissimilarity import dissimilarity_calculator
from modeling.ellipsoid import ellipsoid_builder
from modeling.var_model import var_estimator

__all__ = ['var_estimator', 'ellipsoid_builder', 'dissimilarity_calculator', 'k_medoids']
