"""Estimator-style interface to the Local Cascade Ensemble library."""

from .estimators import LCEClassifier, LCERegressor, NotFittedError

__all__ = ["LCEClassifier", "LCERegressor", "NotFittedError"]
__version__ = "0.1.0"
