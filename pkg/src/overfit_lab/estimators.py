"""Scikit-learn style wrappers around the interpolators.

Each estimator fits a univariate interpolant on samples with inputs in
[0, 1] and exposes the fitted piecewise-linear function, its weighted
total-variation cost, and the usual ``get_params``/``set_params`` plumbing so
the models compose with pipelines and model-selection utilities.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .dataset import Dataset
from .interpolators import extended_spline, linear_spline
from .pwl import representation_cost
from .solver import SolverOptions, minnorm_interpolate


def _as_inputs(X) -> np.ndarray:
    X = check_array(X, ensure_2d=False, dtype=float)
    if X.ndim == 2:
        if X.shape[1] != 1:
            raise ValueError("only univariate inputs are supported")
        X = X[:, 0]
    return X


class _InterpolatorBase(RegressorMixin, BaseEstimator):
    """Shared fit/predict plumbing; subclasses build the function."""

    def fit(self, X, y):
        X_checked, y_checked = check_X_y(
            np.asarray(X, dtype=float).reshape(-1, 1) if np.ndim(X) == 1 else X,
            y, ensure_2d=True, dtype=float)
        x = _as_inputs(X_checked)
        order = np.argsort(x, kind="stable")
        self.dataset_ = Dataset(x=x[order], y=np.asarray(y_checked, dtype=float)[order])
        self._build()
        return self

    def predict(self, X):
        check_is_fitted(self, "function_")
        return np.asarray(self.function_(_as_inputs(X)))

    @property
    def n_kinks_(self):
        check_is_fitted(self, "function_")
        return len(self.function_.kinks)


class LinearSplineInterpolator(_InterpolatorBase):
    """Connect-the-dots interpolant, constant outside the data range."""

    def _build(self):
        self.function_ = linear_spline(self.dataset_)
        self.cost_ = representation_cost(self.function_)
        self.converged_ = True


class ExtendedSplineInterpolator(_InterpolatorBase):
    """Linear spline with the first and last secants extended outward."""

    def _build(self):
        self.function_ = extended_spline(self.dataset_)
        self.cost_ = representation_cost(self.function_)
        self.converged_ = True


class MinNormInterpolator(_InterpolatorBase):
    """Interpolant with minimal weighted total variation of the slope.

    Equivalent to the unbounded-width two-layer ReLU network (with a free
    skip connection) of least squared weight norm that fits the samples.
    """

    def __init__(self, interpolation_tol: float = 1e-9, cost_rtol: float = 1e-10,
                 max_iters: int | None = None):
        self.interpolation_tol = interpolation_tol
        self.cost_rtol = cost_rtol
        self.max_iters = max_iters

    def _build(self):
        opts = SolverOptions(interpolation_tol=self.interpolation_tol,
                             cost_rtol=self.cost_rtol, max_iters=self.max_iters)
        result = minnorm_interpolate(self.dataset_, opts)
        self.function_ = result.function
        self.cost_ = result.cost
        self.converged_ = result.converged
        self.n_iter_ = result.sweeps
