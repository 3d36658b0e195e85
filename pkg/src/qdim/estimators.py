"""scikit-learn style wrappers around the exact quantizer and the dimension fit.

Both estimators take one-dimensional samples ``X`` (shape ``(n,)`` or
``(n, 1)``) with optional ``sample_weight``; equal values are merged into a
single atom before fitting.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import as_measure, check_1d, check_order, check_size
from .measure import DiscreteMeasure
from .quantizer import DEFAULT_GRID, cost, estimate_dimension, optimal_quantizer, scaling_diagnostics


class OptimalQuantizer(TransformerMixin, BaseEstimator):
    """Globally optimal n-point scalar quantizer.

    Parameters
    ----------
    n_points : int
        Codebook size.
    r : float
        Distortion order. r in {1, 2} is solved exactly; other r >= 1 use
        DP-seeded Lloyd iterations.
    boundary : bool
        Minimize the modified error that also counts the hull endpoints
        0 and 9/2 as targets.

    Attributes
    ----------
    cluster_centers_ : ndarray of shape (k, 1)
    cell_masses_ : ndarray of shape (k,)
    cost_ : float
    codebook_ : Codebook
    n_features_in_ : int
    """

    def __init__(self, n_points: int = 8, r: float = 2, boundary: bool = False):
        self.n_points = n_points
        self.r = r
        self.boundary = boundary

    def fit(self, X, y=None, sample_weight=None):
        n = check_size(self.n_points, "n_points")
        check_order(self.r)
        m = as_measure(X, sample_weight)
        cb = optimal_quantizer(m, n, self.r, boundary=self.boundary)
        self.codebook_ = cb
        self.cluster_centers_ = cb.points.reshape(-1, 1)
        self.cell_masses_ = cb.cell_masses
        self.cost_ = cb.cost
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        """Index of the nearest codebook point."""
        check_is_fitted(self, "cluster_centers_")
        x = check_1d(X)
        return np.argmin(self.transform(x), axis=1)

    def transform(self, X):
        """Distances to every codebook point, shape ``(n_samples, k)``."""
        check_is_fitted(self, "cluster_centers_")
        x = check_1d(X)
        return np.abs(x[:, None] - self.cluster_centers_[:, 0][None, :])

    def score(self, X, y=None, sample_weight=None):
        """Negative distortion of ``X`` against the fitted codebook (higher is better)."""
        check_is_fitted(self, "cluster_centers_")
        m = as_measure(X, sample_weight)
        return -cost(m, self.cluster_centers_[:, 0], self.r) / m.total_mass


class QuantizationDimensionEstimator(BaseEstimator):
    """Log-log slope of optimal quantization errors over a grid of codebook sizes.

    Parameters
    ----------
    r : {1, 2}
    n_grid : sequence of int
    chi : float or None
        Reference dimension; when given, ``diagnostics_`` holds the scaling
        table and ``gap_`` the distance of the slope from it.

    Attributes
    ----------
    slope_, intercept_, residual_ : float
    fit_ : DimensionFit
    """

    def __init__(self, r: int = 2, n_grid=DEFAULT_GRID, chi=None):
        self.r = r
        self.n_grid = n_grid
        self.chi = chi

    def fit(self, X, y=None, sample_weight=None):
        m = X if isinstance(X, DiscreteMeasure) else as_measure(X, sample_weight)
        fit = estimate_dimension(m, self.r, tuple(self.n_grid), boundary=self.chi is not None)
        self.fit_ = fit
        self.slope_ = fit.slope
        self.intercept_ = fit.intercept
        self.residual_ = fit.residual
        self.n_features_in_ = 1
        if self.chi is not None:
            self.diagnostics_ = scaling_diagnostics(fit, self.chi)
            self.gap_ = abs(fit.slope - self.chi)
        return self

    def predict(self, n):
        """Predicted error ``e_n`` from the fitted power law."""
        check_is_fitted(self, "slope_")
        n = np.asarray(n, dtype=float)
        return np.exp(-(np.log(n) - self.intercept_) / self.slope_)
