"""Input coercion shared by the quantizer functions and estimators."""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils.validation import _check_sample_weight, check_array

from .exceptions import DomainError
from .measure import DiscreteMeasure


def check_order(r, exact: bool = False) -> float:
    """Validate the distortion order; ``exact`` restricts it to 1 or 2."""
    if not isinstance(r, numbers.Real) or not r >= 1 or not np.isfinite(r):
        raise DomainError(f"distortion order r must be a finite real >= 1, got {r!r}")
    if exact and r not in (1, 2):
        raise DomainError(f"the exact DP supports r in {{1, 2}}, got {r!r}")
    return float(r)


def check_size(n, name: str = "n") -> int:
    if isinstance(n, bool) or not isinstance(n, numbers.Integral) or n < 1:
        raise DomainError(f"{name} must be a positive integer, got {n!r}")
    return int(n)


def check_points(points) -> np.ndarray:
    pts = np.unique(np.asarray(points, dtype=float).ravel())
    if pts.size == 0:
        raise DomainError("codebook must be nonempty")
    if not np.all(np.isfinite(pts)):
        raise DomainError("codebook points must be finite")
    return pts


def check_1d(X) -> np.ndarray:
    """Accept a 1-d array or a single-column 2-d array of finite reals."""
    arr = np.asarray(X)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    arr = check_array(arr, dtype=np.float64, ensure_2d=True)
    if arr.shape[1] != 1:
        raise DomainError(f"expected one feature, got {arr.shape[1]}")
    return arr[:, 0]


def as_measure(X, sample_weight=None) -> DiscreteMeasure:
    """A :class:`DiscreteMeasure` from a measure or from samples with optional weights."""
    if isinstance(X, DiscreteMeasure):
        if sample_weight is not None:
            raise DomainError("sample_weight cannot be combined with a DiscreteMeasure")
        return X
    x = check_1d(X)
    w = _check_sample_weight(sample_weight, x.reshape(-1, 1))
    if np.any(w < 0):
        raise DomainError("sample weights must be nonnegative")
    if not np.any(w > 0):
        raise DomainError("sample weights sum to zero")
    return DiscreteMeasure.from_points(x, w, normalize=False)
