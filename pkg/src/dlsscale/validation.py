"""Input checks shared by the estimators."""

import numpy as np
from sklearn.utils import check_array


def _check_columns(X, n_columns):
    if n_columns is not None and X.shape[1] != n_columns:
        raise ValueError(f"expected {n_columns} columns, got {X.shape[1]}")


def check_counts(X, n_columns=None):
    """Non-negative integer count table, 2-D."""
    X = check_array(X, dtype=None, ensure_min_samples=0)
    if not np.issubdtype(X.dtype, np.integer):
        if not np.all(np.equal(np.mod(X, 1), 0)):
            raise ValueError("counts must be integers")
        X = X.astype(np.int64)
    if (X < 0).any():
        raise ValueError("counts must be non-negative")
    _check_columns(X, n_columns)
    return X.astype(np.int64, copy=False)


def check_levels(X, n_columns=None, max_level=4):
    X = check_counts(X, n_columns)
    if (X > max_level).any():
        raise ValueError(f"levels must lie in 0..{max_level}")
    return X


def check_binary(X, n_columns=None, ensure_min_samples=1):
    """Dichotomous response matrix as a bool array."""
    X = check_array(X, dtype=None, ensure_min_samples=ensure_min_samples)
    if X.dtype != bool:
        if not np.isin(X, (0, 1)).all():
            raise ValueError("responses must be 0/1 or boolean")
        X = X.astype(bool)
    _check_columns(X, n_columns)
    return X
