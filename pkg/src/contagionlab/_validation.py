"""Input checks shared by the estimators."""

from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array, column_or_1d

from .sentiment import EmotionClass


def check_counts(X, min_total: int = 1) -> np.ndarray:
    """Validate an ``(n, 3)`` array of non-negative per-history class counts."""
    X = check_array(X, dtype=None, ensure_2d=True)
    if X.shape[1] != 3:
        raise ValueError(f"expected 3 columns (negative, neutral, positive), got {X.shape[1]}")
    if not np.issubdtype(X.dtype, np.number) or np.any(X != np.floor(X)):
        raise ValueError("stimulus counts must be integers")
    X = X.astype(np.int64)
    if np.any(X < 0):
        raise ValueError("stimulus counts must be non-negative")
    if np.any(X.sum(axis=1) < min_total):
        raise ValueError(f"every history needs at least {min_total} stimulus")
    return X


def check_classes(y, n_samples: int) -> np.ndarray:
    y = column_or_1d(y, warn=True)
    y = np.asarray(y)
    if y.shape[0] != n_samples:
        raise ValueError(f"y has {y.shape[0]} entries, expected {n_samples}")
    if y.dtype.kind in "OUS":
        y = np.array([EmotionClass.from_label(str(v)) if not isinstance(v, (int, np.integer)) else v for v in y])
    y = y.astype(np.int64)
    if np.any((y < 0) | (y > 2)):
        raise ValueError("response classes must be 0 (negative), 1 (neutral) or 2 (positive)")
    return y


def check_texts(X) -> list[str]:
    if isinstance(X, str):
        raise ValueError("expected an iterable of texts, got a single string")
    texts = list(X.ravel()) if isinstance(X, np.ndarray) else list(X)
    for t in texts:
        if not isinstance(t, str):
            raise TypeError(f"texts must be strings, got {type(t).__name__}")
    return texts
