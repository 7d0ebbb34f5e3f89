"""Valence of a set of posts and the binned stimulus-to-response fit.

The valence of a bucket is ``2 * pos / (pos + neg) - 1``: -1 when only
negative posts are present, +1 when only positive ones are, undefined when
there are neither.  Histories are binned by the valence of their stimuli,
each bin's responses are pooled into one bucket, and an ordinary least
squares line is fitted through (bin midpoint, response valence).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .sentiment import EmotionClass

__all__ = [
    "InsufficientBinsError",
    "LinearFit",
    "StimulusResponseBin",
    "bin_stimuli",
    "bucket_valence",
    "fit_linear",
    "stimulus_valences",
]


class InsufficientBinsError(ValueError):
    pass


def bucket_valence(pos_count: float, neg_count: float) -> float | None:
    if pos_count < 0 or neg_count < 0:
        raise ValueError("counts must be non-negative")
    if pos_count + neg_count == 0:
        return None
    # same as 2p/(p+n) - 1, but a single rounding for integer counts
    return (pos_count - neg_count) / (pos_count + neg_count)


def stimulus_valences(counts: np.ndarray) -> np.ndarray:
    """Valence of each row of an ``(n, 3)`` class-count array; NaN where undefined."""
    counts = np.asarray(counts, dtype=float)
    neg, pos = counts[:, 0], counts[:, 2]
    denom = pos + neg
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(denom > 0, (pos - neg) / denom, np.nan)


@dataclass(frozen=True)
class StimulusResponseBin:
    index: int
    lower: float
    upper: float
    response_valence: float | None
    count: int
    pos: int = 0
    neg: int = 0

    @property
    def mid(self) -> float:
        return (self.lower + self.upper) / 2.0


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r_squared: float
    num_points: int

    def predict(self, x):
        return self.slope * np.asarray(x, dtype=float) + self.intercept


def bin_stimuli(
    pairs: Iterable[tuple[float, EmotionClass | int]],
    num_bins: int = 20,
) -> list[StimulusResponseBin]:
    """Assign (stimulus valence, response class) pairs to equal-width bins on [-1, 1].

    Bins are half-open ``[lower, upper)`` except the last, which also holds +1.
    Neutral responses count toward a bin's size but not its valence.
    """
    if num_bins < 2:
        raise ValueError("num_bins must be >= 2")
    pairs = list(pairs)
    values = np.array([float(v) for v, _ in pairs], dtype=float)
    classes = np.array([int(c) for _, c in pairs], dtype=np.int64)
    if np.any(~np.isfinite(values)) or np.any((values < -1.0) | (values > 1.0)):
        bad = values[~((values >= -1.0) & (values <= 1.0))]
        raise ValueError(f"stimulus valence outside [-1, 1]: {bad[:5].tolist()}")
    edges = np.linspace(-1.0, 1.0, num_bins + 1)
    idx = np.clip(np.searchsorted(edges, values, side="right") - 1, 0, num_bins - 1)

    counts = np.bincount(idx, minlength=num_bins)
    pos = np.bincount(idx[classes == EmotionClass.POSITIVE], minlength=num_bins)
    neg = np.bincount(idx[classes == EmotionClass.NEGATIVE], minlength=num_bins)
    return [
        StimulusResponseBin(
            index=i,
            lower=float(edges[i]),
            upper=float(edges[i + 1]),
            response_valence=bucket_valence(int(pos[i]), int(neg[i])),
            count=int(counts[i]),
            pos=int(pos[i]),
            neg=int(neg[i]),
        )
        for i in range(num_bins)
    ]


def fit_linear(bins: Sequence[StimulusResponseBin], weighted: bool = False) -> LinearFit:
    """Least-squares line of response valence on bin midpoints.

    Bins without a response valence are skipped.  With ``weighted=True``
    each bin is weighted by its count.
    """
    usable = sorted((b for b in bins if b.response_valence is not None), key=lambda b: b.index)
    if len(usable) < 2:
        raise InsufficientBinsError(f"need at least 2 bins with a response valence, got {len(usable)}")
    x = np.array([b.mid for b in usable])
    y = np.array([b.response_valence for b in usable], dtype=float)
    w = np.array([b.count for b in usable], dtype=float) if weighted else np.ones(len(usable))
    if np.ptp(x) == 0:
        raise InsufficientBinsError("bin midpoints are all equal")

    sw = w.sum()
    x_bar = (w * x).sum() / sw
    y_bar = (w * y).sum() / sw
    slope = (w * (x - x_bar) * (y - y_bar)).sum() / (w * (x - x_bar) ** 2).sum()
    intercept = y_bar - slope * x_bar
    ss_res = float((w * (y - (slope * x + intercept)) ** 2).sum())
    ss_tot = float((w * (y - y_bar) ** 2).sum())
    if ss_tot == 0:
        r2 = 1.0 if ss_res == 0 else 0.0
    else:
        r2 = min(max(1.0 - ss_res / ss_tot, 0.0), 1.0)
    return LinearFit(float(slope), float(intercept), r2, len(usable))
