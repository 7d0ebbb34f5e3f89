"""Reshuffled baseline and conditional stimulus distributions.

All stimuli of all histories are pooled into one bucket.  The baseline
redraws, for every history, as many classes from that bucket as the history
had stimuli, which keeps exposure sizes but breaks any link between what a
user saw and what the user posted.  Conditional distributions average the
per-history class proportions separately for negative, neutral and positive
responses; their difference from the baseline is the over-exposure.

Proportion vectors are always ordered (negative, neutral, positive).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .corpus import ExposureHistory
from .sentiment import EmotionClass

__all__ = [
    "BaselineResult",
    "EmptyBucketError",
    "EmptyGroupError",
    "MannWhitneyResult",
    "MissingClassError",
    "SentimentProportions",
    "StimulusBucket",
    "conditional_distribution",
    "group_mean",
    "mann_whitney_u",
    "overexposure",
    "per_history_proportions",
    "pool_bucket",
    "sample_baseline",
    "stimulus_counts",
]

SUM_TOLERANCE = 1e-9


class EmptyBucketError(ValueError):
    pass


class EmptyGroupError(ValueError):
    pass


class MissingClassError(KeyError):
    pass


@dataclass(frozen=True)
class SentimentProportions:
    negative: float
    neutral: float
    positive: float

    def __post_init__(self):
        values = (self.negative, self.neutral, self.positive)
        if any(not (-SUM_TOLERANCE <= v <= 1 + SUM_TOLERANCE) for v in values):
            raise ValueError(f"proportions must lie in [0, 1]: {values}")
        if abs(sum(values) - 1.0) > SUM_TOLERANCE:
            raise ValueError(f"proportions must sum to 1: {values} sums to {sum(values)}")

    @classmethod
    def from_counts(cls, counts: Sequence[float]) -> "SentimentProportions":
        total = float(sum(counts))
        if total <= 0:
            raise ValueError("cannot form proportions from an all-zero count vector")
        neg, neu, pos = (c / total for c in counts)
        return cls(neg, neu, pos)

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "SentimentProportions":
        neg, neu, pos = (float(v) for v in values)
        return cls(neg, neu, pos)

    def as_array(self) -> np.ndarray:
        return np.array([self.negative, self.neutral, self.positive])

    def __iter__(self):
        return iter((self.negative, self.neutral, self.positive))

    def __getitem__(self, cls: int) -> float:
        return (self.negative, self.neutral, self.positive)[cls]


@dataclass(frozen=True)
class StimulusBucket:
    counts: tuple[int, int, int] = (0, 0, 0)

    @property
    def total(self) -> int:
        return sum(self.counts)

    def proportions(self) -> SentimentProportions:
        return SentimentProportions.from_counts(self.counts)


def stimulus_counts(
    histories: Sequence[ExposureHistory],
    class_of: Mapping[str, EmotionClass | int],
) -> np.ndarray:
    """Per-history class tallies as an ``(n_histories, 3)`` integer array."""
    sizes = np.fromiter((len(h) for h in histories), dtype=np.int64, count=len(histories))
    try:
        classes = np.fromiter(
            (class_of[s] for s in itertools.chain.from_iterable(h.stimuli for h in histories)),
            dtype=np.int64,
            count=int(sizes.sum()),
        )
    except KeyError as exc:
        raise MissingClassError(f"no emotion class for stimulus {exc.args[0]!r}") from None
    owner = np.repeat(np.arange(len(histories)), sizes)
    flat = np.bincount(owner * 3 + classes, minlength=3 * len(histories))
    return flat.reshape(len(histories), 3)


def pool_bucket(
    histories: Sequence[ExposureHistory],
    class_of: Mapping[str, EmotionClass | int],
) -> StimulusBucket:
    if not histories:
        return StimulusBucket()
    neg, neu, pos = (int(c) for c in stimulus_counts(histories, class_of).sum(axis=0))
    return StimulusBucket((neg, neu, pos))


def per_history_proportions(counts: np.ndarray) -> np.ndarray:
    counts = np.asarray(counts, dtype=float)
    sizes = counts.sum(axis=1, keepdims=True)
    if np.any(sizes == 0):
        raise ValueError("every history needs at least one stimulus")
    return counts / sizes


def group_mean(props: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column means and standard errors (sample std / sqrt(n)); a single
    row has zero standard error."""
    n = len(props)
    mean = props.mean(axis=0)
    if n < 2:
        return mean, np.zeros(props.shape[1])
    return mean, props.std(axis=0, ddof=1) / math.sqrt(n)


@dataclass(frozen=True, eq=False)
class BaselineResult:
    mean: SentimentProportions
    std_err: tuple[float, float, float]
    num_samples: int
    seed: int
    draws: np.ndarray  # per-draw proportions, shape (num_samples, 3)
    replace: bool = True

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BaselineResult):
            return NotImplemented
        return (
            self.mean == other.mean
            and self.std_err == other.std_err
            and self.num_samples == other.num_samples
            and self.seed == other.seed
            and self.replace == other.replace
            and np.array_equal(self.draws, other.draws)
        )


def sample_baseline(
    bucket: StimulusBucket,
    sizes: Sequence[int],
    seed: int,
    *,
    replace: bool = True,
    n_replicates: int = 1,
) -> BaselineResult:
    """Redraw one synthetic history per entry of ``sizes`` from ``bucket``.

    Each draw takes ``size`` classes uniformly from the pooled bucket, with
    replacement by default.  ``n_replicates`` repeats the full pass; replicate
    ``r`` uses the ``r``-th child of ``SeedSequence(seed)`` so results do not
    depend on the order in which replicates are evaluated.
    """
    colors = np.asarray(bucket.counts, dtype=np.int64)
    if colors.sum() == 0:
        raise EmptyBucketError("cannot sample a baseline from an empty bucket")
    sizes = np.asarray(sizes, dtype=np.int64)
    if sizes.size == 0:
        raise ValueError("need at least one history size")
    if np.any(sizes < 1):
        raise ValueError("history sizes must be >= 1")
    if not replace and sizes.max() > colors.sum():
        raise ValueError("a draw without replacement cannot exceed the bucket size")
    if n_replicates < 1:
        raise ValueError("n_replicates must be >= 1")

    children = np.random.SeedSequence(seed).spawn(n_replicates)
    draws = [_draw_replicate(colors, sizes, np.random.default_rng(child), replace) for child in children]
    counts = np.concatenate(draws)
    props = counts / counts.sum(axis=1, keepdims=True)
    mean, se = group_mean(props)
    mean = mean / mean.sum()
    return BaselineResult(
        mean=SentimentProportions.from_array(mean),
        std_err=tuple(float(x) for x in se),
        num_samples=len(props),
        seed=int(seed),
        draws=props,
        replace=replace,
    )


def _draw_replicate(colors: np.ndarray, sizes: np.ndarray, rng: np.random.Generator, replace: bool) -> np.ndarray:
    if replace:
        return rng.multinomial(sizes, colors / colors.sum())
    out = np.empty((len(sizes), 3), dtype=np.int64)
    for size in np.unique(sizes):
        rows = np.flatnonzero(sizes == size)
        out[rows] = rng.multivariate_hypergeometric(colors, int(size), size=len(rows))
    return out


def conditional_distribution(
    histories: Sequence[ExposureHistory],
    class_of: Mapping[str, EmotionClass | int],
    response_class: EmotionClass,
) -> tuple[SentimentProportions, tuple[float, float, float]]:
    """Mean stimulus proportions over histories whose target has ``response_class``."""
    group = [h for h in histories if class_of[h.target] == response_class]
    if not group:
        raise EmptyGroupError(f"no histories precede a {EmotionClass(response_class).label} response")
    mean, se = group_mean(per_history_proportions(stimulus_counts(group, class_of)))
    return SentimentProportions.from_array(mean / mean.sum()), tuple(float(x) for x in se)


def overexposure(
    observed: SentimentProportions | Sequence[float],
    baseline: SentimentProportions | Sequence[float],
    scale: float = 100.0,
) -> tuple[float, float, float]:
    """Observed minus baseline, per component, in percentage points.

    Inputs are fractions; pass ``scale=1`` when they are already percentages.
    """
    o, b = list(observed), list(baseline)
    if len(o) != 3 or len(b) != 3:
        raise ValueError("expected (negative, neutral, positive) triplets")
    neg, neu, pos = (scale * (x - y) for x, y in zip(o, b))
    return neg, neu, pos


# -- Mann-Whitney U ---------------------------------------------------------

class MannWhitneyResult(NamedTuple):
    u: float
    p: float


EXACT_MAX_SIZE = 20


def _midranks(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Average ranks (1-based) and the sizes of the tie groups."""
    order = np.argsort(values, kind="mergesort")
    sorted_vals = values[order]
    starts = np.flatnonzero(np.r_[True, sorted_vals[1:] != sorted_vals[:-1]])
    ends = np.r_[starts[1:], len(values)]
    ties = ends - starts
    avg = (starts + ends + 1) / 2.0
    ranks = np.empty(len(values))
    ranks[order] = np.repeat(avg, ties)
    return ranks, ties


def mann_whitney_u(
    sample_a: Sequence[float],
    sample_b: Sequence[float],
    method: str = "auto",
) -> MannWhitneyResult:
    """Two-sided Mann-Whitney U test.

    ``u`` counts the pairs where ``a`` beats ``b``, ties counting one half.
    ``method="asymptotic"`` uses the normal approximation with tie-corrected
    variance and a continuity correction; ``"exact"`` enumerates the
    permutation distribution of the tied ranks.  ``"auto"`` picks exact when
    both samples have at most 20 values.
    """
    a = np.asarray(sample_a, dtype=float).ravel()
    b = np.asarray(sample_b, dtype=float).ravel()
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        raise ValueError("both samples must be non-empty")
    if method not in ("auto", "exact", "asymptotic"):
        raise ValueError(f"unknown method {method!r}")

    ranks, ties = _midranks(np.concatenate([a, b]))
    u = float(ranks[:n].sum() - n * (n + 1) / 2.0)

    if method == "exact" or (method == "auto" and max(n, m) <= EXACT_MAX_SIZE):
        return MannWhitneyResult(u, _exact_p(ranks, n, u))

    big_n = n + m
    tie_term = float(np.sum(ties.astype(float) ** 3 - ties))
    var = n * m / 12.0 * ((big_n + 1) - tie_term / (big_n * (big_n - 1)))
    if var <= 0:
        return MannWhitneyResult(u, 1.0)
    z = max(abs(u - n * m / 2.0) - 0.5, 0.0) / math.sqrt(var)
    p = math.erfc(z / math.sqrt(2.0))
    return MannWhitneyResult(u, min(max(p, 0.0), 1.0))


def _exact_p(ranks: np.ndarray, n: int, u: float) -> float:
    # doubled midranks are integers, so the whole distribution stays exact
    doubled = np.rint(2 * ranks).astype(np.int64)
    total = int(doubled.sum())
    ways = np.zeros((n + 1, total + 1), dtype=np.float64)
    ways[0, 0] = 1.0
    for r in doubled:
        nxt = ways.copy()
        nxt[1:, r:] += ways[:-1, : total + 1 - r]
        ways = nxt
    dist = ways[n]
    m = len(ranks) - n
    sums = np.arange(total + 1)
    u2 = sums - n * (n + 1)  # doubled U for every achievable rank sum
    observed = abs(round(2 * u) - n * m)
    extreme = np.abs(u2 - n * m) >= observed
    return float(min(dist[extreme].sum() / dist.sum(), 1.0))
