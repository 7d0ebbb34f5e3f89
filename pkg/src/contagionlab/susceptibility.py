"""Per-post contagion attribution and per-user susceptibility.

A post counts as contagion-consistent when its emotion class equals the
class of the baseline profile nearest (in Euclidean distance) to the
stimulus proportions its author saw.  Users are summarised by the fraction
of such posts, and the top and bottom ``threshold_pct`` of users form the
high- and low-susceptibility classes.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .corpus import ExposureHistory
from .null_model import SentimentProportions, per_history_proportions, stimulus_counts
from .sentiment import EmotionClass

__all__ = [
    "AdoptionRates",
    "BaselineProfiles",
    "ContagionLabel",
    "EmptyClassError",
    "PUBLISHED_PROFILES",
    "PopulationTooSmallError",
    "SusceptibilityClasses",
    "UserSusceptibility",
    "adoption_rates",
    "classify_users",
    "fraction_histogram",
    "label_tweets",
    "nearest_profile",
    "nearest_profiles",
    "user_fractions",
]

TIE_TOLERANCE = 1e-12


class PopulationTooSmallError(ValueError):
    pass


class EmptyClassError(ValueError):
    pass


@dataclass(frozen=True)
class BaselineProfiles:
    """Expected stimulus proportions before a negative, neutral and positive post."""

    b_neg: SentimentProportions
    b_neu: SentimentProportions
    b_pos: SentimentProportions

    def __post_init__(self):
        rows = [tuple(p) for p in (self.b_neg, self.b_neu, self.b_pos)]
        if len(set(rows)) != 3:
            raise ValueError("baseline profiles must be pairwise distinct")

    def as_array(self) -> np.ndarray:
        return np.vstack([self.b_neg.as_array(), self.b_neu.as_array(), self.b_pos.as_array()])

    @classmethod
    def from_array(cls, rows) -> "BaselineProfiles":
        neg, neu, pos = (SentimentProportions.from_array(r) for r in rows)
        return cls(neg, neu, pos)


# published triplets in percent; the positive one sums to 99.99 and is renormalised
PUBLISHED_PROFILES = BaselineProfiles(
    b_neg=SentimentProportions.from_counts((21.63, 45.02, 33.35)),
    b_neu=SentimentProportions.from_counts((16.49, 48.95, 34.56)),
    b_pos=SentimentProportions.from_counts((16.00, 45.05, 38.94)),
)

# tie preference: neutral first, then negative before positive
_PREFERENCE = (EmotionClass.NEUTRAL, EmotionClass.NEGATIVE, EmotionClass.POSITIVE)


def nearest_profiles(observed: np.ndarray, profiles: BaselineProfiles) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`nearest_profile` over the rows of ``observed``.

    Returns ``(classes, tie)`` integer and boolean arrays.
    """
    obs = np.atleast_2d(np.asarray(observed, dtype=float))
    dist = np.sqrt(((obs[:, None, :] - profiles.as_array()[None, :, :]) ** 2).sum(axis=2))
    best = dist.min(axis=1, keepdims=True)
    close = dist - best <= TIE_TOLERANCE
    tie = close.sum(axis=1) > 1
    choice = np.empty(len(obs), dtype=np.int64)
    undecided = np.ones(len(obs), dtype=bool)
    for cls in _PREFERENCE:
        hit = undecided & close[:, cls]
        choice[hit] = cls
        undecided &= ~hit
    return choice, tie


def nearest_profile(observed: SentimentProportions, profiles: BaselineProfiles) -> tuple[EmotionClass, bool]:
    classes, tie = nearest_profiles(np.asarray(list(observed))[None, :], profiles)
    return EmotionClass(int(classes[0])), bool(tie[0])


@dataclass(frozen=True)
class ContagionLabel:
    tweet_id: str
    expected: EmotionClass
    actual: EmotionClass
    susceptible: bool
    tie: bool = False


def label_tweets(
    histories: Sequence[ExposureHistory],
    class_of: Mapping[str, EmotionClass | int],
    profiles: BaselineProfiles = PUBLISHED_PROFILES,
) -> list[ContagionLabel]:
    if not histories:
        return []
    props = per_history_proportions(stimulus_counts(histories, class_of))
    expected, tie = nearest_profiles(props, profiles)
    labels = []
    for h, e, t in zip(histories, expected, tie):
        actual = EmotionClass(class_of[h.target])
        labels.append(ContagionLabel(h.target, EmotionClass(int(e)), actual, bool(e == actual), bool(t)))
    return labels


@dataclass(frozen=True)
class UserSusceptibility:
    user: Hashable
    fraction: float
    num_tweets: int


def user_fractions(
    labels: Iterable[ContagionLabel],
    author_of: Mapping[str, Hashable],
) -> list[UserSusceptibility]:
    """Susceptible fraction per user, sorted by user id."""
    hits: dict = defaultdict(int)
    totals: dict = defaultdict(int)
    for label in labels:
        user = author_of[label.tweet_id]
        totals[user] += 1
        hits[user] += label.susceptible
    return [UserSusceptibility(u, hits[u] / totals[u], totals[u]) for u in sorted(totals)]


def fraction_histogram(fractions: Sequence[UserSusceptibility], num_bins: int = 10) -> list[tuple[float, float, int, float]]:
    """Rows of ``(lower, upper, count, cumulative)`` over [0, 1].

    The last bin is closed; ``cumulative`` is the share of users with a
    fraction below the bin's upper edge (or equal to 1 for the last bin).
    """
    values = np.array([f.fraction for f in fractions], dtype=float)
    edges = np.linspace(0.0, 1.0, num_bins + 1)
    idx = np.clip(np.searchsorted(edges, values, side="right") - 1, 0, num_bins - 1)
    counts = np.bincount(idx, minlength=num_bins)
    cum = np.cumsum(counts) / max(len(values), 1)
    return [(float(edges[i]), float(edges[i + 1]), int(counts[i]), float(cum[i])) for i in range(num_bins)]


@dataclass(frozen=True)
class SusceptibilityClasses:
    high: frozenset = field(default_factory=frozenset)
    low: frozenset = field(default_factory=frozenset)
    threshold_pct: float = 0.15


def classify_users(
    fractions: Sequence[UserSusceptibility],
    threshold_pct: float = 0.15,
) -> SusceptibilityClasses:
    """Bottom and top ``threshold_pct`` of users by susceptible fraction.

    Users are ordered by fraction, ties broken by user id, and
    ``k = round(threshold_pct * population)`` users go in each class.
    """
    if not 0 < threshold_pct <= 0.5:
        raise ValueError("threshold_pct must lie in (0, 0.5]")
    population = len(fractions)
    if population < 2 / threshold_pct:
        raise PopulationTooSmallError(
            f"{population} users is too few for threshold {threshold_pct}; need >= {math.ceil(2 / threshold_pct)}"
        )
    ordered = sorted(fractions, key=lambda f: (f.fraction, f.user))
    k = int(math.floor(threshold_pct * population + 0.5))
    return SusceptibilityClasses(
        high=frozenset(f.user for f in ordered[-k:]),
        low=frozenset(f.user for f in ordered[:k]),
        threshold_pct=threshold_pct,
    )


@dataclass(frozen=True)
class AdoptionRates:
    pos_rate: float
    neg_rate: float
    ratio: float | None
    n_users: int


def adoption_rates(
    labels: Iterable[ContagionLabel],
    author_of: Mapping[str, Hashable] | None = None,
    users: Iterable[Hashable] | None = None,
) -> AdoptionRates:
    """Share of a user's susceptible posts that are positive / negative,
    averaged over users with at least one susceptible post.

    ``users`` restricts the labels to one susceptibility class.  Without
    ``author_of`` all labels are treated as one user.
    """
    keep = None if users is None else set(users)
    pos: dict = defaultdict(int)
    neg: dict = defaultdict(int)
    total: dict = defaultdict(int)
    for label in labels:
        if not label.susceptible:
            continue
        user = author_of[label.tweet_id] if author_of is not None else None
        if keep is not None and user not in keep:
            continue
        total[user] += 1
        pos[user] += label.actual == EmotionClass.POSITIVE
        neg[user] += label.actual == EmotionClass.NEGATIVE
    if not total:
        raise EmptyClassError("no susceptible posts in this class")
    # fsum keeps the class average independent of label order
    pos_rate = math.fsum(pos[u] / total[u] for u in total) / len(total)
    neg_rate = math.fsum(neg[u] / total[u] for u in total) / len(total)
    ratio = pos_rate / neg_rate if neg_rate > 0 else None
    return AdoptionRates(pos_rate, neg_rate, ratio, len(total))
