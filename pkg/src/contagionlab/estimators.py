"""scikit-learn style front ends.

``SentimentScorer`` is a stateless transformer from texts to
``(positive, negative)`` scores.  ``ContagionAnalyzer`` fits the whole
contagion analysis on a matrix of per-history stimulus class counts ``X``
(columns negative, neutral, positive) and the response classes ``y``;
``groups`` carries the author of each response for the per-user analysis.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import seeding
from ._validation import check_classes, check_counts, check_texts
from .null_model import (
    EmptyGroupError,
    SentimentProportions,
    StimulusBucket,
    group_mean,
    mann_whitney_u,
    overexposure,
    per_history_proportions,
    sample_baseline,
)
from .sentiment import EmotionClass, Lexicon, classify, default_lexicon, load_lexicon, score
from .susceptibility import (
    PUBLISHED_PROFILES,
    BaselineProfiles,
    ContagionLabel,
    EmptyClassError,
    adoption_rates,
    classify_users,
    fraction_histogram,
    nearest_profiles,
    user_fractions,
)
from .valence import bin_stimuli, fit_linear, stimulus_valences

__all__ = ["ContagionAnalyzer", "SentimentScorer"]


class SentimentScorer(TransformerMixin, BaseEstimator):
    """Lexicon scorer as a transformer.

    ``lexicon`` may be a :class:`Lexicon`, a path to a lexicon file, or
    ``None`` for the bundled default.
    """

    def __init__(self, lexicon=None):
        self.lexicon = lexicon

    def fit(self, X=None, y=None):
        if self.lexicon is None:
            self.lexicon_ = default_lexicon()
        elif isinstance(self.lexicon, Lexicon):
            self.lexicon_ = self.lexicon
        elif isinstance(self.lexicon, (str, Path)):
            self.lexicon_ = load_lexicon(self.lexicon)
        else:
            raise TypeError(f"unsupported lexicon {self.lexicon!r}")
        return self

    def transform(self, X) -> np.ndarray:
        """``(n, 2)`` integer array of positive and negative scores."""
        check_is_fitted(self, "lexicon_")
        texts = check_texts(X)
        out = np.empty((len(texts), 2), dtype=np.int64)
        for i, text in enumerate(texts):
            s = score(self.lexicon_, text)
            out[i] = s.positive, s.negative
        return out

    def predict(self, X) -> np.ndarray:
        """Emotion class (0 negative, 1 neutral, 2 positive) per text."""
        scores = self.transform(X)
        return np.array([classify(int(p)) for p in scores[:, 0] - scores[:, 1]], dtype=np.int64)

    def get_feature_names_out(self, input_features=None):
        return np.array(["s_pos", "s_neg"], dtype=object)


GROUP_NAMES = {
    EmotionClass.NEGATIVE: "pre_negative",
    EmotionClass.NEUTRAL: "pre_neutral",
    EmotionClass.POSITIVE: "pre_positive",
}


class ContagionAnalyzer(BaseEstimator):
    """Null-model, valence and susceptibility analysis in one estimator.

    Parameters
    ----------
    num_bins : number of stimulus-valence bins on [-1, 1].
    threshold_pct : share of users in each of the high / low susceptibility classes.
    profiles : ``"published"`` for the published baseline profiles, ``"data"`` to use
        the conditional distributions measured on ``X``, or a
        :class:`BaselineProfiles`.
    replace : resample the baseline with (default) or without replacement.
    n_replicates : number of full baseline passes.
    weighted_fit : weight valence bins by their counts in the linear fit.
    random_state : root seed; the baseline uses the ``"baseline"`` stage seed.

    Attributes set by ``fit`` end with an underscore, e.g. ``baseline_``,
    ``conditional_``, ``overexposure_``, ``mann_whitney_``, ``valence_fit_``,
    ``user_fractions_``, ``classes_``, ``adoption_``.
    """

    def __init__(
        self,
        num_bins: int = 20,
        threshold_pct: float = 0.15,
        profiles="published",
        replace: bool = True,
        n_replicates: int = 1,
        weighted_fit: bool = False,
        random_state: int | None = None,
    ):
        self.num_bins = num_bins
        self.threshold_pct = threshold_pct
        self.profiles = profiles
        self.replace = replace
        self.n_replicates = n_replicates
        self.weighted_fit = weighted_fit
        self.random_state = random_state

    def fit(self, X, y, groups=None):
        X = check_counts(X)
        y = check_classes(y, len(X))
        if groups is not None:
            groups = np.asarray(groups, dtype=object)
            if len(groups) != len(X):
                raise ValueError(f"groups has {len(groups)} entries, expected {len(X)}")

        root = seeding.resolve_seed(self.random_state)
        self.seed_ = root
        props = per_history_proportions(X)
        self.n_histories_ = len(X)

        neg, neu, pos = (int(c) for c in X.sum(axis=0))
        self.bucket_ = StimulusBucket((neg, neu, pos))
        self.baseline_ = sample_baseline(
            self.bucket_,
            X.sum(axis=1),
            seeding.stage_seed(root, "baseline"),
            replace=self.replace,
            n_replicates=self.n_replicates,
        )

        self.conditional_ = {}
        self.overexposure_ = {}
        self.mann_whitney_ = {}
        for cls in EmotionClass:
            rows = props[y == cls]
            if len(rows) == 0:
                continue
            mean, se = group_mean(rows)
            observed = SentimentProportions.from_array(mean / mean.sum())
            self.conditional_[cls] = (observed, tuple(float(s) for s in se))
            self.overexposure_[cls] = overexposure(observed, self.baseline_.mean)
            self.mann_whitney_[cls] = mann_whitney_u(rows[:, cls], self.baseline_.draws[:, cls])

        valences = stimulus_valences(X)
        defined = ~np.isnan(valences)
        self.valence_bins_ = bin_stimuli(zip(valences[defined], y[defined]), self.num_bins)
        try:
            self.valence_fit_ = fit_linear(self.valence_bins_, weighted=self.weighted_fit)
        except ValueError:
            self.valence_fit_ = None

        self.profiles_ = self._resolve_profiles()
        self.expected_, self.ties_ = nearest_profiles(props, self.profiles_)
        self.susceptible_ = self.expected_ == y
        self.y_ = y

        self.user_fractions_ = None
        self.histogram_ = None
        self.classes_ = None
        self.adoption_ = {}
        if groups is not None:
            self._fit_users(groups)
        return self

    def _resolve_profiles(self) -> BaselineProfiles:
        if isinstance(self.profiles, BaselineProfiles):
            return self.profiles
        if self.profiles == "published":
            return PUBLISHED_PROFILES
        if self.profiles == "data":
            missing = [c.label for c in EmotionClass if c not in self.conditional_]
            if missing:
                raise EmptyGroupError(f"cannot derive profiles: no {', '.join(missing)} responses")
            return BaselineProfiles(*(self.conditional_[c][0] for c in EmotionClass))
        raise ValueError(f"profiles must be 'published', 'data' or BaselineProfiles, got {self.profiles!r}")

    def _fit_users(self, groups: np.ndarray) -> None:
        keys = [str(i) for i in range(len(groups))]
        author_of = dict(zip(keys, groups))
        labels = [
            ContagionLabel(k, EmotionClass(int(e)), EmotionClass(int(a)), bool(s), bool(t))
            for k, e, a, s, t in zip(keys, self.expected_, self.y_, self.susceptible_, self.ties_)
        ]
        self.labels_ = labels
        self.user_fractions_ = user_fractions(labels, author_of)
        self.histogram_ = fraction_histogram(self.user_fractions_)
        try:
            self.classes_ = classify_users(self.user_fractions_, self.threshold_pct)
        except ValueError:
            self.classes_ = None
            return
        for name, members in (("low", self.classes_.low), ("high", self.classes_.high)):
            try:
                self.adoption_[name] = adoption_rates(labels, author_of, members)
            except EmptyClassError:
                self.adoption_[name] = None

    def predict(self, X) -> np.ndarray:
        """Response class expected under contagion: nearest baseline profile."""
        check_is_fitted(self, "profiles_")
        classes, _ = nearest_profiles(per_history_proportions(check_counts(X)), self.profiles_)
        return classes

    def transform(self, X) -> np.ndarray:
        """Stimulus valence of each history (NaN when it has no polar stimuli)."""
        check_is_fitted(self, "profiles_")
        return stimulus_valences(check_counts(X))

    def score(self, X, y) -> float:
        """Share of responses whose class matches the contagion-expected class."""
        y = check_classes(y, len(X))
        return float(np.mean(self.predict(X) == y))
