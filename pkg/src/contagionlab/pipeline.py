"""End-to-end analysis of an event log and follow graph."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .corpus import DEFAULT_MIN_STIMULI, DEFAULT_WINDOW, Dataset, ExposureHistory, FollowGraph, qualifying_histories
from .estimators import ContagionAnalyzer
from .null_model import stimulus_counts
from .sentiment import EmotionClass, Lexicon, classify, default_lexicon, score

logger = logging.getLogger(__name__)


class NoHistoriesError(RuntimeError):
    pass


@dataclass
class AnalysisResult:
    histories: list[ExposureHistory]
    counts: np.ndarray
    responses: np.ndarray
    authors: np.ndarray
    analyzer: ContagionAnalyzer
    class_of: dict[str, EmotionClass]


def score_dataset(dataset: Dataset, lexicon: Lexicon | None = None, eligible_only: bool = True) -> dict[str, EmotionClass]:
    lexicon = lexicon or default_lexicon()
    cache: dict[str, EmotionClass] = {}
    out = {}
    for r in dataset:
        if eligible_only and not (r.lang == "en" and not r.has_media_or_url):
            continue
        cls = cache.get(r.text)
        if cls is None:
            s = score(lexicon, r.text)
            cls = cache[r.text] = classify(s.positive - s.negative)
        out[r.tweet_id] = cls
    return out


def analyze(
    dataset: Dataset,
    graph: FollowGraph,
    lexicon: Lexicon | None = None,
    *,
    window_seconds: int = DEFAULT_WINDOW,
    min_stimuli: int = DEFAULT_MIN_STIMULI,
    class_of: dict[str, EmotionClass] | None = None,
    **analyzer_params,
) -> AnalysisResult:
    """Score, build qualifying histories and fit a :class:`ContagionAnalyzer`.

    ``class_of`` skips scoring when the classes are already known.
    """
    if class_of is None:
        class_of = score_dataset(dataset, lexicon)
    histories = qualifying_histories(dataset, graph, max(min_stimuli, 1), window_seconds)
    if not histories:
        raise NoHistoriesError(
            f"no qualifying histories: {len(dataset)} posts, {len(graph)} tracked users, "
            f"min_stimuli={min_stimuli}, window={window_seconds}s"
        )
    logger.info("%d qualifying histories", len(histories))
    counts = stimulus_counts(histories, class_of)
    responses = np.fromiter((class_of[h.target] for h in histories), dtype=np.int64, count=len(histories))
    authors = np.array([dataset[h.target].author for h in histories], dtype=object)
    analyzer = ContagionAnalyzer(**analyzer_params).fit(counts, responses, groups=authors)
    return AnalysisResult(histories, counts, responses, authors, analyzer, class_of)
