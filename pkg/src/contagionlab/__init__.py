"""Emotional-contagion measurement for timestamped social post streams."""

from .corpus import (
    Dataset,
    ExposureHistory,
    FollowGraph,
    TweetRecord,
    build_history,
    is_eligible,
    load_events,
    load_graph,
    qualifying_histories,
)
from .estimators import ContagionAnalyzer, SentimentScorer
from .null_model import (
    BaselineResult,
    SentimentProportions,
    StimulusBucket,
    conditional_distribution,
    mann_whitney_u,
    overexposure,
    pool_bucket,
    sample_baseline,
    stimulus_counts,
)
from .sentiment import EmotionClass, Lexicon, SentimentScore, classify, default_lexicon, load_lexicon, polarity, score, tokenize
from .susceptibility import (
    PUBLISHED_PROFILES,
    BaselineProfiles,
    adoption_rates,
    classify_users,
    label_tweets,
    nearest_profile,
    user_fractions,
)
from .synthgen import GroundTruth, SimConfig, heterogeneous_beta, simulate
from .valence import LinearFit, bin_stimuli, bucket_valence, fit_linear

__version__ = "0.1.0"
