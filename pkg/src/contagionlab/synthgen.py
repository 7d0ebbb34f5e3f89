"""Synthetic follower graphs and post streams with known contagion.

Each user has a disposition (their own class proportions, scattered around
``base_distribution``) and posts as a Poisson process.  At every post the
user either copies the mood of what they just saw, with probability
``contagion_strength`` (or their own ``beta_u``), by drawing the class of a
random post from their one-hour window, or draws from their disposition.
Homophily acts only on who follows whom, so ``contagion_strength=0`` with
``homophily_strength>0`` is a world where stimulus and response correlate
without any contagion.

Texts are assembled from disjoint word pools of the bundled lexicon so each
one scores into its intended class.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, fields
from typing import IO, NamedTuple

import numpy as np

from . import seeding
from .corpus import DEFAULT_WINDOW, Dataset, FollowGraph, TweetRecord, window_join
from .null_model import SentimentProportions
from .sentiment import EmotionClass, Lexicon, default_lexicon

__all__ = [
    "FILLER_WORDS",
    "GroundTruth",
    "SimConfig",
    "SimResult",
    "generate_graph",
    "heterogeneous_beta",
    "simulate",
    "synthesize_text",
]

PUBLISHED_BASELINE = SentimentProportions(0.1729, 0.4827, 0.3444)

FILLER_WORDS = tuple(
    """
    the a an this that it we they you he she today tonight morning evening
    just now then here there with about from into over after before while
    coffee lunch train bus office meeting game match news update weather
    city street home work school phone music movie book team week weekend
    going watching reading waiting heading thinking posting checking
    """.split()
)


@dataclass
class SimConfig:
    n_users: int = 1000
    mean_followees: float = 40.0
    post_rate_per_hour: float = 0.75
    base_distribution: SentimentProportions = PUBLISHED_BASELINE
    contagion_strength: float = 0.0
    homophily_strength: float = 0.0
    duration_hours: float = 168.0
    seed: int = 0
    disposition_concentration: float = 200.0
    homophily_sharpness: float = 50.0
    window_seconds: int = DEFAULT_WINDOW
    start_time: int = 1_411_344_000
    ineligible_fraction: float = 0.0
    warmup_hours: float = 0.0
    warmup_distribution: SentimentProportions | None = None

    def validate(self) -> None:
        if self.n_users < 2:
            raise ValueError("n_users must be >= 2")
        if not 0 < self.mean_followees < self.n_users:
            raise ValueError("mean_followees must lie in (0, n_users)")
        if self.post_rate_per_hour <= 0:
            raise ValueError("post_rate_per_hour must be > 0")
        if self.duration_hours < 0:
            raise ValueError("duration_hours must be >= 0")
        for name in ("contagion_strength", "homophily_strength", "ineligible_fraction"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.disposition_concentration <= 0 or self.homophily_sharpness <= 0:
            raise ValueError("disposition_concentration and homophily_sharpness must be > 0")
        if self.window_seconds <= 0:
            raise ValueError("window_seconds must be > 0")
        if self.start_time < 0:
            raise ValueError("start_time must be >= 0")
        if self.warmup_hours < 0:
            raise ValueError("warmup_hours must be >= 0")
        if self.warmup_hours > 0 and self.warmup_distribution is None:
            raise ValueError("warmup_hours needs a warmup_distribution")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["base_distribution"] = tuple(self.base_distribution)
        if self.warmup_distribution is not None:
            out["warmup_distribution"] = tuple(self.warmup_distribution)
        return out

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


@dataclass
class GroundTruth:
    tweet_ids: list[str]
    contagion_applied: np.ndarray
    sampled_class: np.ndarray
    users: list[str]
    dispositions: np.ndarray
    beta: np.ndarray

    def class_of(self) -> dict[str, EmotionClass]:
        return {t: EmotionClass(int(c)) for t, c in zip(self.tweet_ids, self.sampled_class)}

    def beta_of(self) -> dict[str, float]:
        return dict(zip(self.users, (float(b) for b in self.beta)))

    def write_tweets(self, stream: IO[str]) -> None:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["tweet_id", "contagion_applied", "sampled_class"])
        for tid, applied, cls in zip(self.tweet_ids, self.contagion_applied, self.sampled_class):
            w.writerow([tid, str(bool(applied)).lower(), EmotionClass(int(cls)).label])

    def write_users(self, stream: IO[str]) -> None:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["user", "beta", "disp_neg", "disp_neu", "disp_pos"])
        for user, beta, disp in zip(self.users, self.beta, self.dispositions):
            w.writerow([user, repr(float(beta)), *(repr(float(x)) for x in disp)])


class SimResult(NamedTuple):
    dataset: Dataset
    graph: FollowGraph
    truth: GroundTruth


def _user_names(n: int) -> list[str]:
    width = len(str(n - 1))
    return [f"u{i:0{width}d}" for i in range(n)]


def _dispositions(config: SimConfig, rng: np.random.Generator) -> np.ndarray:
    alpha = config.disposition_concentration * np.asarray(list(config.base_distribution))
    draws = rng.gamma(np.broadcast_to(alpha, (config.n_users, 3)))
    draws[:, alpha == 0] = 0.0
    return draws / draws.sum(axis=1, keepdims=True)


def generate_graph(
    config: SimConfig,
    rng: np.random.Generator,
    dispositions: np.ndarray | None = None,
) -> FollowGraph:
    """Directed random graph with expected out-degree ``mean_followees``.

    Out-degrees are Binomial(n - 1, mean_followees / (n - 1)).  Followees are
    uniform without homophily; with ``homophily_strength = h`` each candidate
    gets weight ``(1 - h) * uniform + h * similarity ** sharpness``
    (both parts normalised), where similarity is one minus the total
    variation distance between dispositions.
    """
    config.validate()
    n = config.n_users
    names = _user_names(n)
    h = config.homophily_strength
    if h > 0 and dispositions is None:
        raise ValueError("homophily needs user dispositions")
    degrees = rng.binomial(n - 1, config.mean_followees / (n - 1), size=n)
    adjacency: dict[str, list[str]] = {}
    for u in range(n):
        k = int(degrees[u])
        if h == 0:
            picks = rng.choice(n - 1, size=k, replace=False)
        else:
            others = np.delete(np.arange(n), u)
            tv = 0.5 * np.abs(dispositions[others] - dispositions[u]).sum(axis=1)
            affinity = (1.0 - tv) ** config.homophily_sharpness
            weights = (1 - h) / (n - 1) + h * affinity / affinity.sum()
            # Gumbel top-k: weighted sampling without replacement
            keys = np.log(weights) + rng.gumbel(size=n - 1)
            picks = np.argpartition(-keys, k - 1)[:k] if k else np.empty(0, dtype=np.int64)
        picks = np.where(picks >= u, picks + 1, picks)
        adjacency[names[u]] = [names[v] for v in np.sort(picks)]
    return FollowGraph(adjacency)


def heterogeneous_beta(config: SimConfig, low: float, high: float, split: float) -> np.ndarray:
    """Per-user contagion strengths: ``round(split * n_users)`` users at
    ``high``, chosen at random from the config seed, the rest at ``low``."""
    if not 0.0 <= low < high <= 1.0:
        raise ValueError("need 0 <= low < high <= 1")
    if not 0.0 <= split <= 1.0:
        raise ValueError("split must lie in [0, 1]")
    n = config.n_users
    k = int(math.floor(split * n + 0.5))
    rng = seeding.stage_rng(config.seed, "beta")
    beta = np.full(n, low, dtype=float)
    beta[rng.permutation(n)[:k]] = high
    return beta


def _word_pools(lexicon: Lexicon) -> dict[EmotionClass, tuple[str, ...]]:
    pos = tuple(sorted(t for t, v in lexicon.sentiment_terms.items() if v == 3))
    neg = tuple(sorted(t for t, v in lexicon.sentiment_terms.items() if v == -3))
    known = set(lexicon.sentiment_terms) | set(lexicon.booster_terms) | set(lexicon.negation_terms)
    fillers = tuple(w for w in FILLER_WORDS if w not in known)
    if not pos or not neg or not fillers:
        raise ValueError("lexicon lacks the +3 / -3 terms needed for text synthesis")
    return {EmotionClass.POSITIVE: pos, EmotionClass.NEGATIVE: neg, EmotionClass.NEUTRAL: fillers}


def synthesize_text(cls: EmotionClass, rng: np.random.Generator, lexicon: Lexicon | None = None) -> str:
    pools = _word_pools(lexicon or default_lexicon())
    return _compose(cls, rng, pools)


def _compose(cls: EmotionClass, rng: np.random.Generator, pools) -> str:
    fillers = pools[EmotionClass.NEUTRAL]
    words = [fillers[i] for i in rng.integers(len(fillers), size=int(rng.integers(2, 7)))]
    if cls != EmotionClass.NEUTRAL:
        pool = pools[cls]
        words += [pool[i] for i in rng.integers(len(pool), size=int(rng.integers(1, 3)))]
        order = rng.permutation(len(words))
        words = [words[i] for i in order]
    return " ".join(words)


def simulate(config: SimConfig, beta: np.ndarray | None = None) -> SimResult:
    """Run the agent model and return the event log, graph and ground truth.

    ``beta`` optionally overrides ``contagion_strength`` per user (see
    :func:`heterogeneous_beta`).
    """
    config.validate()
    n = config.n_users
    names = _user_names(n)
    lexicon = default_lexicon()
    pools = _word_pools(lexicon)

    dispositions = _dispositions(config, seeding.stage_rng(config.seed, "dispositions"))
    graph = generate_graph(config, seeding.stage_rng(config.seed, "graph"), dispositions)
    if beta is None:
        beta = np.full(n, config.contagion_strength, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (n,) or np.any((beta < 0) | (beta > 1)):
        raise ValueError("beta must hold one value in [0, 1] per user")

    # timeline: Poisson counts, uniform integer offsets, canonical order
    rng = seeding.stage_rng(config.seed, "timeline")
    horizon = int(round(config.duration_hours * 3600))
    counts = rng.poisson(config.post_rate_per_hour * config.duration_hours, size=n) if horizon > 0 else np.zeros(n, dtype=np.int64)
    authors = np.repeat(np.arange(n), counts)
    offsets = rng.integers(0, max(horizon, 1), size=len(authors))
    tiebreak = rng.random(len(authors))
    order = np.lexsort((tiebreak, authors, offsets))
    authors, offsets = authors[order], offsets[order]
    timestamps = config.start_time + offsets
    visible = rng.random(len(authors)) >= config.ineligible_fraction

    code = {name: i for i, name in enumerate(names)}
    followees = [np.array([code[f] for f in sorted(graph.followees(u))], dtype=np.int64) for u in names]
    indptr, indices = window_join(timestamps, authors, followees, config.window_seconds, visible)

    classes, applied = _assign_emotions(config, dispositions, beta, authors, offsets, indptr, indices)

    text_rng = seeding.stage_rng(config.seed, "text")
    width = len(str(max(len(authors) - 1, 0)))
    tweet_ids = [f"t{i:0{width}d}" for i in range(len(authors))]
    records = [
        TweetRecord(
            tweet_id=tweet_ids[i],
            author=names[authors[i]],
            timestamp=int(timestamps[i]),
            text=_compose(EmotionClass(int(classes[i])), text_rng, pools),
            lang="en",
            has_media_or_url=not bool(visible[i]),
        )
        for i in range(len(authors))
    ]
    truth = GroundTruth(
        tweet_ids=tweet_ids,
        contagion_applied=applied,
        sampled_class=classes,
        users=names,
        dispositions=dispositions,
        beta=beta,
    )
    return SimResult(Dataset(records), graph, truth)


def _assign_emotions(config, dispositions, beta, authors, offsets, indptr, indices):
    rng = seeding.stage_rng(config.seed, "emotions")
    m = len(authors)
    own = _sample_rows(dispositions[authors], rng.random(m))
    warm = offsets < config.warmup_hours * 3600
    if warm.any():
        w = np.asarray(list(config.warmup_distribution))
        own[warm] = _sample_rows(np.broadcast_to(w, (int(warm.sum()), 3)), rng.random(int(warm.sum())))
    copy_draw = rng.random(m)
    pick = rng.random(m)

    classes = own.copy()
    applied = np.zeros(m, dtype=bool)
    sizes = np.diff(indptr)
    candidates = np.flatnonzero((copy_draw < beta[authors]) & (sizes > 0) & ~warm)
    if len(candidates) == 0:
        return classes, applied
    # stimuli always precede their target, so a single pass in canonical order suffices
    for i in candidates.tolist():
        start = indptr[i]
        j = indices[start + int(pick[i] * (indptr[i + 1] - start))]
        classes[i] = classes[j]
    applied[candidates] = True
    return classes, applied


def _sample_rows(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(probs, axis=1)
    return np.minimum((u[:, None] >= cdf).sum(axis=1), 2).astype(np.int64)
