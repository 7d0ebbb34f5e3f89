"""Event-log and follow-graph ingestion, and exposure-history reconstruction.

Event log
    One JSON object per line with the keys ``tweet_id``, ``author``,
    ``timestamp`` (integer epoch seconds), ``lang``, ``has_media_or_url``
    and ``text``.  Text escaping follows JSON string rules.

Follow graph
    CSV with a ``follower,followee`` header.  A row with an empty followee
    (``alice,``) registers a tracked user who follows nobody.

An exposure history for a post ``t`` by ``u`` holds every eligible post by
the accounts ``u`` follows with timestamp in ``[t - window, t)``.
"""

from __future__ import annotations

import csv
import json
import logging
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping, Sequence

import numpy as np

__all__ = [
    "DEFAULT_WINDOW",
    "DEFAULT_MIN_STIMULI",
    "Dataset",
    "ExposureHistory",
    "FollowGraph",
    "MalformedRecordError",
    "TweetRecord",
    "UnknownUserError",
    "build_history",
    "is_eligible",
    "load_events",
    "load_graph",
    "qualifying_histories",
    "window_join",
    "write_events",
    "write_graph",
]

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = 3600
DEFAULT_MIN_STIMULI = 20
EVENT_FIELDS = ("tweet_id", "author", "timestamp", "lang", "has_media_or_url", "text")


class MalformedRecordError(ValueError):
    pass


class UnknownUserError(KeyError):
    def __str__(self):
        return f"unknown user {self.args[0]!r}: not present in the follow graph"


@dataclass(frozen=True)
class TweetRecord:
    tweet_id: str
    author: str
    timestamp: int
    text: str = ""
    lang: str = "en"
    has_media_or_url: bool = False

    def __post_init__(self):
        if self.timestamp < 0:
            raise MalformedRecordError(f"negative timestamp on {self.tweet_id!r}")

    def to_json(self) -> str:
        return json.dumps(
            {name: getattr(self, name) for name in EVENT_FIELDS},
            ensure_ascii=False,
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, line: str) -> "TweetRecord":
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecordError(f"invalid JSON: {exc}") from None
        if not isinstance(obj, dict):
            raise MalformedRecordError("record is not a JSON object")
        missing = [name for name in EVENT_FIELDS if name not in obj]
        if missing:
            raise MalformedRecordError(f"missing fields: {', '.join(missing)}")
        ts = obj["timestamp"]
        if isinstance(ts, bool) or not isinstance(ts, int):
            raise MalformedRecordError(f"timestamp must be an integer, got {ts!r}")
        if not isinstance(obj["has_media_or_url"], bool):
            raise MalformedRecordError("has_media_or_url must be a boolean")
        for name in ("tweet_id", "author", "lang", "text"):
            if not isinstance(obj[name], str):
                raise MalformedRecordError(f"{name} must be a string")
        if not obj["tweet_id"] or not obj["author"]:
            raise MalformedRecordError("tweet_id and author must be non-empty")
        return cls(
            tweet_id=obj["tweet_id"],
            author=obj["author"],
            timestamp=ts,
            text=obj["text"],
            lang=obj["lang"],
            has_media_or_url=obj["has_media_or_url"],
        )


def is_eligible(t: TweetRecord) -> bool:
    return t.lang == "en" and not t.has_media_or_url


@dataclass(frozen=True)
class ExposureHistory:
    target: str
    stimuli: tuple[str, ...]
    window_seconds: int = DEFAULT_WINDOW

    def __len__(self) -> int:
        return len(self.stimuli)


class FollowGraph:
    """Directed follow relation: ``followees(u)`` are the accounts ``u`` reads."""

    def __init__(self, adjacency: Mapping[str, Iterable[str]] | None = None, skipped: int = 0):
        adj: dict[str, frozenset[str]] = {}
        for user, followees in (adjacency or {}).items():
            fs = frozenset(followees)
            if user in fs:
                raise ValueError(f"self-loop on {user!r}")
            adj[user] = fs
        self._adj = adj
        self.skipped = skipped

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[str, str]], users: Iterable[str] = ()) -> "FollowGraph":
        adj: dict[str, set[str]] = {u: set() for u in users}
        for follower, followee in edges:
            adj.setdefault(follower, set()).add(followee)
        return cls(adj)

    def followees(self, user: str) -> frozenset[str]:
        try:
            return self._adj[user]
        except KeyError:
            raise UnknownUserError(user) from None

    def __contains__(self, user: object) -> bool:
        return user in self._adj

    def __iter__(self) -> Iterator[str]:
        return iter(self._adj)

    def __len__(self) -> int:
        return len(self._adj)

    @property
    def users(self) -> list[str]:
        return sorted(self._adj)

    def num_edges(self) -> int:
        return sum(len(f) for f in self._adj.values())

    def edges(self) -> Iterator[tuple[str, str]]:
        for user in self.users:
            for followee in sorted(self._adj[user]):
                yield user, followee

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FollowGraph) and self._adj == other._adj

    def __repr__(self) -> str:
        return f"FollowGraph(users={len(self)}, edges={self.num_edges()})"


class Dataset:
    """An immutable collection of posts with the indexes needed for window joins.

    Posts are kept in input order; ``canonical`` order sorts by
    ``(timestamp, tweet_id)`` and is what every derived output uses.
    """

    def __init__(self, records: Iterable[TweetRecord] = (), skipped: int = 0):
        self.records: tuple[TweetRecord, ...] = tuple(records)
        self.skipped = skipped
        self._by_id: dict[str, TweetRecord] = {}
        for r in self.records:
            if r.tweet_id in self._by_id:
                raise MalformedRecordError(f"duplicate tweet_id {r.tweet_id!r}")
            self._by_id[r.tweet_id] = r
        self._index_cache = None

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[TweetRecord]:
        return iter(self.records)

    def __getitem__(self, tweet_id: str) -> TweetRecord:
        return self._by_id[tweet_id]

    def __contains__(self, tweet_id: object) -> bool:
        return tweet_id in self._by_id

    @property
    def _index(self) -> "_CanonicalIndex":
        if self._index_cache is None:
            self._index_cache = _CanonicalIndex(self.records)
        return self._index_cache

    def canonical(self) -> list[TweetRecord]:
        return list(self._index.records)


class _CanonicalIndex:
    def __init__(self, records: Sequence[TweetRecord]):
        ordered = sorted(records, key=lambda r: (r.timestamp, r.tweet_id))
        self.records = ordered
        self.ids = np.array([r.tweet_id for r in ordered], dtype=object)
        self.timestamps = np.array([r.timestamp for r in ordered], dtype=np.int64)
        self.eligible = np.array([is_eligible(r) for r in ordered], dtype=bool)
        self.position = {r.tweet_id: i for i, r in enumerate(ordered)}
        self.author_names = sorted({r.author for r in ordered})
        self.author_code = {a: i for i, a in enumerate(self.author_names)}
        self.authors = np.array([self.author_code[r.author] for r in ordered], dtype=np.int64)

    def followee_codes(self, graph: FollowGraph) -> list[np.ndarray | None]:
        """Per author code: codes of followees that appear in the log, or None if untracked."""
        out: list[np.ndarray | None] = []
        for name in self.author_names:
            if name not in graph:
                out.append(None)
                continue
            codes = [self.author_code[f] for f in graph.followees(name) if f in self.author_code]
            out.append(np.array(sorted(codes), dtype=np.int64))
        return out


def _concat_ranges(starts: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    total = int(lengths.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    offsets = np.cumsum(lengths) - lengths
    return np.repeat(starts - offsets, lengths) + np.arange(total, dtype=np.int64)


def window_join(
    timestamps: np.ndarray,
    authors: np.ndarray,
    followees: Sequence[np.ndarray | None],
    window_seconds: int = DEFAULT_WINDOW,
    visible: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Exposure windows for every post of a canonically ordered log.

    ``timestamps`` must be non-decreasing and ``authors`` holds integer
    author codes.  ``followees[a]`` lists the author codes followed by ``a``
    (``None`` for untracked authors, whose windows are left empty).  Only
    posts with ``visible`` set can be stimuli.

    Returns CSR arrays ``(indptr, indices)``: the stimuli of post ``i`` are
    ``indices[indptr[i]:indptr[i + 1]]``, ascending.
    """
    timestamps = np.asarray(timestamps, dtype=np.int64)
    authors = np.asarray(authors, dtype=np.int64)
    n = len(timestamps)
    if n and np.any(np.diff(timestamps) < 0):
        raise ValueError("timestamps must be sorted ascending")
    if visible is None:
        visible = np.ones(n, dtype=bool)

    order = np.argsort(authors, kind="stable")
    bounds = np.searchsorted(authors[order], np.arange(len(followees) + 1))
    posts_of = [order[bounds[a]:bounds[a + 1]] for a in range(len(followees))]
    visible_of = [p[visible[p]] for p in posts_of]

    lo = np.zeros(n, dtype=np.int64)
    counts = np.zeros(n, dtype=np.int64)
    merged_of: dict[int, np.ndarray] = {}
    for a, fs in enumerate(followees):
        targets = posts_of[a]
        if fs is None or len(targets) == 0 or len(fs) == 0:
            continue
        merged = np.sort(np.concatenate([visible_of[f] for f in fs]))
        if len(merged) == 0:
            continue
        ts = timestamps[merged]
        t = timestamps[targets]
        start = np.searchsorted(ts, t - window_seconds, side="left")
        stop = np.searchsorted(ts, t, side="left")
        lo[targets] = start
        counts[targets] = stop - start
        merged_of[a] = merged

    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    indices = np.empty(int(indptr[-1]), dtype=np.int64)
    for a, merged in merged_of.items():
        targets = posts_of[a]
        lengths = counts[targets]
        src = _concat_ranges(lo[targets], lengths)
        dst = _concat_ranges(indptr[targets], lengths)
        indices[dst] = merged[src]
    return indptr, indices


# -- I/O ----------------------------------------------------------------------

def _text_lines(source) -> Iterator[str]:
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            yield from _text_lines(fh)
        return
    for line in source:
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        yield line


def load_events(source: str | Path | IO, strict: bool = False) -> Dataset:
    """Read a JSON-lines event log.

    Malformed lines and duplicate ids are skipped and counted in
    ``Dataset.skipped``; with ``strict=True`` they raise
    :class:`MalformedRecordError` instead.  Blank lines are ignored.
    """
    records: list[TweetRecord] = []
    seen: set[str] = set()
    skipped = 0
    for lineno, line in enumerate(_text_lines(source), 1):
        if not line.strip():
            continue
        try:
            record = TweetRecord.from_json(line)
            if record.tweet_id in seen:
                raise MalformedRecordError(f"duplicate tweet_id {record.tweet_id!r}")
        except (MalformedRecordError, UnicodeDecodeError) as exc:
            if strict:
                raise MalformedRecordError(f"line {lineno}: {exc}") from None
            logger.debug("skipping line %d: %s", lineno, exc)
            skipped += 1
            continue
        seen.add(record.tweet_id)
        records.append(record)
    if skipped:
        logger.warning("skipped %d malformed event line(s)", skipped)
    return Dataset(records, skipped=skipped)


def write_events(records: Iterable[TweetRecord], stream: IO[str]) -> int:
    n = 0
    for r in records:
        stream.write(r.to_json())
        stream.write("\n")
        n += 1
    return n


def load_graph(source: str | Path | IO, strict: bool = False) -> FollowGraph:
    lines = _text_lines(source)
    reader = csv.reader(lines)
    header = next(reader, None)
    if header is None:
        return FollowGraph()
    if [h.strip() for h in header] != ["follower", "followee"]:
        raise MalformedRecordError(f"graph header must be 'follower,followee', got {header!r}")
    adj: dict[str, set[str]] = defaultdict(set)
    skipped = 0
    for row in reader:
        if not row or all(not c.strip() for c in row):
            continue
        problem = None
        if len(row) != 2:
            problem = f"expected 2 columns, got {len(row)}"
        else:
            follower, followee = row[0].strip(), row[1].strip()
            if not follower:
                problem = "empty follower"
            elif follower == followee:
                problem = f"self-loop on {follower!r}"
        if problem:
            if strict:
                raise MalformedRecordError(f"graph line {reader.line_num}: {problem}")
            skipped += 1
            continue
        adj[follower]
        if followee:
            adj[follower].add(followee)
    return FollowGraph(adj, skipped=skipped)


def write_graph(graph: FollowGraph, stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["follower", "followee"])
    for user in graph.users:
        followees = sorted(graph.followees(user))
        if not followees:
            writer.writerow([user, ""])
        for f in followees:
            writer.writerow([user, f])


# -- exposure histories -------------------------------------------------------

def build_history(
    dataset: Dataset,
    graph: FollowGraph,
    target: TweetRecord,
    window_seconds: int = DEFAULT_WINDOW,
) -> ExposureHistory:
    followees = graph.followees(target.author)
    idx = dataset._index
    start = np.searchsorted(idx.timestamps, target.timestamp - window_seconds, side="left")
    stop = np.searchsorted(idx.timestamps, target.timestamp, side="left")
    stimuli = tuple(
        r.tweet_id for r in idx.records[start:stop]
        if r.author in followees and is_eligible(r)
    )
    return ExposureHistory(target.tweet_id, stimuli, window_seconds)


def qualifying_histories(
    dataset: Dataset,
    graph: FollowGraph,
    min_stimuli: int = DEFAULT_MIN_STIMULI,
    window_seconds: int = DEFAULT_WINDOW,
) -> list[ExposureHistory]:
    """Histories of every eligible post by a tracked user with at least
    ``min_stimuli`` stimuli, in canonical target order."""
    if min_stimuli < 0:
        raise ValueError("min_stimuli must be >= 0")
    if len(dataset) == 0:
        return []
    idx = dataset._index
    followees = idx.followee_codes(graph)
    indptr, indices = window_join(idx.timestamps, idx.authors, followees, window_seconds, idx.eligible)
    tracked = np.array([f is not None for f in followees], dtype=bool)
    sizes = np.diff(indptr)
    keep = np.flatnonzero(idx.eligible & tracked[idx.authors] & (sizes >= min_stimuli))
    ids = idx.ids
    return [
        ExposureHistory(ids[i], tuple(ids[indices[indptr[i]:indptr[i + 1]]].tolist()), window_seconds)
        for i in keep
    ]
