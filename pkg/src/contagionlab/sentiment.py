"""Lexicon-rule sentiment scoring for short informal posts.

Every text gets two integer strengths on a 1..5 scale, one for positive and
one for negative sentiment.  Their difference is the polarity, and the sign
of the polarity gives the three-way emotion class used everywhere else in
the package.

Rules applied to each lexicon hit, in order:

* elongated words ("loooove") gain one point of magnitude,
* a booster directly in front ("very good") shifts the magnitude,
* a negation among the two preceding tokens ("not good", "not very good")
  moves the hit to the opposite polarity, dampened to at most 3,
* the magnitude is clamped to 2..5.

The strongest hit per polarity wins; a polarity with no hits scores 1.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import IO, Iterable, Mapping, NamedTuple

__all__ = [
    "EmotionClass",
    "Lexicon",
    "LexiconError",
    "SentimentScore",
    "Token",
    "classify",
    "default_lexicon",
    "load_lexicon",
    "parse_lexicon",
    "polarity",
    "score",
    "tokenize",
]

NEGATION_WINDOW = 2
ELONGATION_BONUS = 1
NEGATION_CAP = 3
MIN_STRENGTH = 2
MAX_STRENGTH = 5


class EmotionClass(enum.IntEnum):
    """Three-way emotion label.  Integer values follow the canonical
    (negative, neutral, positive) component order."""

    NEGATIVE = 0
    NEUTRAL = 1
    POSITIVE = 2

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "EmotionClass":
        return cls[label.strip().upper()]


class LexiconError(ValueError):
    pass


def _frozen(mapping: Mapping) -> Mapping:
    return MappingProxyType(dict(mapping))


@dataclass(frozen=True)
class Lexicon:
    sentiment_terms: Mapping[str, int] = field(default_factory=dict)
    booster_terms: Mapping[str, int] = field(default_factory=dict)
    negation_terms: frozenset = frozenset()
    emoticons: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "sentiment_terms", _frozen(self.sentiment_terms))
        object.__setattr__(self, "booster_terms", _frozen(self.booster_terms))
        object.__setattr__(self, "negation_terms", frozenset(self.negation_terms))
        object.__setattr__(self, "emoticons", _frozen(self.emoticons))

        seen: set[str] = set()
        for table in (self.sentiment_terms, self.booster_terms, self.negation_terms, self.emoticons):
            for term in table:
                if term != term.lower():
                    raise LexiconError(f"lexicon term {term!r} is not lowercase")
                if term in seen:
                    raise LexiconError(f"lexicon term {term!r} appears in more than one table")
                seen.add(term)
        for table in (self.sentiment_terms, self.emoticons):
            for term, value in table.items():
                if not MIN_STRENGTH <= abs(value) <= MAX_STRENGTH:
                    raise LexiconError(f"strength {value} of {term!r} outside +-2..5")
        for term, value in self.booster_terms.items():
            if not -2 <= value <= 2:
                raise LexiconError(f"booster shift {value} of {term!r} outside -2..+2")

    def __len__(self) -> int:
        return (
            len(self.sentiment_terms)
            + len(self.booster_terms)
            + len(self.negation_terms)
            + len(self.emoticons)
        )

    # immutable, so copies can share; pickling goes through plain dicts
    def __copy__(self) -> "Lexicon":
        return self

    def __deepcopy__(self, memo) -> "Lexicon":
        return self

    def __reduce__(self):
        return (
            Lexicon,
            (dict(self.sentiment_terms), dict(self.booster_terms), self.negation_terms, dict(self.emoticons)),
        )

    def strength(self, term: str) -> int | None:
        value = self.sentiment_terms.get(term)
        if value is None:
            value = self.emoticons.get(term)
        return value


def parse_lexicon(lines: Iterable[str]) -> Lexicon:
    """Build a lexicon from ``term<TAB>kind<TAB>value`` lines.

    ``kind`` is one of ``sent``, ``boost``, ``neg`` or ``emo``.  Blank lines
    and lines starting with ``#`` are ignored.
    """
    tables: dict[str, dict[str, int]] = {"sent": {}, "boost": {}, "emo": {}}
    negations: set[str] = set()
    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise LexiconError(f"line {lineno}: expected 3 tab-separated fields, got {len(parts)}")
        term, kind, value = parts[0].strip().lower(), parts[1].strip(), parts[2].strip()
        try:
            number = int(value)
        except ValueError:
            raise LexiconError(f"line {lineno}: value {value!r} is not an integer") from None
        if kind == "neg":
            if number != 0:
                raise LexiconError(f"line {lineno}: negation lines must carry value 0")
            negations.add(term)
        elif kind in tables:
            if term in tables[kind]:
                raise LexiconError(f"line {lineno}: duplicate term {term!r}")
            tables[kind][term] = number
        else:
            raise LexiconError(f"line {lineno}: unknown kind {kind!r}")
    return Lexicon(
        sentiment_terms=tables["sent"],
        booster_terms=tables["boost"],
        negation_terms=frozenset(negations),
        emoticons=tables["emo"],
    )


def load_lexicon(source: str | Path | IO[str]) -> Lexicon:
    if hasattr(source, "read"):
        return parse_lexicon(source)
    with open(source, encoding="utf-8") as fh:
        return parse_lexicon(fh)


_DEFAULT: Lexicon | None = None


def default_lexicon() -> Lexicon:
    """The small lexicon bundled with the package (about 200 entries)."""
    global _DEFAULT
    if _DEFAULT is None:
        text = resources.files("contagionlab").joinpath("data/default_lexicon.tsv").read_text("utf-8")
        _DEFAULT = parse_lexicon(text.splitlines())
    return _DEFAULT


# -- tokenization -------------------------------------------------------------

class Token(NamedTuple):
    text: str
    elongated: bool = False
    emoticon: bool = False
    raw: str = ""


_EYES = r"[:;=8x]"
_NOSE = r"[-o^'\"]?"
_MOUTH = r"[)(\]\[dp/\\|*3@>]"
_EMOTICON = re.compile(
    rf"(?:{_EYES}{_NOSE}'?{_MOUTH}+|{_MOUTH}+{_NOSE}{_EYES}|<3+|</3+)",
    re.IGNORECASE,
)
_CHUNK = re.compile(r"\S+")
_WORD = re.compile(r"[^\W_]+(?:'[^\W_]+)*")
_RUN = re.compile(r"([^\W\d_])\1{2,}")


def tokenize(text: str) -> list[Token]:
    """Split ``text`` into lowercase word and emoticon tokens.

    Emoticons must be whitespace-delimited.  Letter runs of three or more
    are collapsed to a single letter and flag the token as elongated.
    """
    tokens: list[Token] = []
    for chunk in _CHUNK.findall(text):
        if _EMOTICON.fullmatch(chunk):
            tokens.append(Token(chunk.lower(), emoticon=True))
            continue
        for word in _WORD.findall(chunk.lower()):
            collapsed, runs = _RUN.subn(r"\1", word)
            tokens.append(Token(collapsed, elongated=runs > 0, raw=word))
    return tokens


# -- scoring ------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class SentimentScore:
    positive: int = 1
    negative: int = 1

    def __post_init__(self):
        for name in ("positive", "negative"):
            value = getattr(self, name)
            if not 1 <= value <= MAX_STRENGTH:
                raise ValueError(f"{name} score {value} outside 1..5")

    @property
    def polarity(self) -> int:
        return polarity(self)

    @property
    def emotion(self) -> EmotionClass:
        return classify(polarity(self))


def _lookup(lexicon: Lexicon, token: Token) -> int | None:
    value = lexicon.strength(token.text)
    if value is None and token.elongated:
        # "goooood" collapses to "god"; retry with runs kept at two letters
        value = lexicon.strength(_RUN.sub(r"\1\1", token.raw))
    return value


def score(lexicon: Lexicon, text: str) -> SentimentScore:
    tokens = tokenize(text)
    best = {1: 0, -1: 0}
    for i, token in enumerate(tokens):
        base = _lookup(lexicon, token)
        if base is None:
            continue
        sign = 1 if base > 0 else -1
        magnitude = abs(base)
        if token.elongated:
            magnitude += ELONGATION_BONUS
        if i > 0:
            magnitude += lexicon.booster_terms.get(tokens[i - 1].text, 0)
        negated = any(
            tokens[j].text in lexicon.negation_terms
            for j in range(max(0, i - NEGATION_WINDOW), i)
        )
        if negated:
            # own polarity gets the neutral 1, which never beats the default
            sign = -sign
            magnitude = min(magnitude, NEGATION_CAP)
        magnitude = min(max(magnitude, MIN_STRENGTH), MAX_STRENGTH)
        best[sign] = max(best[sign], magnitude)

    return SentimentScore(positive=best[1] or 1, negative=best[-1] or 1)


def polarity(s: SentimentScore) -> int:
    return s.positive - s.negative


def classify(p: int) -> EmotionClass:
    if p <= -1:
        return EmotionClass.NEGATIVE
    if p == 0:
        return EmotionClass.NEUTRAL
    return EmotionClass.POSITIVE
