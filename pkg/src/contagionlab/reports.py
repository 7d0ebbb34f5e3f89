"""Plot-ready CSV outputs.

Floats are written with ``repr`` (shortest round-trip form) and missing
values as empty fields, so identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .estimators import GROUP_NAMES, ContagionAnalyzer
from .sentiment import EmotionClass


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    if hasattr(value, "item"):
        return fmt(value.item())
    return str(value)


@contextmanager
def atomic_writer(path: str | Path) -> Iterator:
    """Write to a temporary sibling and rename into place on success."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with atomic_writer(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_analysis(analyzer: ContagionAnalyzer, out_dir: str | Path, tweet_ids: Sequence[str] | None = None) -> list[str]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    a = analyzer
    written = []

    def emit(name, header, rows):
        write_csv(out / name, header, rows)
        written.append(name)

    rows = [("baseline", *a.baseline_.mean, *a.baseline_.std_err)]
    for cls in EmotionClass:
        if cls in a.conditional_:
            props, se = a.conditional_[cls]
            rows.append((GROUP_NAMES[cls], *props, *se))
        else:
            rows.append((GROUP_NAMES[cls], None, None, None, None, None, None))
    emit("baseline.csv", ["group", "neg", "neu", "pos", "neg_se", "neu_se", "pos_se"], rows)

    rows = []
    for cls in EmotionClass:
        if cls in a.overexposure_:
            mw = a.mann_whitney_[cls]
            rows.append((GROUP_NAMES[cls], *a.overexposure_[cls], mw.u, mw.p, int((a.y_ == cls).sum())))
        else:
            rows.append((GROUP_NAMES[cls], None, None, None, None, None, 0))
    emit("overexposure.csv", ["group", "d_neg", "d_neu", "d_pos", "u", "p", "n"], rows)

    emit(
        "valence_bins.csv",
        ["bin_mid", "response_valence", "count"],
        ((b.mid, b.response_valence, b.count) for b in a.valence_bins_),
    )
    fit = a.valence_fit_
    emit(
        "valence_fit.csv",
        ["slope", "intercept", "r2", "n"],
        [(fit.slope, fit.intercept, fit.r_squared, fit.num_points) if fit else (None, None, None, 0)],
    )

    if tweet_ids is not None:
        emit(
            "labels.csv",
            ["tweet_id", "expected", "actual", "susceptible", "tie"],
            (
                (t, EmotionClass(int(e)).label, EmotionClass(int(y)).label, bool(s), bool(tie))
                for t, e, y, s, tie in zip(tweet_ids, a.expected_, a.y_, a.susceptible_, a.ties_)
            ),
        )

    if a.user_fractions_ is not None:
        emit("users.csv", ["user", "fraction", "num_tweets"], ((f.user, f.fraction, f.num_tweets) for f in a.user_fractions_))
        emit("histogram.csv", ["bin_lower", "bin_upper", "count", "cumulative"], a.histogram_)
        rows = []
        for name in ("low", "high"):
            rates = a.adoption_.get(name)
            members = getattr(a.classes_, name) if a.classes_ is not None else ()
            if rates is None:
                rows.append((name, None, None, None, len(members)))
            else:
                rows.append((name, rates.pos_rate, rates.neg_rate, rates.ratio, len(members)))
        emit("classes.csv", ["class", "pos_rate", "neg_rate", "ratio", "n_users"], rows)
    return written
