"""Command-line entry point: ``contagionlab {score,analyze,simulate}``.

Settings come from (lowest to highest precedence) built-in defaults, a flat
``key=value`` file given with ``--config``, and command-line flags.  The
seed falls back to ``$CONTAGIONLAB_SEED`` and then 0.  Every run writes a
``manifest.txt`` in the same ``key=value`` format, which can be passed back
with ``--config`` to repeat the run.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import logging
import sys
from pathlib import Path
from typing import Callable

from . import __version__, seeding
from .corpus import DEFAULT_MIN_STIMULI, DEFAULT_WINDOW, MalformedRecordError, load_events, load_graph, write_events, write_graph
from .null_model import SentimentProportions
from .pipeline import NoHistoriesError, analyze
from .reports import atomic_writer, fmt, write_analysis
from .sentiment import LexiconError, classify, default_lexicon, load_lexicon, score
from .synthgen import SimConfig, heterogeneous_beta, simulate

logger = logging.getLogger("contagionlab")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_HISTORIES = 3


class ConfigError(ValueError):
    pass


def read_config(path: str | Path) -> dict[str, str]:
    """Parse a flat ``key=value`` file; ``#`` starts a comment line."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def write_manifest(path: Path, entries: dict[str, object]) -> None:
    with atomic_writer(path) as fh:
        fh.write(f"# contagionlab {__version__} run manifest\n")
        for key in sorted(entries):
            fh.write(f"{key}={fmt(entries[key])}\n")


def sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _bool(value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off", ""):
        return False
    raise ConfigError(f"not a boolean: {value!r}")


def _proportions(value) -> SentimentProportions:
    if isinstance(value, SentimentProportions):
        return value
    parts = [float(x) for x in str(value).strip("()[] ").split(",")]
    if len(parts) != 3:
        raise ConfigError(f"expected neg,neu,pos: {value!r}")
    return SentimentProportions(*parts)


class Settings:
    """Resolve one setting at a time from flags, config file and defaults."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.file = read_config(args.config) if getattr(args, "config", None) else {}
        self.used: set[str] = set()

    def get(self, key: str, default=None, convert: Callable = str):
        self.used.add(key)
        value = getattr(self.args, key, None)
        if value is None and key in self.file:
            value = self.file[key]
        if value is None:
            return default
        try:
            return convert(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from None

    def seed(self) -> int:
        explicit = self.get("seed", None, int)
        return seeding.resolve_seed(explicit)


def _load_lexicon(path):
    return default_lexicon() if path in (None, "", "bundled") else load_lexicon(path)


# -- subcommands ----------------------------------------------------------------

def cmd_score(args: argparse.Namespace) -> int:
    cfg = Settings(args)
    events = cfg.get("events")
    if not events:
        raise ConfigError("--events is required")
    lexicon = _load_lexicon(cfg.get("lexicon"))
    dataset = load_events(events, strict=cfg.get("strict", False, _bool))
    out = cfg.get("out")

    def rows(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tweet_id", "s_pos", "s_neg", "polarity", "class"])
        for r in dataset:
            s = score(lexicon, r.text)
            w.writerow([r.tweet_id, s.positive, s.negative, s.polarity, classify(s.polarity).label])

    if out in (None, "-"):
        rows(sys.stdout)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        with atomic_writer(out) as fh:
            rows(fh)
    if dataset.skipped:
        print(f"skipped {dataset.skipped} malformed line(s)", file=sys.stderr)
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    cfg = Settings(args)
    events = cfg.get("events")
    graph_path = cfg.get("graph")
    out = cfg.get("out")
    if not events or not graph_path or not out:
        raise ConfigError("--events, --graph and --out are required")
    lexicon_path = cfg.get("lexicon")
    strict = cfg.get("strict", False, _bool)
    params = dict(
        window_seconds=cfg.get("window_seconds", DEFAULT_WINDOW, int),
        min_stimuli=cfg.get("min_stimuli", DEFAULT_MIN_STIMULI, int),
        num_bins=cfg.get("bins", 20, int),
        threshold_pct=cfg.get("pct", 0.15, float),
        replace=not cfg.get("without_replacement", False, _bool),
        n_replicates=cfg.get("replicates", 1, int),
        profiles=cfg.get("profiles", "published"),
        weighted_fit=cfg.get("weighted_fit", False, _bool),
    )
    seed = cfg.seed()

    digests = {
        "events_sha256": sha256(events),
        "graph_sha256": sha256(graph_path),
        "lexicon_sha256": sha256(lexicon_path) if lexicon_path not in (None, "", "bundled") else "bundled",
    }
    for key, digest in digests.items():
        pinned = cfg.file.get(key)
        if pinned and pinned != digest:
            raise ConfigError(f"{key} mismatch: manifest pins {pinned}, input has {digest}")

    dataset = load_events(events, strict=strict)
    graph = load_graph(graph_path, strict=strict)
    lexicon = _load_lexicon(lexicon_path)
    try:
        result = analyze(dataset, graph, lexicon, random_state=seed, **params)
    except NoHistoriesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_HISTORIES

    out_dir = Path(out)
    written = write_analysis(result.analyzer, out_dir, [h.target for h in result.histories])
    manifest = {
        "command": "analyze",
        "events": str(Path(events).resolve()),
        "graph": str(Path(graph_path).resolve()),
        "lexicon": str(Path(lexicon_path).resolve()) if lexicon_path not in (None, "", "bundled") else "bundled",
        "seed": seed,
        "strict": strict,
        "window_seconds": params["window_seconds"],
        "min_stimuli": params["min_stimuli"],
        "bins": params["num_bins"],
        "pct": params["threshold_pct"],
        "without_replacement": not params["replace"],
        "replicates": params["n_replicates"],
        "profiles": params["profiles"],
        "weighted_fit": params["weighted_fit"],
        "num_events": len(dataset),
        "skipped_events": dataset.skipped,
        "num_histories": len(result.histories),
        "outputs": ",".join(written),
        **digests,
    }
    write_manifest(out_dir / "manifest.txt", manifest)
    print(f"{len(result.histories)} qualifying histories; wrote {len(written)} reports to {out_dir}", file=sys.stderr)
    return EXIT_OK


_SIM_FIELDS = {
    "n_users": ("n_users", int),
    "mean_followees": ("mean_followees", float),
    "post_rate": ("post_rate_per_hour", float),
    "beta": ("contagion_strength", float),
    "homophily": ("homophily_strength", float),
    "duration_hours": ("duration_hours", float),
    "base": ("base_distribution", _proportions),
    "window_seconds": ("window_seconds", int),
    "ineligible_fraction": ("ineligible_fraction", float),
    "disposition_concentration": ("disposition_concentration", float),
}


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = Settings(args)
    out = cfg.get("out")
    if not out:
        raise ConfigError("--out is required")
    kwargs = {}
    for key, (field_name, convert) in _SIM_FIELDS.items():
        value = cfg.get(key, None, convert)
        if value is not None:
            kwargs[field_name] = value
    kwargs["seed"] = cfg.seed()
    config = SimConfig(**kwargs)
    try:
        config.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    beta = None
    split = cfg.get("beta_split", None, float)
    if split is not None:
        low = cfg.get("beta_low", 0.1, float)
        high = cfg.get("beta_high", 0.9, float)
        try:
            beta = heterogeneous_beta(config, low, high, split)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    result = simulate(config, beta)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    with atomic_writer(out_dir / "events.jsonl") as fh:
        write_events(result.dataset, fh)
    with atomic_writer(out_dir / "graph.csv") as fh:
        write_graph(result.graph, fh)
    with atomic_writer(out_dir / "ground_truth.csv") as fh:
        result.truth.write_tweets(fh)
    with atomic_writer(out_dir / "users_truth.csv") as fh:
        result.truth.write_users(fh)

    manifest: dict[str, object] = {"command": "simulate"}
    for key, (field_name, _) in _SIM_FIELDS.items():
        value = getattr(config, field_name)
        manifest[key] = ",".join(repr(x) for x in value) if isinstance(value, SentimentProportions) else value
    manifest["seed"] = config.seed
    if split is not None:
        manifest.update(beta_split=split, beta_low=low, beta_high=high)
    manifest.update(
        num_events=len(result.dataset),
        num_users=len(result.graph),
        num_edges=result.graph.num_edges(),
        num_contagion_applied=int(result.truth.contagion_applied.sum()),
    )
    write_manifest(out_dir / "manifest.txt", manifest)
    print(f"wrote {len(result.dataset)} events for {len(result.graph)} users to {out_dir}", file=sys.stderr)
    return EXIT_OK


# -- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="contagionlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value settings file (flags override it)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None)

    p = sub.add_parser("score", help="score every post in an event log")
    common(p)
    p.add_argument("--events")
    p.add_argument("--lexicon", help="lexicon file (default: bundled)")
    p.add_argument("--strict", action="store_const", const=True, default=None)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("analyze", help="run the contagion analysis")
    common(p)
    p.add_argument("--events")
    p.add_argument("--graph")
    p.add_argument("--lexicon")
    p.add_argument("--window-seconds", dest="window_seconds", type=int)
    p.add_argument("--min-stimuli", dest="min_stimuli", type=int)
    p.add_argument("--bins", type=int)
    p.add_argument("--pct", type=float)
    p.add_argument("--replicates", type=int)
    p.add_argument("--profiles", choices=["published", "data"])
    p.add_argument("--strict", action="store_const", const=True, default=None)
    p.add_argument("--without-replacement", dest="without_replacement", action="store_const", const=True, default=None)
    p.add_argument("--weighted-fit", dest="weighted_fit", action="store_const", const=True, default=None)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="generate a synthetic corpus with ground truth")
    common(p)
    p.add_argument("--n-users", dest="n_users", type=int)
    p.add_argument("--mean-followees", dest="mean_followees", type=float)
    p.add_argument("--post-rate", dest="post_rate", type=float, help="posts per user per hour")
    p.add_argument("--beta", type=float, help="contagion strength in [0, 1]")
    p.add_argument("--homophily", type=float, help="homophily strength in [0, 1]")
    p.add_argument("--duration-hours", dest="duration_hours", type=float)
    p.add_argument("--base", help="base class distribution as neg,neu,pos")
    p.add_argument("--window-seconds", dest="window_seconds", type=int)
    p.add_argument("--ineligible-fraction", dest="ineligible_fraction", type=float)
    p.add_argument("--disposition-concentration", dest="disposition_concentration", type=float)
    p.add_argument("--beta-split", dest="beta_split", type=float, help="share of users at --beta-high")
    p.add_argument("--beta-low", dest="beta_low", type=float)
    p.add_argument("--beta-high", dest="beta_high", type=float)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ConfigError, MalformedRecordError, LexiconError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
