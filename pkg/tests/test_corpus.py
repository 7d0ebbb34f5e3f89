import io
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from contagionlab.corpus import (
    Dataset,
    FollowGraph,
    MalformedRecordError,
    TweetRecord,
    UnknownUserError,
    build_history,
    load_events,
    load_graph,
    qualifying_histories,
    window_join,
    write_events,
    write_graph,
)

T = 1_000_000


def rec(tid, author, ts, **kw):
    return TweetRecord(tid, author, ts, **kw)


@pytest.fixture
def small():
    graph = FollowGraph({"a": {"b", "c"}, "b": {"a"}, "c": set()})
    records = [
        rec("target", "a", T),
        rec("s1", "b", T - 10),
        rec("s2", "b", T - 3599),
        rec("s3", "c", T - 3600),
        rec("old", "b", T - 3601),
        rec("same", "b", T),
        rec("media", "c", T - 5, has_media_or_url=True),
        rec("es", "c", T - 6, lang="es"),
        rec("stranger", "z", T - 7),
    ]
    return Dataset(records), graph


class TestHistory:
    def test_window_is_half_open(self, small):
        ds, graph = small
        h = build_history(ds, graph, ds["target"])
        assert set(h.stimuli) == {"s1", "s2", "s3"}
        assert "old" not in h.stimuli and "same" not in h.stimuli

    def test_ineligible_posts_are_not_stimuli(self, small):
        ds, graph = small
        h = build_history(ds, graph, ds["target"])
        assert "media" not in h.stimuli and "es" not in h.stimuli

    def test_canonical_order(self, small):
        ds, graph = small
        assert build_history(ds, graph, ds["target"]).stimuli == ("s3", "s2", "s1")

    def test_unknown_user(self, small):
        ds, graph = small
        with pytest.raises(UnknownUserError):
            build_history(ds, graph, ds["stranger"])

    def test_vectorised_matches_scalar(self, small):
        ds, graph = small
        (h,) = qualifying_histories(ds, graph, min_stimuli=3)
        assert h == build_history(ds, graph, ds["target"])

    def test_min_stimuli_filter(self):
        followees = {f"f{i}" for i in range(31)}
        graph = FollowGraph({"x": followees, "y": followees, "z": followees, **{f: set() for f in followees}})
        records = []
        for user, size, t0 in (("x", 5, 0), ("y", 20, 100_000), ("z", 31, 200_000)):
            records.append(rec(f"{user}-post", user, t0 + 4000))
            records += [rec(f"{user}-s{i}", f"f{i}", t0 + 1000 + i) for i in range(size)]
        ds = Dataset(records)
        hs = qualifying_histories(ds, graph, min_stimuli=20)
        assert [(h.target, len(h)) for h in hs] == [("y-post", 20), ("z-post", 31)]

    def test_empty_dataset(self):
        assert qualifying_histories(Dataset(), FollowGraph()) == []


def brute_force_join(timestamps, authors, followees, window, visible):
    out = []
    for i, t in enumerate(timestamps):
        fs = followees[authors[i]]
        out.append(
            [j for j in range(len(timestamps))
             if fs is not None and authors[j] in fs and visible[j] and t - window <= timestamps[j] < t]
        )
    return out


@settings(max_examples=60, deadline=None)
@given(
    st.integers(2, 6).flatmap(
        lambda n_auth: st.tuples(
            st.just(n_auth),
            st.lists(st.tuples(st.integers(0, 50), st.integers(0, n_auth - 1), st.booleans()), max_size=40),
            st.lists(st.one_of(st.none(), st.sets(st.integers(0, n_auth - 1))), min_size=n_auth, max_size=n_auth),
            st.integers(1, 20),
        )
    )
)
def test_window_join_matches_brute_force(args):
    n_auth, posts, followees, window = args
    posts.sort(key=lambda p: p[0])
    ts = np.array([p[0] for p in posts], dtype=np.int64)
    authors = np.array([p[1] for p in posts], dtype=np.int64)
    visible = np.array([p[2] for p in posts], dtype=bool)
    fs = [None if f is None else np.array(sorted(f - {a}), dtype=np.int64) for a, f in enumerate(followees)]
    indptr, indices = window_join(ts, authors, fs, window, visible)
    got = [indices[indptr[i]:indptr[i + 1]].tolist() for i in range(len(posts))]
    want = brute_force_join(ts, authors, [None if f is None else set(f.tolist()) for f in fs], window, visible)
    assert got == want


def test_window_join_rejects_unsorted():
    with pytest.raises(ValueError):
        window_join(np.array([2, 1]), np.array([0, 0]), [np.array([], dtype=np.int64)])


@settings(max_examples=25, deadline=None)
@given(st.randoms())
def test_input_order_does_not_matter(rnd):
    graph = FollowGraph({u: {v for v in "abcd" if v != u} for u in "abcd"})
    records = [rec(f"t{i:02d}", "abcd"[i % 4], T + (i * 37) % 500) for i in range(40)]
    shuffled = list(records)
    rnd.shuffle(shuffled)
    assert qualifying_histories(Dataset(records), graph, 1) == qualifying_histories(Dataset(shuffled), graph, 1)


class TestEventIO:
    def test_round_trip(self):
        records = [
            rec("1", "a", 5, text='quote " and émoji \U0001f600', lang="fr"),
            rec("2", "b", 0, text="", has_media_or_url=True),
        ]
        buf = io.StringIO()
        assert write_events(records, buf) == 2
        ds = load_events(io.StringIO(buf.getvalue()))
        assert list(ds) == records and ds.skipped == 0

    def test_malformed_lines_skipped_and_counted(self):
        good = rec("1", "a", 5).to_json()
        lines = [
            good,
            "",
            "{not json",
            json.dumps({"tweet_id": "2"}),
            json.dumps({**json.loads(good), "tweet_id": "3", "timestamp": "5"}),
            json.dumps({**json.loads(good), "tweet_id": "4", "timestamp": -1}),
            good,
        ]
        ds = load_events(io.StringIO("\n".join(lines)))
        assert len(ds) == 1 and ds.skipped == 5

    def test_strict_mode_raises(self):
        with pytest.raises(MalformedRecordError, match="line 2"):
            load_events(io.StringIO(rec("1", "a", 5).to_json() + "\n[1, 2]\n"), strict=True)

    def test_reads_paths(self, tmp_path):
        p = tmp_path / "e.jsonl"
        p.write_text(rec("1", "a", 5).to_json() + "\n", encoding="utf-8")
        assert len(load_events(p)) == 1

    def test_dataset_rejects_duplicates(self):
        with pytest.raises(MalformedRecordError):
            Dataset([rec("1", "a", 1), rec("1", "b", 2)])


class TestGraphIO:
    def test_round_trip_keeps_isolated_users(self):
        graph = FollowGraph({"a": {"b", "c"}, "b": set(), "c": {"a"}})
        buf = io.StringIO()
        write_graph(graph, buf)
        assert load_graph(io.StringIO(buf.getvalue())) == graph

    def test_bad_rows(self):
        text = "follower,followee\na,b\na,a\nx,y,z\n,q\nb,\n"
        g = load_graph(io.StringIO(text))
        assert g.skipped == 3 and g.followees("a") == {"b"} and g.followees("b") == frozenset()
        with pytest.raises(MalformedRecordError):
            load_graph(io.StringIO(text), strict=True)

    def test_header_required(self):
        with pytest.raises(MalformedRecordError):
            load_graph(io.StringIO("a,b\n"))

    def test_self_loop_rejected_in_constructor(self):
        with pytest.raises(ValueError):
            FollowGraph({"a": {"a"}})
