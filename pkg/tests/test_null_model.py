import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from contagionlab.corpus import ExposureHistory
from contagionlab.null_model import (
    EmptyBucketError,
    EmptyGroupError,
    MissingClassError,
    SentimentProportions,
    StimulusBucket,
    conditional_distribution,
    mann_whitney_u,
    overexposure,
    pool_bucket,
    sample_baseline,
    stimulus_counts,
)
from contagionlab.sentiment import EmotionClass as E

NEG, NEU, POS = E.NEGATIVE, E.NEUTRAL, E.POSITIVE


def make_histories(rows):
    """rows: list of (response_class, (n_neg, n_neu, n_pos))."""
    class_of, histories = {}, []
    for i, (resp, counts) in enumerate(rows):
        target = f"r{i}"
        class_of[target] = resp
        stimuli = []
        for cls, k in zip((NEG, NEU, POS), counts):
            for j in range(k):
                sid = f"s{i}-{cls.label}-{j}"
                class_of[sid] = cls
                stimuli.append(sid)
        histories.append(ExposureHistory(target, tuple(stimuli)))
    return histories, class_of


class TestProportions:
    def test_validation(self):
        with pytest.raises(ValueError):
            SentimentProportions(0.5, 0.5, 0.5)
        with pytest.raises(ValueError):
            SentimentProportions(-0.1, 0.6, 0.5)
        assert tuple(SentimentProportions.from_counts((1, 2, 1))) == (0.25, 0.5, 0.25)

    def test_all_zero_counts(self):
        with pytest.raises(ValueError):
            SentimentProportions.from_counts((0, 0, 0))


class TestBucket:
    def test_totals(self):
        hs, class_of = make_histories([(POS, (1, 2, 3)), (NEG, (4, 0, 1))])
        assert pool_bucket(hs, class_of) == StimulusBucket((5, 2, 4))
        assert stimulus_counts(hs, class_of).tolist() == [[1, 2, 3], [4, 0, 1]]

    def test_missing_class(self):
        hs, class_of = make_histories([(POS, (1, 0, 0))])
        del class_of[hs[0].stimuli[0]]
        with pytest.raises(MissingClassError):
            stimulus_counts(hs, class_of)


class TestBaseline:
    def test_degenerate_bucket(self):
        res = sample_baseline(StimulusBucket((0, 7, 0)), [3, 5, 1], seed=1)
        assert tuple(res.mean) == (0.0, 1.0, 0.0) and res.std_err == (0.0, 0.0, 0.0)

    def test_empty_bucket(self):
        with pytest.raises(EmptyBucketError):
            sample_baseline(StimulusBucket(), [1], seed=0)

    def test_law_of_large_numbers(self):
        bucket = StimulusBucket((173, 483, 344))
        res = sample_baseline(bucket, [25] * 4000, seed=7)
        expected = bucket.proportions()
        for got, want, se in zip(res.mean, expected, res.std_err):
            assert abs(got - want) < 3 * se

    def test_deterministic(self):
        args = (StimulusBucket((3, 4, 5)), [2, 7, 9, 1], 42)
        assert sample_baseline(*args) == sample_baseline(*args)
        assert sample_baseline(*args) != sample_baseline(*args[:2], 43)

    def test_without_replacement_uses_whole_bucket(self):
        res = sample_baseline(StimulusBucket((2, 3, 5)), [10, 10], seed=3, replace=False)
        assert np.allclose(res.draws, [[0.2, 0.3, 0.5]] * 2)
        with pytest.raises(ValueError):
            sample_baseline(StimulusBucket((2, 3, 5)), [11], seed=3, replace=False)

    def test_replicates(self):
        res = sample_baseline(StimulusBucket((3, 4, 5)), [4, 4, 4], seed=0, n_replicates=5)
        assert res.num_samples == 15

    @settings(max_examples=30, deadline=None)
    @given(st.tuples(st.integers(0, 20), st.integers(0, 20), st.integers(1, 20)),
           st.lists(st.integers(1, 30), min_size=1, max_size=20), st.integers(0, 2**32))
    def test_draws_preserve_sizes(self, counts, sizes, seed):
        res = sample_baseline(StimulusBucket(counts), sizes, seed)
        assert res.num_samples == len(sizes)
        assert np.allclose(res.draws.sum(axis=1), 1.0)
        assert abs(sum(res.mean) - 1) < 1e-12


class TestConditional:
    def test_worked_example(self):
        hs, class_of = make_histories([(NEG, (5, 10, 5)), (POS, (0, 0, 3))])
        props, se = conditional_distribution(hs, class_of, NEG)
        assert tuple(props) == (0.25, 0.5, 0.25) and se == (0.0, 0.0, 0.0)

    def test_unweighted_mean_of_histories(self):
        hs, class_of = make_histories([(POS, (1, 0, 0)), (POS, (0, 0, 9))])
        props, _ = conditional_distribution(hs, class_of, POS)
        assert tuple(props) == (0.5, 0.0, 0.5)

    def test_empty_group(self):
        hs, class_of = make_histories([(POS, (1, 1, 1))])
        with pytest.raises(EmptyGroupError):
            conditional_distribution(hs, class_of, NEU)


class TestOverexposure:
    def test_published_arithmetic(self):
        d = overexposure((21.63, 45.02, 33.35), (17.29, 48.27, 34.44), scale=1)
        assert d[0] == pytest.approx(4.34, abs=1e-9)
        d = overexposure(SentimentProportions(0.25, 0.5, 0.25), SentimentProportions(0.2, 0.5, 0.3))
        assert d == pytest.approx((5.0, 0.0, -5.0))

    def test_zero_sum(self):
        a = SentimentProportions.from_counts((3, 5, 9))
        b = SentimentProportions.from_counts((4, 4, 1))
        assert sum(overexposure(a, b)) == pytest.approx(0.0, abs=1e-12)


def brute_force_mw(a, b):
    """Exact U and two-sided p by enumerating every split of the pooled ranks."""
    pooled = np.concatenate([a, b])
    n = len(a)
    ranks = stats.rankdata(pooled)
    u = sum(1.0 if x > y else 0.5 if x == y else 0.0 for x in a for y in b)
    center = n * len(b) / 2
    us = [ranks[list(idx)].sum() - n * (n + 1) / 2 for idx in itertools.combinations(range(len(pooled)), n)]
    p = np.mean([abs(v - center) >= abs(u - center) - 1e-9 for v in us])
    return u, p


class TestMannWhitney:
    def test_u_counts_pairs(self):
        assert mann_whitney_u([1, 2], [3, 4]).u == 0.0
        assert mann_whitney_u([3, 4], [1, 2]).u == 4.0
        assert mann_whitney_u([1, 2], [2, 3]).u == 0.5

    def test_identical_samples(self):
        res = mann_whitney_u([5, 5, 5], [5, 5])
        assert res.u == 3.0 and res.p == 1.0
        assert mann_whitney_u([5] * 30, [5] * 30).p == 1.0

    def test_symmetry(self):
        a, b = [1, 4, 4, 9, 2], [3, 3, 8, 0]
        ra, rb = mann_whitney_u(a, b), mann_whitney_u(b, a)
        assert ra.u + rb.u == len(a) * len(b) and ra.p == pytest.approx(rb.p)

    @settings(max_examples=80, deadline=None)
    @given(st.lists(st.integers(0, 5), min_size=1, max_size=6), st.lists(st.integers(0, 5), min_size=1, max_size=6))
    def test_exact_matches_enumeration(self, a, b):
        u, p = brute_force_mw(np.array(a, float), np.array(b, float))
        res = mann_whitney_u(a, b, method="exact")
        assert res.u == u and res.p == pytest.approx(p, abs=1e-12)

    def test_asymptotic_matches_scipy(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            a = rng.integers(0, 10, size=rng.integers(21, 60))
            b = rng.integers(0, 10, size=rng.integers(21, 60))
            ref = stats.mannwhitneyu(a, b, alternative="two-sided", method="asymptotic", use_continuity=True)
            res = mann_whitney_u(a, b)
            assert res.u == ref.statistic and res.p == pytest.approx(ref.pvalue, rel=1e-9)

    def test_exact_matches_scipy_without_ties(self):
        res = mann_whitney_u([1.5, 2.5, 7.0], [3.0, 4.0, 5.0, 6.0], method="exact")
        ref = stats.mannwhitneyu([1.5, 2.5, 7.0], [3.0, 4.0, 5.0, 6.0], method="exact")
        assert res.p == pytest.approx(ref.pvalue)

    def test_rejects_empty_and_bad_method(self):
        with pytest.raises(ValueError):
            mann_whitney_u([], [1])
        with pytest.raises(ValueError):
            mann_whitney_u([1], [2], method="magic")
