"""Win-probability comparisons, decision rule, and sample-size planning."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from benchvar.comparison import (
    ComparisonConfig,
    TiePolicy,
    Verdict,
    compare_average,
    compare_pab,
    noether_sample_size,
    prob_outperform,
    verdict_from_interval,
    z_test_min_difference,
)
from benchvar.rng import RngStream
from benchvar.scores import PairedScores


def _paired(pairs, higher_is_better=True):
    pairs = tuple((float(a), float(b)) for a, b in pairs)
    keys = tuple((i + 1, i + 1) for i in range(len(pairs)))
    return PairedScores(pairs, keys, (), "m", higher_is_better)


finite = st.floats(allow_nan=False, allow_infinity=False, width=32)


class TestProbOutperform:
    def test_half_credit_spot(self):
        p = _paired([(3, 1), (2, 5), (4, 4)])
        assert prob_outperform(p) == 0.5

    def test_strict_spot(self):
        p = _paired([(3, 1), (2, 5), (4, 4)])
        assert prob_outperform(p, TiePolicy.STRICT) == pytest.approx(1 / 3)

    def test_polarity_flip(self):
        p = _paired([(3, 1), (2, 5), (4, 4)], higher_is_better=False)
        assert prob_outperform(p) == 0.5
        assert prob_outperform(p, TiePolicy.STRICT) == pytest.approx(1 / 3)

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            prob_outperform(_paired([]))

    @given(st.lists(st.tuples(finite, finite), min_size=1, max_size=40))
    @settings(max_examples=200, deadline=None)
    def test_antisymmetry(self, pairs):
        forward = prob_outperform(_paired(pairs))
        backward = prob_outperform(_paired([(b, a) for a, b in pairs]))
        assert forward + backward == pytest.approx(1.0, abs=1e-12)

    @given(st.lists(st.tuples(finite, finite), min_size=1, max_size=40))
    @settings(max_examples=100, deadline=None)
    def test_scale_invariance(self, pairs):
        # Power-of-two factors only shift exponents, so order and ties
        # are preserved bit-exactly and the probability cannot move.
        base = prob_outperform(_paired(pairs))
        scaled = prob_outperform(_paired([(4.0 * a, 4.0 * b) for a, b in pairs]))
        assert scaled == base

    def test_monotone_in_single_value(self):
        losing = _paired([(1, 2), (5, 0)])
        winning = _paired([(3, 2), (5, 0)])
        assert prob_outperform(winning) > prob_outperform(losing)


class TestVerdictRule:
    def test_interval_reaching_half_is_not_significant(self):
        assert verdict_from_interval(0.5, 0.9, 0.75) is Verdict.NOT_SIGNIFICANT
        assert verdict_from_interval(0.2, 0.4, 0.75) is Verdict.NOT_SIGNIFICANT

    def test_all_ties_degenerate_interval(self):
        assert verdict_from_interval(0.5, 0.5, 0.75) is Verdict.NOT_SIGNIFICANT

    def test_capped_at_gamma_not_meaningful(self):
        assert (
            verdict_from_interval(0.51, 0.75, 0.75)
            is Verdict.SIGNIFICANT_NOT_MEANINGFUL
        )
        assert (
            verdict_from_interval(0.6, 0.74, 0.75)
            is Verdict.SIGNIFICANT_NOT_MEANINGFUL
        )

    def test_past_gamma_meaningful(self):
        assert (
            verdict_from_interval(0.51, 0.7500001, 0.75)
            is Verdict.SIGNIFICANT_AND_MEANINGFUL
        )
        assert (
            verdict_from_interval(0.8, 0.95, 0.75)
            is Verdict.SIGNIFICANT_AND_MEANINGFUL
        )


class TestComparePab:
    def test_clean_separation(self):
        pairs = [(1.0 + 0.01 * i, 0.01 * i) for i in range(30)]
        decision = compare_pab(
            _paired(pairs), ComparisonConfig(), RngStream(3).child("cmp")
        )
        assert decision.p_a_beats_b == 1.0
        assert decision.interval.lower == 1.0
        assert decision.interval.upper == 1.0
        assert decision.verdict is Verdict.SIGNIFICANT_AND_MEANINGFUL
        assert decision.k == 30

    def test_point_estimate_ignores_stream(self):
        pairs = [(0.7, 0.6), (0.5, 0.6), (0.8, 0.1), (0.9, 0.2)]
        d1 = compare_pab(_paired(pairs), ComparisonConfig(), RngStream(1).child("x"))
        d2 = compare_pab(_paired(pairs), ComparisonConfig(), RngStream(2).child("y"))
        assert d1.p_a_beats_b == d2.p_a_beats_b == 0.75

    def test_same_stream_same_decision(self):
        gen = RngStream(11).child("boot").generator()
        pairs = list(zip(gen.normal(0.3, 1, 30), gen.normal(0.0, 1, 30)))
        d1 = compare_pab(_paired(pairs), ComparisonConfig(), RngStream(9).child("c"))
        d2 = compare_pab(_paired(pairs), ComparisonConfig(), RngStream(9).child("c"))
        assert d1 == d2

    def test_null_calibration_small(self):
        # Identical distributions: a confidently-above-half interval
        # should appear in at most a few percent of datasets.
        root = RngStream(20240823)
        false_hits = 0
        n_sets = 200
        for i in range(n_sets):
            gen = root.child("null-data", i).generator()
            pairs = list(zip(gen.normal(0, 1, 30), gen.normal(0, 1, 30)))
            d = compare_pab(
                _paired(pairs), ComparisonConfig(), root.child("null-boot", i)
            )
            if d.verdict is not Verdict.NOT_SIGNIFICANT:
                false_hits += 1
        assert false_hits / n_sets <= 0.08

    def test_record_shape(self):
        pairs = [(1.0, 0.0)] * 5
        d = compare_pab(_paired(pairs), ComparisonConfig(), RngStream(1).child("r"))
        rec = d.to_record()
        assert rec["verdict"] == "significant_and_meaningful"
        assert rec["k"] == 5
        assert set(rec["ci"]) == {"lower", "upper", "level", "resamples"}


class TestCompareAverage:
    def test_strict_gap_rule(self):
        assert compare_average(0.8, 0.6) is True
        assert compare_average(0.6, 0.8) is False
        assert compare_average(0.7, 0.7) is False
        # Dyadic values keep the gap arithmetic exact.
        assert compare_average(0.75, 0.5, delta=0.25) is False
        assert compare_average(0.875, 0.5, delta=0.25) is True

    def test_polarity(self):
        assert compare_average(0.2, 0.4, higher_is_better=False) is True
        assert compare_average(0.4, 0.2, higher_is_better=False) is False

    def test_negative_delta_rejected(self):
        with pytest.raises(ValueError):
            compare_average(1.0, 0.0, delta=-0.1)


class TestZTest:
    def test_frozen_value(self):
        # sigma_a = sigma_b = 1, k = 2 collapses to the 95th normal
        # quantile itself.
        assert z_test_min_difference(1.0, 1.0, 2) == pytest.approx(
            1.6448536269514722, abs=1e-12
        )

    def test_scaling_laws(self):
        base = z_test_min_difference(1.0, 1.0, 2)
        assert z_test_min_difference(2.0, 2.0, 2) == pytest.approx(2 * base)
        assert z_test_min_difference(1.0, 1.0, 8) == pytest.approx(base / 2)
        assert z_test_min_difference(3.0, 4.0, 2) == pytest.approx(
            base * 5.0 / math.sqrt(2.0)
        )

    def test_validation(self):
        with pytest.raises(ValueError):
            z_test_min_difference(-1.0, 1.0, 2)
        with pytest.raises(ValueError):
            z_test_min_difference(1.0, 1.0, 0)
        with pytest.raises(ValueError):
            z_test_min_difference(1.0, 1.0, 2, alpha=1.0)


class TestNoetherSampleSize:
    FROZEN = {
        0.51: 18037,
        0.55: 722,
        0.65: 81,
        0.75: 29,
        0.85: 15,
        0.9: 12,
        0.95: 9,
    }

    def test_frozen_table(self):
        for gamma, n in self.FROZEN.items():
            assert noether_sample_size(gamma) == n

    def test_half_is_rejected(self):
        with pytest.raises(ValueError, match="null itself"):
            noether_sample_size(0.5)

    def test_domain(self):
        with pytest.raises(ValueError):
            noether_sample_size(0.0)
        with pytest.raises(ValueError):
            noether_sample_size(1.0)
        with pytest.raises(ValueError):
            noether_sample_size(0.75, alpha=0.0)
        with pytest.raises(ValueError):
            noether_sample_size(0.75, beta=1.0)

    def test_symmetric_around_half(self):
        for gamma in (0.51, 0.6, 0.75, 0.9):
            assert noether_sample_size(gamma) == noether_sample_size(1.0 - gamma)

    def test_decreasing_away_from_half(self):
        sizes = [noether_sample_size(g) for g in (0.55, 0.65, 0.75, 0.85, 0.95)]
        assert sizes == sorted(sizes, reverse=True)

    def test_stricter_errors_need_more(self):
        assert noether_sample_size(0.75, alpha=0.01) > noether_sample_size(0.75)
        assert noether_sample_size(0.75, beta=0.01) > noether_sample_size(0.75)


class TestConfig:
    def test_defaults(self):
        c = ComparisonConfig()
        assert c.gamma == 0.75
        assert c.alpha == c.beta == 0.05
        assert c.ci_level == 0.95
        assert c.bootstrap_resamples == 1000
        assert c.tie_policy is TiePolicy.HALF_CREDIT

    def test_validation(self):
        with pytest.raises(ValueError, match="gamma"):
            ComparisonConfig(gamma=0.5)
        with pytest.raises(ValueError, match="gamma"):
            ComparisonConfig(gamma=1.0)
        with pytest.raises(ValueError, match="delta"):
            ComparisonConfig(delta=-0.01)
        with pytest.raises(ValueError, match="resamples"):
            ComparisonConfig(bootstrap_resamples=99)
        with pytest.raises(ValueError, match="ci_level"):
            ComparisonConfig(ci_level=1.0)
