"""Variance attribution and the small variance-arithmetic helpers."""

import math

import numpy as np
import pytest

from benchvar.hpo import Dim, HyperParams, SearchSpace
from benchvar.rng import RngStream
from benchvar.scores import ScoreRecord, ScoreSet, VarianceSource
from benchvar.synthpipe import SyntheticPipeline, SyntheticPipelineConfig
from benchvar.variance import (
    MseParts,
    ProtocolError,
    biased_estimator_variance,
    binomial_sd,
    decompose_variance,
    estimate_rho,
    mse_decompose,
)

OPT = HyperParams({"lr": -3.0, "wd": -4.0})
BASE_SEEDS = {VarianceSource.DATA_SPLIT: 1111, VarianceSource.WEIGHTS_INIT: 2222}


def make_pipeline():
    return SyntheticPipeline(
        SyntheticPipelineConfig(
            base_risk=0.2,
            optimum={"lr": -3.0, "wd": -4.0},
            curvature={"lr": 0.02, "wd": 0.01},
            component_sds={
                VarianceSource.DATA_SPLIT: 0.03,
                VarianceSource.WEIGHTS_INIT: 0.01,
            },
            space=SearchSpace((Dim("lr", -5.0, -1.0), Dim("wd", -6.0, -2.0))),
        )
    )


def protocol_scores(n=200, with_frozen_group=False):
    """One group per source, each re-randomizing only that source."""
    pipe = make_pipeline()
    records = []
    plan = [
        ("vary-split", VarianceSource.DATA_SPLIT),
        ("vary-init", VarianceSource.WEIGHTS_INIT),
    ]
    for algo, src in plan:
        for i in range(n):
            seeds = dict(BASE_SEEDS)
            seeds[src] = 10_000 + i
            value = pipe.train_eval(None, OPT, seeds)
            records.append(ScoreRecord("synth", algo, i + 1, seeds, "risk", value))
    if with_frozen_group:
        value = pipe.train_eval(None, OPT, BASE_SEEDS)
        for i in range(3):
            records.append(
                ScoreRecord("synth", "frozen", i + 1, dict(BASE_SEEDS), "risk", value)
            )
    return ScoreSet(tuple(records), frozenset(BASE_SEEDS))


class TestDecompose:
    def test_recovers_component_variances(self):
        table = decompose_variance(protocol_scores())
        assert table.per_source[VarianceSource.DATA_SPLIT] == pytest.approx(
            0.03**2, rel=0.2
        )
        assert table.per_source[VarianceSource.WEIGHTS_INIT] == pytest.approx(
            0.01**2, rel=0.2
        )
        assert table.group_sizes == {
            VarianceSource.DATA_SPLIT: 200,
            VarianceSource.WEIGHTS_INIT: 200,
        }

    def test_ratios_against_reference(self):
        table = decompose_variance(protocol_scores())
        ratios = table.ratios()
        assert ratios[VarianceSource.DATA_SPLIT] == 1.0
        assert ratios[VarianceSource.WEIGHTS_INIT] == pytest.approx(1.0 / 9.0, rel=0.15)

    def test_frozen_group_reads_as_numerical_noise(self):
        table = decompose_variance(protocol_scores(with_frozen_group=True))
        assert table.per_source[VarianceSource.NUMERICAL] == 0.0
        assert table.group_sizes[VarianceSource.NUMERICAL] == 3

    def test_reference_must_be_measured(self):
        with pytest.raises(ProtocolError, match="reference source dropout"):
            decompose_variance(protocol_scores(), reference=VarianceSource.DROPOUT)

    def test_group_too_small(self):
        records = (
            ScoreRecord("t", "a", 1, dict(BASE_SEEDS), "m", 0.5),
        )
        with pytest.raises(ProtocolError, match="fewer than 2"):
            decompose_variance(ScoreSet(records, frozenset(BASE_SEEDS)))

    def test_group_varying_two_sources(self):
        records = []
        for i in range(3):
            seeds = {
                VarianceSource.DATA_SPLIT: 10 + i,
                VarianceSource.WEIGHTS_INIT: 20 + i,
            }
            records.append(ScoreRecord("t", "a", i + 1, seeds, "m", 0.1 * i))
        with pytest.raises(ProtocolError, match="several sources at once"):
            decompose_variance(ScoreSet(tuple(records), frozenset(BASE_SEEDS)))

    def test_duplicate_source_measurement(self):
        records = []
        for algo in ("a", "b"):
            for i in range(3):
                seeds = dict(BASE_SEEDS)
                seeds[VarianceSource.DATA_SPLIT] = 10 + i
                records.append(ScoreRecord("t", algo, i + 1, seeds, "m", 0.1 * i))
        with pytest.raises(ProtocolError, match="more than one group"):
            decompose_variance(ScoreSet(tuple(records), frozenset(BASE_SEEDS)))

    def test_inconsistent_seed_columns_in_group(self):
        records = (
            ScoreRecord("t", "a", 1, {VarianceSource.DATA_SPLIT: 1}, "m", 0.1),
            ScoreRecord("t", "a", 2, dict(BASE_SEEDS), "m", 0.2),
        )
        with pytest.raises(ProtocolError, match="same seed columns"):
            decompose_variance(ScoreSet(records, frozenset(BASE_SEEDS)))

    def test_single_task_only(self):
        records = []
        for task in ("t1", "t2"):
            for i in range(2):
                seeds = dict(BASE_SEEDS)
                seeds[VarianceSource.DATA_SPLIT] = 10 + i
                records.append(ScoreRecord(task, "a", i + 1, seeds, "m", 0.1 * i))
        with pytest.raises(ProtocolError, match="one task at a time"):
            decompose_variance(ScoreSet(tuple(records), frozenset(BASE_SEEDS)))

    def test_bootstrap_intervals_bracket_points(self):
        stream = RngStream(31).child("var")
        table = decompose_variance(protocol_scores(n=60), stream=stream)
        assert table.cis is not None
        for source, point in table.per_source.items():
            ci = table.cis[source]
            assert ci.lower <= point <= ci.upper
        again = decompose_variance(
            protocol_scores(n=60), stream=RngStream(31).child("var")
        )
        assert again.cis == table.cis

    def test_rows_are_sorted_and_complete(self):
        stream = RngStream(32).child("var")
        table = decompose_variance(protocol_scores(n=30), stream=stream)
        rows = table.to_rows()
        assert [r["source"] for r in rows] == ["data_split", "weights_init"]
        for row in rows:
            assert row["std"] == pytest.approx(math.sqrt(row["variance"]))
            assert "relative_to_data_split" in row
            assert row["ci_lower"] <= row["variance"] <= row["ci_upper"]

    def test_zero_reference_ratio_rejected(self):
        table = decompose_variance(protocol_scores(with_frozen_group=True))
        zero_ref = decompose_variance(
            protocol_scores(with_frozen_group=True),
            reference=VarianceSource.NUMERICAL,
        )
        assert table.ratios()
        with pytest.raises(ValueError, match="zero variance"):
            zero_ref.ratios()


class TestBinomialSd:
    def test_exact_values(self):
        assert binomial_sd(0.5, 100) == 0.05
        assert binomial_sd(0.9, 900) == pytest.approx(0.01, rel=1e-12)

    def test_symmetry(self):
        assert binomial_sd(0.25, 57) == binomial_sd(0.75, 57)
        assert binomial_sd(0.3, 57) == pytest.approx(binomial_sd(0.7, 57), rel=1e-15)

    def test_domain(self):
        for bad in (0.0, 1.0, -0.1, 1.1):
            with pytest.raises(ValueError):
                binomial_sd(bad, 100)
        with pytest.raises(ValueError):
            binomial_sd(0.5, 0)


class TestBiasedEstimatorVariance:
    def test_independent_limit(self):
        assert biased_estimator_variance(2.0, 0.0, 8) == pytest.approx(0.25)

    def test_fully_correlated_never_shrinks(self):
        assert biased_estimator_variance(2.0, 1.0, 1000) == pytest.approx(2.0)

    def test_frozen_case(self):
        assert biased_estimator_variance(4.0, 0.5, 10) == pytest.approx(2.2)

    def test_single_replicate(self):
        assert biased_estimator_variance(3.0, 0.7, 1) == 3.0

    def test_large_k_floor_is_rho_var(self):
        assert biased_estimator_variance(2.0, 0.3, 10**6) == pytest.approx(
            0.6, rel=1e-4
        )

    def test_monotone_in_rho(self):
        vals = [biased_estimator_variance(1.0, r, 20) for r in (0.0, 0.2, 0.5, 0.9)]
        assert vals == sorted(vals)

    def test_validation(self):
        with pytest.raises(ValueError):
            biased_estimator_variance(-1.0, 0.0, 5)
        with pytest.raises(ValueError):
            biased_estimator_variance(1.0, 0.0, 0)
        with pytest.raises(ValueError):
            biased_estimator_variance(1.0, 1.5, 5)
        with pytest.raises(ValueError, match="positive-semidefinite"):
            biased_estimator_variance(1.0, -0.5, 5)


class TestEstimateRho:
    def test_independent_columns_near_zero(self):
        gen = RngStream(41).child("iid").generator()
        m = gen.normal(size=(400, 8))
        assert abs(estimate_rho(m)) < 0.05

    def test_shared_component_recovered(self):
        gen = RngStream(42).child("rho").generator()
        rho = 0.5
        shared = gen.normal(size=(600, 1))
        own = gen.normal(size=(600, 6))
        m = math.sqrt(rho) * shared + math.sqrt(1 - rho) * own
        assert estimate_rho(m) == pytest.approx(rho, abs=0.08)

    def test_constant_column_skipped_with_warning(self):
        gen = RngStream(43).child("c").generator()
        m = gen.normal(size=(50, 4))
        m[:, 2] = 7.0
        with pytest.warns(UserWarning, match="skipped 3 constant"):
            rho = estimate_rho(m)
        assert math.isfinite(rho)

    def test_all_constant_rejected(self):
        with pytest.raises(ValueError, match="degenerate"):
            estimate_rho(np.ones((10, 4)))

    def test_shape_validation(self):
        with pytest.raises(ValueError, match="risk matrix"):
            estimate_rho(np.ones(5))
        with pytest.raises(ValueError, match="risk matrix"):
            estimate_rho(np.ones((1, 5)))
        with pytest.raises(ValueError, match="risk matrix"):
            estimate_rho(np.ones((5, 1)))


class TestMseDecompose:
    def test_identity_holds_exactly(self):
        gen = RngStream(44).child("mse").generator()
        estimates = gen.normal(0.4, 0.2, size=500)
        parts = mse_decompose(estimates, true_mean=0.3)
        assert parts.bias_sq + parts.variance == pytest.approx(parts.mse, rel=1e-12)

    def test_spot_values(self):
        parts = mse_decompose([1.0, 2.0, 3.0], true_mean=2.0)
        assert parts.bias_sq == 0.0
        assert parts.variance == pytest.approx(2.0 / 3.0)
        assert parts.mse == pytest.approx(2.0 / 3.0)

    def test_single_estimate(self):
        parts = mse_decompose([3.0], true_mean=1.0)
        assert parts == MseParts(bias_sq=4.0, variance=0.0, mse=4.0, rho=None)

    def test_rho_passthrough(self):
        assert mse_decompose([1.0], 1.0, rho=0.25).rho == 0.25

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="at least one"):
            mse_decompose([], 0.0)
