"""Monte-Carlo study of comparison criteria under known truth.

Scores for two algorithms are simulated as normals whose mean gap is
set so the true win probability P(A beats B) takes a chosen value; each
criterion then judges many simulated experiments and we record how
often it declares A better.  An experiment is simulated under two
regimes: the exhaustive estimator (independent replicates) and the
economical one, modeled as a shared mean offset drawn per experiment
followed by conditionally independent replicates.  A known-variance z
test rides along as the oracle ceiling.

Grid points are independent work units with index-derived streams, so
results are identical for any worker count.
"""

from __future__ import annotations

import enum
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .gaussian import norm_ppf
from .rng import RngStream

__all__ = [
    "Criterion",
    "SimulationConfig",
    "RatePoint",
    "RateCurves",
    "SweepResult",
    "pab_from_mean_shift",
    "mean_shift_from_pab",
    "simulate_ideal_run",
    "simulate_biased_run",
    "detection_rates",
    "robustness_sweep",
]


class Criterion(enum.Enum):
    SINGLE_POINT = "single_point"
    AVERAGE_DELTA = "average_delta"
    PAB_TEST = "pab_test"


@dataclass(frozen=True)
class SimulationConfig:
    """Simulation knobs.

    ``sigma`` is the per-replicate deviation in the exhaustive regime;
    ``var_biased_mean`` and ``var_cond`` are the shared-offset and
    conditional variances of the economical regime.  Their defaults sum
    to sigma^2 so both regimes share one x axis, with the shared offset
    taking a weight representative of a search-dominated pipeline.
    ``delta_multiplier`` scales sigma into the mean-difference
    threshold delta.
    """

    k: int = 50
    sigma: float = 1.0
    var_biased_mean: float = 0.3
    var_cond: float = 0.7
    repetitions: int = 10_000
    pab_grid: Tuple[float, ...] = tuple(round(0.4 + 0.05 * i, 2) for i in range(13))
    criteria: Tuple[Criterion, ...] = (
        Criterion.SINGLE_POINT,
        Criterion.AVERAGE_DELTA,
        Criterion.PAB_TEST,
    )
    delta_multiplier: float = 1.9952
    gamma: float = 0.75
    alpha: float = 0.05
    ci_level: float = 0.95
    bootstrap_resamples: int = 1000

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.sigma <= 0.0 or self.var_cond <= 0.0 or self.var_biased_mean < 0.0:
            raise ValueError("variances must be positive (shared-offset variance may be zero)")
        if self.repetitions < 1:
            raise ValueError("repetitions must be positive")
        if not self.pab_grid:
            raise ValueError("pab_grid must not be empty")
        for p in self.pab_grid:
            if not 0.4 <= p <= 1.0:
                raise ValueError(f"pab_grid values must lie in [0.4, 1], got {p}")
        if not 0.5 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0.5, 1), got {self.gamma}")
        if self.delta_multiplier < 0.0:
            raise ValueError("delta_multiplier must be non-negative")
        if not 0.0 < self.alpha < 1.0 or not 0.0 < self.ci_level < 1.0:
            raise ValueError("alpha and ci_level must lie in (0, 1)")
        if self.bootstrap_resamples < 100:
            raise ValueError("bootstrap_resamples must be at least 100")
        object.__setattr__(self, "pab_grid", tuple(float(p) for p in self.pab_grid))
        object.__setattr__(self, "criteria", tuple(self.criteria))

    def to_record(self) -> dict:
        return {
            "k": self.k,
            "sigma": self.sigma,
            "var_biased_mean": self.var_biased_mean,
            "var_cond": self.var_cond,
            "repetitions": self.repetitions,
            "pab_grid": list(self.pab_grid),
            "criteria": [c.value for c in self.criteria],
            "delta_multiplier": self.delta_multiplier,
            "gamma": self.gamma,
            "alpha": self.alpha,
            "ci_level": self.ci_level,
            "bootstrap_resamples": self.bootstrap_resamples,
        }


@dataclass(frozen=True)
class RatePoint:
    criterion: str
    estimator: str
    true_pab: float
    rate: float
    region: str


@dataclass(frozen=True)
class RateCurves:
    points: Tuple[RatePoint, ...]
    config: SimulationConfig

    def rate(self, criterion: str, estimator: str, true_pab: float) -> float:
        for p in self.points:
            if p.criterion == criterion and p.estimator == estimator and p.true_pab == true_pab:
                return p.rate
        raise KeyError((criterion, estimator, true_pab))

    def to_rows(self) -> List[dict]:
        return [
            {
                "criterion": p.criterion,
                "estimator": p.estimator,
                "true_pab": p.true_pab,
                "rate": p.rate,
                "region": p.region,
            }
            for p in self.points
        ]


@dataclass(frozen=True)
class SweepResult:
    by_sample_size: Tuple[Tuple[int, RateCurves], ...]
    by_gamma: Tuple[Tuple[float, RateCurves], ...]

    def to_rows(self) -> List[dict]:
        rows = []
        for k, curves in self.by_sample_size:
            for row in curves.to_rows():
                rows.append({"sweep": "sample_size", "value": k, **row})
        for g, curves in self.by_gamma:
            for row in curves.to_rows():
                rows.append({"sweep": "gamma", "value": g, **row})
        return rows


def pab_from_mean_shift(delta_mu: float, sigma_a: float, sigma_b: float) -> float:
    """P(single A draw beats single B draw) for normal scores whose
    means differ by delta_mu.  Degenerates to a step function when both
    deviations are zero."""
    if sigma_a < 0.0 or sigma_b < 0.0:
        raise ValueError("deviations must be non-negative")
    spread = math.hypot(sigma_a, sigma_b)
    if spread == 0.0:
        return 0.5 if delta_mu == 0.0 else (1.0 if delta_mu > 0.0 else 0.0)
    return 0.5 * (1.0 + math.erf(delta_mu / spread / math.sqrt(2.0)))


def mean_shift_from_pab(pab: float, sigma_a: float, sigma_b: float) -> float:
    """Mean gap producing the requested win probability; inverse of
    :func:`pab_from_mean_shift` (infinite at pab = 0 or 1)."""
    if not 0.0 <= pab <= 1.0:
        raise ValueError(f"pab must lie in [0, 1], got {pab}")
    if sigma_a < 0.0 or sigma_b < 0.0:
        raise ValueError("deviations must be non-negative")
    spread = math.hypot(sigma_a, sigma_b)
    return float(norm_ppf(pab)) * spread


def simulate_ideal_run(mean: float, sigma: float, k: int, stream: RngStream) -> np.ndarray:
    """k independent replicate scores from the exhaustive regime."""
    return mean + sigma * stream.generator().standard_normal(k)


def simulate_biased_run(
    mean: float,
    var_biased_mean: float,
    var_cond: float,
    k: int,
    stream: RngStream,
) -> np.ndarray:
    """k replicate scores from the economical regime: one shared offset
    per run, then conditionally independent draws around it."""
    gen = stream.generator()
    offset = gen.normal(0.0, math.sqrt(var_biased_mean))
    return mean + offset + math.sqrt(var_cond) * gen.standard_normal(k)


def _region(pab: float, gamma: float) -> str:
    if pab <= 0.5:
        return "H0"
    if pab >= gamma:
        return "H1"
    return "middle"


def _pab_verdict_rate(
    wins_prob: np.ndarray,
    k: int,
    resamples: int,
    level: float,
    gamma: float,
    gen: np.random.Generator,
) -> float:
    """Fraction of runs judged significant and meaningful.

    ``wins_prob`` holds each run's observed win fraction.  Resampling k
    binary wins with replacement makes the resampled win count exactly
    Binomial(k, observed fraction), so the pair-level bootstrap is
    drawn directly at that level; quantiles use the same linear
    interpolation as the bootstrap module.  Ties have probability zero
    here, so the tie policy never engages.
    """
    lo_q = (1.0 - level) / 2.0
    hi_q = 1.0 - lo_q
    positives = 0
    block = 2048
    for start in range(0, len(wins_prob), block):
        p = wins_prob[start : start + block]
        boot = gen.binomial(k, p[:, None], size=(len(p), resamples)) / k
        lower = np.quantile(boot, lo_q, axis=1, method="linear")
        upper = np.quantile(boot, hi_q, axis=1, method="linear")
        positives += int(np.sum((lower > 0.5) & (upper > gamma)))
    return positives / len(wins_prob)


def _rates_at_point(config: SimulationConfig, true_pab: float, point_stream: RngStream) -> List[RatePoint]:
    k, reps = config.k, config.repetitions
    sigma = config.sigma
    delta = config.delta_multiplier * sigma
    region = _region(true_pab, config.gamma)
    total_sd = math.sqrt(config.var_biased_mean + config.var_cond)

    shift_ideal = mean_shift_from_pab(true_pab, sigma, sigma)
    shift_biased = mean_shift_from_pab(true_pab, total_sd, total_sd)

    draws: Dict[str, Tuple[np.ndarray, np.ndarray]] = {}
    gen_i = point_stream.child("ideal").generator()
    a = shift_ideal + sigma * gen_i.standard_normal((reps, k))
    b = sigma * gen_i.standard_normal((reps, k))
    draws["ideal"] = (a, b)

    gen_b = point_stream.child("biased").generator()
    off_a = gen_b.normal(0.0, math.sqrt(config.var_biased_mean), size=(reps, 1))
    off_b = gen_b.normal(0.0, math.sqrt(config.var_biased_mean), size=(reps, 1))
    a = shift_biased + off_a + math.sqrt(config.var_cond) * gen_b.standard_normal((reps, k))
    b = off_b + math.sqrt(config.var_cond) * gen_b.standard_normal((reps, k))
    draws["biased"] = (a, b)

    mean_diff_sd = {
        "ideal": math.sqrt(2.0 * sigma**2 / k),
        "biased": math.sqrt(2.0 * (config.var_biased_mean + config.var_cond / k)),
    }

    points: List[RatePoint] = []
    for estimator in ("ideal", "biased"):
        a, b = draws[estimator]
        if Criterion.SINGLE_POINT in config.criteria:
            rate = float(np.mean(a[:, 0] - b[:, 0] > delta))
            points.append(RatePoint("single_point", estimator, true_pab, rate, region))
        if Criterion.AVERAGE_DELTA in config.criteria:
            rate = float(np.mean(a.mean(axis=1) - b.mean(axis=1) > delta))
            points.append(RatePoint("average_delta", estimator, true_pab, rate, region))
        if Criterion.PAB_TEST in config.criteria:
            wins = (a > b).mean(axis=1)
            rate = _pab_verdict_rate(
                wins,
                k,
                config.bootstrap_resamples,
                config.ci_level,
                config.gamma,
                point_stream.child("boot-" + estimator).generator(),
            )
            points.append(RatePoint("pab_test", estimator, true_pab, rate, region))
        threshold = float(norm_ppf(1.0 - config.alpha)) * mean_diff_sd[estimator]
        rate = float(np.mean(a.mean(axis=1) - b.mean(axis=1) > threshold))
        points.append(RatePoint("oracle", estimator, true_pab, rate, region))
    return points


def _point_task(args) -> List[RatePoint]:
    config, true_pab, stream = args
    return _rates_at_point(config, true_pab, stream)


def detection_rates(config: SimulationConfig, stream: RngStream, workers: int = 1) -> RateCurves:
    """Positive rate of every criterion at every grid win probability,
    under both estimation regimes, plus the oracle z test.  Fewer than
    1000 repetitions triggers a warning since rate error scales as
    1/sqrt(repetitions)."""
    if config.repetitions < 1000:
        warnings.warn(
            f"{config.repetitions} repetitions give rate estimates with standard error "
            f">= {1.0 / (2.0 * math.sqrt(config.repetitions)):.3f}; expect wide error bars",
            stacklevel=2,
        )
    tasks = [
        (config, pab, stream.child("pab-point", i))
        for i, pab in enumerate(config.pab_grid)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_point_task, tasks))
    else:
        results = [_point_task(t) for t in tasks]
    points = tuple(p for batch in results for p in batch)
    return RateCurves(points=points, config=config)


def robustness_sweep(
    config: SimulationConfig,
    sample_sizes: Sequence[int],
    gammas: Sequence[float],
    stream: RngStream,
    workers: int = 1,
) -> SweepResult:
    """Detection rates as the replicate budget or the relevance
    threshold moves.  Each gamma re-derives the mean-difference
    threshold as delta = ppf(gamma) * sigma, the gap at which the win
    probability equals that gamma."""
    by_k = []
    for i, k in enumerate(sample_sizes):
        sub = replace(config, k=int(k))
        by_k.append((int(k), detection_rates(sub, stream.child("size-sweep", i), workers)))
    by_gamma = []
    for j, g in enumerate(gammas):
        sub = replace(config, gamma=float(g), delta_multiplier=float(norm_ppf(g)))
        by_gamma.append((float(g), detection_rates(sub, stream.child("gamma-sweep", j), workers)))
    return SweepResult(by_sample_size=tuple(by_k), by_gamma=tuple(by_gamma))
