"""Deciding whether one algorithm outperforms another.

The central quantity is the empirical probability that algorithm A
beats algorithm B on a randomly drawn replicate pair.  Unlike a mean
difference it is scale-free, robust to outliers, and directly answers
the question a practitioner asks.  A comparison is:

* not significant          if the bootstrap interval reaches 0.5,
* significant, not
  meaningful               if the interval stays at or below gamma,
* significant and
  meaningful               otherwise,

where gamma is the practical-relevance threshold: the smallest
win probability worth acting on.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .gaussian import norm_ppf
from .resampling import ConfidenceInterval, percentile_bootstrap_ci
from .rng import RngStream
from .scores import PairedScores

__all__ = [
    "TiePolicy",
    "Verdict",
    "ComparisonConfig",
    "ComparisonDecision",
    "prob_outperform",
    "compare_pab",
    "compare_average",
    "z_test_min_difference",
    "noether_sample_size",
    "verdict_from_interval",
]


class TiePolicy(enum.Enum):
    HALF_CREDIT = "half_credit"
    STRICT = "strict"


class Verdict(enum.Enum):
    NOT_SIGNIFICANT = "not_significant"
    SIGNIFICANT_NOT_MEANINGFUL = "significant_not_meaningful"
    SIGNIFICANT_AND_MEANINGFUL = "significant_and_meaningful"


@dataclass(frozen=True)
class ComparisonConfig:
    """Knobs of a comparison; defaults follow the package's standing
    recommendation (gamma=0.75, two 5% error rates, no mean threshold)."""

    gamma: float = 0.75
    alpha: float = 0.05
    beta: float = 0.05
    delta: float = 0.0
    ci_level: float = 0.95
    bootstrap_resamples: int = 1000
    tie_policy: TiePolicy = TiePolicy.HALF_CREDIT

    def __post_init__(self) -> None:
        if not 0.5 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0.5, 1), got {self.gamma}")
        for name in ("alpha", "beta", "ci_level"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if self.delta < 0.0:
            raise ValueError(f"delta must be non-negative, got {self.delta}")
        if self.bootstrap_resamples < 100:
            raise ValueError("bootstrap_resamples must be at least 100")

    def to_record(self) -> dict:
        return {
            "gamma": self.gamma,
            "alpha": self.alpha,
            "beta": self.beta,
            "delta": self.delta,
            "ci_level": self.ci_level,
            "bootstrap_resamples": self.bootstrap_resamples,
            "tie_policy": self.tie_policy.value,
        }


@dataclass(frozen=True)
class ComparisonDecision:
    p_a_beats_b: float
    interval: ConfidenceInterval
    verdict: Verdict
    k: int

    def to_record(self) -> dict:
        return {
            "p_a_beats_b": self.p_a_beats_b,
            "ci": self.interval.to_record(),
            "verdict": self.verdict.value,
            "k": self.k,
        }


def _win_values(paired: PairedScores, tie_policy: TiePolicy) -> np.ndarray:
    if len(paired) == 0:
        raise ValueError("cannot compare empty pairings")
    a = np.array([p[0] for p in paired.pairs])
    b = np.array([p[1] for p in paired.pairs])
    if paired.higher_is_better:
        wins = (a > b).astype(float)
    else:
        wins = (a < b).astype(float)
    if tie_policy is TiePolicy.HALF_CREDIT:
        wins = np.where(a == b, 0.5, wins)
    return wins


def prob_outperform(paired: PairedScores, tie_policy: TiePolicy = TiePolicy.HALF_CREDIT) -> float:
    """Fraction of replicate pairs where A beats B, under the set's
    polarity.  Ties count one half under HALF_CREDIT, zero under STRICT."""
    return float(_win_values(paired, tie_policy).mean())


def verdict_from_interval(lower: float, upper: float, gamma: float) -> Verdict:
    """Decision rule on the win-probability interval.  An interval that
    reaches 0.5 cannot exclude "no difference"; one capped at gamma is a
    real but immaterial difference.  The degenerate all-ties interval
    [0.5, 0.5] lands in the first branch by construction."""
    if lower <= 0.5:
        return Verdict.NOT_SIGNIFICANT
    if upper <= gamma:
        return Verdict.SIGNIFICANT_NOT_MEANINGFUL
    return Verdict.SIGNIFICANT_AND_MEANINGFUL


def compare_pab(
    paired: PairedScores,
    config: ComparisonConfig,
    stream: RngStream,
) -> ComparisonDecision:
    """Win-probability comparison with a percentile bootstrap interval.

    Pairs are resampled with replacement; the win probability is
    recomputed on each resample and the interval taken at
    ``config.ci_level``.  The point estimate does not depend on the
    stream, only the interval does.
    """
    wins = _win_values(paired, config.tie_policy)
    interval = percentile_bootstrap_ci(
        statistic=lambda idx: float(wins[idx].mean()),
        data_size=len(wins),
        stream=stream,
        n_resamples=config.bootstrap_resamples,
        level=config.ci_level,
    )
    return ComparisonDecision(
        p_a_beats_b=float(wins.mean()),
        interval=interval,
        verdict=verdict_from_interval(interval.lower, interval.upper, config.gamma),
        k=len(wins),
    )


def compare_average(
    mean_a: float,
    mean_b: float,
    delta: float = 0.0,
    higher_is_better: bool = True,
) -> bool:
    """Mean-difference rule: A wins when it beats B by strictly more
    than ``delta`` in the favourable direction.  Kept for comparison
    with the win-probability approach, not as a recommendation."""
    if delta < 0.0:
        raise ValueError("delta must be non-negative")
    gap = mean_a - mean_b if higher_is_better else mean_b - mean_a
    return gap > delta


def z_test_min_difference(sigma_a: float, sigma_b: float, k: int, alpha: float = 0.05) -> float:
    """Smallest mean gap a one-sided z test at level alpha can certify
    from k replicates per algorithm with known score deviations."""
    if sigma_a < 0.0 or sigma_b < 0.0:
        raise ValueError("standard deviations must be non-negative")
    if k < 1:
        raise ValueError("k must be at least 1")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return float(norm_ppf(1.0 - alpha) * math.sqrt((sigma_a**2 + sigma_b**2) / k))


def noether_sample_size(gamma: float, alpha: float = 0.05, beta: float = 0.05) -> int:
    """Replicates needed for a sign-style test of the win probability to
    detect gamma with false-positive rate alpha and false-negative rate
    beta (Noether's asymptotic formula for one-sample sign tests).

    Grows like (gamma - 0.5)^-2: thresholds barely above a coin flip
    are astronomically expensive to certify, which is the quantitative
    argument for settling on a materially large gamma up front.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    if gamma == 0.5:
        raise ValueError("gamma = 0.5 is the null itself; no sample size detects it")
    for name, v in (("alpha", alpha), ("beta", beta)):
        if not 0.0 < v < 1.0:
            raise ValueError(f"{name} must lie in (0, 1), got {v}")
    z_num = norm_ppf(1.0 - alpha) - norm_ppf(beta)
    n = (z_num / (math.sqrt(6.0) * (0.5 - gamma))) ** 2
    return max(1, math.ceil(n))
