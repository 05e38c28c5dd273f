"""Attributing score variance to its sources.

The measurement protocol behind :func:`decompose_variance` is batches
of runs that each re-randomize exactly one source while every other
seed stays frozen; the sample variance of such a batch estimates that
source's contribution.  A batch with every seed frozen measures the
residual numerical noise.  The remaining helpers are the small pieces
of variance arithmetic the rest of the package leans on.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .resampling import ConfidenceInterval, percentile_bootstrap_ci
from .rng import RngStream
from .scores import ScoreSet, VarianceSource

__all__ = [
    "ProtocolError",
    "VarianceTable",
    "MseParts",
    "decompose_variance",
    "binomial_sd",
    "biased_estimator_variance",
    "estimate_rho",
    "mse_decompose",
]


class ProtocolError(ValueError):
    """The runs do not follow the one-varied-source measurement protocol."""


@dataclass(frozen=True)
class VarianceTable:
    per_source: Dict[VarianceSource, float]
    group_sizes: Dict[VarianceSource, int]
    reference: VarianceSource
    cis: Optional[Dict[VarianceSource, ConfidenceInterval]] = None

    def ratios(self) -> Dict[VarianceSource, float]:
        """Each source's variance relative to the reference source."""
        ref = self.per_source[self.reference]
        if ref == 0.0:
            raise ValueError(f"reference source {self.reference.value} has zero variance")
        return {s: v / ref for s, v in self.per_source.items()}

    def to_rows(self) -> list:
        rows = []
        ref = self.per_source[self.reference]
        for source in sorted(self.per_source, key=lambda s: s.value):
            var = self.per_source[source]
            row = {
                "source": source.value,
                "variance": var,
                "std": math.sqrt(var),
                "relative_to_" + self.reference.value: var / ref if ref else float("nan"),
                "runs": self.group_sizes[source],
            }
            if self.cis is not None and source in self.cis:
                row["ci_lower"] = self.cis[source].lower
                row["ci_upper"] = self.cis[source].upper
            rows.append(row)
        return rows


def _varied_source(records) -> VarianceSource:
    key_sets = {frozenset(r.seeds) for r in records}
    if len(key_sets) != 1:
        raise ProtocolError("records within a group must carry the same seed columns")
    varying = [
        s for s in sorted(next(iter(key_sets)), key=lambda x: x.value)
        if len({r.seeds[s] for r in records}) > 1
    ]
    if len(varying) > 1:
        raise ProtocolError(
            "group varies several sources at once: " + ", ".join(s.value for s in varying)
        )
    # All seeds frozen: what remains is numerical noise.
    return varying[0] if varying else VarianceSource.NUMERICAL


def decompose_variance(
    scores: ScoreSet,
    reference: VarianceSource = VarianceSource.DATA_SPLIT,
    stream: Optional[RngStream] = None,
    ci_level: float = 0.95,
    resamples: int = 1000,
) -> VarianceTable:
    """Per-source sample variances from single-varied-source run groups.

    Each (task, algorithm) group in ``scores`` must vary exactly one
    source (none means the numerical-noise group) and contain at least
    two runs; results are normalized against ``reference`` via
    :meth:`VarianceTable.ratios`.  Pass a stream to attach percentile
    bootstrap intervals to each variance.
    """
    tasks = scores.tasks()
    if len(tasks) != 1:
        raise ProtocolError(f"decompose one task at a time; got {tasks}")
    per_source: Dict[VarianceSource, float] = {}
    sizes: Dict[VarianceSource, int] = {}
    samples: Dict[VarianceSource, np.ndarray] = {}
    for (task, algo), records in sorted(scores.groups().items()):
        if len(records) < 2:
            raise ProtocolError(f"group {task}/{algo} has fewer than 2 runs")
        source = _varied_source(records)
        if source in per_source:
            raise ProtocolError(f"source {source.value} is measured by more than one group")
        values = np.array([r.value for r in records])
        per_source[source] = float(values.var(ddof=1))
        sizes[source] = len(values)
        samples[source] = values
    if reference not in per_source:
        raise ProtocolError(f"no group varies the reference source {reference.value}")

    cis = None
    if stream is not None:
        cis = {}
        for source in sorted(per_source, key=lambda s: s.value):
            values = samples[source]
            cis[source] = percentile_bootstrap_ci(
                statistic=lambda idx, v=values: float(v[idx].var(ddof=1)),
                data_size=len(values),
                stream=stream.child("varci-" + source.value),
                n_resamples=resamples,
                level=ci_level,
            )
    return VarianceTable(per_source=per_source, group_sizes=sizes, reference=reference, cis=cis)


def binomial_sd(tau: float, n_test: int) -> float:
    """Deviation of a test-set accuracy estimate: sqrt(tau(1-tau)/n).
    This is the irreducible floor set by test-set size alone."""
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie strictly in (0, 1), got {tau}")
    if n_test < 1:
        raise ValueError("n_test must be positive")
    return math.sqrt(tau * (1.0 - tau) / n_test)


def biased_estimator_variance(var_cond: float, rho: float, k: int) -> float:
    """Variance of a k-replicate mean when replicates share frozen
    state: var/k for the independent part plus a correlation term that
    does not shrink with k.  Valid for -1/(k-1) <= rho <= 1."""
    if var_cond < 0.0:
        raise ValueError("var_cond must be non-negative")
    if k < 1:
        raise ValueError("k must be at least 1")
    if rho > 1.0 or (k > 1 and rho < -1.0 / (k - 1)):
        raise ValueError(f"rho={rho} outside the positive-semidefinite range for k={k}")
    return var_cond / k + (k - 1) / k * rho * var_cond


def estimate_rho(risk_matrix: np.ndarray) -> float:
    """Mean Pearson correlation between replicate positions.

    ``risk_matrix`` has one row per independent repetition and one
    column per replicate position.  Column pairs where either column is
    constant are skipped with a warning; if nothing is left, raises.
    """
    m = np.asarray(risk_matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] < 2 or m.shape[1] < 2:
        raise ValueError("need a (repetitions >= 2) x (k >= 2) risk matrix")
    stds = m.std(axis=0, ddof=1)
    good = np.flatnonzero(stds > 0.0)
    k = m.shape[1]
    total_pairs = k * (k - 1) // 2
    if len(good) < 2:
        raise ValueError("all replicate-position pairs are degenerate (constant columns)")
    corr = np.corrcoef(m[:, good], rowvar=False)
    triu = corr[np.triu_indices_from(corr, k=1)]
    kept = len(triu)
    if kept < total_pairs:
        warnings.warn(
            f"skipped {total_pairs - kept} constant replicate-position pairs in rho estimate",
            stacklevel=2,
        )
    return float(triu.mean())


@dataclass(frozen=True)
class MseParts:
    bias_sq: float
    variance: float
    mse: float
    rho: Optional[float] = None


def mse_decompose(estimates: Sequence[float], true_mean: float, rho: Optional[float] = None) -> MseParts:
    """Split mean squared error into squared bias plus variance.

    The variance uses the population (m) denominator so the identity
    mse = bias^2 + variance holds exactly on the sample.
    """
    arr = np.asarray(estimates, dtype=float)
    if arr.size < 1:
        raise ValueError("need at least one estimate")
    bias_sq = float((arr.mean() - true_mean) ** 2)
    variance = float(arr.var(ddof=0))
    mse = float(((arr - true_mean) ** 2).mean())
    return MseParts(bias_sq=bias_sq, variance=variance, mse=mse, rho=rho)
