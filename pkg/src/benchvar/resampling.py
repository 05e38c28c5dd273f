"""Out-of-bootstrap data splits and percentile bootstrap intervals.

The split procedure draws a training multiset with replacement and
tests on indices the bootstrap never touched, so train and test can
never overlap by construction.  Both operations consume an
:class:`~benchvar.rng.RngStream` and are deterministic given it.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .rng import RngStream

__all__ = [
    "SplitSpec",
    "ConfidenceInterval",
    "SplitError",
    "BootstrapError",
    "oob_split",
    "percentile_bootstrap_ci",
    "percentile_linear",
]


class SplitError(RuntimeError):
    """Raised when a requested split cannot be constructed."""


class BootstrapError(RuntimeError):
    """Raised when a resample statistic comes back non-finite.

    Carries the stream and resample index so the offending resample can
    be replayed exactly.
    """

    def __init__(self, message: str, stream: RngStream, resample_index: int):
        super().__init__(message)
        self.stream = stream
        self.resample_index = resample_index


@dataclass(frozen=True)
class SplitSpec:
    """One train/test split over an indexed pool of ``source_size`` items.

    ``train`` is a multiset (sampled with replacement, duplicates kept in
    draw order); ``test`` is a subset of the indices absent from train.
    """

    source_size: int
    train: np.ndarray
    test: np.ndarray

    def __post_init__(self) -> None:
        train = np.asarray(self.train, dtype=np.int64)
        test = np.asarray(self.test, dtype=np.int64)
        object.__setattr__(self, "train", train)
        object.__setattr__(self, "test", test)
        if self.source_size <= 0:
            raise ValueError("source_size must be positive")
        for name, arr in (("train", train), ("test", test)):
            if arr.ndim != 1:
                raise ValueError(f"{name} indices must be one-dimensional")
            if arr.size and (arr.min() < 0 or arr.max() >= self.source_size):
                raise ValueError(f"{name} indices out of range for source_size={self.source_size}")
        if len(np.unique(test)) != len(test):
            raise ValueError("test indices must be distinct")
        if np.intersect1d(train, test).size:
            raise ValueError("test indices overlap the train multiset")

    @property
    def complement_size(self) -> int:
        return self.source_size - len(np.unique(self.train))

    def to_record(self) -> dict:
        uniq, counts = np.unique(self.train, return_counts=True)
        return {
            "source_size": self.source_size,
            "train_indices": uniq.tolist(),
            "train_counts": counts.tolist(),
            "test_indices": sorted(self.test.tolist()),
        }


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    level: float
    resamples: int

    def __post_init__(self) -> None:
        if not self.lower <= self.upper:
            raise ValueError(f"interval bounds out of order: [{self.lower}, {self.upper}]")
        if not 0.0 < self.level < 1.0:
            raise ValueError(f"level must lie in (0, 1), got {self.level}")
        if self.resamples < 1:
            raise ValueError("resamples must be positive")

    def to_record(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "level": self.level,
            "resamples": self.resamples,
        }


def _allocate(total: int, weights: np.ndarray) -> np.ndarray:
    """Largest-remainder allocation of ``total`` slots across strata."""
    quota = total * weights / weights.sum()
    base = np.floor(quota).astype(np.int64)
    short = total - int(base.sum())
    if short:
        order = np.argsort(-(quota - base), kind="stable")
        base[order[:short]] += 1
    return base


def oob_split(
    source_size: int,
    train_size: int,
    test_size: int,
    stream: RngStream,
    strata: Optional[Sequence] = None,
) -> SplitSpec:
    """Draw an out-of-bootstrap split.

    Train indices are ``train_size`` draws with replacement from
    ``range(source_size)``; test indices are drawn without replacement
    from the never-drawn complement.  If the complement is smaller than
    ``test_size`` the test set is truncated with a warning; an empty
    complement raises :class:`SplitError` (retry with a fresh stream).

    With ``strata`` (one label per index) the bootstrap and the test
    draw both run per stratum, with train/test sizes split across
    strata proportionally to stratum size, so per-class counts are
    preserved.
    """
    if source_size <= 0 or train_size <= 0 or test_size < 0:
        raise ValueError("sizes must be positive (test_size may be zero)")
    gen = stream.generator()

    if strata is None:
        groups = [np.arange(source_size)]
        train_alloc = np.array([train_size])
        test_alloc = np.array([test_size])
    else:
        labels = np.asarray(strata)
        if len(labels) != source_size:
            raise ValueError("strata must provide one label per source index")
        uniq = np.unique(labels)
        groups = [np.flatnonzero(labels == u) for u in uniq]
        sizes = np.array([len(g) for g in groups], dtype=float)
        train_alloc = _allocate(train_size, sizes)
        test_alloc = _allocate(test_size, sizes)

    train_parts, test_parts = [], []
    truncated = 0
    for members, n_tr, n_te in zip(groups, train_alloc, test_alloc):
        drawn = members[gen.integers(0, len(members), size=int(n_tr))]
        complement = np.setdiff1d(members, drawn)
        take = min(int(n_te), len(complement))
        truncated += int(n_te) - take
        train_parts.append(drawn)
        if take:
            test_parts.append(gen.choice(complement, size=take, replace=False))

    train = np.concatenate(train_parts)
    test = np.concatenate(test_parts) if test_parts else np.empty(0, dtype=np.int64)
    if test_size > 0 and len(test) == 0:
        raise SplitError(
            "bootstrap consumed every index, leaving no out-of-bootstrap test data; "
            "retry with a fresh stream or a larger source"
        )
    if truncated:
        warnings.warn(
            f"out-of-bootstrap complement smaller than requested: test set truncated by {truncated}",
            stacklevel=2,
        )
    return SplitSpec(source_size=source_size, train=train, test=test)


def percentile_linear(sorted_values: np.ndarray, q: float) -> float:
    """Percentile by linear interpolation of sorted order statistics;
    this definition is part of the package contract."""
    n = len(sorted_values)
    if n == 1:
        return float(sorted_values[0])
    h = q * (n - 1)
    lo = int(np.floor(h))
    hi = min(lo + 1, n - 1)
    frac = h - lo
    return float(sorted_values[lo] + frac * (sorted_values[hi] - sorted_values[lo]))


def percentile_bootstrap_ci(
    statistic: Callable[[np.ndarray], float],
    data_size: int,
    stream: RngStream,
    n_resamples: int = 1000,
    level: float = 0.95,
) -> ConfidenceInterval:
    """Percentile bootstrap interval for ``statistic``.

    ``statistic`` receives an integer index array of length
    ``data_size`` (one with-replacement resample) and returns a float.
    The interval takes the (1-level)/2 and 1-(1-level)/2 percentiles of
    the resample statistics by linear interpolation.  Resample index
    matrices depend only on the stream, so chunking the loop across
    workers cannot change the result.
    """
    if n_resamples < 100:
        raise ValueError(f"need at least 100 resamples for stable percentiles, got {n_resamples}")
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    if data_size < 1:
        raise ValueError("data_size must be positive")

    indices = stream.generator().integers(0, data_size, size=(n_resamples, data_size))
    values = np.empty(n_resamples)
    for j in range(n_resamples):
        v = float(statistic(indices[j]))
        if not np.isfinite(v):
            raise BootstrapError(
                f"statistic returned non-finite value {v!r} on resample {j} of stream "
                f"{stream.root_seed}/{stream.path}",
                stream=stream,
                resample_index=j,
            )
        values[j] = v
    values.sort()
    alpha = 1.0 - level
    return ConfidenceInterval(
        lower=percentile_linear(values, alpha / 2.0),
        upper=percentile_linear(values, 1.0 - alpha / 2.0),
        level=level,
        resamples=n_resamples,
    )
