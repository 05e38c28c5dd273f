"""Estimating an algorithm's expected performance, with or without
re-running hyperparameter search.

Two protocols are implemented.  The exhaustive one re-randomizes
everything per replicate, including the search, and is unbiased but
costs k searches.  The economical one runs the search once, freezes the
winning hyperparameters, and spends the remaining budget on replicates
that re-randomize a chosen subset of variance sources; it costs one
search total but its replicates share whatever was frozen, so its mean
is mildly biased and its replicates are correlated.  The study helper
measures how the resulting standard error decays with k for each
protocol, which is the basis for choosing a benchmarking budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Protocol, Sequence, Tuple

import numpy as np

from .hpo import HyperParams
from .resampling import SplitSpec, oob_split
from .rng import RngStream
from .scores import VarianceSource

__all__ = [
    "PipelineAdapter",
    "SplitSizes",
    "EstimatorReport",
    "EstimatorVariant",
    "StudyRow",
    "ideal_estimate",
    "fixed_hopt_estimate",
    "estimator_study",
]


class PipelineAdapter(Protocol):
    """What the estimators need from a training pipeline.

    Both methods must be deterministic given their arguments; all
    stochasticity enters through seeds and streams.
    """

    sources: FrozenSet[VarianceSource]

    def train_eval(self, split: SplitSpec, params: HyperParams, seeds) -> float: ...

    def hopt(self, split: SplitSpec, seeds, budget: int, stream: RngStream) -> HyperParams: ...


@dataclass(frozen=True)
class SplitSizes:
    source_size: int
    train_size: int
    test_size: int

    def __post_init__(self) -> None:
        if min(self.source_size, self.train_size, self.test_size) < 1:
            raise ValueError("split sizes must be positive")


@dataclass(frozen=True)
class EstimatorReport:
    """Replicate risks plus summary statistics for one estimation run.

    ``std`` is the k-1 denominator sample deviation, None when a single
    replicate makes it undefined.  ``replicate_seeds`` records every
    seed map used, enough to replay any replicate.
    """

    per_replicate_risks: Tuple[float, ...]
    mean: float
    std: Optional[float]
    k: int
    varied: FrozenSet[VarianceSource]
    hopt_count: int
    replicate_seeds: Tuple[Dict[VarianceSource, int], ...]

    def to_record(self) -> dict:
        return {
            "risks": list(self.per_replicate_risks),
            "mean": self.mean,
            "std": self.std,
            "k": self.k,
            "varied": sorted(s.value for s in self.varied),
            "hopt_count": self.hopt_count,
            "replicate_seeds": [
                {s.value: int(v) for s, v in sorted(m.items(), key=lambda kv: kv[0].value)}
                for m in self.replicate_seeds
            ],
        }


def _draw_seeds(stream: RngStream, sources: Sequence[VarianceSource]) -> Dict[VarianceSource, int]:
    return {s: stream.child("seed-" + s.value).seed64() for s in sorted(sources, key=lambda x: x.value)}


def _split_for(seeds: Dict[VarianceSource, int], fallback: RngStream, sizes: SplitSizes) -> SplitSpec:
    # The split is a pure function of the data-split seed, so varying
    # that seed re-draws the split and freezing it reuses the split.
    if VarianceSource.DATA_SPLIT in seeds:
        stream = RngStream(seeds[VarianceSource.DATA_SPLIT]).child("oob")
    else:
        stream = fallback.child("oob")
    return oob_split(sizes.source_size, sizes.train_size, sizes.test_size, stream)


def _report(
    risks: List[float],
    varied: FrozenSet[VarianceSource],
    hopt_count: int,
    seed_maps: List[Dict[VarianceSource, int]],
) -> EstimatorReport:
    k = len(risks)
    arr = np.asarray(risks)
    std = float(arr.std(ddof=1)) if k > 1 else None
    return EstimatorReport(
        per_replicate_risks=tuple(float(r) for r in risks),
        mean=float(arr.mean()),
        std=std,
        k=k,
        varied=varied,
        hopt_count=hopt_count,
        replicate_seeds=tuple(seed_maps),
    )


def ideal_estimate(
    pipeline: PipelineAdapter,
    sizes: SplitSizes,
    k: int,
    budget: int,
    root: RngStream,
) -> EstimatorReport:
    """Exhaustive protocol: every replicate draws fresh seeds for every
    source, a fresh split, and a fresh hyperparameter search.

    Replicate risks are therefore independent and identically
    distributed, and the mean is an unbiased estimate of expected
    performance; the price is k full searches (O(k * budget) trainings).
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    risks: List[float] = []
    seed_maps: List[Dict[VarianceSource, int]] = []
    for i in range(1, k + 1):
        rep = root.child("replicate", i)
        seeds = _draw_seeds(rep, sorted(pipeline.sources, key=lambda s: s.value))
        split = _split_for(seeds, rep, sizes)
        params = pipeline.hopt(split, seeds, budget, rep.child("hopt"))
        risks.append(pipeline.train_eval(split, params, seeds))
        seed_maps.append(seeds)
    varied = frozenset(pipeline.sources) | {VarianceSource.HOPT}
    return _report(risks, varied, hopt_count=k, seed_maps=seed_maps)


def fixed_hopt_estimate(
    pipeline: PipelineAdapter,
    sizes: SplitSizes,
    k: int,
    budget: int,
    varied: FrozenSet[VarianceSource],
    root: RngStream,
) -> EstimatorReport:
    """Economical protocol: one search fixes the hyperparameters, then k
    replicates re-randomize exactly the sources in ``varied`` while
    reusing the initial seeds for everything else.

    Costs one search plus k trainings (O(k + budget)).  With
    ``varied`` empty and a deterministic pipeline, all replicates
    coincide and the reported deviation is zero.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    varied = frozenset(varied)
    if VarianceSource.HOPT in varied:
        raise ValueError("the search is fixed by construction; it cannot be in varied")
    unknown = varied - set(pipeline.sources)
    if unknown:
        raise ValueError(f"varied sources not provided by the pipeline: {sorted(s.value for s in unknown)}")

    init = root.child("search")
    base_seeds = _draw_seeds(init, sorted(pipeline.sources, key=lambda s: s.value))
    base_split = _split_for(base_seeds, init, sizes)
    params = pipeline.hopt(base_split, base_seeds, budget, init.child("hopt"))

    risks: List[float] = []
    seed_maps: List[Dict[VarianceSource, int]] = []
    for i in range(1, k + 1):
        rep = root.child("replicate", i)
        fresh = _draw_seeds(rep, sorted(varied, key=lambda s: s.value))
        seeds = dict(base_seeds)
        seeds.update(fresh)
        split = base_split if VarianceSource.DATA_SPLIT not in varied else _split_for(seeds, rep, sizes)
        risks.append(pipeline.train_eval(split, params, seeds))
        seed_maps.append(seeds)
    return _report(risks, varied, hopt_count=1, seed_maps=seed_maps)


@dataclass(frozen=True)
class EstimatorVariant:
    """A named estimation protocol for the study: ``varied=None`` means
    the exhaustive protocol, otherwise the fixed-search protocol
    re-randomizing the given sources."""

    name: str
    varied: Optional[FrozenSet[VarianceSource]] = None

    @classmethod
    def ideal(cls) -> "EstimatorVariant":
        return cls(name="ideal", varied=None)

    @classmethod
    def fixed(cls, varied: FrozenSet[VarianceSource], name: Optional[str] = None) -> "EstimatorVariant":
        if name is None:
            name = "fixed[" + "+".join(sorted(s.value for s in varied)) + "]"
        return cls(name=name, varied=frozenset(varied))


@dataclass(frozen=True)
class StudyRow:
    variant: str
    k: int
    mean: float
    std_error: float
    band: float


def _study_cell(
    pipeline: PipelineAdapter,
    sizes: SplitSizes,
    variant: EstimatorVariant,
    k_max: int,
    budget: int,
    rep_stream: RngStream,
) -> np.ndarray:
    if variant.varied is None:
        report = ideal_estimate(pipeline, sizes, k_max, budget, rep_stream)
    else:
        report = fixed_hopt_estimate(pipeline, sizes, k_max, budget, variant.varied, rep_stream)
    return np.asarray(report.per_replicate_risks)


def estimator_study(
    pipeline: PipelineAdapter,
    sizes: SplitSizes,
    k_grid: Sequence[int],
    repetitions: int,
    variants: Sequence[EstimatorVariant],
    budget: int,
    root: RngStream,
    _cells: Optional[dict] = None,
) -> List[StudyRow]:
    """Standard error of each estimation protocol as a function of k.

    Each repetition runs the protocol once at max(k_grid) replicates;
    the estimate at smaller k is the mean of the first k replicate
    risks, so one run serves the whole grid.  ``std_error`` is the
    deviation of the estimate across repetitions and ``band`` its own
    approximate deviation (a normal-theory s/sqrt(2(m-1)) band, plot
    furniture rather than a guarantee).

    ``_cells`` optionally supplies precomputed replicate-risk arrays
    keyed by (variant name, repetition), letting a caller farm the
    expensive runs out to workers; results are identical either way.
    """
    if repetitions < 2:
        raise ValueError("need at least 2 repetitions to measure spread across runs")
    if not k_grid or min(k_grid) < 1:
        raise ValueError("k_grid must contain positive replicate counts")
    k_max = max(k_grid)
    rows: List[StudyRow] = []
    for variant in variants:
        runs = np.empty((repetitions, k_max))
        for r in range(repetitions):
            if _cells is not None:
                runs[r] = _cells[(variant.name, r)]
            else:
                rep_stream = root.child("study-" + variant.name, r)
                runs[r] = _study_cell(pipeline, sizes, variant, k_max, budget, rep_stream)
        for k in sorted(set(int(k) for k in k_grid)):
            means = runs[:, :k].mean(axis=1)
            std_error = float(means.std(ddof=1))
            band = std_error / math.sqrt(2.0 * (repetitions - 1))
            rows.append(StudyRow(variant.name, k, float(means.mean()), std_error, band))
    return rows
