"""A synthetic training pipeline with known ground truth.

The risk surface is a diagonal quadratic bowl over the hyperparameters,
plus one independent Gaussian noise term per variance source, each a
pure function of that source's seed.  Components are additive with no
interactions, a deliberate simplification that buys closed-form means
and variances for calibrating estimators.  Search-seed variance is not
a component: it emerges mechanically from running the hyperparameter
search with different streams.

Per-source noise is derived from the seed with a SplitMix64 chain and a
Box-Muller transform rather than a full generator object, because the
estimator studies call ``train_eval`` millions of times.  The optional
binomial mode additionally resamples the test measurement as a
``Binomial(n_test, 1 - risk) / n_test`` accuracy, mimicking a finite
test set.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional

import numpy as np

from .hpo import HpoMethod, HyperParams, SearchSpace, run_hopt
from .resampling import SplitSpec
from .rng import RngStream, splitmix64
from .scores import VarianceSource

__all__ = ["SyntheticPipelineConfig", "SyntheticPipeline", "GroundTruth", "ground_truth"]

_MASK64 = (1 << 64) - 1

# Stable 64-bit salt per source so distinct sources sharing a seed value
# still draw independent noise.
_SOURCE_TAG: Dict[VarianceSource, int] = {
    s: int.from_bytes(hashlib.sha256(s.value.encode()).digest()[:8], "big")
    for s in VarianceSource
}


def _unit_open(x: int) -> float:
    # 53-bit mantissa draw strictly inside (0, 1).
    return ((x >> 11) + 0.5) / float(1 << 53)


def _gauss_from_seed(seed: int, tag: int) -> float:
    x1 = splitmix64((seed ^ tag) & _MASK64)
    x2 = splitmix64(x1)
    u1 = _unit_open(x1)
    u2 = _unit_open(x2)
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


@dataclass(frozen=True)
class SyntheticPipelineConfig:
    base_risk: float
    optimum: Mapping[str, float]
    curvature: Mapping[str, float]
    component_sds: Mapping[VarianceSource, float]
    space: SearchSpace
    hopt_method: HpoMethod = HpoMethod.RANDOM
    binomial_test_size: Optional[int] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "optimum", dict(self.optimum))
        object.__setattr__(self, "curvature", dict(self.curvature))
        object.__setattr__(self, "component_sds", dict(self.component_sds))
        if self.base_risk < 0.0:
            raise ValueError("base_risk must be non-negative")
        if set(self.optimum) != set(self.curvature):
            raise ValueError("optimum and curvature must name the same hyperparameters")
        if set(self.space.names) != set(self.optimum):
            raise ValueError("search space must cover exactly the configured hyperparameters")
        for name, c in self.curvature.items():
            if c <= 0.0:
                raise ValueError(f"curvature for {name!r} must be positive")
        for source, sd in self.component_sds.items():
            if not isinstance(source, VarianceSource):
                raise TypeError(f"component keys must be VarianceSource, got {source!r}")
            if sd < 0.0:
                raise ValueError(f"component sd for {source.value} must be non-negative")
        if VarianceSource.HOPT in self.component_sds:
            raise ValueError(
                "search-seed variance is not a noise component; it arises from the search itself"
            )
        if self.binomial_test_size is not None and self.binomial_test_size < 1:
            raise ValueError("binomial_test_size must be positive")

    def to_record(self) -> dict:
        return {
            "base_risk": self.base_risk,
            "optimum": dict(self.optimum),
            "curvature": dict(self.curvature),
            "component_sds": {s.value: sd for s, sd in sorted(self.component_sds.items(), key=lambda kv: kv[0].value)},
            "hopt_method": self.hopt_method.value,
            "binomial_test_size": self.binomial_test_size,
            "space": [
                {"name": d.name, "lower": d.lower, "upper": d.upper, "scale": d.scale.value}
                for d in self.space.dims
            ],
        }


@dataclass(frozen=True)
class GroundTruth:
    mean: float
    variance: float
    components: Dict[str, float] = field(default_factory=dict)


def _clean_risk(config: SyntheticPipelineConfig, params: HyperParams) -> float:
    risk = config.base_risk
    for name, center in config.optimum.items():
        risk += config.curvature[name] * (params[name] - center) ** 2
    return risk


def ground_truth(config: SyntheticPipelineConfig, at: Optional[HyperParams] = None) -> GroundTruth:
    """Closed-form mean and variance of the pipeline's risk at ``at``
    (default: the optimum).  In binomial mode the test-measurement term
    uses the clamped mean risk; the clamp makes this an approximation
    when the risk strays outside [0, 1]."""
    mean = config.base_risk if at is None else _clean_risk(config, at)
    components = {s.value: sd**2 for s, sd in sorted(config.component_sds.items(), key=lambda kv: kv[0].value)}
    variance = sum(components.values())
    if config.binomial_test_size is not None:
        tau = min(max(1.0 - mean, 0.0), 1.0)
        components["test_measurement"] = tau * (1.0 - tau) / config.binomial_test_size
        variance += components["test_measurement"]
    return GroundTruth(mean=mean, variance=variance, components=components)


class SyntheticPipeline:
    """PipelineAdapter over the synthetic risk surface."""

    def __init__(self, config: SyntheticPipelineConfig):
        self.config = config
        self.sources = frozenset(config.component_sds)

    def train_eval(
        self,
        split: Optional[SplitSpec],
        params: HyperParams,
        seeds: Mapping[VarianceSource, int],
    ) -> float:
        """Risk of one training run; a pure function of (params, seeds).

        The split argument is accepted for interface compatibility; the
        surface carries no real data, so split influence flows entirely
        through the data-split seed that generated it.
        """
        cfg = self.config
        risk = _clean_risk(cfg, params)
        for source in sorted(cfg.component_sds, key=lambda s: s.value):
            sd = cfg.component_sds[source]
            if sd == 0.0:
                continue
            seed = seeds.get(source)
            if seed is None:
                raise ValueError(f"pipeline needs a seed for source {source.value}")
            risk += sd * _gauss_from_seed(int(seed), _SOURCE_TAG[source])
        if cfg.binomial_test_size is None:
            return risk
        tau = min(max(1.0 - risk, 0.0), 1.0)
        acc = self._binomial_draw(seeds, tau)
        return 1.0 - acc

    def _binomial_draw(self, seeds: Mapping[VarianceSource, int], tau: float) -> float:
        acc_seed = 0
        for source in sorted(seeds, key=lambda s: s.value):
            acc_seed = splitmix64(acc_seed ^ _SOURCE_TAG[source] ^ int(seeds[source]))
        gen = RngStream(acc_seed).child("test-measurement").generator()
        n = self.config.binomial_test_size
        return float(gen.binomial(n, tau)) / n

    def hopt(
        self,
        split: Optional[SplitSpec],
        seeds: Mapping[VarianceSource, int],
        budget: int,
        stream: RngStream,
    ) -> HyperParams:
        return run_hopt(
            self,
            self.config.space,
            self.config.hopt_method,
            budget,
            split,
            seeds,
            stream,
        )
