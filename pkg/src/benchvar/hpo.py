"""Hyperparameter search over box spaces.

Three interchangeable candidate generators: a deterministic grid, a
randomly perturbed grid whose points average out to the deterministic
grid, and uniform random search over the (optionally extended) box.
The perturbed grid exists so repeated searches carry search-seed
variance while staying unbiased in expectation.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .rng import RngStream

__all__ = [
    "Scale",
    "Dim",
    "SearchSpace",
    "HyperParams",
    "HpoMethod",
    "CandidateEval",
    "grid_candidates",
    "noisy_grid_candidates",
    "random_candidates",
    "evaluate_candidates",
    "hopt_trace",
    "run_hopt",
]


class Scale(enum.Enum):
    LINEAR = "linear"
    LOG10 = "log10"


class HpoMethod(enum.Enum):
    GRID = "grid"
    NOISY_GRID = "noisy_grid"
    RANDOM = "random"
    # Reserved: surrogate-model search is a recognised method slot but is
    # deliberately not implemented here.
    BAYESIAN = "bayesian"


@dataclass(frozen=True)
class Dim:
    name: str
    lower: float
    upper: float
    scale: Scale = Scale.LINEAR

    def __post_init__(self) -> None:
        if not self.lower < self.upper:
            raise ValueError(f"dim {self.name!r}: need lower < upper, got [{self.lower}, {self.upper}]")
        if self.scale is Scale.LOG10 and self.lower <= 0.0:
            raise ValueError(f"dim {self.name!r}: log-scaled bounds must be positive")

    def to_internal(self, x: float) -> float:
        return math.log10(x) if self.scale is Scale.LOG10 else x

    def from_internal(self, x: float) -> float:
        return 10.0**x if self.scale is Scale.LOG10 else x


@dataclass(frozen=True)
class SearchSpace:
    dims: Tuple[Dim, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "dims", tuple(self.dims))
        if not self.dims:
            raise ValueError("a search space needs at least one dimension")
        names = [d.name for d in self.dims]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate dimension names: {names}")

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(d.name for d in self.dims)


@dataclass(frozen=True)
class HyperParams:
    values: Mapping[str, float]

    def __post_init__(self) -> None:
        # Plain floats only, so numpy scalars picked up from array math
        # cannot leak into records or serialized output.
        object.__setattr__(self, "values", {str(k): float(v) for k, v in self.values.items()})

    def __getitem__(self, name: str) -> float:
        return self.values[name]

    def to_record(self) -> dict:
        return dict(self.values)


@dataclass(frozen=True)
class CandidateEval:
    index: int
    params: HyperParams
    risk: float


def _axis(dim: Dim, n: int, lo: Optional[float] = None, hi: Optional[float] = None) -> np.ndarray:
    """n evenly spaced points on the dim's internal (possibly log) axis."""
    a = dim.to_internal(dim.lower) if lo is None else lo
    b = dim.to_internal(dim.upper) if hi is None else hi
    pts = np.linspace(a, b, n)
    return np.array([dim.from_internal(p) for p in pts])


def _check_resolution(n: int) -> None:
    if n < 2:
        raise ValueError(f"grid resolution must be at least 2, got {n}")


def grid_candidates(space: SearchSpace, n: int) -> List[HyperParams]:
    """Full factorial grid, n points per dimension (n**d candidates).
    Log-scaled dimensions are spaced evenly in log10."""
    _check_resolution(n)
    axes = [_axis(d, n) for d in space.dims]
    return [
        HyperParams(dict(zip(space.names, combo)))
        for combo in itertools.product(*axes)
    ]


def noisy_grid_candidates(space: SearchSpace, n: int, stream: RngStream) -> List[HyperParams]:
    """Grid built between randomly shifted endpoints.

    Each endpoint moves uniformly within half a grid step of its
    nominal position (on the internal axis, so log dimensions are
    perturbed in log10 space).  Because the grid is linear in its
    endpoints, every candidate coordinate averages to the deterministic
    grid coordinate over streams.
    """
    _check_resolution(n)
    gen = stream.generator()
    axes = []
    for dim in space.dims:
        a = dim.to_internal(dim.lower)
        b = dim.to_internal(dim.upper)
        step = (b - a) / (n - 1)
        a_t = gen.uniform(a - step / 2.0, a + step / 2.0)
        b_t = gen.uniform(b - step / 2.0, b + step / 2.0)
        axes.append(_axis(dim, n, lo=a_t, hi=b_t))
    return [
        HyperParams(dict(zip(space.names, combo)))
        for combo in itertools.product(*axes)
    ]


def random_candidates(
    space: SearchSpace,
    budget: int,
    stream: RngStream,
    grid_n: Optional[int] = None,
) -> List[HyperParams]:
    """Uniform draws on each dimension's internal axis (log-uniform for
    log dimensions).  With ``grid_n`` the box is extended by half a grid
    step on both ends, matching the reach of a perturbed grid of that
    resolution; without it the nominal bounds are used as-is."""
    if budget < 1:
        raise ValueError("budget must be positive")
    if grid_n is not None:
        _check_resolution(grid_n)
    gen = stream.generator()
    columns = []
    for dim in space.dims:
        a = dim.to_internal(dim.lower)
        b = dim.to_internal(dim.upper)
        if grid_n is not None:
            half = (b - a) / (grid_n - 1) / 2.0
            a, b = a - half, b + half
        draws = gen.uniform(a, b, size=budget)
        columns.append([dim.from_internal(x) for x in draws])
    return [
        HyperParams({name: col[i] for name, col in zip(space.names, columns)})
        for i in range(budget)
    ]


def evaluate_candidates(pipeline, candidates: Sequence[HyperParams], split, seeds) -> List[float]:
    return [pipeline.train_eval(split, params, seeds) for params in candidates]


def _candidates_for(space: SearchSpace, method: HpoMethod, budget: int, stream: RngStream) -> List[HyperParams]:
    if budget < 1:
        raise ValueError("budget must be positive")
    d = len(space.dims)
    # Grid resolution chosen so the full factorial fits the budget when
    # possible; tiny budgets still get the minimal 2-point grid.
    n = max(2, int(math.floor(budget ** (1.0 / d))))
    if method is HpoMethod.GRID:
        return grid_candidates(space, n)[:budget]
    if method is HpoMethod.NOISY_GRID:
        return noisy_grid_candidates(space, n, stream)[:budget]
    if method is HpoMethod.RANDOM:
        return random_candidates(space, budget, stream, grid_n=n)
    if method is HpoMethod.BAYESIAN:
        raise NotImplementedError("surrogate-model search is a reserved slot, not implemented")
    raise ValueError(f"unknown method {method!r}")


def hopt_trace(
    pipeline,
    space: SearchSpace,
    method: HpoMethod,
    budget: int,
    split,
    seeds,
    stream: RngStream,
) -> List[CandidateEval]:
    """Evaluate up to ``budget`` candidates on one split; returns the
    full evaluation sequence in candidate order."""
    candidates = _candidates_for(space, method, budget, stream)
    risks = evaluate_candidates(pipeline, candidates, split, seeds)
    return [CandidateEval(i, c, r) for i, (c, r) in enumerate(zip(candidates, risks))]


def run_hopt(
    pipeline,
    space: SearchSpace,
    method: HpoMethod,
    budget: int,
    split,
    seeds,
    stream: RngStream,
) -> HyperParams:
    """Pick the candidate with the lowest evaluation risk.  Exact ties
    go to the earliest candidate index, so the result does not depend
    on evaluation order."""
    trace = hopt_trace(pipeline, space, method, budget, split, seeds, stream)
    best = min(trace, key=lambda ev: (ev.risk, ev.index))
    return best.params
