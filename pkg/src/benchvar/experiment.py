"""Experiment files: one YAML document declaring everything a CLI run
needs, so a result can always be traced back to a config and a seed.

Parsing is strict: unknown keys are rejected with their full path, and
stochastic commands refuse to run without a root seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import yaml

from .comparison import ComparisonConfig, TiePolicy
from .estimators import EstimatorVariant, SplitSizes
from .hpo import Dim, HpoMethod, Scale, SearchSpace
from .scores import VarianceSource
from .simulate import Criterion, SimulationConfig
from .synthpipe import SyntheticPipelineConfig

__all__ = ["Experiment", "ExperimentError", "load_experiment", "resolve_variants"]


class ExperimentError(ValueError):
    """An experiment file failed validation; messages carry key paths."""


@dataclass(frozen=True)
class ScoresSection:
    path: str
    algorithm_a: str
    algorithm_b: str
    task: Optional[str] = None
    pair_on: Tuple[VarianceSource, ...] = ()
    lower_is_better: bool = False


@dataclass(frozen=True)
class EstimateSection:
    sizes: SplitSizes
    k_grid: Tuple[int, ...]
    repetitions: int
    budget: int
    variant_specs: Tuple[str, ...]


@dataclass(frozen=True)
class SweepSection:
    sample_sizes: Tuple[int, ...] = ()
    gammas: Tuple[float, ...] = ()


@dataclass(frozen=True)
class Experiment:
    root_seed: Optional[int] = None
    synthpipe: Optional[SyntheticPipelineConfig] = None
    simulation: Optional[SimulationConfig] = None
    sweep: Optional[SweepSection] = None
    estimate: Optional[EstimateSection] = None
    comparison: Optional[ComparisonConfig] = None
    scores: Optional[ScoresSection] = None

    def require_seed(self) -> int:
        if self.root_seed is None:
            raise ExperimentError("root_seed: required for stochastic commands")
        return self.root_seed

    def require(self, section: str):
        value = getattr(self, section)
        if value is None:
            raise ExperimentError(f"{section}: section missing from experiment file")
        return value


def _check_keys(mapping: dict, allowed: Sequence[str], path: str) -> None:
    if not isinstance(mapping, dict):
        raise ExperimentError(f"{path}: expected a mapping, got {type(mapping).__name__}")
    unknown = set(mapping) - set(allowed)
    if unknown:
        raise ExperimentError(f"{path}: unknown key {sorted(unknown)[0]!r}")


def _need(mapping: dict, key: str, path: str):
    if key not in mapping:
        raise ExperimentError(f"{path}: missing required key {key!r}")
    return mapping[key]


def _parse_space(raw, path: str) -> SearchSpace:
    if not isinstance(raw, list) or not raw:
        raise ExperimentError(f"{path}: expected a non-empty list of dimensions")
    dims = []
    for i, entry in enumerate(raw):
        p = f"{path}[{i}]"
        _check_keys(entry, ("name", "lower", "upper", "scale"), p)
        try:
            scale = Scale(entry.get("scale", "linear"))
        except ValueError:
            raise ExperimentError(f"{p}.scale: unknown scale {entry['scale']!r}") from None
        try:
            dims.append(
                Dim(
                    name=str(_need(entry, "name", p)),
                    lower=float(_need(entry, "lower", p)),
                    upper=float(_need(entry, "upper", p)),
                    scale=scale,
                )
            )
        except ValueError as exc:
            raise ExperimentError(f"{p}: {exc}") from None
    return SearchSpace(tuple(dims))


def _parse_synthpipe(raw: dict) -> SyntheticPipelineConfig:
    path = "synthpipe"
    _check_keys(
        raw,
        ("base_risk", "optimum", "curvature", "component_sds", "space", "hopt_method", "binomial_test_size"),
        path,
    )
    sds = {}
    for name, sd in _need(raw, "component_sds", path).items():
        try:
            sds[VarianceSource.parse(name)] = float(sd)
        except ValueError as exc:
            raise ExperimentError(f"{path}.component_sds: {exc}") from None
    try:
        method = HpoMethod(raw.get("hopt_method", "random"))
    except ValueError:
        raise ExperimentError(f"{path}.hopt_method: unknown method {raw['hopt_method']!r}") from None
    try:
        return SyntheticPipelineConfig(
            base_risk=float(_need(raw, "base_risk", path)),
            optimum={str(k): float(v) for k, v in _need(raw, "optimum", path).items()},
            curvature={str(k): float(v) for k, v in _need(raw, "curvature", path).items()},
            component_sds=sds,
            space=_parse_space(_need(raw, "space", path), path + ".space"),
            hopt_method=method,
            binomial_test_size=(
                None if raw.get("binomial_test_size") is None else int(raw["binomial_test_size"])
            ),
        )
    except (TypeError, ValueError) as exc:
        raise ExperimentError(f"{path}: {exc}") from None


def _parse_simulation(raw: dict) -> Tuple[SimulationConfig, Optional[SweepSection]]:
    path = "simulation"
    allowed = (
        "k", "sigma", "var_biased_mean", "var_cond", "repetitions", "pab_grid",
        "criteria", "delta_multiplier", "gamma", "alpha", "ci_level",
        "bootstrap_resamples", "sweep",
    )
    _check_keys(raw, allowed, path)
    kwargs = {}
    for key in allowed[:-1]:
        if key not in raw:
            continue
        if key == "criteria":
            try:
                kwargs["criteria"] = tuple(Criterion(c) for c in raw[key])
            except ValueError as exc:
                raise ExperimentError(f"{path}.criteria: {exc}") from None
        elif key == "pab_grid":
            kwargs["pab_grid"] = tuple(float(p) for p in raw[key])
        elif key in ("k", "repetitions", "bootstrap_resamples"):
            kwargs[key] = int(raw[key])
        else:
            kwargs[key] = float(raw[key])
    try:
        config = SimulationConfig(**kwargs)
    except ValueError as exc:
        raise ExperimentError(f"{path}: {exc}") from None

    sweep = None
    if "sweep" in raw:
        _check_keys(raw["sweep"], ("sample_sizes", "gammas"), path + ".sweep")
        sweep = SweepSection(
            sample_sizes=tuple(int(k) for k in raw["sweep"].get("sample_sizes", ())),
            gammas=tuple(float(g) for g in raw["sweep"].get("gammas", ())),
        )
    return config, sweep


def _parse_estimate(raw: dict) -> EstimateSection:
    path = "estimate"
    _check_keys(raw, ("sizes", "k_grid", "repetitions", "budget", "variants"), path)
    sizes_raw = _need(raw, "sizes", path)
    _check_keys(sizes_raw, ("source_size", "train_size", "test_size"), path + ".sizes")
    try:
        sizes = SplitSizes(
            source_size=int(_need(sizes_raw, "source_size", path + ".sizes")),
            train_size=int(_need(sizes_raw, "train_size", path + ".sizes")),
            test_size=int(_need(sizes_raw, "test_size", path + ".sizes")),
        )
    except ValueError as exc:
        raise ExperimentError(f"{path}.sizes: {exc}") from None
    variants = tuple(str(v) for v in _need(raw, "variants", path))
    for spec in variants:
        if spec != "ideal" and not spec.startswith("fixed:"):
            raise ExperimentError(
                f"{path}.variants: {spec!r} is neither 'ideal' nor 'fixed:<sources>'"
            )
    return EstimateSection(
        sizes=sizes,
        k_grid=tuple(int(k) for k in _need(raw, "k_grid", path)),
        repetitions=int(_need(raw, "repetitions", path)),
        budget=int(_need(raw, "budget", path)),
        variant_specs=variants,
    )


def _parse_comparison(raw: dict) -> ComparisonConfig:
    path = "comparison"
    allowed = ("gamma", "alpha", "beta", "delta", "ci_level", "bootstrap_resamples", "tie_policy")
    _check_keys(raw, allowed, path)
    kwargs = {}
    for key in allowed:
        if key not in raw:
            continue
        if key == "tie_policy":
            try:
                kwargs[key] = TiePolicy(raw[key])
            except ValueError:
                raise ExperimentError(f"{path}.tie_policy: unknown policy {raw[key]!r}") from None
        elif key == "bootstrap_resamples":
            kwargs[key] = int(raw[key])
        else:
            kwargs[key] = float(raw[key])
    try:
        return ComparisonConfig(**kwargs)
    except ValueError as exc:
        raise ExperimentError(f"{path}: {exc}") from None


def _parse_scores(raw: dict) -> ScoresSection:
    path = "scores"
    _check_keys(
        raw,
        ("path", "task", "algorithm_a", "algorithm_b", "pair_on", "lower_is_better"),
        path,
    )
    try:
        pair_on = tuple(VarianceSource.parse(s) for s in raw.get("pair_on", ()))
    except ValueError as exc:
        raise ExperimentError(f"{path}.pair_on: {exc}") from None
    return ScoresSection(
        path=str(_need(raw, "path", path)),
        algorithm_a=str(_need(raw, "algorithm_a", path)),
        algorithm_b=str(_need(raw, "algorithm_b", path)),
        task=None if raw.get("task") is None else str(raw["task"]),
        pair_on=pair_on,
        lower_is_better=bool(raw.get("lower_is_better", False)),
    )


def load_experiment(source) -> Experiment:
    """Parse an experiment file from a path or file object."""
    if hasattr(source, "read"):
        raw = yaml.safe_load(source)
    else:
        with open(source, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    if raw is None:
        raw = {}
    _check_keys(
        raw,
        ("root_seed", "synthpipe", "simulation", "estimate", "comparison", "scores"),
        "top level",
    )
    simulation, sweep = (None, None)
    if "simulation" in raw:
        simulation, sweep = _parse_simulation(raw["simulation"])
    return Experiment(
        root_seed=None if raw.get("root_seed") is None else int(raw["root_seed"]),
        synthpipe=_parse_synthpipe(raw["synthpipe"]) if "synthpipe" in raw else None,
        simulation=simulation,
        sweep=sweep,
        estimate=_parse_estimate(raw["estimate"]) if "estimate" in raw else None,
        comparison=_parse_comparison(raw["comparison"]) if "comparison" in raw else None,
        scores=_parse_scores(raw["scores"]) if "scores" in raw else None,
    )


def resolve_variants(specs: Sequence[str], pipeline_sources) -> List[EstimatorVariant]:
    """Turn variant strings into study variants.  ``fixed:all`` varies
    every pipeline source; ``fixed:a+b`` names sources explicitly."""
    out: List[EstimatorVariant] = []
    for spec in specs:
        if spec == "ideal":
            out.append(EstimatorVariant.ideal())
            continue
        body = spec[len("fixed:"):]
        if body == "all":
            varied = frozenset(pipeline_sources)
        elif body in ("", "none"):
            varied = frozenset()
        else:
            varied = frozenset(VarianceSource.parse(s) for s in body.split("+"))
        out.append(EstimatorVariant.fixed(varied))
    return out
