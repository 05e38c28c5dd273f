"""Command line front end.

Conventions shared by every command:

* ``--seed`` supplies (or overrides) the experiment file's root seed;
  stochastic commands refuse to run without one.
* ``--out`` writes a machine-readable document next to the human
  summary on stdout.  Both formats start with a header echoing the
  tool version, the command, the seed, and the effective config, and
  neither contains timestamps, so reruns are byte-identical.
* Floats are serialized with ``repr`` (shortest round-trip form).
* Exit codes report execution health only; a comparison that finds no
  significant difference still exits 0.
"""

from __future__ import annotations

import csv
import functools
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import click

from . import __version__
from .comparison import ComparisonConfig, TiePolicy, compare_pab, noether_sample_size
from .estimators import SplitSizes, _draw_seeds, _study_cell, estimator_study
from .experiment import Experiment, ExperimentError, load_experiment, resolve_variants
from .hpo import HpoMethod, hopt_trace
from .resampling import BootstrapError, SplitError, oob_split, percentile_bootstrap_ci
from .rng import RngStream
from .scores import PairedScores, VarianceSource, load_scores, pair_scores
from .simulate import SimulationConfig, detection_rates, robustness_sweep
from .synthpipe import SyntheticPipeline
from .variance import binomial_sd, decompose_variance

_FRIENDLY = (ValueError, SplitError, BootstrapError, ExperimentError, OSError)


def _friendly(f):
    """Map validation and IO failures to clean one-line CLI errors."""

    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except click.ClickException:
            raise
        except _FRIENDLY as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))
    if isinstance(value, (list, tuple)):
        return json.dumps(value)
    return str(value)


def _render(header: dict, rows, fmt: str) -> str:
    if fmt == "records":
        return json.dumps({"header": header, "rows": rows}, sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    buf.write("# " + json.dumps(header, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    columns = list(rows[0].keys()) if rows else []
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def _emit(command: str, rows, fmt: str, out, seed=None, config=None) -> None:
    header = {"tool": "benchvar", "version": __version__, "command": command}
    if seed is not None:
        header["seed"] = seed
    if config is not None:
        header["config"] = config
    text = _render(header, rows, fmt)
    if out is None:
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _out_options(default_format: str = "csv"):
    def deco(f):
        f = click.option(
            "--format",
            "fmt",
            type=click.Choice(["csv", "records"]),
            default=default_format,
            show_default=True,
            help="Machine output format (records = JSON document).",
        )(f)
        f = click.option(
            "--out",
            type=click.Path(dir_okay=False, writable=True),
            default=None,
            help="Write machine-readable output to this file.",
        )(f)
        return f

    return deco


def _load_config(path) -> Experiment:
    if path is None:
        return Experiment()
    return load_experiment(path)


def _resolve_seed(cli_seed, experiment: Experiment) -> int:
    if cli_seed is not None:
        return int(cli_seed)
    if experiment.root_seed is not None:
        return experiment.root_seed
    raise click.ClickException(
        "a seed is required: pass --seed or set root_seed in the experiment file"
    )


@click.group()
@click.version_option(version=__version__, prog_name="benchvar")
def main() -> None:
    """Variance-aware benchmark comparison."""


def _read_pairs(path: str) -> PairedScores:
    """Two-column CSV (value_a, value_b), one row per paired replicate."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(reader.fieldnames) != {"value_a", "value_b"}:
            raise click.ClickException(
                f"{path}: expected exactly the columns value_a,value_b, "
                f"got {reader.fieldnames}"
            )
        pairs = []
        for i, row in enumerate(reader, start=2):
            try:
                pairs.append((float(row["value_a"]), float(row["value_b"])))
            except (TypeError, ValueError):
                raise click.ClickException(f"{path}, row {i}: values must be numbers") from None
    if not pairs:
        raise click.ClickException(f"{path}: no data rows")
    return PairedScores(
        pairs=tuple(pairs),
        keys=tuple((i,) for i in range(len(pairs))),
        pair_on=(),
        metric_name="score",
        higher_is_better=True,
    )


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="Experiment file supplying comparison settings and score input.")
@click.option("--scores", "scores_path", type=click.Path(exists=True, dir_okay=False),
              help="Score CSV with task/algorithm/replicate/value columns.")
@click.option("--pairs", "pairs_path", type=click.Path(exists=True, dir_okay=False),
              help="Already-paired CSV with value_a,value_b columns.")
@click.option("--algo-a", help="First algorithm name (scores mode).")
@click.option("--algo-b", help="Second algorithm name (scores mode).")
@click.option("--task", default=None, help="Task to compare on (scores mode).")
@click.option("--pair-on", multiple=True,
              help="Seed column(s) to join replicates on; repeatable.")
@click.option("--lower-is-better", is_flag=True, default=None,
              help="Treat smaller values as wins (scores mode).")
@click.option("--gamma", type=float, default=None, help="Meaningful win probability.")
@click.option("--delta", type=float, default=None, help="Mean-difference threshold.")
@click.option("--ci-level", type=float, default=None, help="Bootstrap interval level.")
@click.option("--resamples", type=int, default=None, help="Bootstrap resample count.")
@click.option("--tie-policy", type=click.Choice([p.value for p in TiePolicy]), default=None)
@click.option("--p-only", is_flag=True,
              help="Print only the win-probability point estimate.")
@click.option("--seed", type=int, default=None)
@_out_options()
@_friendly
def compare(config_path, scores_path, pairs_path, algo_a, algo_b, task, pair_on,
            lower_is_better, gamma, delta, ci_level, resamples, tie_policy,
            p_only, seed, out, fmt):
    """Decide whether algorithm A outperforms algorithm B."""
    experiment = _load_config(config_path)
    cfg = experiment.comparison or ComparisonConfig()
    overrides = {}
    if gamma is not None:
        overrides["gamma"] = gamma
    if delta is not None:
        overrides["delta"] = delta
    if ci_level is not None:
        overrides["ci_level"] = ci_level
    if resamples is not None:
        overrides["bootstrap_resamples"] = resamples
    if tie_policy is not None:
        overrides["tie_policy"] = TiePolicy(tie_policy)
    if overrides:
        cfg = replace(cfg, **overrides)

    if (pairs_path is None) == (scores_path is None and experiment.scores is None):
        raise click.ClickException(
            "provide exactly one input: --pairs, or --scores "
            "(possibly via the experiment file's scores section)"
        )
    if pairs_path is not None:
        paired = _read_pairs(pairs_path)
    else:
        section = experiment.scores
        scores_path = scores_path or (section.path if section else None)
        algo_a = algo_a or (section.algorithm_a if section else None)
        algo_b = algo_b or (section.algorithm_b if section else None)
        if task is None and section is not None:
            task = section.task
        if not algo_a or not algo_b:
            raise click.ClickException("scores mode needs --algo-a and --algo-b")
        if lower_is_better is None:
            lower_is_better = section.lower_is_better if section else False
        join = tuple(VarianceSource.parse(s) for s in pair_on) or (
            section.pair_on if section else ()
        )
        scores = load_scores(scores_path, higher_is_better=not lower_is_better)
        paired = pair_scores(scores, algo_a, algo_b, pair_on=join, task=task)

    effective_seed = _resolve_seed(seed, experiment)
    stream = RngStream(effective_seed).child("compare")
    decision = compare_pab(paired, cfg, stream)

    row = {
        "p_a_beats_b": decision.p_a_beats_b,
        "ci_lower": decision.interval.lower,
        "ci_upper": decision.interval.upper,
        "ci_level": decision.interval.level,
        "resamples": decision.interval.resamples,
        "verdict": decision.verdict.value,
        "k": decision.k,
    }
    _emit("compare", [row], fmt, out, seed=effective_seed, config=cfg.to_record())
    if p_only:
        click.echo(repr(decision.p_a_beats_b))
        return
    click.echo(
        f"P(A > B) = {decision.p_a_beats_b:.4f}  "
        f"[{decision.interval.lower:.4f}, {decision.interval.upper:.4f}] "
        f"at {cfg.ci_level:.0%}, k={decision.k}"
    )
    click.echo(f"verdict: {decision.verdict.value} (gamma={_fmt(cfg.gamma)})")


@main.command("sample-size")
@click.option("--gamma", type=float, required=True,
              help="Win probability the test should detect.")
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option("--beta", type=float, default=0.05, show_default=True)
@_out_options(default_format="records")
@_friendly
def sample_size(gamma, alpha, beta, out, fmt):
    """Replicates needed to detect a win probability of gamma."""
    n = noether_sample_size(gamma, alpha=alpha, beta=beta)
    if n > 1000:
        click.echo(
            f"note: gamma={_fmt(gamma)} sits close to 0.5; detecting it "
            f"takes {n} replicates per algorithm",
            err=True,
        )
    row = {"gamma": gamma, "alpha": alpha, "beta": beta, "replicates": n}
    _emit("sample-size", [row], fmt, out,
          config={"gamma": gamma, "alpha": alpha, "beta": beta})
    click.echo(f"{n} replicates per algorithm "
               f"(gamma={_fmt(gamma)}, alpha={_fmt(alpha)}, beta={_fmt(beta)})")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Experiment file with a simulation section.")
@click.option("--repetitions", type=int, default=None,
              help="Override the configured repetition count.")
@click.option("--sweep", "run_sweep", is_flag=True,
              help="Run the sample-size/gamma sweep from the experiment file.")
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=None)
@_out_options()
@_friendly
def simulate(config_path, repetitions, run_sweep, workers, seed, out, fmt):
    """False-positive/false-negative rates of comparison criteria."""
    experiment = _load_config(config_path)
    cfg = experiment.simulation or SimulationConfig()
    if repetitions is not None:
        cfg = replace(cfg, repetitions=repetitions)
    effective_seed = _resolve_seed(seed, experiment)
    stream = RngStream(effective_seed).child("simulate")

    if run_sweep:
        sweep = experiment.sweep
        if sweep is None or not (sweep.sample_sizes or sweep.gammas):
            raise click.ClickException(
                "--sweep needs a simulation.sweep section with sample_sizes or gammas"
            )
        result = robustness_sweep(cfg, sweep.sample_sizes, sweep.gammas, stream, workers)
        rows = result.to_rows()
        _emit("simulate", rows, fmt, out, seed=effective_seed, config=cfg.to_record())
        click.echo(f"swept {len(sweep.sample_sizes)} sample sizes and "
                   f"{len(sweep.gammas)} gamma values; {len(rows)} rate points")
        return

    curves = detection_rates(cfg, stream, workers=workers)
    rows = curves.to_rows()
    _emit("simulate", rows, fmt, out, seed=effective_seed, config=cfg.to_record())
    lo, hi = min(cfg.pab_grid), max(cfg.pab_grid)
    for criterion in cfg.criteria:
        for estimator in ("ideal", "biased"):
            first = curves.rate(criterion.value, estimator, lo)
            last = curves.rate(criterion.value, estimator, hi)
            click.echo(
                f"{criterion.value:>13s}/{estimator:<6s} "
                f"detection {first:.3f} at P(A>B)={_fmt(lo)} "
                f"rising to {last:.3f} at {_fmt(hi)}"
            )


def _cell_task(args):
    config, sizes, variant, k_max, budget, rep_stream = args
    return _study_cell(SyntheticPipeline(config), sizes, variant, k_max, budget, rep_stream)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="Experiment file with synthpipe and estimate sections.")
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=None)
@_out_options()
@_friendly
def estimate(config_path, workers, seed, out, fmt):
    """Standard error of mean-performance estimators on the synthetic pipeline."""
    experiment = _load_config(config_path)
    pipe_cfg = experiment.require("synthpipe")
    section = experiment.require("estimate")
    effective_seed = _resolve_seed(seed, experiment)

    pipeline = SyntheticPipeline(pipe_cfg)
    variants = resolve_variants(section.variant_specs, pipeline.sources)
    root = RngStream(effective_seed).child("estimate")
    k_max = max(section.k_grid)

    cells = None
    if workers > 1:
        tasks = [
            (
                (variant.name, r),
                (pipe_cfg, section.sizes, variant, k_max, section.budget,
                 root.child("study-" + variant.name, r)),
            )
            for variant in variants
            for r in range(section.repetitions)
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = pool.map(_cell_task, [args for _, args in tasks])
            cells = {key: arr for (key, _), arr in zip(tasks, results)}

    rows_out = estimator_study(
        pipeline, section.sizes, section.k_grid, section.repetitions,
        variants, section.budget, root, _cells=cells,
    )
    rows = [
        {"variant": r.variant, "k": r.k, "mean": r.mean,
         "std_error": r.std_error, "band": r.band}
        for r in rows_out
    ]
    config_echo = {
        "synthpipe": pipe_cfg.to_record(),
        "sizes": {"source_size": section.sizes.source_size,
                  "train_size": section.sizes.train_size,
                  "test_size": section.sizes.test_size},
        "k_grid": list(section.k_grid),
        "repetitions": section.repetitions,
        "budget": section.budget,
        "variants": list(section.variant_specs),
    }
    _emit("estimate", rows, fmt, out, seed=effective_seed, config=config_echo)
    k_lo, k_hi = min(section.k_grid), max(section.k_grid)
    for variant in variants:
        first = next(r for r in rows_out if r.variant == variant.name and r.k == k_lo)
        last = next(r for r in rows_out if r.variant == variant.name and r.k == k_hi)
        click.echo(f"{variant.name}: std error {first.std_error:.5f} at k={k_lo} "
                   f"-> {last.std_error:.5f} at k={k_hi}")


@main.command()
@click.option("--scores", "scores_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="Score CSV; one run group per varied source.")
@click.option("--reference", default="data_split", show_default=True,
              help="Source the ratio column is normalized against.")
@click.option("--ci/--no-ci", "with_ci", default=False,
              help="Attach bootstrap intervals to each variance (needs --seed).")
@click.option("--level", type=float, default=0.95, show_default=True)
@click.option("--resamples", type=int, default=1000, show_default=True)
@click.option("--lower-is-better", is_flag=True)
@click.option("--seed", type=int, default=None)
@_out_options()
@_friendly
def variance(scores_path, reference, with_ci, level, resamples, lower_is_better,
             seed, out, fmt):
    """Attribute score variance to its sources of variation."""
    ref = VarianceSource.parse(reference)
    scores = load_scores(scores_path, higher_is_better=not lower_is_better)
    stream = None
    effective_seed = None
    if with_ci:
        effective_seed = _resolve_seed(seed, Experiment())
        stream = RngStream(effective_seed).child("variance")
    table = decompose_variance(scores, reference=ref, stream=stream,
                               ci_level=level, resamples=resamples)
    rows = table.to_rows()
    _emit("variance", rows, fmt, out, seed=effective_seed,
          config={"reference": ref.value, "ci": with_ci})
    width = max(len(r["source"]) for r in rows)
    for row in rows:
        line = (f"{row['source']:<{width}s}  std {row['std']:.5f}  "
                f"x{row['relative_to_' + ref.value]:.2f} vs {ref.value}")
        if "ci_lower" in row:
            line += f"  var ci [{row['ci_lower']:.6f}, {row['ci_upper']:.6f}]"
        click.echo(line)


@main.command("binomial-sd")
@click.option("--tau", "taus", multiple=True, type=float, required=True,
              help="True accuracy; repeatable.")
@click.option("--n-test", "sizes", multiple=True, type=int, required=True,
              help="Test set size; repeatable.")
@_out_options()
@_friendly
def binomial_sd_cmd(taus, sizes, out, fmt):
    """Accuracy deviation floor implied by finite test sets."""
    rows = [
        {"tau": t, "n_test": n, "sd": binomial_sd(t, n)}
        for t in taus
        for n in sizes
    ]
    _emit("binomial-sd", rows, fmt, out)
    for row in rows:
        click.echo(f"tau={_fmt(row['tau'])} n_test={row['n_test']}: "
                   f"sd={row['sd']:.5f}")


@main.command("hpo-demo")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="Experiment file with a synthpipe section.")
@click.option("--budget", type=int, default=50, show_default=True)
@click.option("--method", type=click.Choice([m.value for m in HpoMethod]), default=None,
              help="Override the configured search method.")
@click.option("--seed", type=int, default=None)
@_out_options()
@_friendly
def hpo_demo(config_path, budget, method, seed, out, fmt):
    """Run one hyperparameter search on the synthetic pipeline."""
    experiment = _load_config(config_path)
    pipe_cfg = experiment.require("synthpipe")
    if method is not None:
        pipe_cfg = replace(pipe_cfg, hopt_method=HpoMethod(method))
    effective_seed = _resolve_seed(seed, experiment)

    pipeline = SyntheticPipeline(pipe_cfg)
    root = RngStream(effective_seed).child("hpo-demo")
    seeds = _draw_seeds(root, pipeline.sources)
    trace = hopt_trace(pipeline, pipe_cfg.space, pipe_cfg.hopt_method, budget,
                       None, seeds, root.child("search"))
    rows = [
        {"index": ev.index, "risk": float(ev.risk),
         **{"hp_" + name: ev.params[name] for name in pipe_cfg.space.names}}
        for ev in trace
    ]
    _emit("hpo-demo", rows, fmt, out, seed=effective_seed,
          config={"synthpipe": pipe_cfg.to_record(), "budget": budget})
    best = min(trace, key=lambda ev: (ev.risk, ev.index))
    params = ", ".join(f"{n}={_fmt(best.params[n])}" for n in pipe_cfg.space.names)
    click.echo(f"evaluated {len(trace)} candidates "
               f"({pipe_cfg.hopt_method.value}); best risk {best.risk:.5f} "
               f"at candidate {best.index} with {params}")


@main.command("bootstrap-ci")
@click.option("--values", "values_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="Single-column CSV (header: value).")
@click.option("--level", type=float, default=0.95, show_default=True)
@click.option("--resamples", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=None)
@_out_options(default_format="records")
@_friendly
def bootstrap_ci(values_path, level, resamples, seed, out, fmt):
    """Percentile bootstrap interval for the mean of a value column."""
    import numpy as np

    with open(values_path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or list(reader.fieldnames) != ["value"]:
            raise click.ClickException(
                f"{values_path}: expected a single column named value, "
                f"got {reader.fieldnames}"
            )
        try:
            values = np.array([float(row["value"]) for row in reader])
        except (TypeError, ValueError):
            raise click.ClickException(f"{values_path}: values must be numbers") from None
    if values.size == 0:
        raise click.ClickException(f"{values_path}: no data rows")

    effective_seed = _resolve_seed(seed, Experiment())
    interval = percentile_bootstrap_ci(
        statistic=lambda idx: float(values[idx].mean()),
        data_size=len(values),
        stream=RngStream(effective_seed).child("bootstrap-ci"),
        n_resamples=resamples,
        level=level,
    )
    row = {
        "mean": float(values.mean()),
        "ci_lower": interval.lower,
        "ci_upper": interval.upper,
        "ci_level": interval.level,
        "resamples": interval.resamples,
        "n": int(values.size),
    }
    _emit("bootstrap-ci", [row], fmt, out, seed=effective_seed,
          config={"level": level, "resamples": resamples})
    click.echo(f"mean {row['mean']:.5f}  "
               f"[{interval.lower:.5f}, {interval.upper:.5f}] at {level:.0%} "
               f"({values.size} values, {resamples} resamples)")


@main.command("oob-split")
@click.option("--source-size", type=int, required=True,
              help="Size of the indexed data pool.")
@click.option("--train-size", type=int, required=True,
              help="Bootstrap draws into the train multiset.")
@click.option("--test-size", type=int, required=True,
              help="Held-out indices wanted (capped by the out-of-bag pool).")
@click.option("--seed", type=int, default=None)
@_out_options(default_format="records")
@_friendly
def oob_split_cmd(source_size, train_size, test_size, seed, out, fmt):
    """Draw one bootstrap train/out-of-bag test split."""
    effective_seed = _resolve_seed(seed, Experiment())
    spec = oob_split(
        source_size, train_size, test_size,
        RngStream(effective_seed).child("oob-split"),
    )
    record = spec.to_record()
    row = {
        "source_size": record["source_size"],
        "train_indices": record["train_indices"],
        "train_counts": record["train_counts"],
        "test_indices": record["test_indices"],
    }
    _emit("oob-split", [row], fmt, out, seed=effective_seed,
          config={"source_size": source_size, "train_size": train_size,
                  "test_size": test_size})
    click.echo(f"train: {train_size} draws over {len(record['train_indices'])} "
               f"distinct sources; test: {len(record['test_indices'])} of "
               f"{spec.complement_size} out-of-bag indices")


if __name__ == "__main__":
    main()
