"""benchvar: variance-aware benchmark comparison.

Machine learning scores move when anything stochastic in the pipeline
moves: the data split, initialization, augmentation order, or the
hyperparameter search itself.  This package measures those variance
components, simulates how common comparison criteria behave under
them, and provides a probability-of-outperforming test with an
explicit meaningful-difference threshold.
"""

from .comparison import (
    ComparisonConfig,
    ComparisonDecision,
    TiePolicy,
    Verdict,
    compare_average,
    compare_pab,
    noether_sample_size,
    prob_outperform,
    verdict_from_interval,
    z_test_min_difference,
)
from .estimators import (
    EstimatorReport,
    EstimatorVariant,
    PipelineAdapter,
    SplitSizes,
    StudyRow,
    estimator_study,
    fixed_hopt_estimate,
    ideal_estimate,
)
from .experiment import Experiment, ExperimentError, load_experiment, resolve_variants
from .gaussian import norm_cdf, norm_ppf
from .hpo import (
    CandidateEval,
    Dim,
    HpoMethod,
    HyperParams,
    Scale,
    SearchSpace,
    grid_candidates,
    hopt_trace,
    noisy_grid_candidates,
    random_candidates,
    run_hopt,
)
from .resampling import (
    BootstrapError,
    ConfidenceInterval,
    SplitError,
    SplitSpec,
    oob_split,
    percentile_bootstrap_ci,
    percentile_linear,
)
from .rng import RngStream, derive_stream, splitmix64
from .scores import (
    PairedScores,
    PairingError,
    ScoreParseError,
    ScoreRecord,
    ScoreSet,
    VarianceSource,
    dump_scores,
    load_scores,
    pair_scores,
    scores_from_records,
    validate,
)
from .simulate import (
    Criterion,
    RateCurves,
    RatePoint,
    SimulationConfig,
    SweepResult,
    detection_rates,
    mean_shift_from_pab,
    pab_from_mean_shift,
    robustness_sweep,
)
from .synthpipe import GroundTruth, SyntheticPipeline, SyntheticPipelineConfig, ground_truth
from .variance import (
    MseParts,
    ProtocolError,
    VarianceTable,
    binomial_sd,
    biased_estimator_variance,
    decompose_variance,
    estimate_rho,
    mse_decompose,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # comparison
    "ComparisonConfig",
    "ComparisonDecision",
    "TiePolicy",
    "Verdict",
    "compare_average",
    "compare_pab",
    "noether_sample_size",
    "prob_outperform",
    "verdict_from_interval",
    "z_test_min_difference",
    # estimators
    "EstimatorReport",
    "EstimatorVariant",
    "PipelineAdapter",
    "SplitSizes",
    "StudyRow",
    "estimator_study",
    "fixed_hopt_estimate",
    "ideal_estimate",
    # experiment files
    "Experiment",
    "ExperimentError",
    "load_experiment",
    "resolve_variants",
    # gaussian
    "norm_cdf",
    "norm_ppf",
    # hpo
    "CandidateEval",
    "Dim",
    "HpoMethod",
    "HyperParams",
    "Scale",
    "SearchSpace",
    "grid_candidates",
    "hopt_trace",
    "noisy_grid_candidates",
    "random_candidates",
    "run_hopt",
    # resampling
    "BootstrapError",
    "ConfidenceInterval",
    "SplitError",
    "SplitSpec",
    "oob_split",
    "percentile_bootstrap_ci",
    "percentile_linear",
    # rng
    "RngStream",
    "derive_stream",
    "splitmix64",
    # scores
    "PairedScores",
    "PairingError",
    "ScoreParseError",
    "ScoreRecord",
    "ScoreSet",
    "VarianceSource",
    "dump_scores",
    "load_scores",
    "pair_scores",
    "scores_from_records",
    "validate",
    # simulation
    "Criterion",
    "RateCurves",
    "RatePoint",
    "SimulationConfig",
    "SweepResult",
    "detection_rates",
    "mean_shift_from_pab",
    "pab_from_mean_shift",
    "robustness_sweep",
    # synthetic pipeline
    "GroundTruth",
    "SyntheticPipeline",
    "SyntheticPipelineConfig",
    "ground_truth",
    # variance
    "MseParts",
    "ProtocolError",
    "VarianceTable",
    "binomial_sd",
    "biased_estimator_variance",
    "decompose_variance",
    "estimate_rho",
    "mse_decompose",
]
