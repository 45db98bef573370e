"""Kernel Scores and Kernel Divergences over RKHS-embedded sample sets.

Strictly proper divergences between two samples are computed by projecting
the kernel embedding onto a direction (mean difference, kernel Fisher, or
kernel SVM), fitting one-dimensional density models to the projected
coordinates, and scoring the density ratio with a concave function. The
MMD and the Bhattacharyya divergence arise as special cases. A bootstrap
harness calibrates two-sample tests on any of these measures, singly or
combined through a one-class detector.
"""

__version__ = "0.1.0"

from .concave import ConcaveFn, closed_form, parse_concave, poly, poly_exact, validate_concave
from .dataio import read_samples, toy_paths, write_csv, write_json, write_samples
from .divergence import (
    DensityModel,
    DivergenceResult,
    ProjectedStats,
    bhattacharyya_kd,
    fit_density,
    kernel_score_empirical,
    mmd_projected,
    mmd_standard,
    projected_moments,
)
from .errors import (
    CalibrationError,
    ConvergenceError,
    DataFormatError,
    DegenerateDataError,
    KerndivError,
)
from .hypothesis import (
    ExperimentConfig,
    NullModel,
    StatisticConfig,
    StatisticFn,
    TestReport,
    Type2Report,
    bootstrap_null,
    decide,
    fit_axis_box,
    fit_oneclass_nn,
    threshold_quantile,
    type2_experiment,
)
from .kernel import GramMatrix, KernelSpec, SampleSet, gram_matrix, median_heuristic
from .projection import (
    ProjectedSamples,
    ProjectionWeights,
    fit_fisher,
    fit_svm,
    make_weights,
    project_means,
    project_with_weights,
)
from .risk import (
    FeatureRiskReport,
    SelectionReport,
    add_noise,
    feature_min_risk,
    rank_features,
    selection_experiment,
)
from .seeding import DEFAULT_SEED, substream
from .synth import featsel_dataset, gaussian_sampler, gaussian_scenarios

__all__ = [
    "CalibrationError",
    "ConcaveFn",
    "ConvergenceError",
    "DataFormatError",
    "DEFAULT_SEED",
    "DegenerateDataError",
    "DensityModel",
    "DivergenceResult",
    "ExperimentConfig",
    "FeatureRiskReport",
    "GramMatrix",
    "KernelSpec",
    "KerndivError",
    "NullModel",
    "ProjectedSamples",
    "ProjectedStats",
    "ProjectionWeights",
    "SampleSet",
    "SelectionReport",
    "StatisticConfig",
    "StatisticFn",
    "TestReport",
    "Type2Report",
    "add_noise",
    "bhattacharyya_kd",
    "bootstrap_null",
    "closed_form",
    "decide",
    "feature_min_risk",
    "featsel_dataset",
    "fit_axis_box",
    "fit_density",
    "fit_fisher",
    "fit_oneclass_nn",
    "fit_svm",
    "gaussian_sampler",
    "gaussian_scenarios",
    "gram_matrix",
    "kernel_score_empirical",
    "make_weights",
    "median_heuristic",
    "mmd_projected",
    "mmd_standard",
    "parse_concave",
    "poly",
    "poly_exact",
    "project_means",
    "project_with_weights",
    "projected_moments",
    "rank_features",
    "read_samples",
    "selection_experiment",
    "substream",
    "threshold_quantile",
    "toy_paths",
    "type2_experiment",
    "validate_concave",
    "write_csv",
    "write_json",
    "write_samples",
]
