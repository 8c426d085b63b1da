"""Structural causal models, regression estimands and their omitted-variable bias."""

__version__ = "0.1.0"

from .estimands import (
    AnalyticEstimand,
    Decomposition,
    ImpliedMoments,
    bias_decomposition,
    decompose,
    fd_estimand,
    implied_moments,
    iv_estimand,
    ols_estimand,
    threshold_treatment_moments,
)
from .estimators import first_difference, ols_fit, residual_diagnostics, tsls_fit
from .graph import classify_path, enumerate_paths, is_backdoor_admissible
from .montecarlo import run_experiment, summarize
from .regression import RegressionSpec
from .rng import Stream
from .scenario import PRESETS, Scenario, preset
from .scm import (
    Dataset,
    Degenerate,
    ExogenousBlock,
    Gaussian,
    ScaledChiSquared,
    ScmModel,
    StructuralEquation,
    build_model,
    intervene,
    potential_outcome,
    sample,
    topological_order,
)
