"""Sparse high-dimensional linear regression: penalized solvers, the Dantzig
selector, distance-correlation screening, diagnostics and a Monte Carlo bench."""

__version__ = "0.1.0"

from .bench import MonteCarloReport, SelectionMetrics, evaluate_fit, representative_coverage, \
    run_monte_carlo
from .cd import Controls, SolveResult, adaptive_lasso_fit, cd_fit, cd_path, lambda_path, \
    lasso_cv_fit, relaxed_lasso_fit, scad_cv_fit, sqrt_scaled_lasso_fit
from .dantzig import LinearProgram, dantzig_fit, simplex_solve
from .dcor import dcor, dcvs_select
from .diagnostics import beta_min_margin, consistency_sample_bound, effective_covariates, \
    fdp_tpp_path, irrepresentable_check
from .linalg import CoefVector, Dataset, cholesky, ols_refit, standardize, sym_eigen
from .methods import METHODS
from .penalties import PenaltySpec, penalty_value
from .scenarios import CovarianceSpec, RngStream, ScenarioSpec, build_covariance, \
    calibrate_sigma2, generate_replication, make_scenario
from .selection import kfold_cv, screen_then_refit, stability_selection
