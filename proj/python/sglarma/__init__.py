"""Sparse GLARMA variable selection."""

import json

from ._core import (
    ConfigError,
    DegenerateProblem,
    Error,
    IndefiniteHessian,
    IoError,
    MissingOracle,
    NoConvergence,
    NonFiniteCurvature,
    OverflowGuard,
    Separation,
    SingularSystem,
    SubsampleTooSmall,
    UsageError,
    __version__,
    fit_glm_init,
    fourier_covariates,
    gradient,
    hessian,
    lasso,
    log_likelihood,
    newton_gamma,
    pseudo_problem,
    run_pipeline,
    simulate,
    sparse_beta,
    tpr_fpr,
    true_support,
)
from ._core import _run_experiment


def run_experiment(config):
    """Run a support-recovery experiment.

    `config` takes the same keys as the JSON file given to `sglarma bench`.
    Returns a dict with per-method summary `rows` and per-replicate `records`.
    """
    return _run_experiment(json.dumps(config))
