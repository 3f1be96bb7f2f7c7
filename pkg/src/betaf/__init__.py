"""Generalized beta-F distributions with grouped-data maximum likelihood."""

from . import errors
from .family import BetaFDistribution, BetaShapes
from .fit import FitResult, OptimizerConfig, ParamTransform, auto_starts, fit_family
from .grouped import GroupedSample, cell_probs, empirical_mean, log_likelihood, log_likelihood_grad
from .io import read_grouped_csv, write_density_curve, write_grouped_csv, write_report
from .kernels import (
    KernelFamily,
    kernel_cdf,
    kernel_cdf_grad,
    kernel_pdf,
    kernel_quantile,
)
from .metrics import FitMetrics, comparison_table, compute_metrics, format_comparison_table
from .specfun import (
    Accuracy,
    digamma,
    log_beta,
    reg_inc_beta,
    reg_inc_beta_inv,
    std_normal_cdf,
    std_normal_quantile,
)

__version__ = "0.1.0"

__all__ = [
    "Accuracy",
    "BetaFDistribution",
    "BetaShapes",
    "FitMetrics",
    "FitResult",
    "GroupedSample",
    "KernelFamily",
    "OptimizerConfig",
    "ParamTransform",
    "auto_starts",
    "cell_probs",
    "comparison_table",
    "compute_metrics",
    "digamma",
    "empirical_mean",
    "errors",
    "fit_family",
    "format_comparison_table",
    "kernel_cdf",
    "kernel_cdf_grad",
    "kernel_pdf",
    "kernel_quantile",
    "log_beta",
    "log_likelihood",
    "log_likelihood_grad",
    "read_grouped_csv",
    "reg_inc_beta",
    "reg_inc_beta_inv",
    "std_normal_cdf",
    "std_normal_quantile",
    "write_density_curve",
    "write_grouped_csv",
    "write_report",
    "__version__",
]
