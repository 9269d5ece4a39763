"""Coding-rate computations for AWGN channels with mean-and-variance power
constraints: closed-form channel quantities, constrained point-mass
optimization of the asymptotic error probability, log-domain shell output
densities, and Monte Carlo verification of the shell-mixture coding scheme.
"""

from .channel import (
    ChannelSpec,
    InfoDensitySumSample,
    capacity_cost,
    capacity_cost_derivative,
    dispersion,
    info_density_mean,
    info_density_sum_variance,
    info_density_variance_at,
    sample_info_density_sum,
    sample_info_density_sums,
)
from .minphi import (
    ConvergenceError,
    MinPhiResult,
    PointMassDistribution,
    error_probability_bound,
    min_expected_phi,
    min_phi_minimizer,
    minimizer_sweep,
    socr,
)
from .shell_density import (
    RatioSweepRow,
    ShellOutputDensity,
    TypicalShellSet,
    log_bessel_i,
    log_gaussian_output,
    log_mixture_density,
    log_ratio_shell_vs_gaussian,
    log_ratio_shell_vs_shell,
)
from .simulate import (
    BlocklengthTooSmall,
    EmpiricalCdf,
    MonteCarloEstimate,
    Shell,
    SphereMixtureCode,
    achievability_error_bound,
    build_mixture,
    empirical_cdf_info_density,
    estimate_error_functional,
    sample_codeword,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelSpec",
    "InfoDensitySumSample",
    "capacity_cost",
    "capacity_cost_derivative",
    "dispersion",
    "info_density_mean",
    "info_density_sum_variance",
    "info_density_variance_at",
    "sample_info_density_sum",
    "sample_info_density_sums",
    "ConvergenceError",
    "MinPhiResult",
    "PointMassDistribution",
    "error_probability_bound",
    "min_expected_phi",
    "min_phi_minimizer",
    "minimizer_sweep",
    "socr",
    "RatioSweepRow",
    "ShellOutputDensity",
    "TypicalShellSet",
    "log_bessel_i",
    "log_gaussian_output",
    "log_mixture_density",
    "log_ratio_shell_vs_gaussian",
    "log_ratio_shell_vs_shell",
    "BlocklengthTooSmall",
    "EmpiricalCdf",
    "MonteCarloEstimate",
    "Shell",
    "SphereMixtureCode",
    "achievability_error_bound",
    "build_mixture",
    "empirical_cdf_info_density",
    "estimate_error_functional",
    "sample_codeword",
    "__version__",
]
