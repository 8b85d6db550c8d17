"""stretchrenew: stretched-relaxation equations, Kilbas-Saigo special
functions, and the renewal/time-changed counting processes they govern."""

__version__ = "0.1.0"

from ._backend import backend_name
from .fibpoly import bivariate_fib, fib_poly
from .kilbas_saigo import (
    KSParams,
    ToleranceError,
    ks_asymptotic,
    ks_bounds,
    ks_coefficients,
    ks_derivative,
    ks_eval,
)
from .relaxation import (
    SecondOrderSpec,
    SeriesSolution,
    StretchedModel,
    apply_operator_to_series,
    bracket,
    series_residual,
    solve_first_order,
    solve_second_order,
)
from .rng import RngStream
from .specfun import PoleError, double_gamma, log_double_gamma
from .stochastic import (
    MomentSummary,
    PmfTable,
    RenewalTrajectory,
    interarrival_mean,
    moments_laskin,
    pmf_hat,
    pmf_laskin,
    pmf_second_order,
    product_constant,
    renewal_vs_laskin_discrepancy,
    sample_interarrival,
    sample_stable_subordinator_increment,
    sample_Z_beta,
    sample_Z_path,
    simulate_laskin,
    simulate_renewal,
    survival_hat,
    survival_second_order,
)
from .transforms import (
    covariance_lt,
    g_eta,
    invert_laplace,
    ks_laplace,
    renewal_function_lt,
    subordinator_density_lt,
)

__all__ = [
    "__version__",
    "backend_name",
    "fib_poly",
    "bivariate_fib",
    "KSParams",
    "ToleranceError",
    "ks_eval",
    "ks_derivative",
    "ks_coefficients",
    "ks_bounds",
    "ks_asymptotic",
    "StretchedModel",
    "SeriesSolution",
    "SecondOrderSpec",
    "bracket",
    "apply_operator_to_series",
    "series_residual",
    "solve_first_order",
    "solve_second_order",
    "RngStream",
    "PoleError",
    "double_gamma",
    "log_double_gamma",
    "MomentSummary",
    "PmfTable",
    "RenewalTrajectory",
    "interarrival_mean",
    "moments_laskin",
    "pmf_hat",
    "pmf_laskin",
    "pmf_second_order",
    "product_constant",
    "renewal_vs_laskin_discrepancy",
    "sample_interarrival",
    "sample_stable_subordinator_increment",
    "sample_Z_beta",
    "sample_Z_path",
    "simulate_laskin",
    "simulate_renewal",
    "survival_hat",
    "survival_second_order",
    "covariance_lt",
    "g_eta",
    "invert_laplace",
    "ks_laplace",
    "renewal_function_lt",
    "subordinator_density_lt",
]
