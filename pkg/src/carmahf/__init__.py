"""Sampled Levy-driven CARMA processes at high frequency.

Simulation of CARMA(p,q) sample paths, the exact and asymptotic
ARMA(p,p-1) structure of the sampled sequence, recovery of the driving
noise for invertible models, approximating Riemann sums and their
matching rules, and nonparametric kernel estimation from
autocovariances.
"""

__version__ = "0.1.0"

from .errors import (
    CarmaError,
    ConfigError,
    DistinctRootsRequired,
    InternalConsistencyError,
    InvalidCovariance,
    ModelStructureError,
    NonInvertibleLimit,
    NonInvertibleModel,
    UnsupportedOrder,
)
from .model import (
    CarmaModel,
    ValidationReport,
    Violation,
    autocovariance,
    kernel,
    model_from_dict,
    model_from_json,
    model_to_dict,
    model_to_json,
    transfer,
    validate,
)
from .levy import (
    BrownianMotion,
    CompoundPoissonNormal,
    Driver,
    GammaCentered,
    IncrementSeries,
    PathGrid,
    VarianceGamma,
    default_burn_in,
    driver_from_spec,
    driver_spec_string,
    export_path_csv,
    generate_increments,
    simulate_batch,
    simulate_path,
    stationary_state_covariance,
)
from .alpha import (
    AlphaFunction,
    alpha_by_formula,
    alpha_by_recursion,
    alpha_by_series,
    eta,
    eta_values,
    xi_roots,
)
from .spectral import (
    ASYMPTOTIC,
    EXACT_FACTORIZATION,
    SampledArma,
    ar_polynomial,
    asymptotic_arma,
    filtered_autocovariance,
    sampled_arma,
    spectral_factorize,
    wold_coefficients,
)
from .riemann import (
    RiemannArma,
    chi_roots,
    match_h_numerically,
    optimal_rules,
    riemann_arma_coefficients,
    simulate_riemann,
)
from .recovery import (
    McErrorEstimate,
    RecoveredIncrements,
    carma2_error_closed_form,
    estimate_kernel,
    inversion_burn_in,
    invert,
    recovery_error_mc,
)

__all__ = [
    "__version__",
    "CarmaError",
    "ConfigError",
    "DistinctRootsRequired",
    "InternalConsistencyError",
    "InvalidCovariance",
    "ModelStructureError",
    "NonInvertibleLimit",
    "NonInvertibleModel",
    "UnsupportedOrder",
    "CarmaModel",
    "ValidationReport",
    "Violation",
    "autocovariance",
    "kernel",
    "model_from_dict",
    "model_from_json",
    "model_to_dict",
    "model_to_json",
    "transfer",
    "validate",
    "BrownianMotion",
    "CompoundPoissonNormal",
    "GammaCentered",
    "VarianceGamma",
    "IncrementSeries",
    "PathGrid",
    "default_burn_in",
    "Driver",
    "driver_from_spec",
    "driver_spec_string",
    "export_path_csv",
    "generate_increments",
    "simulate_batch",
    "simulate_path",
    "stationary_state_covariance",
    "AlphaFunction",
    "alpha_by_formula",
    "alpha_by_recursion",
    "alpha_by_series",
    "eta",
    "eta_values",
    "xi_roots",
    "ASYMPTOTIC",
    "EXACT_FACTORIZATION",
    "SampledArma",
    "ar_polynomial",
    "asymptotic_arma",
    "filtered_autocovariance",
    "sampled_arma",
    "spectral_factorize",
    "wold_coefficients",
    "RiemannArma",
    "chi_roots",
    "match_h_numerically",
    "optimal_rules",
    "riemann_arma_coefficients",
    "simulate_riemann",
    "McErrorEstimate",
    "RecoveredIncrements",
    "carma2_error_closed_form",
    "estimate_kernel",
    "inversion_burn_in",
    "invert",
    "recovery_error_mc",
]
