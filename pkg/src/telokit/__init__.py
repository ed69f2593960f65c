"""Telomere-shortening lineage models and initial-length inverse estimation.

Simulates senescence times of cell lineages under per-division telomere
shortening, recovers the initial length distribution from senescence-time
data through transport-limit estimators, and evaluates the associated
approximation and confidence bounds.
"""

from .analytic import (
    DensityCurve,
    TransportSolution,
    bell_polynomial,
    beta_approx,
    erlang_explicit_boundary,
    erlang_explicit_n1,
    explicit_exponential_case,
    grid_oracle_n1,
)
from .bounds import (
    BoundContext,
    confidence_bound,
    lp_error_bound,
    dkw_radius,
    pointwise_error_bound_1,
    pointwise_error_bound_2k,
    weibull_limit_cdf,
    weibull_scale,
)
from .distributions import (
    ErlangLaw,
    InitialDistribution,
    ScaledParams,
    TabulatedShortening,
    UniformShortening,
    erlang_from_cv,
    fit_tail_constants,
    initial_from_erlang,
    initial_from_table,
    second_derivative_l2_norm,
)
from .estimators import (
    EstimationJob,
    bar_n0_1,
    bar_n0_2k,
    c_hat_from_curve,
    hat_n0_1,
    hat_n0_2k,
    smoothing_alpha,
)
from .multitelomere import MuMeasure, count_sets_containing, enumerate_shortening_sets
from .simulator import (
    SenescenceSample,
    SimulationConfig,
    empirical_survival,
    lineage_rng,
    simulate_batch,
    simulate_lineage,
)

__version__ = "0.1.0"
