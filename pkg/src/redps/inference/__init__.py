from redps.inference.discrepancy import (
    DiscrepancyEstimate,
    chebyshev_delta_bound,
    delta_empirical,
    theorem1_delta_bound,
    theorem2_limit_gap,
)
from redps.inference.efficiency import (
    asym_eff_ratio,
    berry_esseen_ratio,
    log_second_moment_exact_two_tail,
    relative_error,
    second_moment_exact_right_tail,
    second_moment_exact_two_tail,
    variance_right_tail,
    variance_upper_bound,
)
from redps.inference.intervals import (
    CiSpec,
    clt_halfwidth,
    confidence_interval,
    coverage_fraction,
    eb_halfwidth,
    z_quantile,
)

__all__ = [
    "CiSpec",
    "DiscrepancyEstimate",
    "eb_halfwidth",
    "clt_halfwidth",
    "z_quantile",
    "confidence_interval",
    "coverage_fraction",
    "relative_error",
    "asym_eff_ratio",
    "second_moment_exact_two_tail",
    "log_second_moment_exact_two_tail",
    "second_moment_exact_right_tail",
    "variance_right_tail",
    "variance_upper_bound",
    "berry_esseen_ratio",
    "delta_empirical",
    "chebyshev_delta_bound",
    "theorem1_delta_bound",
    "theorem2_limit_gap",
]
